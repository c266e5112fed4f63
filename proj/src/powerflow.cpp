#include "invergrid/powerflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_map>

namespace invergrid {

namespace {

void require_nonzero(VoltagePhasor v, const char* what)
{
    if (!(v.magnitude > 0.0))
        throw SingularVoltageError(std::string(what) + ": voltage magnitude must be positive");
}

} // namespace

std::complex<double> branch_current(ComplexPower s, VoltagePhasor v)
{
    require_nonzero(v, "branch_current");
    return std::conj(std::complex<double>{s.p, s.q} / v.phasor());
}

std::complex<double> voltage_drop_complex(ComplexPower s, VoltagePhasor v, Impedance z)
{
    require_nonzero(v, "voltage_drop_complex");
    const double r = z.real(), x = z.imag();
    return {(s.p * r + s.q * x) / v.magnitude, (s.p * x - s.q * r) / v.magnitude};
}

double voltage_drop_magnitude(ComplexPower s, VoltagePhasor v, Impedance z)
{
    require_nonzero(v, "voltage_drop_magnitude");
    return (s.p * z.real() + s.q * z.imag()) / v.magnitude;
}

VoltageSensitivity sensitivity(Impedance z, VoltagePhasor v)
{
    require_nonzero(v, "sensitivity");
    return {z.real() / v.magnitude, z.imag() / v.magnitude};
}

std::string_view to_string(Regime r)
{
    switch (r) {
    case Regime::ResistiveDominant: return "resistive";
    case Regime::InductiveDominant: return "inductive";
    case Regime::Mixed: return "mixed";
    }
    return "mixed";
}

Regime classify_regime(const NetworkModel& net, double threshold)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    double r_over_x = 0.0, x_over_r = 0.0;
    std::size_t n = 0;
    for (const auto& line : net.lines) {
        const double r = line.resistance_per_km;
        const double x = line.reactance_per_km(net.frequency_hz);
        if (r == 0.0 && x == 0.0)
            continue;
        r_over_x += x == 0.0 ? inf : r / x;
        x_over_r += r == 0.0 ? inf : x / r;
        ++n;
    }
    if (n == 0)
        return Regime::Mixed;
    if (r_over_x / static_cast<double>(n) > threshold)
        return Regime::ResistiveDominant;
    if (x_over_r / static_cast<double>(n) > threshold)
        return Regime::InductiveDominant;
    return Regime::Mixed;
}

RadialFeeder::RadialFeeder(const NetworkModel& net)
    : base_kva_(net.base_power_kva)
{
    if (auto issues = validate(net); !issues.empty()) {
        std::string msg = "network is not a valid radial feeder:";
        for (const auto& s : issues)
            msg += "\n  " + s;
        throw TopologyError(msg);
    }

    const std::size_t n = net.buses.size();
    std::unordered_map<std::string, std::size_t> index;
    ids_.reserve(n);
    for (const auto& bus : net.buses) {
        index.emplace(bus.id, ids_.size());
        ids_.push_back(bus.id);
    }

    struct Edge {
        std::size_t to;
        Impedance z;
    };
    std::vector<std::vector<Edge>> adj(n);
    for (const auto& line : net.lines) {
        const auto a = index.at(line.from_bus), b = index.at(line.to_bus);
        const Impedance z = line_impedance_pu(line, net.base_power_kva, net.base_voltage_v, net.frequency_hz);
        adj[a].push_back({b, z});
        adj[b].push_back({a, z});
    }

    parent_.assign(n, npos);
    z_.assign(n, Impedance{});
    const std::size_t root = index.at(net.slack.bus);
    std::vector<bool> seen(n, false);
    std::queue<std::size_t> frontier;
    frontier.push(root);
    seen[root] = true;
    while (!frontier.empty()) {
        const std::size_t u = frontier.front();
        frontier.pop();
        order_.push_back(u);
        for (const auto& e : adj[u]) {
            if (seen[e.to])
                continue;
            seen[e.to] = true;
            parent_[e.to] = u;
            z_[e.to] = e.z;
            frontier.push(e.to);
        }
    }

    load_.assign(n, ComplexPower{});
    for (const auto& load : net.loads)
        load_[index.at(load.bus)] += ComplexPower{load.active_power_kw / base_kva_, load.reactive_power_kvar / base_kva_};

    const double z_base = net.base_impedance_ohm();
    z_source_ = net.slack.source_impedance_ohm / z_base;
}

std::size_t RadialFeeder::index_of(std::string_view id) const
{
    auto it = std::find(ids_.begin(), ids_.end(), id);
    if (it == ids_.end())
        throw std::invalid_argument("unknown bus '" + std::string(id) + "'");
    return static_cast<std::size_t>(it - ids_.begin());
}

PowerFlowSolution RadialFeeder::solve(std::span<const ComplexPower> injections, double slack_voltage_pu,
                                      const SolverOptions& opts) const
{
    const std::size_t n = size();
    if (injections.size() != n)
        throw std::invalid_argument("solve: injection vector size does not match bus count");

    // Net demand per bus: load - generation.
    std::vector<std::complex<double>> demand(n);
    PowerFlowSolution sol;
    for (std::size_t i = 0; i < n; ++i) {
        demand[i] = {load_[i].p - injections[i].p, load_[i].q - injections[i].q};
        sol.total_load += load_[i];
        sol.total_generation += injections[i];
    }

    const std::complex<double> v_set{slack_voltage_pu, 0.0};
    std::vector<std::complex<double>> v(n, v_set), v_next(n), current(n);
    const std::size_t root = slack_index();

    // Backward sweep: bus currents at the present voltages, accumulated
    // from the leaves so current[i] is the current entering bus i's subtree.
    auto backward = [&] {
        for (std::size_t i = 0; i < n; ++i)
            current[i] = std::conj(demand[i] / v[i]);
        for (auto it = order_.rbegin(); it != order_.rend(); ++it)
            if (parent_[*it] != npos)
                current[parent_[*it]] += current[*it];
    };

    bool collapsed = false;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        backward();
        v_next[root] = v_set - z_source_ * current[root];
        for (std::size_t k = 1; k < order_.size(); ++k) {
            const std::size_t b = order_[k];
            v_next[b] = v_next[parent_[b]] - z_[b] * current[b];
        }
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            delta = std::max(delta, std::abs(v_next[i] - v[i]));
            if (!(std::abs(v_next[i]) >= opts.collapse_voltage))
                collapsed = true;
        }
        v.swap(v_next);
        sol.iterations = it;
        sol.max_mismatch = delta;
        if (collapsed || !std::isfinite(delta))
            break;
        if (delta <= opts.tolerance) {
            sol.converged = true;
            break;
        }
    }

    // Final currents at the reported voltages.
    backward();
    const std::complex<double> s_slack = v_set * std::conj(current[root]);
    sol.slack_injection = {s_slack.real(), s_slack.imag()};
    std::complex<double> loss = z_source_ * std::norm(current[root]);
    for (std::size_t i = 0; i < n; ++i)
        if (parent_[i] != npos)
            loss += z_[i] * std::norm(current[i]);
    sol.losses = {loss.real(), loss.imag()};

    sol.voltages.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        sol.voltages[i] = VoltagePhasor::from(v[i]);
    return sol;
}

PowerFlowSolution solve(const NetworkModel& net, const std::map<std::string, ComplexPower>& injections,
                        const SolverOptions& opts)
{
    const RadialFeeder feeder(net);
    std::vector<ComplexPower> inj(feeder.size());
    for (const auto& [bus, s] : injections)
        inj[feeder.index_of(bus)] += s;
    return feeder.solve(inj, net.slack.voltage_setpoint_pu, opts);
}

} // namespace invergrid
