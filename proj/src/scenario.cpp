#include "invergrid/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace invergrid {

namespace {

// Absorbs k*dt rounding when comparing step times with event and window edges.
constexpr double kTimeEps = 1e-9;

} // namespace

void ScenarioTimeline::check() const
{
    if (!(duration_s >= 0.0) || !std::isfinite(duration_s))
        throw std::invalid_argument("timeline.duration must be non-negative");
    if (!(dt_s > 0.0))
        throw std::invalid_argument("timeline.dt must be positive");
    if (duration_s > 0.0 && dt_s > duration_s)
        throw std::invalid_argument("timeline.dt must not exceed the duration");
    double last = 0.0;
    for (const auto& e : events) {
        if (!(e.time_s >= 0.0) || e.time_s > duration_s)
            throw std::invalid_argument("timeline event time outside [0, duration]");
        if (e.time_s < last)
            throw std::invalid_argument("timeline events must be sorted by time");
        last = e.time_s;
        if (const auto* irr = std::get_if<SetIrradiance>(&e.action)) {
            if (!(irr->frac >= 0.0 && irr->frac <= 1.0))
                throw std::invalid_argument("irradiance event outside [0, 1]");
        } else if (const double v = std::get<SetSlackVoltage>(e.action).pu; !(v > 0.5 && v < 1.5)) {
            throw std::invalid_argument("slack voltage event outside (0.5, 1.5) pu");
        }
    }
}

std::size_t ScenarioTimeline::record_count() const
{
    return static_cast<std::size_t>(std::floor(duration_s / dt_s + kTimeEps)) + 1;
}

ScenarioTimeline default_timeline()
{
    return ScenarioTimeline{{
                                {5.0, SetIrradiance{0.5}},
                                {10.0, SetIrradiance{1.0}},
                                {13.0, SetSlackVoltage{1.2}},
                                {17.0, SetSlackVoltage{1.0}},
                            },
                            20.0,
                            0.01};
}

Ambient ambient_at(const ScenarioTimeline& timeline, double t)
{
    if (!(t >= -kTimeEps && t <= timeline.duration_s + kTimeEps))
        throw std::invalid_argument("ambient_at: time outside [0, duration]");
    Ambient a;
    for (const auto& e : timeline.events) {
        if (e.time_s > t + kTimeEps)
            break;
        if (const auto* irr = std::get_if<SetIrradiance>(&e.action))
            a.irradiance = irr->frac;
        else
            a.slack_v = std::get<SetSlackVoltage>(e.action).pu;
    }
    return a;
}

std::string_view to_string(NetworkVariant v)
{
    return v == NetworkVariant::Resistive ? "resistive" : "inductive";
}

NetworkVariant parse_variant(std::string_view text)
{
    if (text == "resistive")
        return NetworkVariant::Resistive;
    if (text == "inductive")
        return NetworkVariant::Inductive;
    throw std::invalid_argument("unknown network variant '" + std::string(text) + "' (resistive|inductive)");
}

std::string ScenarioSpec::label() const
{
    return std::string(to_string(variant)) + "_" + std::string(to_string(kind_of(a2.unit.mode)));
}

NetworkModel build_network(const ScenarioSpec& spec)
{
    NetworkModel net = spec.topology ? *spec.topology : build_cigre_lv_residential();
    if (spec.variant == NetworkVariant::Inductive)
        net = to_inductive_variant(net);
    return net;
}

std::vector<Aggregator> build_aggregators(const ScenarioSpec& spec)
{
    std::vector<Aggregator> aggs;
    for (const AggregatorConfig* cfg : {&spec.a1, &spec.a2})
        aggs.push_back(make_aggregator(cfg->id, cfg->bus, cfg->units, cfg->unit));
    return aggs;
}

double power_factor(double p, double q)
{
    const double s = std::hypot(p, q);
    return s > 0.0 ? p / s : 1.0;
}

std::vector<TimeSeriesRecord> run(const ScenarioSpec& spec, const NetworkModel& net, std::vector<Aggregator> aggs,
                                  const StepObserver& observer)
{
    spec.timeline.check();
    const RadialFeeder feeder(net);

    std::vector<std::size_t> pcc(aggs.size());
    for (std::size_t a = 0; a < aggs.size(); ++a) {
        aggs[a].check();
        try {
            pcc[a] = feeder.index_of(aggs[a].bus);
        } catch (const std::invalid_argument&) {
            throw TopologyError("aggregator " + aggs[a].id + " is attached to unknown bus '" + aggs[a].bus + "'");
        }
    }

    const auto& tl = spec.timeline;
    const std::size_t steps = tl.record_count();
    const double base_kva = feeder.base_power_kva();

    std::vector<TimeSeriesRecord> records;
    records.reserve(steps);
    std::vector<double> v_prev(aggs.size());
    std::vector<ComplexPower> injections(feeder.size());

    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * tl.dt_s;
        const Ambient amb = ambient_at(tl, t);

        std::vector<InverterSetpoint> out(aggs.size());
        for (std::size_t a = 0; a < aggs.size(); ++a) {
            if (k == 0) {
                warm_start(aggs[a], amb.slack_v, amb.irradiance);
                out[a] = total_command(aggs[a]);
            } else {
                out[a] = aggregate_injection(aggs[a], v_prev[a], amb.irradiance, tl.dt_s);
            }
        }

        std::fill(injections.begin(), injections.end(), ComplexPower{});
        for (std::size_t a = 0; a < aggs.size(); ++a)
            injections[pcc[a]] += ComplexPower{out[a].p_kw / base_kva, out[a].q_kvar / base_kva};

        const PowerFlowSolution sol = feeder.solve(injections, amb.slack_v);

        TimeSeriesRecord rec;
        rec.time_s = t;
        rec.slack_v_pu = amb.slack_v;
        rec.irradiance = amb.irradiance;
        rec.solver_iterations = sol.iterations;
        rec.converged = sol.converged;
        rec.aggregators.reserve(aggs.size());
        for (std::size_t a = 0; a < aggs.size(); ++a) {
            const double v = sol.voltages[pcc[a]].magnitude;
            rec.aggregators.push_back({out[a].p_kw, out[a].q_kvar, power_factor(out[a].p_kw, out[a].q_kvar), v});
            v_prev[a] = v;
        }
        records.push_back(std::move(rec));

        if (observer)
            observer(StepView{k, t, sol, aggs});
    }
    return records;
}

std::vector<TimeSeriesRecord> run(const ScenarioSpec& spec, const StepObserver& observer)
{
    return run(spec, build_network(spec), build_aggregators(spec), observer);
}

std::vector<ScenarioSpec> experiment_matrix(const ScenarioSpec& base)
{
    ConstantPowerFactor a1_mode{0.95, false};
    if (const auto* cpf = std::get_if<ConstantPowerFactor>(&base.a1.unit.mode))
        a1_mode.absorbs = cpf->absorbs;

    std::vector<ScenarioSpec> specs;
    for (NetworkVariant variant : {NetworkVariant::Resistive, NetworkVariant::Inductive}) {
        for (ModeKind kind : {ModeKind::Cpf, ModeKind::VoltVar, ModeKind::VoltWatt}) {
            ScenarioSpec s = base;
            s.variant = variant;
            s.a1.unit.mode = a1_mode;
            // Keep a configured curve when it matches the swept mode.
            if (kind_of(base.a2.unit.mode) != kind)
                s.a2.unit.mode = default_mode(kind, base.a2.unit.s_rated_kva);
            specs.push_back(std::move(s));
        }
    }
    return specs;
}

std::vector<WindowStats> summarize_window(std::span<const TimeSeriesRecord> records, double t_start, double t_end)
{
    if (!(t_start < t_end))
        throw std::invalid_argument("summarize_window: t_start must be before t_end");

    std::vector<const TimeSeriesRecord*> in;
    for (const auto& r : records)
        if (r.time_s >= t_start - kTimeEps && r.time_s < t_end - kTimeEps)
            in.push_back(&r);
    if (in.empty())
        throw std::invalid_argument("summarize_window: no records in window");

    const std::size_t n_agg = in.front()->aggregators.size();
    std::vector<WindowStats> stats(n_agg);
    constexpr double inf = std::numeric_limits<double>::infinity();

    for (std::size_t a = 0; a < n_agg; ++a) {
        auto accumulate = [&](auto field) {
            SignalStats s{0.0, inf, -inf};
            for (const auto* r : in) {
                const double x = field(r->aggregators[a]);
                s.mean += x;
                s.min = std::min(s.min, x);
                s.max = std::max(s.max, x);
            }
            s.mean /= static_cast<double>(in.size());
            return s;
        };
        WindowStats& w = stats[a];
        w.p = accumulate([](const AggregatorSample& x) { return x.p_kw; });
        w.q = accumulate([](const AggregatorSample& x) { return x.q_kvar; });
        w.v = accumulate([](const AggregatorSample& x) { return x.v_pu; });
        w.pf = accumulate([](const AggregatorSample& x) { return x.pf; });
        for (std::size_t i = 1; i < in.size(); ++i) {
            const double dt = in[i]->time_s - in[i - 1]->time_s;
            if (dt > 0.0)
                w.max_abs_dp_dt = std::max(
                    w.max_abs_dp_dt, std::abs(in[i]->aggregators[a].p_kw - in[i - 1]->aggregators[a].p_kw) / dt);
        }
    }
    return stats;
}

} // namespace invergrid
