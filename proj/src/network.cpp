#include "invergrid/network.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

namespace invergrid {

std::string_view to_string(CableType type)
{
    switch (type) {
    case CableType::UG1: return "UG1";
    case CableType::UG3: return "UG3";
    case CableType::Custom: return "custom";
    }
    return "custom";
}

CableSpec cable_spec(CableType type)
{
    switch (type) {
    case CableType::UG1: return {0.287, 0.5316};
    case CableType::UG3: return {1.152, 1.4579};
    case CableType::Custom: break;
    }
    throw std::invalid_argument("custom cable has no catalogue parameters");
}

double LineSegment::reactance_per_km(double frequency_hz) const
{
    return 2.0 * std::numbers::pi * frequency_hz * inductance_per_km * 1e-3;
}

LineSegment make_line(std::string from, std::string to, CableType cable, double length_km)
{
    const CableSpec spec = cable_spec(cable);
    return LineSegment{std::move(from), std::move(to), spec.resistance_ohm_per_km, spec.inductance_mh_per_km,
                       length_km, cable};
}

const Bus* NetworkModel::find_bus(std::string_view id) const
{
    auto it = std::find_if(buses.begin(), buses.end(), [&](const Bus& b) { return b.id == id; });
    return it == buses.end() ? nullptr : &*it;
}

NetworkModel build_cigre_lv_residential()
{
    NetworkModel net;
    for (int i = 1; i <= 10; ++i)
        net.buses.push_back({"R" + std::to_string(i)});
    for (const char* id : {"R11", "R15", "R16", "R17", "R18"})
        net.buses.push_back({id});

    constexpr double trunk_km = 0.035;
    constexpr double lateral_km = 0.030;
    for (int i = 1; i < 10; ++i)
        net.lines.push_back(make_line("R" + std::to_string(i), "R" + std::to_string(i + 1), CableType::UG1, trunk_km));
    net.lines.push_back(make_line("R3", "R11", CableType::UG3, lateral_km));
    net.lines.push_back(make_line("R4", "R15", CableType::UG3, lateral_km));
    net.lines.push_back(make_line("R6", "R16", CableType::UG3, lateral_km));
    net.lines.push_back(make_line("R9", "R17", CableType::UG3, lateral_km));
    net.lines.push_back(make_line("R10", "R18", CableType::UG3, lateral_km));

    net.loads = {
        {"R1", 190.0, 62.45},
        {"R11", 14.25, 4.68},
        {"R15", 49.4, 16.24},
        {"R16", 52.25, 17.17},
        {"R17", 33.25, 10.93},
        {"R18", 44.65, 14.68},
    };
    net.slack = SlackSource{"R1", 1.0, {}};
    return net;
}

NetworkModel to_inductive_variant(const NetworkModel& net)
{
    NetworkModel out = net;
    const double omega = 2.0 * std::numbers::pi * net.frequency_hz;
    for (auto& line : out.lines)
        line.inductance_per_km = 5.0 * line.resistance_per_km / omega * 1e3;
    return out;
}

std::vector<std::string> validate(const NetworkModel& net)
{
    std::vector<std::string> v;

    if (!(net.frequency_hz > 0.0))
        v.push_back("frequency must be positive");
    if (!(net.base_power_kva > 0.0) || !(net.base_voltage_v > 0.0))
        v.push_back("per-unit bases must be positive");

    std::unordered_map<std::string, std::size_t> index;
    for (const auto& bus : net.buses) {
        if (!index.emplace(bus.id, index.size()).second)
            v.push_back("duplicate id: bus '" + bus.id + "'");
        if (!(bus.nominal_voltage_v > 0.0))
            v.push_back("bus '" + bus.id + "': nominal voltage must be positive");
    }

    for (const auto& line : net.lines) {
        const std::string name = "line " + line.from_bus + "-" + line.to_bus;
        if (!index.contains(line.from_bus) || !index.contains(line.to_bus))
            v.push_back(name + ": unknown endpoint bus");
        if (line.from_bus == line.to_bus)
            v.push_back(name + ": self loop");
        if (!(line.resistance_per_km >= 0.0))
            v.push_back(name + ": negative resistance");
        if (!(line.inductance_per_km >= 0.0))
            v.push_back(name + ": negative inductance");
        if (!(line.length_km > 0.0))
            v.push_back(name + ": length must be positive");
    }

    for (const auto& load : net.loads) {
        if (!index.contains(load.bus))
            v.push_back("load at '" + load.bus + "': unknown bus");
        if (!(load.active_power_kw >= 0.0))
            v.push_back("load at '" + load.bus + "': negative active power");
        if (!std::isfinite(load.reactive_power_kvar))
            v.push_back("load at '" + load.bus + "': non-finite reactive power");
    }

    if (!index.contains(net.slack.bus))
        v.push_back("slack bus '" + net.slack.bus + "' does not exist");
    if (!(net.slack.voltage_setpoint_pu > 0.5 && net.slack.voltage_setpoint_pu < 1.5))
        v.push_back("slack voltage setpoint outside (0.5, 1.5) pu");

    // Cycle detection (union-find) and connectivity.
    std::vector<std::size_t> parent(index.size());
    for (std::size_t i = 0; i < parent.size(); ++i)
        parent[i] = i;
    auto find = [&](std::size_t x) {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    };
    bool cycle = false;
    std::size_t components = index.size();
    for (const auto& line : net.lines) {
        auto a = index.find(line.from_bus);
        auto b = index.find(line.to_bus);
        if (a == index.end() || b == index.end())
            continue;
        const std::size_t ra = find(a->second), rb = find(b->second);
        if (ra == rb) {
            cycle = true;
        } else {
            parent[ra] = rb;
            --components;
        }
    }
    if (cycle || net.lines.size() + 1 != net.buses.size())
        v.push_back("not radial: " + std::to_string(net.lines.size()) + " lines for " +
                    std::to_string(net.buses.size()) + " buses" + (cycle ? ", cycle present" : ""));
    if (components > 1)
        v.push_back("not connected: " + std::to_string(components) + " islands");

    return v;
}

std::complex<double> line_impedance_pu(const LineSegment& seg, double base_power_kva, double base_voltage_v,
                                       double frequency_hz)
{
    if (!(base_power_kva > 0.0) || !(base_voltage_v > 0.0))
        throw std::invalid_argument("line_impedance_pu: bases must be positive");
    const double z_base = base_voltage_v * base_voltage_v / (base_power_kva * 1e3);
    const std::complex<double> z_ohm{seg.resistance_per_km * seg.length_km,
                                     seg.reactance_per_km(frequency_hz) * seg.length_km};
    return z_ohm / z_base;
}

std::complex<double> impedance_ohm_from_pu(std::complex<double> z_pu, double base_power_kva, double base_voltage_v)
{
    if (!(base_power_kva > 0.0) || !(base_voltage_v > 0.0))
        throw std::invalid_argument("impedance_ohm_from_pu: bases must be positive");
    return z_pu * (base_voltage_v * base_voltage_v / (base_power_kva * 1e3));
}

} // namespace invergrid
