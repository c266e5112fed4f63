#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace invergrid {

/// Raised when a network cannot be solved as a radial feeder.
class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class CableType { UG1, UG3, Custom };

std::string_view to_string(CableType type);

/// Per-km parameters of the underground cables used by the residential feeder.
struct CableSpec {
    double resistance_ohm_per_km;
    double inductance_mh_per_km;
};

/// Catalogue values for UG1/UG3. Custom has no catalogue entry.
CableSpec cable_spec(CableType type);

struct Bus {
    std::string id;
    double nominal_voltage_v = 400.0;

    bool operator==(const Bus&) const = default;
};

struct LineSegment {
    std::string from_bus;
    std::string to_bus;
    double resistance_per_km = 0.0;   // ohm/km
    double inductance_per_km = 0.0;   // mH/km
    double length_km = 0.0;
    CableType cable = CableType::Custom;

    /// X = 2*pi*f*L in ohm/km.
    double reactance_per_km(double frequency_hz) const;

    bool operator==(const LineSegment&) const = default;
};

LineSegment make_line(std::string from, std::string to, CableType cable, double length_km);

/// Constant-power load. Quantities are three-phase totals.
struct Load {
    std::string bus;
    double active_power_kw = 0.0;
    double reactive_power_kvar = 0.0;

    bool operator==(const Load&) const = default;
};

struct SlackSource {
    std::string bus;
    double voltage_setpoint_pu = 1.0;
    /// Upstream grid impedance in ohm (positive sequence). Zero places the
    /// setpoint directly on the slack bus.
    std::complex<double> source_impedance_ohm{0.0, 0.0};

    bool operator==(const SlackSource&) const = default;
};

/// Balanced positive-sequence model of a radial LV feeder.
struct NetworkModel {
    std::vector<Bus> buses;
    std::vector<LineSegment> lines;
    std::vector<Load> loads;
    SlackSource slack;
    double frequency_hz = 50.0;
    double base_power_kva = 100.0;
    double base_voltage_v = 400.0;

    const Bus* find_bus(std::string_view id) const;
    double base_impedance_ohm() const { return base_voltage_v * base_voltage_v / (base_power_kva * 1e3); }

    bool operator==(const NetworkModel&) const = default;
};

/// Residential part of the CIGRE LV benchmark: trunk R1..R10 in UG1 (35 m
/// segments), laterals to R11, R15, R16, R17, R18 in UG3 (30 m), six loads.
NetworkModel build_cigre_lv_residential();

/// Copy of `net` with every segment's reactance set to five times its
/// resistance. Only inductance_per_km changes.
NetworkModel to_inductive_variant(const NetworkModel& net);

/// Invariant violations, one human-readable entry per problem. Empty iff valid.
std::vector<std::string> validate(const NetworkModel& net);

/// Segment impedance in per-unit of Z_base = V_base^2 / S_base.
/// Throws std::invalid_argument for non-positive bases.
std::complex<double> line_impedance_pu(const LineSegment& seg, double base_power_kva, double base_voltage_v,
                                       double frequency_hz = 50.0);

/// Inverse of the per-unit conversion: pu -> ohm.
std::complex<double> impedance_ohm_from_pu(std::complex<double> z_pu, double base_power_kva, double base_voltage_v);

} // namespace invergrid
