#pragma once

#include "invergrid/network.hpp"

#include <complex>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace invergrid {

/// Thrown when a formula would divide by a zero voltage.
class SingularVoltageError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

using Impedance = std::complex<double>;

/// Per-unit complex power. Sign is fixed by context: injections are
/// positive when generated, loads are positive when consumed.
struct ComplexPower {
    double p = 0.0;
    double q = 0.0;

    ComplexPower& operator+=(const ComplexPower& o) { p += o.p; q += o.q; return *this; }
    friend ComplexPower operator+(ComplexPower a, const ComplexPower& b) { return a += b; }
    friend ComplexPower operator-(const ComplexPower& a, const ComplexPower& b) { return {a.p - b.p, a.q - b.q}; }
    bool operator==(const ComplexPower&) const = default;
};

struct VoltagePhasor {
    double magnitude = 1.0;
    double angle = 0.0; // rad

    std::complex<double> phasor() const { return std::polar(magnitude, angle); }
    static VoltagePhasor from(std::complex<double> v) { return {std::abs(v), std::arg(v)}; }
    bool operator==(const VoltagePhasor&) const = default;
};

// Two-bus relations between a sending bus and a receiving bus B that draws
// S = P + jQ through Z = R + jX.

/// I = conj(S / V), using the full complex phasor.
std::complex<double> branch_current(ComplexPower s, VoltagePhasor v);

/// Drop with real part (PR + QX)/|V| and imaginary part (PX - QR)/|V|.
std::complex<double> voltage_drop_complex(ComplexPower s, VoltagePhasor v, Impedance z);

/// Magnitude approximation (PR + QX)/|V| that ignores the angle term.
double voltage_drop_magnitude(ComplexPower s, VoltagePhasor v, Impedance z);

struct VoltageSensitivity {
    double dv_dp; // R/|V|
    double dv_dq; // X/|V|
};

VoltageSensitivity sensitivity(Impedance z, VoltagePhasor v);

enum class Regime { ResistiveDominant, InductiveDominant, Mixed };

std::string_view to_string(Regime r);

/// Classifies by the unweighted mean of per-line R/X (resp. X/R) against
/// `threshold`.
Regime classify_regime(const NetworkModel& net, double threshold = 2.0);

struct SolverOptions {
    double tolerance = 1e-8;     // max per-bus |dV| between sweeps, pu
    int max_iterations = 50;
    double collapse_voltage = 0.3; // pu; any bus below this aborts the sweep
};

struct PowerFlowSolution {
    /// Indexed like NetworkModel::buses.
    std::vector<VoltagePhasor> voltages;
    ComplexPower slack_injection;
    ComplexPower losses;
    ComplexPower total_load;
    ComplexPower total_generation;
    int iterations = 0;
    bool converged = false;
    /// Largest per-bus voltage update of the last sweep.
    double max_mismatch = 0.0;

    /// slack - (load - generation + losses), both axes.
    ComplexPower balance_residual() const
    {
        return slack_injection - (total_load - total_generation + losses);
    }
};

/// A NetworkModel prepared for repeated backward/forward sweeps: bus
/// indices follow NetworkModel::buses, impedances and loads are in pu.
class RadialFeeder {
public:
    /// Throws TopologyError if the network is invalid or not radial.
    explicit RadialFeeder(const NetworkModel& net);

    std::size_t size() const { return ids_.size(); }
    const std::string& bus_id(std::size_t i) const { return ids_[i]; }
    /// Throws std::invalid_argument for unknown ids.
    std::size_t index_of(std::string_view id) const;
    std::size_t slack_index() const { return order_.front(); }
    double base_power_kva() const { return base_kva_; }
    std::span<const ComplexPower> load_demand() const { return load_; }

    /// Injections are indexed like the buses (generation positive, pu).
    PowerFlowSolution solve(std::span<const ComplexPower> injections, double slack_voltage_pu,
                            const SolverOptions& opts = {}) const;

private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    std::vector<std::string> ids_;
    std::vector<std::size_t> order_;  // slack first, every bus after its parent
    std::vector<std::size_t> parent_; // npos for the slack
    std::vector<Impedance> z_;        // parent -> bus, pu
    std::vector<ComplexPower> load_;  // pu
    Impedance z_source_{};
    double base_kva_ = 100.0;
};

/// One-shot solve at the network's own slack setpoint. Injections are in pu
/// keyed by bus id; unknown ids raise std::invalid_argument, non-radial
/// networks raise TopologyError.
PowerFlowSolution solve(const NetworkModel& net, const std::map<std::string, ComplexPower>& injections,
                        const SolverOptions& opts = {});

} // namespace invergrid
