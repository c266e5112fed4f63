#pragma once

#include <string>
#include <variant>
#include <vector>

namespace invergrid {

/// Inverter-side power in physical units (kW / kVAR), generation positive.
struct InverterSetpoint {
    double p_kw = 0.0;
    double q_kvar = 0.0;

    bool operator==(const InverterSetpoint&) const = default;
    InverterSetpoint& operator+=(const InverterSetpoint& o) { p_kw += o.p_kw; q_kvar += o.q_kvar; return *this; }
};

/// Piecewise-linear reactive droop: +q_max below v1, -q_max above v2,
/// droop*(v - v_ref) in between. Breakpoints are symmetric about v_ref so
/// the three branches meet.
struct VoltVarCurve {
    double v1 = 0.95;
    double v_ref = 1.00;
    double v2 = 1.05;
    double q_max_kvar = 4.4;

    /// Signed gain in kVAR/pu; negative under the injection-positive convention.
    double droop() const { return -q_max_kvar / (v2 - v_ref); }

    /// Throws std::invalid_argument when the breakpoints are unordered,
    /// asymmetric, or q_max is not positive.
    void check() const;

    static VoltVarCurve with_defaults(double s_rated_kva) { return {0.95, 1.00, 1.05, 0.44 * s_rated_kva}; }

    bool operator==(const VoltVarCurve&) const = default;
};

/// Active-power curtailment: p_rated up to v_ref, linear to zero at v2.
struct VoltWattCurve {
    double v_ref = 1.05;
    double v2 = 1.10;
    double p_rated_kw = 10.0;

    double droop() const { return p_rated_kw / (v2 - v_ref); }
    void check() const;

    static VoltWattCurve with_defaults(double s_rated_kva) { return {1.05, 1.10, s_rated_kva}; }

    bool operator==(const VoltWattCurve&) const = default;
};

struct ConstantPowerFactor {
    double pf = 0.95;
    /// false: lagging means reactive injection (generator convention).
    bool absorbs = false;

    bool operator==(const ConstantPowerFactor&) const = default;
};

struct VoltVarMode {
    VoltVarCurve curve;
    bool operator==(const VoltVarMode&) const = default;
};

struct VoltWattMode {
    VoltWattCurve curve;
    bool operator==(const VoltWattMode&) const = default;
};

using ControlMode = std::variant<ConstantPowerFactor, VoltVarMode, VoltWattMode>;

enum class ModeKind { Cpf, VoltVar, VoltWatt };

ModeKind kind_of(const ControlMode& mode);
std::string_view to_string(ModeKind kind);
/// Accepts "cpf", "volt_var", "volt_watt". Throws std::invalid_argument.
ModeKind parse_mode_kind(std::string_view text);

/// Default-parameterized mode of the given kind for a unit of `s_rated_kva`.
ControlMode default_mode(ModeKind kind, double s_rated_kva);

/// Throws std::invalid_argument on an invalid pf or curve.
void check_mode(const ControlMode& mode);

/// Available PV power scales linearly with irradiance. Throws
/// std::invalid_argument outside [0, 1].
double pv_available_power(double p_stc_kw, double irradiance_frac);

/// p = p_avail, |q| = p*tan(acos(pf)); q < 0 when `absorbs`.
InverterSetpoint cpf_setpoint(double p_avail_kw, double pf, bool absorbs);

double volt_var_q(const VoltVarCurve& curve, double v_pu);

/// Curve value capped by the available power.
double volt_watt_p(const VoltWattCurve& curve, double v_pu, double p_avail_kw);

/// Each axis moves toward `target` by at most `ramp_pu_per_s * s_rated_kva * dt`.
InverterSetpoint ramp_limit(const InverterSetpoint& prev, const InverterSetpoint& target, double ramp_pu_per_s,
                            double s_rated_kva, double dt);

/// Keeps the setpoint inside p^2 + q^2 <= s_rated^2. Volt-VAR keeps Q and
/// trims P; CPF and Volt-Watt keep P and trim |Q|.
InverterSetpoint capability_clamp(const InverterSetpoint& setpoint, double s_rated_kva, const ControlMode& mode);

struct InverterParams {
    double s_rated_kva = 10.0;
    double p_stc_kw = 9.5;
    ControlMode mode = ConstantPowerFactor{};
    double ramp_pu_per_s = 2.0;
    double filter_tau_s = 0.1; // 0 disables the measurement filter

    void check() const;
    bool operator==(const InverterParams&) const = default;
};

/// One smart inverter with its ramp and voltage-filter state.
class InverterUnit {
public:
    explicit InverterUnit(InverterParams params);

    const InverterParams& params() const { return params_; }
    const InverterSetpoint& command() const { return command_; }
    double filtered_voltage() const { return v_filtered_; }

    /// Mode target before ramping or clamping, from a measured voltage.
    InverterSetpoint target(double v_pu, double irradiance_frac) const;

    /// Settles the unit at its clamped target with the filter at `v_pu`.
    void warm_start(double v_pu, double irradiance_frac);

    /// Filter, target, ramp, clamp. Stores and returns the new command.
    InverterSetpoint step(double v_pcc_pu, double irradiance_frac, double dt);

private:
    InverterParams params_;
    InverterSetpoint command_;
    double v_filtered_ = 1.0;
};

struct Aggregator {
    std::string id;
    std::string bus;
    std::vector<InverterUnit> units;

    void check() const;
};

/// Builds `count` identical units at `bus`.
Aggregator make_aggregator(std::string id, std::string bus, int count, const InverterParams& params);

void warm_start(Aggregator& agg, double v_pu, double irradiance_frac);

/// Steps every unit and sums their commands.
InverterSetpoint aggregate_injection(Aggregator& agg, double v_pcc_pu, double irradiance_frac, double dt);

/// Sum of the units' current commands.
InverterSetpoint total_command(const Aggregator& agg);

} // namespace invergrid
