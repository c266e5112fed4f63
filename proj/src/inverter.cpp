#include "invergrid/inverter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace invergrid {

namespace {

double signum(double x) { return x < 0.0 ? -1.0 : 1.0; }

double move_toward(double from, double to, double budget)
{
    const double delta = to - from;
    if (std::abs(delta) <= budget)
        return to;
    return from + std::copysign(budget, delta);
}

bool q_priority(const ControlMode& mode) { return std::holds_alternative<VoltVarMode>(mode); }

} // namespace

void VoltVarCurve::check() const
{
    if (!(v1 < v_ref && v_ref < v2))
        throw std::invalid_argument("volt-var curve: require v1 < v_ref < v2");
    if (!(q_max_kvar > 0.0))
        throw std::invalid_argument("volt-var curve: q_max must be positive");
    // Continuity of all three branches forces symmetric breakpoints.
    if (std::abs((v_ref - v1) - (v2 - v_ref)) > 1e-9 * (v2 - v1))
        throw std::invalid_argument("volt-var curve: v1 and v2 must be symmetric about v_ref");
}

void VoltWattCurve::check() const
{
    if (!(v_ref < v2))
        throw std::invalid_argument("volt-watt curve: require v_ref < v2");
    if (!(p_rated_kw > 0.0))
        throw std::invalid_argument("volt-watt curve: p_rated must be positive");
}

ModeKind kind_of(const ControlMode& mode) { return static_cast<ModeKind>(mode.index()); }

std::string_view to_string(ModeKind kind)
{
    switch (kind) {
    case ModeKind::Cpf: return "cpf";
    case ModeKind::VoltVar: return "volt_var";
    case ModeKind::VoltWatt: return "volt_watt";
    }
    return "cpf";
}

ModeKind parse_mode_kind(std::string_view text)
{
    if (text == "cpf")
        return ModeKind::Cpf;
    if (text == "volt_var")
        return ModeKind::VoltVar;
    if (text == "volt_watt")
        return ModeKind::VoltWatt;
    throw std::invalid_argument("unknown control mode '" + std::string(text) + "' (cpf|volt_var|volt_watt)");
}

ControlMode default_mode(ModeKind kind, double s_rated_kva)
{
    switch (kind) {
    case ModeKind::Cpf: return ConstantPowerFactor{};
    case ModeKind::VoltVar: return VoltVarMode{VoltVarCurve::with_defaults(s_rated_kva)};
    case ModeKind::VoltWatt: return VoltWattMode{VoltWattCurve::with_defaults(s_rated_kva)};
    }
    return ConstantPowerFactor{};
}

void check_mode(const ControlMode& mode)
{
    if (const auto* cpf = std::get_if<ConstantPowerFactor>(&mode)) {
        if (!(cpf->pf > 0.0 && cpf->pf <= 1.0))
            throw std::invalid_argument("power factor must be in (0, 1]");
    } else if (const auto* vv = std::get_if<VoltVarMode>(&mode)) {
        vv->curve.check();
    } else {
        std::get<VoltWattMode>(mode).curve.check();
    }
}

double pv_available_power(double p_stc_kw, double irradiance_frac)
{
    if (!(irradiance_frac >= 0.0 && irradiance_frac <= 1.0))
        throw std::invalid_argument("irradiance fraction must be in [0, 1]");
    return irradiance_frac * p_stc_kw;
}

InverterSetpoint cpf_setpoint(double p_avail_kw, double pf, bool absorbs)
{
    if (!(pf > 0.0 && pf <= 1.0))
        throw std::invalid_argument("power factor must be in (0, 1]");
    const double q = p_avail_kw * std::sqrt(1.0 - pf * pf) / pf;
    return {p_avail_kw, absorbs ? -q : q};
}

double volt_var_q(const VoltVarCurve& curve, double v_pu)
{
    if (v_pu <= curve.v1)
        return curve.q_max_kvar;
    if (v_pu >= curve.v2)
        return -curve.q_max_kvar;
    return std::clamp(curve.droop() * (v_pu - curve.v_ref), -curve.q_max_kvar, curve.q_max_kvar);
}

double volt_watt_p(const VoltWattCurve& curve, double v_pu, double p_avail_kw)
{
    double p;
    if (v_pu <= curve.v_ref)
        p = curve.p_rated_kw;
    else if (v_pu >= curve.v2)
        p = 0.0;
    else
        p = std::clamp(curve.p_rated_kw - curve.droop() * (v_pu - curve.v_ref), 0.0, curve.p_rated_kw);
    return std::min(p, p_avail_kw);
}

InverterSetpoint ramp_limit(const InverterSetpoint& prev, const InverterSetpoint& target, double ramp_pu_per_s,
                            double s_rated_kva, double dt)
{
    if (!(dt > 0.0))
        throw std::invalid_argument("ramp_limit: dt must be positive");
    const double budget = ramp_pu_per_s * s_rated_kva * dt;
    return {move_toward(prev.p_kw, target.p_kw, budget), move_toward(prev.q_kvar, target.q_kvar, budget)};
}

InverterSetpoint capability_clamp(const InverterSetpoint& sp, double s_rated_kva, const ControlMode& mode)
{
    const double s2 = s_rated_kva * s_rated_kva;
    if (sp.p_kw * sp.p_kw + sp.q_kvar * sp.q_kvar <= s2)
        return sp;
    if (q_priority(mode)) {
        const double q = std::clamp(sp.q_kvar, -s_rated_kva, s_rated_kva);
        return {signum(sp.p_kw) * std::sqrt(std::max(0.0, s2 - q * q)), q};
    }
    const double p = std::clamp(sp.p_kw, -s_rated_kva, s_rated_kva);
    return {p, signum(sp.q_kvar) * std::sqrt(std::max(0.0, s2 - p * p))};
}

void InverterParams::check() const
{
    if (!(s_rated_kva > 0.0))
        throw std::invalid_argument("s_rated must be positive");
    if (!(p_stc_kw > 0.0 && p_stc_kw <= s_rated_kva))
        throw std::invalid_argument("p_stc must be in (0, s_rated]");
    if (!(ramp_pu_per_s > 0.0))
        throw std::invalid_argument("ramp limit must be positive");
    if (!(filter_tau_s >= 0.0))
        throw std::invalid_argument("filter time constant must be non-negative");
    check_mode(mode);
}

InverterUnit::InverterUnit(InverterParams params)
    : params_(std::move(params))
{
    params_.check();
}

InverterSetpoint InverterUnit::target(double v_pu, double irradiance_frac) const
{
    const double p_avail = pv_available_power(params_.p_stc_kw, irradiance_frac);
    return std::visit(
        [&](const auto& m) -> InverterSetpoint {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, ConstantPowerFactor>)
                return cpf_setpoint(p_avail, m.pf, m.absorbs);
            else if constexpr (std::is_same_v<M, VoltVarMode>)
                return {p_avail, volt_var_q(m.curve, v_pu)};
            else
                return {volt_watt_p(m.curve, v_pu, p_avail), 0.0};
        },
        params_.mode);
}

void InverterUnit::warm_start(double v_pu, double irradiance_frac)
{
    v_filtered_ = v_pu;
    command_ = capability_clamp(target(v_pu, irradiance_frac), params_.s_rated_kva, params_.mode);
}

InverterSetpoint InverterUnit::step(double v_pcc_pu, double irradiance_frac, double dt)
{
    if (!(dt > 0.0))
        throw std::invalid_argument("step: dt must be positive");
    if (params_.filter_tau_s > 0.0)
        v_filtered_ += -std::expm1(-dt / params_.filter_tau_s) * (v_pcc_pu - v_filtered_);
    else
        v_filtered_ = v_pcc_pu;

    const double s = params_.s_rated_kva;
    const InverterSetpoint goal = capability_clamp(target(v_filtered_, irradiance_frac), s, params_.mode);
    const InverterSetpoint ramped = ramp_limit(command_, goal, params_.ramp_pu_per_s, s, dt);
    InverterSetpoint next = capability_clamp(ramped, s, params_.mode);

    // The clamp only shortens the secondary axis. If that overshoots the
    // ramp budget, hold the secondary axis at the budget edge and trim the
    // priority axis back onto the circle instead.
    const double budget = params_.ramp_pu_per_s * s * dt;
    const bool qp = q_priority(params_.mode);
    double& secondary = qp ? next.p_kw : next.q_kvar;
    double& primary = qp ? next.q_kvar : next.p_kw;
    const double prev_secondary = qp ? command_.p_kw : command_.q_kvar;
    const double ramped_primary = qp ? ramped.q_kvar : ramped.p_kw;
    if (std::abs(secondary - prev_secondary) > budget) {
        secondary = prev_secondary + std::copysign(budget, secondary - prev_secondary);
        const double room = std::sqrt(std::max(0.0, s * s - secondary * secondary));
        primary = signum(ramped_primary) * std::min(std::abs(ramped_primary), room);
    }

    command_ = next;
    return command_;
}

void Aggregator::check() const
{
    if (units.empty())
        throw std::invalid_argument("aggregator '" + id + "' has no units");
}

Aggregator make_aggregator(std::string id, std::string bus, int count, const InverterParams& params)
{
    if (count <= 0)
        throw std::invalid_argument("aggregator needs at least one unit");
    Aggregator agg{std::move(id), std::move(bus), {}};
    agg.units.assign(static_cast<std::size_t>(count), InverterUnit(params));
    return agg;
}

void warm_start(Aggregator& agg, double v_pu, double irradiance_frac)
{
    for (auto& unit : agg.units)
        unit.warm_start(v_pu, irradiance_frac);
}

InverterSetpoint aggregate_injection(Aggregator& agg, double v_pcc_pu, double irradiance_frac, double dt)
{
    agg.check();
    InverterSetpoint sum;
    for (auto& unit : agg.units)
        sum += unit.step(v_pcc_pu, irradiance_frac, dt);
    return sum;
}

InverterSetpoint total_command(const Aggregator& agg)
{
    InverterSetpoint sum;
    for (const auto& unit : agg.units)
        sum += unit.command();
    return sum;
}

} // namespace invergrid
