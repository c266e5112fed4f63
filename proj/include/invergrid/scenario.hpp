#pragma once

#include "invergrid/inverter.hpp"
#include "invergrid/network.hpp"
#include "invergrid/powerflow.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace invergrid {

struct SetIrradiance {
    double frac;
    bool operator==(const SetIrradiance&) const = default;
};

struct SetSlackVoltage {
    double pu;
    bool operator==(const SetSlackVoltage&) const = default;
};

struct Event {
    double time_s = 0.0;
    std::variant<SetIrradiance, SetSlackVoltage> action;

    bool operator==(const Event&) const = default;
};

/// Piecewise-constant boundary conditions. An event takes effect at its own
/// timestamp.
struct ScenarioTimeline {
    std::vector<Event> events;
    double duration_s = 20.0;
    double dt_s = 0.01;

    /// Throws std::invalid_argument on unsorted or out-of-range events,
    /// dt <= 0, dt > duration (except a zero-length run), or bad values.
    void check() const;
    /// floor(duration / dt) + 1.
    std::size_t record_count() const;

    bool operator==(const ScenarioTimeline&) const = default;
};

/// Irradiance steps to 0.5 at 5 s and back at 10 s; slack goes to 1.2 pu at
/// 13 s and back at 17 s. 20 s at dt = 10 ms.
ScenarioTimeline default_timeline();

struct Ambient {
    double irradiance = 1.0;
    double slack_v = 1.0;
};

/// Values of the last event at or before t; (1.0, 1.0) before any event.
/// Throws std::invalid_argument for t outside [0, duration].
Ambient ambient_at(const ScenarioTimeline& timeline, double t);

enum class NetworkVariant { Resistive, Inductive };

std::string_view to_string(NetworkVariant v);
NetworkVariant parse_variant(std::string_view text);

struct AggregatorConfig {
    std::string id;
    std::string bus;
    int units = 5;
    InverterParams unit;

    bool operator==(const AggregatorConfig&) const = default;
};

struct ScenarioSpec {
    NetworkVariant variant = NetworkVariant::Resistive;
    AggregatorConfig a1{"A1", "R17", 5, {}};
    AggregatorConfig a2{"A2", "R18", 5, {}};
    ScenarioTimeline timeline = default_timeline();
    /// Replaces the benchmark feeder before the variant is applied.
    std::optional<NetworkModel> topology;

    /// "<variant>_<a2 mode>", e.g. "resistive_volt_watt".
    std::string label() const;

    bool operator==(const ScenarioSpec&) const = default;
};

NetworkModel build_network(const ScenarioSpec& spec);
std::vector<Aggregator> build_aggregators(const ScenarioSpec& spec);

struct AggregatorSample {
    double p_kw = 0.0;
    double q_kvar = 0.0;
    double pf = 1.0;
    double v_pu = 0.0;

    bool operator==(const AggregatorSample&) const = default;
};

/// p / sqrt(p^2 + q^2), or 1.0 when both are zero.
double power_factor(double p, double q);

struct TimeSeriesRecord {
    double time_s = 0.0;
    std::vector<AggregatorSample> aggregators; // in aggregator order (A1, A2)
    double slack_v_pu = 1.0;
    double irradiance = 1.0;
    int solver_iterations = 0;
    bool converged = false;

    bool operator==(const TimeSeriesRecord&) const = default;
};

/// Per-step view handed to a run observer after the solve.
struct StepView {
    std::size_t step;
    double time_s;
    const PowerFlowSolution& solution;
    std::span<const Aggregator> aggregators;
};

using StepObserver = std::function<void(const StepView&)>;

/// Quasi-static run. Each step reads the ambient state, steps every
/// aggregator against its previous solved PCC voltage (step 0 warm-starts
/// at the slack setpoint), solves the feeder and records. Solver divergence
/// is flagged per record; topology problems throw TopologyError.
std::vector<TimeSeriesRecord> run(const ScenarioSpec& spec, const NetworkModel& net, std::vector<Aggregator> aggs,
                                  const StepObserver& observer = {});

/// Builds the network and aggregators from `spec`, then runs.
std::vector<TimeSeriesRecord> run(const ScenarioSpec& spec, const StepObserver& observer = {});

/// Resistive/inductive x A2 in {CPF, Volt-VAR, Volt-Watt}, A1 held at CPF 0.95.
/// Ordered resistive first, A2 modes in that order.
std::vector<ScenarioSpec> experiment_matrix(const ScenarioSpec& base);

struct SignalStats {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct WindowStats {
    SignalStats p, q, v, pf;
    double max_abs_dp_dt = 0.0; // kW/s
};

/// Statistics over records with t_start <= t < t_end, one entry per
/// aggregator. Throws std::invalid_argument when the window is empty.
std::vector<WindowStats> summarize_window(std::span<const TimeSeriesRecord> records, double t_start, double t_end);

} // namespace invergrid
