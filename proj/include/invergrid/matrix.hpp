#pragma once

#include "invergrid/scenario.hpp"

#include <span>
#include <vector>

namespace invergrid {

struct RunResult {
    ScenarioSpec spec;
    std::vector<TimeSeriesRecord> records;

    bool operator==(const RunResult&) const = default;
};

/// Reference implementation: one run after another.
std::vector<RunResult> run_matrix_serial(std::span<const ScenarioSpec> specs);

/// Same results as run_matrix_serial, runs distributed over OpenMP threads.
/// Each run owns its network and aggregator state, so output is identical
/// regardless of thread count. The first failing run's exception is
/// rethrown after all threads finish.
std::vector<RunResult> run_matrix(std::span<const ScenarioSpec> specs);

} // namespace invergrid
