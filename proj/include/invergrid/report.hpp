#pragma once

#include "invergrid/matrix.hpp"
#include "invergrid/scenario.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace invergrid {

inline constexpr std::string_view kCsvHeader =
    "time_s,slack_v_pu,irradiance_frac,a1_p_kw,a1_q_kvar,a1_pf,a1_v_pu,a2_p_kw,a2_q_kvar,a2_pf,a2_v_pu,"
    "solver_iters,converged";

/// Shortest decimal that round-trips, capped at 9 significant digits.
std::string format_number(double x);

/// Header plus one row per record. Records must carry exactly two
/// aggregators (A1, A2). Throws std::invalid_argument for an empty list.
std::string emit_csv(std::span<const TimeSeriesRecord> records);

/// Inverse of emit_csv. Throws std::invalid_argument on malformed input.
std::vector<TimeSeriesRecord> parse_csv(std::string_view text);

/// Window of the 1.2 pu slack step used for the matrix summary.
inline constexpr double kSummaryWindowStart = 13.5;
inline constexpr double kSummaryWindowEnd = 16.5;

/// Text report over a complete resistive/inductive x {cpf, volt_var,
/// volt_watt} matrix: per-variant window statistics and the ordering of
/// maximum A2 voltage. Throws std::invalid_argument if any cell is missing
/// or duplicated. Runs that end before the window get a one-line note.
std::string emit_summary(std::span<const RunResult> matrix);

} // namespace invergrid
