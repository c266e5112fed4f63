#include "invergrid/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace invergrid {

namespace {

constexpr std::size_t kColumns = 13;

// Window maxima closer than this are reported as ties.
constexpr double kTieTolerance = 1e-12;

double parse_double(std::string_view s)
{
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::invalid_argument("parse_csv: malformed number '" + std::string(s) + "'");
    return x;
}

std::string fixed(double x, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
    return buf;
}

} // namespace

std::string format_number(double x)
{
    char buf[40];
    for (int prec = 1; prec < 9; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (parse_double(buf) == x)
            return buf;
    }
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

std::string emit_csv(std::span<const TimeSeriesRecord> records)
{
    if (records.empty())
        throw std::invalid_argument("emit_csv: no records");
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : records) {
        if (r.aggregators.size() != 2)
            throw std::invalid_argument("emit_csv: each record needs exactly two aggregators");
        const auto& a1 = r.aggregators[0];
        const auto& a2 = r.aggregators[1];
        for (double x : {r.time_s, r.slack_v_pu, r.irradiance, a1.p_kw, a1.q_kvar, a1.pf, a1.v_pu, a2.p_kw, a2.q_kvar,
                         a2.pf, a2.v_pu}) {
            out += format_number(x);
            out += ',';
        }
        out += std::to_string(r.solver_iterations);
        out += r.converged ? ",1\n" : ",0\n";
    }
    return out;
}

std::vector<TimeSeriesRecord> parse_csv(std::string_view text)
{
    std::vector<TimeSeriesRecord> records;
    std::size_t pos = 0;
    bool header = true;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos)
            nl = text.size();
        const std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.empty())
            continue;
        if (header) {
            if (line != kCsvHeader)
                throw std::invalid_argument("parse_csv: unexpected header");
            header = false;
            continue;
        }
        std::array<std::string_view, kColumns> cells;
        std::size_t n = 0, start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                if (n == kColumns)
                    throw std::invalid_argument("parse_csv: too many columns");
                cells[n++] = line.substr(start, i - start);
                start = i + 1;
            }
        }
        if (n != kColumns)
            throw std::invalid_argument("parse_csv: expected 13 columns");

        TimeSeriesRecord r;
        r.time_s = parse_double(cells[0]);
        r.slack_v_pu = parse_double(cells[1]);
        r.irradiance = parse_double(cells[2]);
        r.aggregators = {
            {parse_double(cells[3]), parse_double(cells[4]), parse_double(cells[5]), parse_double(cells[6])},
            {parse_double(cells[7]), parse_double(cells[8]), parse_double(cells[9]), parse_double(cells[10])},
        };
        r.solver_iterations = static_cast<int>(parse_double(cells[11]));
        r.converged = cells[12] == "1";
        records.push_back(std::move(r));
    }
    if (header)
        throw std::invalid_argument("parse_csv: missing header");
    return records;
}

std::string emit_summary(std::span<const RunResult> matrix)
{
    constexpr std::array variants{NetworkVariant::Resistive, NetworkVariant::Inductive};
    constexpr std::array modes{ModeKind::Cpf, ModeKind::VoltVar, ModeKind::VoltWatt};

    std::map<std::pair<NetworkVariant, ModeKind>, const RunResult*> cells;
    for (const auto& r : matrix) {
        const auto key = std::pair{r.spec.variant, kind_of(r.spec.a2.unit.mode)};
        if (!cells.emplace(key, &r).second)
            throw std::invalid_argument("emit_summary: duplicate run " + r.spec.label());
    }
    if (cells.size() != variants.size() * modes.size())
        throw std::invalid_argument("emit_summary: incomplete matrix (" + std::to_string(cells.size()) + " of 6 runs)");

    std::ostringstream out;
    out << "high-slack window [" << format_number(kSummaryWindowStart) << ", " << format_number(kSummaryWindowEnd)
        << ") s\n";
    for (const auto& [key, run] : cells) {
        if (run->records.empty() || run->records.back().time_s < kSummaryWindowStart) {
            out << "runs end before the window opens; no statistics\n";
            return out.str();
        }
    }
    for (NetworkVariant variant : variants) {
        out << "\nvariant " << to_string(variant) << "\n";
        out << "a2_mode    a1_p_mean a1_p_min a1_p_max a1_q_mean a1_v_mean a2_p_mean a2_q_mean a2_pf_mean a2_v_mean "
               "a2_v_max converged\n";

        std::vector<std::pair<ModeKind, double>> peaks;
        for (ModeKind mode : modes) {
            const RunResult& run = *cells.at({variant, mode});
            const auto w = summarize_window(run.records, kSummaryWindowStart, kSummaryWindowEnd);
            if (w.size() != 2)
                throw std::invalid_argument("emit_summary: runs must have two aggregators");
            const bool all_converged =
                std::all_of(run.records.begin(), run.records.end(), [](const auto& r) { return r.converged; });
            std::string name(to_string(mode));
            name.resize(10, ' ');
            out << name << ' ' << fixed(w[0].p.mean, 3) << ' ' << fixed(w[0].p.min, 3) << ' ' << fixed(w[0].p.max, 3)
                << ' ' << fixed(w[0].q.mean, 3) << ' ' << fixed(w[0].v.mean, 5) << ' ' << fixed(w[1].p.mean, 3) << ' '
                << fixed(w[1].q.mean, 3) << ' ' << fixed(w[1].pf.mean, 4) << ' ' << fixed(w[1].v.mean, 5) << ' '
                << fixed(w[1].v.max, 5) << ' ' << (all_converged ? "yes" : "no") << "\n";
            peaks.emplace_back(mode, w[1].v.max);
        }

        std::stable_sort(peaks.begin(), peaks.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        std::string ordering(to_string(peaks.front().first));
        std::vector<ModeKind> lowest{peaks.front().first};
        for (std::size_t i = 1; i < peaks.size(); ++i) {
            const bool tie = peaks[i - 1].second - peaks[i].second <= kTieTolerance;
            ordering += tie ? " = " : " > ";
            ordering += to_string(peaks[i].first);
            if (!tie)
                lowest.clear();
            lowest.push_back(peaks[i].first);
        }
        out << "ordering " << to_string(variant) << " max_a2_v: " << ordering << "\n";
        out << "lowest " << to_string(variant) << ": ";
        if (lowest.size() == 1) {
            out << to_string(lowest.front()) << "\n";
        } else {
            out << "tie(";
            for (std::size_t i = 0; i < lowest.size(); ++i)
                out << (i ? ", " : "") << to_string(lowest[i]);
            out << ")\n";
        }
    }
    return out.str();
}

} // namespace invergrid
