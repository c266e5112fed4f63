// invergrid: quasi-static smart-inverter feeder simulations from the command line.
//
//   invergrid run    --config <path> [--variant resistive|inductive]
//                    [--a2-mode cpf|volt_var|volt_watt] [--dt <s>] --out <dir>
//   invergrid matrix --config <path> --out <dir>
//
// Exit codes: 0 success, 2 config error, 3 solver abort.

#include "invergrid/config.hpp"
#include "invergrid/matrix.hpp"
#include "invergrid/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace invergrid;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct RunConfig {
    fs::path config;
    fs::path out_dir;
    std::optional<std::string> variant;
    std::optional<std::string> a2_mode;
    std::optional<double> dt;
    bool verbose = false;
};

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
}

ScenarioSpec load_spec(const RunConfig& cfg)
{
    ScenarioSpec spec = load_config_file(cfg.config);
    if (cfg.variant)
        spec.variant = parse_variant(*cfg.variant);
    if (cfg.a2_mode) {
        const ModeKind kind = parse_mode_kind(*cfg.a2_mode);
        if (kind != kind_of(spec.a2.unit.mode))
            spec.a2.unit.mode = default_mode(kind, spec.a2.unit.s_rated_kva);
    }
    if (cfg.dt) {
        spec.timeline.dt_s = *cfg.dt;
        try {
            spec.timeline.check();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(0, "--dt", e.what());
        }
    }
    return spec;
}

void report_run(const std::string& label, const std::vector<TimeSeriesRecord>& records, bool verbose)
{
    const auto failed = std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.converged; });
    std::cout << label << ": " << records.size() << " records";
    if (failed)
        std::cout << ", " << failed << " unconverged";
    std::cout << "\n";
    if (verbose) {
        int max_iters = 0;
        for (const auto& r : records)
            max_iters = std::max(max_iters, r.solver_iterations);
        std::cout << "  max solver iterations: " << max_iters << "\n";
    }
}

int cmd_run(const RunConfig& cfg)
{
    const ScenarioSpec spec = load_spec(cfg);
    const auto records = run(spec);
    fs::create_directories(cfg.out_dir);
    write_file(cfg.out_dir / (spec.label() + ".csv"), emit_csv(records));
    report_run(spec.label(), records, cfg.verbose);
    return 0;
}

int cmd_matrix(const RunConfig& cfg)
{
    const ScenarioSpec base = load_spec(cfg);
    const auto specs = experiment_matrix(base);
    const auto results = run_matrix(specs);
    fs::create_directories(cfg.out_dir);
    for (const auto& r : results) {
        write_file(cfg.out_dir / (r.spec.label() + ".csv"), emit_csv(r.records));
        report_run(r.spec.label(), r.records, cfg.verbose);
    }
    const std::string summary = emit_summary(results);
    write_file(cfg.out_dir / "summary.txt", summary);
    std::cout << "\n" << summary;
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Quasi-static simulator for smart-inverter control modes on a radial LV feeder"};
    app.require_subcommand(1);

    RunConfig cfg;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", cfg.config, "Scenario config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", cfg.out_dir, "Output directory")->required();
        sub->add_flag("-v,--verbose", cfg.verbose, "Print solver diagnostics");
    };

    auto* run_cmd = app.add_subcommand("run", "Run one scenario and write its CSV");
    add_common(run_cmd);
    run_cmd->add_option("--variant", cfg.variant, "Line impedance variant")
        ->check(CLI::IsMember({"resistive", "inductive"}));
    run_cmd->add_option("--a2-mode", cfg.a2_mode, "Control mode of aggregator A2")
        ->check(CLI::IsMember({"cpf", "volt_var", "volt_watt"}));
    run_cmd->add_option("--dt", cfg.dt, "Time step override in seconds")->check(CLI::PositiveNumber);

    auto* matrix_cmd = app.add_subcommand("matrix", "Run all six variant/mode combinations and a summary");
    add_common(matrix_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (run_cmd->parsed())
            return cmd_run(cfg);
        return cmd_matrix(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const TopologyError& e) {
        std::cerr << "solver abort: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
