#include "invergrid/matrix.hpp"

#include <exception>

namespace invergrid {

std::vector<RunResult> run_matrix_serial(std::span<const ScenarioSpec> specs)
{
    std::vector<RunResult> results;
    results.reserve(specs.size());
    for (const auto& spec : specs)
        results.push_back({spec, run(spec)});
    return results;
}

std::vector<RunResult> run_matrix(std::span<const ScenarioSpec> specs)
{
    const auto n = static_cast<long>(specs.size());
    std::vector<RunResult> results(specs.size());
    std::vector<std::exception_ptr> errors(specs.size());

#pragma omp parallel for schedule(dynamic, 1) default(none) shared(specs, results, errors, n)
    for (long i = 0; i < n; ++i) {
        try {
            results[i] = {specs[i], run(specs[i])};
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }

    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return results;
}

} // namespace invergrid
