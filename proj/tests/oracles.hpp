#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the solver or control code.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace oracle {

/// Receiving-end voltage magnitude of a sending bus at `v0` (real) feeding
/// a constant-power demand P + jQ through R + jX. |V_B|^2 is the larger
/// root of u^2 + (2(PR + QX) - v0^2) u + (P^2 + Q^2)(R^2 + X^2) = 0.
inline double two_bus_voltage(double v0, double p, double q, double r, double x)
{
    const double b = v0 * v0 - 2.0 * (p * r + q * x);
    const double c = (p * p + q * q) * (r * r + x * x);
    const double u = 0.5 * (b + std::sqrt(b * b - 4.0 * c));
    return std::sqrt(u);
}

/// Random tree on n nodes: node i > 0 hangs off a uniformly chosen earlier node.
inline std::vector<std::pair<int, int>> random_tree(int n, std::mt19937_64& rng)
{
    std::vector<std::pair<int, int>> edges;
    for (int i = 1; i < n; ++i)
        edges.emplace_back(std::uniform_int_distribution<int>(0, i - 1)(rng), i);
    return edges;
}

} // namespace oracle
