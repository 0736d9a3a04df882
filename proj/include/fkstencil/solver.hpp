#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "assembly.hpp"
#include "error.hpp"

namespace fkstencil {

enum class Method { jacobi, gauss_seidel, sor };

struct SolveConfig {
    Method method = Method::gauss_seidel;
    double omega = 1.5;  // SOR only
    double tol = 1e-10;  // relative residual target
    long max_iters = 0;  // 0 selects default_max_iters for the system size
    std::optional<std::vector<double>> initial_guess;
    bool record_history = false;
};

struct SolveResult {
    std::vector<double> solution;
    long iterations = 0;
    double final_relative_residual = 0.0;
    bool converged = false;
    std::vector<double> residual_history; // filled when requested
};

/// 100 m1 m2 sweeps, capped at 1e7.
inline long default_max_iters(int m1, int m2) noexcept
{
    return std::min(100L * m1 * m2, 10'000'000L);
}

inline long default_max_iters_for(int n) noexcept
{
    return std::min(100L * std::max(n, 1), 10'000'000L);
}

/// ||b - T x||_inf / max(||b||_inf, 1)
inline double relative_residual(const SparseSystem& s, std::span<const double> x)
{
    double rmax = 0.0;
    double bmax = 0.0;
    for (int i = 0; i < s.n; ++i) {
        double acc = s.rhs[i];
        for (int p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p)
            acc -= s.values[p] * x[s.cols[p]];
        if (!std::isfinite(acc))
            return std::numeric_limits<double>::quiet_NaN();
        rmax = std::max(rmax, std::abs(acc));
        bmax = std::max(bmax, std::abs(s.rhs[i]));
    }
    return rmax / std::max(bmax, 1.0);
}

namespace detail {

inline double off_diagonal_product(const SparseSystem& s, int i, std::span<const double> x)
{
    double acc = 0.0;
    for (int p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p)
        if (p != s.diag[i])
            acc += s.values[p] * x[s.cols[p]];
    return acc;
}

} // namespace detail

/// Stationary iteration on T x = b. Gauss-Seidel and SOR sweep rows in
/// ascending order; Jacobi double-buffers the iterate.
inline SolveResult solve(const SparseSystem& s, const SolveConfig& cfg = {})
{
    if (!(cfg.tol > 0.0))
        throw Error(ErrorKind::invalid_argument, "tolerance must be positive");
    if (cfg.method == Method::sor && !(cfg.omega > 0.0 && cfg.omega < 2.0))
        throw Error(ErrorKind::invalid_argument, "SOR relaxation must lie in (0, 2)");
    if (cfg.max_iters < 0)
        throw Error(ErrorKind::invalid_argument, "max_iters must be at least 1");
    const long max_iters = cfg.max_iters > 0 ? cfg.max_iters : default_max_iters_for(s.n);

    SolveResult res;
    if (cfg.initial_guess) {
        if (static_cast<int>(cfg.initial_guess->size()) != s.n)
            throw Error(ErrorKind::invalid_argument, "initial guess has the wrong length");
        res.solution = *cfg.initial_guess;
    } else {
        res.solution.assign(s.n, 0.0);
    }
    std::vector<double>& x = res.solution;
    std::vector<double> scratch(cfg.method == Method::jacobi ? s.n : 0);

    const double omega = cfg.method == Method::sor ? cfg.omega : 1.0;
    for (long it = 1; it <= max_iters; ++it) {
        if (cfg.method == Method::jacobi) {
            for (int i = 0; i < s.n; ++i)
                scratch[i] = (s.rhs[i] - detail::off_diagonal_product(s, i, x)) / s.diagonal(i);
            x.swap(scratch);
        } else {
            for (int i = 0; i < s.n; ++i) {
                const double gs = (s.rhs[i] - detail::off_diagonal_product(s, i, x)) / s.diagonal(i);
                x[i] = omega == 1.0 ? gs : (1.0 - omega) * x[i] + omega * gs;
            }
        }
        const double rel = relative_residual(s, x);
        if (!std::isfinite(rel))
            throw Error(ErrorKind::numerical_failure,
                        "non-finite residual after " + std::to_string(it) + " iterations");
        if (cfg.record_history)
            res.residual_history.push_back(rel);
        res.iterations = it;
        res.final_relative_residual = rel;
        if (rel <= cfg.tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

} // namespace fkstencil
