#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "../assembly.hpp"
#include "../error.hpp"
#include "../solver.hpp"
#include "problems.hpp"

namespace fkstencil::harness {

struct ErrorNorms {
    double err_inf = 0.0;
    double err_l2 = 0.0;
};

/// Max-norm and discrete L2 error, err_l2 = (h1 h2 sum |e|^2)^(1/2), over all nodes.
inline ErrorNorms error_norms(const Grid2D& g, std::span<const double> nodal, const Field& exact)
{
    ErrorNorms e;
    double sq = 0.0;
    for (int i = 0; i <= g.m1(); ++i)
        for (int j = 0; j <= g.m2(); ++j) {
            const Point p = g.node(i, j);
            const double d = std::abs(nodal[g.flat(i, j)] - exact(p.x, p.y));
            e.err_inf = std::max(e.err_inf, d);
            sq += d * d;
        }
    e.err_l2 = std::sqrt(g.h1() * g.h2() * sq);
    return e;
}

/// log(e1/e2) / log(h1/h2) between two consecutive refinements.
inline double convergence_rate(double err_coarse, double err_fine, double h_coarse, double h_fine)
{
    return std::log(err_coarse / err_fine) / std::log(h_coarse / h_fine);
}

struct ErrorRow {
    int m1 = 0, m2 = 0;
    double err_inf = 0.0, err_l2 = 0.0;
    std::optional<double> rate_inf, rate_l2;
};

struct LevelDiagnostics {
    int m1 = 0, m2 = 0;
    int unknowns = 0;
    long iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
    MMatrixReport m_matrix;
    double min_value = 0.0;
    double seconds = 0.0;
};

struct LevelSolution {
    Grid2D grid;
    SparseSystem system;
    SolveResult solve;
    std::vector<double> nodal; // full-grid values in flat order
    MMatrixReport m_matrix;
};

inline SolveConfig config_for(const Grid2D& g, SolveConfig cfg)
{
    if (cfg.max_iters == 0)
        cfg.max_iters = default_max_iters(g.m1(), g.m2());
    return cfg;
}

/// Assemble and solve one grid level of a case.
inline LevelSolution solve_level(const ProblemCase& pc, int m1, int m2, const SolveConfig& cfg)
{
    Grid2D g = pc.grid(m1, m2);
    SparseSystem sys = assemble(g, pc.coefficients, pc.boundary);
    MMatrixReport rep = verify_m_matrix(sys, strict_row_sum_floor(g, pc.coefficients));
    SolveResult sr = solve(sys, config_for(g, cfg));
    std::vector<double> nodal = expand_solution(g, pc.boundary_kind(), sr.solution);
    return {std::move(g), std::move(sys), std::move(sr), std::move(nodal), rep};
}

struct CaseReport {
    std::vector<ErrorRow> rows;
    std::vector<LevelDiagnostics> levels;
    bool aborted = false;
    std::string diagnostic;
};

/// Runs every grid of the case (or the supplied override list) in order.
inline CaseReport run_case(const ProblemCase& pc, const SolveConfig& cfg,
                           std::optional<std::vector<std::pair<int, int>>> grids = std::nullopt)
{
    if (!pc.exact_solution)
        throw Error(ErrorKind::invalid_argument, "case '" + pc.name + "' has no exact solution");
    const auto& levels = grids ? *grids : pc.grids;
    CaseReport report;
    std::optional<double> prev_h;
    ErrorNorms prev{};
    for (const auto& [m1, m2] : levels) {
        const auto t0 = std::chrono::steady_clock::now();
        LevelSolution lvl = solve_level(pc, m1, m2, cfg);
        const auto t1 = std::chrono::steady_clock::now();

        LevelDiagnostics diag;
        diag.m1 = m1;
        diag.m2 = m2;
        diag.unknowns = lvl.system.n;
        diag.iterations = lvl.solve.iterations;
        diag.relative_residual = lvl.solve.final_relative_residual;
        diag.converged = lvl.solve.converged;
        diag.m_matrix = lvl.m_matrix;
        diag.min_value = *std::min_element(lvl.nodal.begin(), lvl.nodal.end());
        diag.seconds = std::chrono::duration<double>(t1 - t0).count();
        report.levels.push_back(diag);

        if (!lvl.solve.converged) {
            report.aborted = true;
            report.diagnostic = "solver did not converge on " + std::to_string(m1) + "x"
                                + std::to_string(m2) + " after " + std::to_string(diag.iterations)
                                + " iterations (relative residual "
                                + std::to_string(diag.relative_residual) + ")";
            break;
        }

        const ErrorNorms e = error_norms(lvl.grid, lvl.nodal, *pc.exact_solution);
        ErrorRow row{m1, m2, e.err_inf, e.err_l2, std::nullopt, std::nullopt};
        const double h = lvl.grid.h();
        if (prev_h) {
            row.rate_inf = convergence_rate(prev.err_inf, e.err_inf, *prev_h, h);
            row.rate_l2 = convergence_rate(prev.err_l2, e.err_l2, *prev_h, h);
        }
        report.rows.push_back(row);
        prev = e;
        prev_h = h;
    }
    return report;
}

/// Scientific notation with six significant digits, trailing mantissa zeros
/// removed: 8.50270e-02 -> 8.5027e-02.
inline std::string format_scientific(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.5e", v);
    std::string s(buf);
    const auto e = s.find('e');
    std::string mantissa = s.substr(0, e);
    const std::string exponent = s.substr(e);
    if (mantissa.find('.') != std::string::npos) {
        while (!mantissa.empty() && mantissa.back() == '0')
            mantissa.pop_back();
        if (!mantissa.empty() && mantissa.back() == '.')
            mantissa.pop_back();
    }
    return mantissa + exponent;
}

inline std::string csv_header() { return "M1,M2,err_inf,rate_inf,err_l2,rate_l2"; }

inline std::string csv_line(const ErrorRow& r)
{
    auto opt = [](const std::optional<double>& v) { return v ? format_scientific(*v) : std::string(); };
    return std::to_string(r.m1) + "," + std::to_string(r.m2) + "," + format_scientific(r.err_inf) + ","
           + opt(r.rate_inf) + "," + format_scientific(r.err_l2) + "," + opt(r.rate_l2);
}

inline void emit_csv(const std::vector<ErrorRow>& rows, const std::string& path)
{
    if (rows.empty())
        throw Error(ErrorKind::invalid_argument, "no rows to write");
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::io, "cannot open " + path + " for writing");
    out << csv_header() << '\n';
    for (const ErrorRow& r : rows)
        out << csv_line(r) << '\n';
    if (!out)
        throw Error(ErrorKind::io, "failed while writing " + path);
}

} // namespace fkstencil::harness
