#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "../assembly.hpp"
#include "../coefficients.hpp"
#include "../error.hpp"

namespace fkstencil::harness {

struct Domain {
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
};

struct ProblemCase {
    std::string name;
    std::string description;
    Domain domain;
    BoundarySpec boundary;
    CoefficientSet coefficients;
    std::optional<Field> exact_solution;
    std::vector<std::pair<int, int>> grids;

    BoundaryKind boundary_kind() const noexcept { return kind_of(boundary); }
    Grid2D grid(int m1, int m2) const { return make_grid(domain.x0, domain.x1, domain.y0, domain.y1, m1, m2); }
};

using ProblemRegistry = std::map<std::string, ProblemCase>;

namespace detail {

// Eighth-order central differences.
inline constexpr double d1w[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
inline constexpr double d2w0 = -205.0 / 72.0;
inline constexpr double d2w[4] = {8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0};

template <class F>
double diff1(F&& f, double step)
{
    double acc = 0.0;
    for (int m = 0; m < 4; ++m)
        acc += d1w[m] * (f((m + 1) * step) - f(-(m + 1) * step));
    return acc / step;
}

template <class F>
double diff2(F&& f, double step)
{
    double acc = d2w0 * f(0.0);
    for (int m = 0; m < 4; ++m)
        acc += d2w[m] * (f((m + 1) * step) + f(-(m + 1) * step));
    return acc / (step * step);
}

} // namespace detail

/// Residual of the PDE for u at (x, y), derivatives by finite differences.
inline double pde_residual(const CoefficientSet& c, const Field& u, double x, double y, double step = 5e-3)
{
    const double uxx = detail::diff2([&](double d) { return u(x + d, y); }, step);
    const double uyy = detail::diff2([&](double d) { return u(x, y + d); }, step);
    const double ux = detail::diff1([&](double d) { return u(x + d, y); }, step);
    const double uy = detail::diff1([&](double d) { return u(x, y + d); }, step);
    const double uxy = detail::diff1(
        [&](double d) { return detail::diff1([&](double e) { return u(x + d, y + e); }, step); }, step);

    const double s1 = c.sigma1(x, y);
    const double s2 = c.sigma2(x, y);
    const double rho = c.rho(x, y);
    return 0.5 * s1 * s1 * uxx + rho * s1 * s2 * uxy + 0.5 * s2 * s2 * uyy + c.b1(x, y) * ux
           + c.b2(x, y) * uy - c.r(x, y) * u(x, y) + c.q(x, y);
}

/// Largest |residual| over a deterministic 10 x 10 lattice of interior points.
inline double max_pde_residual(const ProblemCase& pc)
{
    if (!pc.exact_solution)
        return 0.0;
    double worst = 0.0;
    const Domain& d = pc.domain;
    for (int a = 0; a < 10; ++a)
        for (int b = 0; b < 10; ++b) {
            const double x = d.x0 + (a + 0.5) / 10.0 * (d.x1 - d.x0);
            const double y = d.y0 + (b + 0.5) / 10.0 * (d.y1 - d.y0);
            worst = std::max(worst, std::abs(pde_residual(pc.coefficients, *pc.exact_solution, x, y)));
        }
    return worst;
}

inline void self_check(const ProblemCase& pc, double tolerance = 1e-8)
{
    const double res = max_pde_residual(pc);
    if (!(res <= tolerance))
        throw Error(ErrorKind::registration,
                    "problem '" + pc.name + "': exact solution violates the PDE (residual "
                        + std::to_string(res) + ")");
}

inline std::vector<std::pair<int, int>> doubling_grids(int first, int last)
{
    std::vector<std::pair<int, int>> out;
    for (int m = first; m <= last; m *= 2)
        out.emplace_back(m, m);
    return out;
}

/// Anisotropic Dirichlet problem with exact solution exp(x+y); rho = 0.9
/// makes A A^T non-diagonally-dominant.
inline ProblemCase dirichlet_exp()
{
    ProblemCase pc;
    pc.name = "dirichlet-exp";
    pc.description = "Dirichlet, f = exp(x+y), sigma1=(x+1)/2, sigma2=x+1, rho=0.9, r=1.075(x+1)^2";
    Field exact = [](double x, double y) { return std::exp(x + y); };
    pc.exact_solution = exact;
    pc.boundary = DirichletBoundary{exact};
    CoefficientSet& c = pc.coefficients;
    c.sigma1 = [](double x, double) { return (x + 1.0) / 2.0; };
    c.sigma2 = [](double x, double) { return x + 1.0; };
    c.rho = constant_field(0.9);
    c.b1 = constant_field(0.0);
    c.b2 = constant_field(0.0);
    c.r = [](double x, double) { return 1.075 * (x + 1.0) * (x + 1.0); };
    c.q = constant_field(0.0);
    pc.grids = doubling_grids(20, 640);
    return pc;
}

inline ProblemCase neumann_sine()
{
    using std::numbers::pi;
    ProblemCase pc;
    pc.name = "neumann-sine";
    pc.description = "homogeneous Neumann, f = sin(pi x - pi/2) sin(pi y - pi/2), rho=0.9, r=4";
    Field exact = [](double x, double y) {
        return std::sin(pi * x - pi / 2.0) * std::sin(pi * y - pi / 2.0);
    };
    pc.exact_solution = exact;
    pc.boundary = NeumannBoundary{};
    CoefficientSet& c = pc.coefficients;
    c.sigma1 = [](double x, double) { return (x + 1.0) / (2.0 * pi); };
    c.sigma2 = [](double x, double) { return (x + 1.0) / pi; };
    c.rho = constant_field(0.9);
    c.b1 = constant_field(0.0);
    c.b2 = constant_field(0.0);
    c.r = constant_field(4.0);
    c.q = [](double x, double y) {
        const double xp = (x + 1.0) * (x + 1.0);
        const double ss = std::sin(pi * x - pi / 2.0) * std::sin(pi * y - pi / 2.0);
        const double cc = std::cos(pi * x - pi / 2.0) * std::cos(pi * y - pi / 2.0);
        return -0.45 * xp * cc + 5.0 / 8.0 * xp * ss + 4.0 * ss;
    };
    pc.grids = doubling_grids(20, 640);
    return pc;
}

inline ProblemCase periodic_sine()
{
    using std::numbers::pi;
    ProblemCase pc;
    pc.name = "periodic-sine";
    pc.description = "doubly periodic, f = sin(2 pi x) sin(2 pi y), divergence-free drift, rho=0.9, r=4";
    Field exact = [](double x, double y) { return std::sin(2.0 * pi * x) * std::sin(2.0 * pi * y); };
    pc.exact_solution = exact;
    pc.boundary = PeriodicBoundary{};
    CoefficientSet& c = pc.coefficients;
    auto g = [](double x, double y) { return std::sin(2.0 * pi * x) * std::sin(2.0 * pi * y) + 2.0; };
    c.b1 = [](double x, double y) { return std::sin(2.0 * pi * x) * std::cos(2.0 * pi * y); };
    c.b2 = [](double x, double y) { return -std::sin(2.0 * pi * y) * std::cos(2.0 * pi * x); };
    c.sigma1 = [g](double x, double y) { return g(x, y) / (2.0 * pi); };
    c.sigma2 = [g](double x, double y) { return g(x, y) / (4.0 * pi); };
    c.rho = constant_field(0.9);
    c.r = constant_field(4.0);
    c.q = [g](double x, double y) {
        const double gg = g(x, y) * g(x, y);
        const double ss = std::sin(2.0 * pi * x) * std::sin(2.0 * pi * y);
        const double cc = std::cos(2.0 * pi * x) * std::cos(2.0 * pi * y);
        return 5.0 / 8.0 * gg * ss - 9.0 / 20.0 * gg * cc + 4.0 * ss;
    };
    pc.grids = doubling_grids(20, 640);
    return pc;
}

/// The three bundled experiments, each validated against its exact solution.
inline ProblemRegistry register_builtin_problems()
{
    ProblemRegistry reg;
    for (ProblemCase pc : {dirichlet_exp(), neumann_sine(), periodic_sine()}) {
        self_check(pc);
        std::string name = pc.name;
        reg.emplace(std::move(name), std::move(pc));
    }
    return reg;
}

} // namespace fkstencil::harness
