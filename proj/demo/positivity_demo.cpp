// Nonnegative data in, nonnegative solution out: a strongly correlated
// (rho = -0.95) problem with a hot spot in the source and zero walls.

#include <cstdio>
#include <cmath>

#include <fkstencil/fkstencil.hpp>

int main()
{
    namespace fk = fkstencil;

    const fk::Grid2D g = fk::make_grid(0.0, 1.0, 0.0, 1.0, 64, 64);

    fk::CoefficientSet c;
    c.sigma1 = fk::constant_field(0.3);
    c.sigma2 = fk::constant_field(0.8);
    c.rho = fk::constant_field(-0.95);
    c.b1 = [](double, double y) { return 0.5 * (y - 0.5); };
    c.b2 = fk::constant_field(0.0);
    c.r = fk::constant_field(0.5);
    c.q = [](double x, double y) {
        const double dx = x - 0.3, dy = y - 0.6;
        return std::exp(-200.0 * (dx * dx + dy * dy));
    };

    const fk::SparseSystem sys = fk::assemble_dirichlet(g, c, fk::constant_field(0.0));
    const fk::MMatrixReport rep = fk::verify_m_matrix(sys, fk::strict_row_sum_floor(g, c));
    const fk::SolveResult res = fk::solve(sys);

    double lo = res.solution[0], hi = res.solution[0];
    for (double v : res.solution) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::printf("unknowns %d, nnz %d, M-matrix %s\n", sys.n, sys.nnz(), rep.ok() ? "yes" : "NO");
    std::printf("Gauss-Seidel: %ld iterations, residual %.2e\n", res.iterations, res.final_relative_residual);
    std::printf("solution range [%.3e, %.3e]\n", lo, hi);
    return lo >= -1e-12 ? 0 : 1;
}
