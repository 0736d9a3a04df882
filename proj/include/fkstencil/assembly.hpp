#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "branches.hpp"
#include "coefficients.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "interpolation.hpp"

namespace fkstencil {

/// Square sparse matrix in compressed-row form plus a right-hand side.
/// Columns are sorted and unique within a row and every row stores its
/// diagonal.
struct SparseSystem {
    int n = 0;
    std::vector<int> row_ptr{0};
    std::vector<int> cols;
    std::vector<double> values;
    std::vector<int> diag; // position of the diagonal entry of each row in cols/values
    std::vector<double> rhs;

    std::span<const int> row_cols(int row) const
    {
        return {cols.data() + row_ptr[row], static_cast<std::size_t>(row_ptr[row + 1] - row_ptr[row])};
    }
    std::span<const double> row_values(int row) const
    {
        return {values.data() + row_ptr[row], static_cast<std::size_t>(row_ptr[row + 1] - row_ptr[row])};
    }
    double diagonal(int row) const { return values[diag[row]]; }
    int nnz() const { return static_cast<int>(values.size()); }

    double row_sum(int row) const
    {
        double s = 0.0;
        for (double v : row_values(row))
            s += v;
        return s;
    }

    /// y = T x
    void multiply(std::span<const double> x, std::span<double> y) const
    {
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
                acc += values[p] * x[cols[p]];
            y[i] = acc;
        }
    }
};

/// Accumulates one row at a time; duplicate columns are summed.
class SystemBuilder {
public:
    explicit SystemBuilder(int n)
    {
        sys_.n = n;
        sys_.rhs.reserve(n);
        sys_.diag.reserve(n);
        sys_.row_ptr.reserve(n + 1);
    }

    void add(int col, double value)
    {
        for (auto& e : row_) {
            if (e.first == col) {
                e.second += value;
                return;
            }
        }
        row_.emplace_back(col, value);
    }

    void finish_row(double rhs)
    {
        const int row = static_cast<int>(sys_.rhs.size());
        bool has_diag = false;
        for (const auto& e : row_)
            has_diag = has_diag || e.first == row;
        if (!has_diag)
            row_.emplace_back(row, 0.0);
        std::sort(row_.begin(), row_.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [col, value] : row_) {
            if (col == row)
                sys_.diag.push_back(static_cast<int>(sys_.cols.size()));
            sys_.cols.push_back(col);
            sys_.values.push_back(value);
        }
        sys_.row_ptr.push_back(static_cast<int>(sys_.cols.size()));
        sys_.rhs.push_back(rhs);
        row_.clear();
    }

    SparseSystem finish()
    {
        if (static_cast<int>(sys_.rhs.size()) != sys_.n)
            throw Error(ErrorKind::invalid_argument, "system builder finished with missing rows");
        return std::move(sys_);
    }

private:
    SparseSystem sys_;
    std::vector<std::pair<int, double>> row_;
};

struct DirichletBoundary {
    Field value;
};
struct NeumannBoundary {};
struct PeriodicBoundary {};

using BoundarySpec = std::variant<DirichletBoundary, NeumannBoundary, PeriodicBoundary>;

enum class BoundaryKind { dirichlet, neumann, periodic };

inline BoundaryKind kind_of(const BoundarySpec& b) noexcept
{
    return static_cast<BoundaryKind>(b.index());
}

inline const char* to_string(BoundaryKind k) noexcept
{
    switch (k) {
    case BoundaryKind::dirichlet: return "dirichlet";
    case BoundaryKind::neumann: return "neumann";
    case BoundaryKind::periodic: return "periodic";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Unknown layout. Dirichlet and Neumann solve for every grid node; the
// periodic system drops the seam nodes i = m1 and j = m2, which alias i = 0
// and j = 0.

inline int num_unknowns(const Grid2D& g, BoundaryKind kind) noexcept
{
    return kind == BoundaryKind::periodic ? g.m1() * g.m2() : g.num_nodes();
}

inline int unknown_index(const Grid2D& g, BoundaryKind kind, NodeIndex n) noexcept
{
    if (kind == BoundaryKind::periodic)
        return (n.i % g.m1()) * g.m2() + (n.j % g.m2());
    return g.flat(n);
}

/// Nodal values on the full (m1+1) x (m2+1) grid in flat order.
inline std::vector<double> expand_solution(const Grid2D& g, BoundaryKind kind, std::span<const double> x)
{
    std::vector<double> out(g.num_nodes());
    for (int i = 0; i <= g.m1(); ++i)
        for (int j = 0; j <= g.m2(); ++j)
            out[g.flat(i, j)] = x[unknown_index(g, kind, {i, j})];
    return out;
}

// ---------------------------------------------------------------------------

inline SparseSystem assemble_dirichlet(const Grid2D& g, const CoefficientSet& c, const Field& f_boundary)
{
    SystemBuilder builder(g.num_nodes());
    for (int i = 0; i <= g.m1(); ++i) {
        for (int j = 0; j <= g.m2(); ++j) {
            const int row = g.flat(i, j);
            const Point p = g.node(i, j);
            if (g.is_boundary(i, j)) {
                builder.add(row, 1.0);
                builder.finish_row(f_boundary(p.x, p.y));
                continue;
            }
            const NodeCoefficients nc = eval_node(c, p);
            const BranchSet set = build_branchset_dirichlet(g, nc, {i, j});
            builder.add(row, 1.0);
            double rhs = 0.0;
            double mean_time = 0.0;
            for (int k = 0; k < 4; ++k) {
                const Branch& br = set.branches[k];
                const double w = set.weights[k] / (1.0 + nc.r * br.s);
                mean_time += set.weights[k] * br.s;
                if (br.kind == BranchKind::boundary_absorbed) {
                    rhs += w * f_boundary(br.endpoint.x, br.endpoint.y);
                    continue;
                }
                const Stencil st = interpolation_stencil(g, br.endpoint);
                for (int m = 0; m < 4; ++m)
                    if (st.weights[m] != 0.0)
                        builder.add(g.flat(st.nodes[m]), -w * st.weights[m]);
            }
            rhs += nc.q * mean_time;
            builder.finish_row(rhs);
        }
    }
    return builder.finish();
}

inline void require_positive_discount(const NodeCoefficients& nc, Point p)
{
    if (!(nc.r > 0.0))
        throw Error(ErrorKind::assumption_violation,
                    "r must be strictly positive (r = " + std::to_string(nc.r) + " at ("
                        + std::to_string(p.x) + ", " + std::to_string(p.y) + "))");
}

/// Interior rows use the reflected branches; boundary rows copy the adjacent
/// interior value along x first, so corners chain through their x neighbour.
inline SparseSystem assemble_neumann(const Grid2D& g, const CoefficientSet& c)
{
    SystemBuilder builder(g.num_nodes());
    const double h = g.h();
    for (int i = 0; i <= g.m1(); ++i) {
        for (int j = 0; j <= g.m2(); ++j) {
            const int row = g.flat(i, j);
            if (g.is_boundary(i, j)) {
                NodeIndex src{i, j};
                if (i == 0)
                    src.i = 1;
                else if (i == g.m1())
                    src.i = g.m1() - 1;
                else if (j == 0)
                    src.j = 1;
                else
                    src.j = g.m2() - 1;
                builder.add(row, 1.0);
                builder.add(g.flat(src), -1.0);
                builder.finish_row(0.0);
                continue;
            }
            const Point p = g.node(i, j);
            const NodeCoefficients nc = eval_node(c, p);
            require_positive_discount(nc, p);
            const BranchSet set = build_branchset_neumann(g, nc, {i, j});
            const double w = 0.25 / (1.0 + nc.r * h);
            builder.add(row, 1.0);
            for (const Branch& br : set.branches) {
                const Stencil st = interpolation_stencil(g, br.endpoint);
                for (int m = 0; m < 4; ++m)
                    if (st.weights[m] != 0.0)
                        builder.add(g.flat(st.nodes[m]), -w * st.weights[m]);
            }
            builder.finish_row(nc.q * h);
        }
    }
    return builder.finish();
}

/// Coefficients (and the source) must agree across opposite walls.
inline void check_seam_consistency(const Grid2D& g, const CoefficientSet& c)
{
    const std::pair<const char*, const Field*> fields[] = {
        {"sigma1", &c.sigma1}, {"sigma2", &c.sigma2}, {"rho", &c.rho}, {"b1", &c.b1},
        {"b2", &c.b2},         {"r", &c.r},           {"q", &c.q},
    };
    auto agree = [](double a, double b) {
        return std::abs(a - b) <= 1e-10 * std::max({1.0, std::abs(a), std::abs(b)});
    };
    const int ny = 4 * g.m2();
    const int nx = 4 * g.m1();
    for (const auto& [name, field] : fields) {
        const Field& f = *field;
        for (int j = 0; j <= ny; ++j) {
            const double y = g.y0() + j * (g.length_y() / ny);
            if (!agree(f(g.x0(), y), f(g.x1(), y)))
                throw Error(ErrorKind::configuration,
                            std::string("coefficient ") + name + " is not periodic in x");
        }
        for (int i = 0; i <= nx; ++i) {
            const double x = g.x0() + i * (g.length_x() / nx);
            if (!agree(f(x, g.y0()), f(x, g.y1())))
                throw Error(ErrorKind::configuration,
                            std::string("coefficient ") + name + " is not periodic in y");
        }
    }
}

inline SparseSystem assemble_periodic(const Grid2D& g, const CoefficientSet& c)
{
    check_seam_consistency(g, c);
    const double h = g.h();
    SystemBuilder builder(num_unknowns(g, BoundaryKind::periodic));
    for (int i = 0; i < g.m1(); ++i) {
        for (int j = 0; j < g.m2(); ++j) {
            const int row = unknown_index(g, BoundaryKind::periodic, {i, j});
            const Point p = g.node(i, j);
            const NodeCoefficients nc = eval_node(c, p);
            require_positive_discount(nc, p);
            const BranchSet set = build_branchset_periodic(g, nc, {i, j});
            const double w = 0.25 / (1.0 + nc.r * h);
            builder.add(row, 1.0);
            for (const Branch& br : set.branches) {
                const Stencil st = interpolation_stencil(g, br.endpoint);
                for (int m = 0; m < 4; ++m)
                    if (st.weights[m] != 0.0)
                        builder.add(unknown_index(g, BoundaryKind::periodic, st.nodes[m]),
                                    -w * st.weights[m]);
            }
            builder.finish_row(nc.q * h);
        }
    }
    return builder.finish();
}

inline SparseSystem assemble(const Grid2D& g, const CoefficientSet& c, const BoundarySpec& boundary)
{
    return std::visit(
        [&](const auto& b) -> SparseSystem {
            using B = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<B, DirichletBoundary>)
                return assemble_dirichlet(g, c, b.value);
            else if constexpr (std::is_same_v<B, NeumannBoundary>)
                return assemble_neumann(g, c);
            else
                return assemble_periodic(g, c);
        },
        boundary);
}

// ---------------------------------------------------------------------------

struct MMatrixReport {
    bool positive_diagonal = true;
    bool nonpositive_offdiagonal = true;
    bool nonnegative_row_sums = true;
    bool strict_row_exists = false;

    double min_diagonal = std::numeric_limits<double>::infinity();
    double max_offdiagonal = -std::numeric_limits<double>::infinity();
    double min_row_sum = std::numeric_limits<double>::infinity();
    double max_row_sum = -std::numeric_limits<double>::infinity();

    bool ok() const noexcept
    {
        return positive_diagonal && nonpositive_offdiagonal && nonnegative_row_sums && strict_row_exists;
    }
};

/// Smallest row sum an interior row may have: r0 h / (1 + r0 h) with r0 the
/// minimum of r over interior nodes.
inline double strict_row_sum_floor(const Grid2D& g, const CoefficientSet& c)
{
    double r0 = std::numeric_limits<double>::infinity();
    for (int i = 1; i < g.m1(); ++i)
        for (int j = 1; j < g.m2(); ++j) {
            const Point p = g.node(i, j);
            r0 = std::min(r0, c.r(p.x, p.y));
        }
    const double rh = std::max(r0, 0.0) * g.h();
    return rh / (1.0 + rh);
}

/// Checks (a) T_ii > 0, (b) T_ij <= 0 for i != j, (c) row sums >= -1e-12 and
/// (d) some row sum is strictly positive and at least strict_floor - 1e-12.
inline MMatrixReport verify_m_matrix(const SparseSystem& s, double strict_floor = 0.0)
{
    constexpr double slack = 1e-12;
    MMatrixReport rep;
    for (int i = 0; i < s.n; ++i) {
        const auto cols = s.row_cols(i);
        const auto vals = s.row_values(i);
        double sum = 0.0;
        for (std::size_t p = 0; p < cols.size(); ++p) {
            sum += vals[p];
            if (cols[p] == i) {
                rep.min_diagonal = std::min(rep.min_diagonal, vals[p]);
                if (!(vals[p] > 0.0))
                    rep.positive_diagonal = false;
            } else {
                rep.max_offdiagonal = std::max(rep.max_offdiagonal, vals[p]);
                if (!(vals[p] <= 0.0))
                    rep.nonpositive_offdiagonal = false;
            }
        }
        rep.min_row_sum = std::min(rep.min_row_sum, sum);
        rep.max_row_sum = std::max(rep.max_row_sum, sum);
        if (!(sum >= -slack))
            rep.nonnegative_row_sums = false;
        if (sum > 0.0 && sum >= strict_floor - slack)
            rep.strict_row_exists = true;
    }
    return rep;
}

/// Text dump: "row col value" per stored entry, then a "# rhs" section with
/// "row value" per row. Values carry 17 significant digits.
inline void write_triplets(const SparseSystem& s, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::io, "cannot open " + path + " for writing");
    char buf[96];
    out << "# n " << s.n << " nnz " << s.nnz() << '\n';
    for (int i = 0; i < s.n; ++i) {
        const auto cols = s.row_cols(i);
        const auto vals = s.row_values(i);
        for (std::size_t p = 0; p < cols.size(); ++p) {
            std::snprintf(buf, sizeof buf, "%d %d %.17g\n", i, cols[p], vals[p]);
            out << buf;
        }
    }
    out << "# rhs\n";
    for (int i = 0; i < s.n; ++i) {
        std::snprintf(buf, sizeof buf, "%d %.17g\n", i, s.rhs[i]);
        out << buf;
    }
    if (!out)
        throw Error(ErrorKind::io, "failed while writing " + path);
}

} // namespace fkstencil
