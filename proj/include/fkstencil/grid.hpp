#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "error.hpp"

namespace fkstencil {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend Point operator+(Point a, Point b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend bool operator==(Point, Point) = default;
};

struct NodeIndex {
    int i = 0;
    int j = 0;

    friend bool operator==(NodeIndex, NodeIndex) = default;
};

/// Uniform tensor grid over [x0,x1] x [y0,y1] with (m1+1)(m2+1) nodes.
///
/// Nodes are addressed by a single global flat index i*(m2+1)+j that covers
/// boundary nodes too; every assembly path shares this layout.
class Grid2D {
public:
    Grid2D(double x0, double x1, double y0, double y1, int m1, int m2)
        : x0_(x0), x1_(x1), y0_(y0), y1_(y1), m1_(m1), m2_(m2)
    {
        if (!(x1 > x0) || !(y1 > y0))
            throw Error(ErrorKind::invalid_grid, "domain extents must be positive");
        if (m1 < 2 || m2 < 2)
            throw Error(ErrorKind::invalid_grid,
                        "cell counts must be at least 2 (got " + std::to_string(m1) + "x"
                            + std::to_string(m2) + ")");
        h1_ = (x1 - x0) / m1;
        h2_ = (y1 - y0) / m2;
        h_ = std::min(h1_, h2_);
    }

    double x0() const noexcept { return x0_; }
    double x1() const noexcept { return x1_; }
    double y0() const noexcept { return y0_; }
    double y1() const noexcept { return y1_; }
    int m1() const noexcept { return m1_; }
    int m2() const noexcept { return m2_; }
    double h1() const noexcept { return h1_; }
    double h2() const noexcept { return h2_; }
    double h() const noexcept { return h_; }
    double length_x() const noexcept { return x1_ - x0_; }
    double length_y() const noexcept { return y1_ - y0_; }

    int num_nodes() const noexcept { return (m1_ + 1) * (m2_ + 1); }

    double x(int i) const noexcept { return i == m1_ ? x1_ : x0_ + i * h1_; }
    double y(int j) const noexcept { return j == m2_ ? y1_ : y0_ + j * h2_; }
    Point node(int i, int j) const noexcept { return {x(i), y(j)}; }
    Point node(NodeIndex n) const noexcept { return node(n.i, n.j); }

    int flat(int i, int j) const noexcept { return i * (m2_ + 1) + j; }
    int flat(NodeIndex n) const noexcept { return flat(n.i, n.j); }
    NodeIndex unflat(int k) const noexcept { return {k / (m2_ + 1), k % (m2_ + 1)}; }

    bool is_boundary(int i, int j) const noexcept
    {
        return i == 0 || j == 0 || i == m1_ || j == m2_;
    }
    bool is_boundary(NodeIndex n) const noexcept { return is_boundary(n.i, n.j); }

    /// Absolute slack used for "on the boundary" and "inside the closed domain" tests.
    double tolerance() const noexcept
    {
        return 1e-12 * std::max({std::abs(x1_), std::abs(y1_), 1.0});
    }

    bool contains(Point p) const noexcept
    {
        const double tol = tolerance();
        return p.x >= x0_ - tol && p.x <= x1_ + tol && p.y >= y0_ - tol && p.y <= y1_ + tol;
    }

    /// True when p is inside the closed domain but within tolerance of a wall.
    bool on_boundary(Point p) const noexcept
    {
        const double tol = tolerance();
        return contains(p)
               && (p.x <= x0_ + tol || p.x >= x1_ - tol || p.y <= y0_ + tol || p.y >= y1_ - tol);
    }

    Point clamp(Point p) const noexcept
    {
        return {std::clamp(p.x, x0_, x1_), std::clamp(p.y, y0_, y1_)};
    }

private:
    double x0_, x1_, y0_, y1_;
    int m1_, m2_;
    double h1_ = 0.0, h2_ = 0.0, h_ = 0.0;
};

inline Grid2D make_grid(double x0, double x1, double y0, double y1, int m1, int m2)
{
    return Grid2D(x0, x1, y0, y1, m1, m2);
}

struct CellLocation {
    NodeIndex cell; // lower-left corner of the containing cell
    double u = 0.0; // local coordinates in [0,1]
    double v = 0.0;
};

namespace detail {

// Position along one axis measured in cells, snapped onto a node when within
// a few ulps of it so that nodes map to local coordinates exactly 0 or 1.
inline void locate_axis(double p, double lo, double spacing, int cells, int& cell, double& local)
{
    double t = (p - lo) / spacing;
    const double nearest = std::round(t);
    if (std::abs(t - nearest) <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, nearest))
        t = nearest;
    t = std::clamp(t, 0.0, static_cast<double>(cells));
    // Edge ties go to the lower-indexed cell.
    int k = static_cast<int>(std::ceil(t)) - 1;
    k = std::clamp(k, 0, cells - 1);
    cell = k;
    local = std::clamp(t - k, 0.0, 1.0);
}

} // namespace detail

/// Cell containing p and its local coordinates; p may sit on the boundary.
inline CellLocation locate_cell(const Grid2D& g, Point p)
{
    if (!g.contains(p))
        throw Error(ErrorKind::out_of_domain,
                    "point (" + std::to_string(p.x) + ", " + std::to_string(p.y)
                        + ") lies outside the closed domain");
    CellLocation loc;
    detail::locate_axis(p.x, g.x0(), g.h1(), g.m1(), loc.cell.i, loc.u);
    detail::locate_axis(p.y, g.y0(), g.h2(), g.m2(), loc.cell.j, loc.v);
    return loc;
}

} // namespace fkstencil
