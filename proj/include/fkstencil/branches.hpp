#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "coefficients.hpp"
#include "error.hpp"
#include "grid.hpp"

namespace fkstencil {

enum class BranchKind { interior, boundary_absorbed, reflected, wrapped };

/// One of the four discrete paths leaving a node.
struct Branch {
    int k = 1;         // 1..4
    double s = 0.0;    // time parameter in (0, h]
    Point endpoint;
    BranchKind kind = BranchKind::interior;
};

struct BranchSet {
    std::array<Branch, 4> branches;
    std::array<double, 4> weights{0.25, 0.25, 0.25, 0.25};
};

/// Coefficients multiplying sqrt(s) in each coordinate of branch k.
///   k=1: ( alpha s1,  alpha s2)   k=2: (-beta s1,  beta s2)
///   k=3: (-alpha s1, -alpha s2)   k=4: ( beta s1, -beta s2)
inline Point diffusion_direction(const NodeCoefficients& nc, int k)
{
    switch (k) {
    case 1: return {nc.alpha * nc.sigma1, nc.alpha * nc.sigma2};
    case 2: return {-nc.beta * nc.sigma1, nc.beta * nc.sigma2};
    case 3: return {-nc.alpha * nc.sigma1, -nc.alpha * nc.sigma2};
    case 4: return {nc.beta * nc.sigma1, -nc.beta * nc.sigma2};
    default: throw Error(ErrorKind::invalid_argument, "branch id must be 1..4");
    }
}

inline Point branch_displacement(const NodeCoefficients& nc, int k, double s)
{
    const Point c = diffusion_direction(nc, k);
    const double rs = std::sqrt(s);
    return {nc.b1 * s + c.x * rs, nc.b2 * s + c.y * rs};
}

namespace detail {

// Smallest root u > 0 of b u^2 + c u + d = 0, or +inf. Uses the
// cancellation-free form of the quadratic formula.
inline double smallest_positive_root(double b, double c, double d)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    constexpr double trivial = 1e-14;
    double best = inf;
    auto take = [&](double u) {
        if (std::isfinite(u) && u > trivial && u < best)
            best = u;
    };
    if (b == 0.0) {
        if (c != 0.0)
            take(-d / c);
        return best;
    }
    const double disc = c * c - 4.0 * b * d;
    if (disc < 0.0)
        return inf;
    const double sq = std::sqrt(disc);
    const double qq = -0.5 * (c + std::copysign(sq, c));
    if (qq != 0.0) {
        take(qq / b);
        take(d / qq);
    } else {
        // c == 0 and disc == 0 implies d == 0: only the trivial root.
        take(0.0);
    }
    return best;
}

} // namespace detail

struct HittingTime {
    double s = 0.0;          // min(h, first crossing)
    bool hit = false;        // a wall is reached at some s <= h
    int axis = -1;           // 0: x wall, 1: y wall
    double wall = 0.0;       // coordinate of the wall reached
};

/// First s in (0,h] at which origin + b s + c sqrt(s) leaves the open domain.
/// Each wall gives a quadratic in u = sqrt(s); the earliest positive root wins.
inline HittingTime hitting_time(const Grid2D& g, const NodeCoefficients& nc, Point origin, int k)
{
    const double tol = g.tolerance();
    if (!(origin.x > g.x0() + tol && origin.x < g.x1() - tol && origin.y > g.y0() + tol
          && origin.y < g.y1() - tol))
        throw Error(ErrorKind::precondition, "hitting time requested from a boundary point");

    const Point c = diffusion_direction(nc, k);
    const double h = g.h();
    const double umax = std::sqrt(h);

    HittingTime out;
    out.s = h;
    double best_u = std::numeric_limits<double>::infinity();
    auto consider = [&](double drift, double diff, double p0, double wall, int axis) {
        const double u = detail::smallest_positive_root(drift, diff, p0 - wall);
        if (u < best_u) {
            best_u = u;
            out.axis = axis;
            out.wall = wall;
        }
    };
    consider(nc.b1, c.x, origin.x, g.x0(), 0);
    consider(nc.b1, c.x, origin.x, g.x1(), 0);
    consider(nc.b2, c.y, origin.y, g.y0(), 1);
    consider(nc.b2, c.y, origin.y, g.y1(), 1);

    if (best_u <= umax) {
        out.hit = true;
        out.s = std::min(h, best_u * best_u);
    } else {
        out.axis = -1;
        out.wall = 0.0;
    }
    return out;
}

/// Closed-form branch probabilities that restore moment matching when some
/// branches stop early.
inline std::array<double, 4> branch_weights(double s1, double s2, double s3, double s4)
{
    if (!(s1 > 0.0) || !(s2 > 0.0) || !(s3 > 0.0) || !(s4 > 0.0))
        throw Error(ErrorKind::invalid_hitting_time, "hitting times must be positive");
    if (s1 == s2 && s2 == s3 && s3 == s4)
        return {0.25, 0.25, 0.25, 0.25};

    const double r1 = std::sqrt(s1), r2 = std::sqrt(s2), r3 = std::sqrt(s3), r4 = std::sqrt(s4);
    const double cross = r1 * r3 + r2 * r4;
    const double d13 = (r1 + r3) * cross;
    const double d24 = (r2 + r4) * cross;
    return {
        r2 * r3 * r4 / d13,
        r1 * r3 * r4 / d24,
        r1 * r2 * r4 / d13,
        r1 * r2 * r3 / d24,
    };
}

inline std::array<double, 4> branch_weights(const std::array<double, 4>& s)
{
    return branch_weights(s[0], s[1], s[2], s[3]);
}

/// Dirichlet branches: each path is stopped at its hitting time; stopped or
/// wall-touching endpoints are absorbed and snapped onto the boundary.
inline BranchSet build_branchset_dirichlet(const Grid2D& g, const NodeCoefficients& nc, NodeIndex node)
{
    const Point origin = g.node(node);
    BranchSet set;
    std::array<double, 4> s{};
    for (int k = 1; k <= 4; ++k) {
        const HittingTime ht = hitting_time(g, nc, origin, k);
        Branch& br = set.branches[k - 1];
        br.k = k;
        br.s = ht.s;
        br.endpoint = origin + branch_displacement(nc, k, ht.s);
        if (ht.hit) {
            if (ht.axis == 0)
                br.endpoint.x = ht.wall;
            else
                br.endpoint.y = ht.wall;
            br.endpoint = g.clamp(br.endpoint);
            br.kind = BranchKind::boundary_absorbed;
        } else if (g.on_boundary(br.endpoint) || !g.contains(br.endpoint)) {
            br.endpoint = g.clamp(br.endpoint);
            br.kind = BranchKind::boundary_absorbed;
        } else {
            br.kind = BranchKind::interior;
        }
        s[k - 1] = br.s;
    }
    set.weights = branch_weights(s);
    return set;
}

/// Mirror image of a coordinate across whichever wall it overshoots.
inline double reflect_coordinate(double v, double lo, double hi) noexcept
{
    if (v < lo)
        return 2.0 * lo - v;
    if (v > hi)
        return 2.0 * hi - v;
    return v;
}

inline BranchSet build_branchset_neumann(const Grid2D& g, const NodeCoefficients& nc, NodeIndex node)
{
    const Point origin = g.node(node);
    const double h = g.h();
    const double tol = g.tolerance();
    BranchSet set;
    for (int k = 1; k <= 4; ++k) {
        Branch& br = set.branches[k - 1];
        br.k = k;
        br.s = h;
        const Point proposed = origin + branch_displacement(nc, k, h);
        br.endpoint = {reflect_coordinate(proposed.x, g.x0(), g.x1()),
                       reflect_coordinate(proposed.y, g.y0(), g.y1())};
        if (!g.contains(br.endpoint))
            throw Error(ErrorKind::step_too_large,
                        "reflected branch endpoint still leaves the domain; refine the grid");
        br.endpoint = g.clamp(br.endpoint);
        const bool moved = std::abs(br.endpoint.x - proposed.x) > tol
                           || std::abs(br.endpoint.y - proposed.y) > tol;
        br.kind = moved ? BranchKind::reflected : BranchKind::interior;
    }
    return set;
}

/// Coordinate-wise mathematical modulus into [lo, lo + period).
inline double wrap_coordinate(double v, double lo, double period) noexcept
{
    double m = std::fmod(v - lo, period);
    if (m < 0.0)
        m += period;
    if (m >= period)
        m = 0.0;
    return lo + m;
}

inline Point wrap_point(const Grid2D& g, Point p) noexcept
{
    return {wrap_coordinate(p.x, g.x0(), g.length_x()), wrap_coordinate(p.y, g.y0(), g.length_y())};
}

inline BranchSet build_branchset_periodic(const Grid2D& g, const NodeCoefficients& nc, NodeIndex node)
{
    if (node.i < 0 || node.j < 0 || node.i >= g.m1() || node.j >= g.m2())
        throw Error(ErrorKind::precondition, "periodic branches start from the fundamental cell");
    const Point origin = g.node(node);
    const double h = g.h();
    BranchSet set;
    for (int k = 1; k <= 4; ++k) {
        Branch& br = set.branches[k - 1];
        br.k = k;
        br.s = h;
        const Point proposed = origin + branch_displacement(nc, k, h);
        br.endpoint = wrap_point(g, proposed);
        br.kind = br.endpoint == proposed ? BranchKind::interior : BranchKind::wrapped;
    }
    return set;
}

} // namespace fkstencil
