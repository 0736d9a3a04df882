#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "error.hpp"
#include "grid.hpp"

namespace fkstencil {

using Field = std::function<double(double, double)>;

inline Field constant_field(double value)
{
    return [value](double, double) { return value; };
}

/// Coefficients of
///   1/2 Tr(A A^T D^2 f) + B.grad f - r f + q = 0,
/// with A A^T = [[s1^2, rho s1 s2], [rho s1 s2, s2^2]] and B = (b1, b2).
/// Fields must be pure; they are evaluated from many call sites.
struct CoefficientSet {
    Field sigma1 = constant_field(1.0);
    Field sigma2 = constant_field(1.0);
    Field rho = constant_field(0.0);
    Field b1 = constant_field(0.0);
    Field b2 = constant_field(0.0);
    Field r = constant_field(1.0);
    Field q = constant_field(0.0);
};

/// Coefficients frozen at one point, together with the rotation parameters
/// theta = asin(rho)/2, alpha = sin+cos, beta = sin-cos.
struct NodeCoefficients {
    double b1 = 0.0, b2 = 0.0;
    double sigma1 = 1.0, sigma2 = 1.0;
    double rho = 0.0;
    double r = 0.0, q = 0.0;
    double theta = 0.0;
    double alpha = 1.0, beta = -1.0;
};

inline double rotation_angle(double rho) noexcept { return std::asin(rho) / 2.0; }

inline NodeCoefficients eval_node(const CoefficientSet& c, Point p)
{
    NodeCoefficients nc;
    nc.sigma1 = c.sigma1(p.x, p.y);
    nc.sigma2 = c.sigma2(p.x, p.y);
    nc.rho = c.rho(p.x, p.y);
    nc.b1 = c.b1(p.x, p.y);
    nc.b2 = c.b2(p.x, p.y);
    nc.r = c.r(p.x, p.y);
    nc.q = c.q(p.x, p.y);

    if (!(std::abs(nc.rho) <= 1.0 + 1e-12))
        throw Error(ErrorKind::invalid_correlation,
                    "|rho| = " + std::to_string(nc.rho) + " exceeds 1");
    if (!(nc.sigma1 > 0.0) || !(nc.sigma2 > 0.0))
        throw Error(ErrorKind::degenerate_diffusion, "sigma1 and sigma2 must be positive");

    nc.rho = std::clamp(nc.rho, -1.0, 1.0);
    nc.theta = rotation_angle(nc.rho);
    const double s = std::sin(nc.theta);
    const double co = std::cos(nc.theta);
    nc.alpha = s + co;
    nc.beta = s - co;
    return nc;
}

/// Change of unknown f = m(x) w with m(x) = 2 - exp(-a (x - x0)), which turns
/// a problem with r >= 0 into one whose zeroth-order coefficient is bounded
/// away from zero. Once a (x - x0) exceeds about 700 the exponential
/// underflows and the transformed r is exactly 0 there.
struct PositivityTransform {
    CoefficientSet transformed;
    double a = 0.0;
    double x0 = 0.0;

    double multiplier(double x) const { return 2.0 - std::exp(-a * (x - x0)); }

    /// Dirichlet data for w.
    Field boundary_for_w(Field f_boundary) const
    {
        return [f = std::move(f_boundary), a = a, x0 = x0](double x, double y) {
            return f(x, y) / (2.0 - std::exp(-a * (x - x0)));
        };
    }

    double recover(double w, double x) const { return multiplier(x) * w; }
};

/// Bounds sup|B| and inf sigma1^2 are estimated on a (4 m1 + 1) x (4 m2 + 1)
/// lattice over the closed domain of g.
inline PositivityTransform strict_positivity_transform(const CoefficientSet& c, const Grid2D& g)
{
    const int nx = 4 * g.m1();
    const int ny = 4 * g.m2();
    double sup_b = 0.0;
    double inf_s1sq = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= nx; ++i) {
        const double x = i == nx ? g.x1() : g.x0() + i * (g.length_x() / nx);
        for (int j = 0; j <= ny; ++j) {
            const double y = j == ny ? g.y1() : g.y0() + j * (g.length_y() / ny);
            sup_b = std::max(sup_b, std::hypot(c.b1(x, y), c.b2(x, y)));
            const double s1 = c.sigma1(x, y);
            inf_s1sq = std::min(inf_s1sq, s1 * s1);
        }
    }
    if (!std::isfinite(sup_b) || !(inf_s1sq > 0.0) || !std::isfinite(inf_s1sq))
        throw Error(ErrorKind::transform_unavailable,
                    "need finite sup|b| and positive inf sigma1^2");

    PositivityTransform t;
    t.x0 = g.x0();
    t.a = 2.0 * (sup_b + 1.0) / inf_s1sq;

    const double a = t.a;
    const double x0 = t.x0;
    auto decay = [a, x0](double x) { return std::exp(-a * (x - x0)); };

    CoefficientSet& w = t.transformed;
    w.rho = c.rho;
    w.q = c.q;
    w.sigma1 = [s1 = c.sigma1, decay](double x, double y) {
        return s1(x, y) * std::sqrt(2.0 - decay(x));
    };
    w.sigma2 = [s2 = c.sigma2, decay](double x, double y) {
        return s2(x, y) * std::sqrt(2.0 - decay(x));
    };
    w.b1 = [s1 = c.sigma1, b1 = c.b1, a, decay](double x, double y) {
        const double e = decay(x);
        const double s = s1(x, y);
        return s * s * a * e + (2.0 - e) * b1(x, y);
    };
    w.b2 = [s1 = c.sigma1, s2 = c.sigma2, rho = c.rho, b2 = c.b2, a, decay](double x, double y) {
        const double e = decay(x);
        return (2.0 - e) * b2(x, y) + rho(x, y) * s1(x, y) * s2(x, y) * a * e;
    };
    w.r = [s1 = c.sigma1, b1 = c.b1, r = c.r, a, decay](double x, double y) {
        const double e = decay(x);
        const double s = s1(x, y);
        return 0.5 * s * s * a * a * e - b1(x, y) * a * e + (2.0 - e) * r(x, y);
    };
    return t;
}

} // namespace fkstencil
