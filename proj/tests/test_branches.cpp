#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <fkstencil/branches.hpp>

#include "oracles.hpp"

using namespace fkstencil;

namespace {

NodeCoefficients node_coefficients(double rho, double s1 = 1.0, double s2 = 1.0, double b1 = 0.0, double b2 = 0.0)
{
    CoefficientSet c;
    c.rho = constant_field(rho);
    c.sigma1 = constant_field(s1);
    c.sigma2 = constant_field(s2);
    c.b1 = constant_field(b1);
    c.b2 = constant_field(b2);
    return eval_node(c, {0, 0});
}

void expect_weight_identities(const std::array<double, 4>& s, const std::array<double, 4>& w, double h)
{
    double sum = 0.0;
    for (double v : w) {
        EXPECT_GE(v, 0.0);
        sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_NEAR(w[0] * s[0] + w[2] * s[2] - w[1] * s[1] - w[3] * s[3], 0.0, 1e-12 * h);
    EXPECT_NEAR(w[0] * std::sqrt(s[0]), w[2] * std::sqrt(s[2]), 1e-12);
    EXPECT_NEAR(w[1] * std::sqrt(s[1]), w[3] * std::sqrt(s[3]), 1e-12);
}

} // namespace

TEST(BranchDisplacement, ZeroTime)
{
    const NodeCoefficients nc = node_coefficients(0.3, 0.7, 1.2, 0.4, -0.1);
    for (int k = 1; k <= 4; ++k) {
        const Point d = branch_displacement(nc, k, 0.0);
        EXPECT_EQ(d.x, 0.0);
        EXPECT_EQ(d.y, 0.0);
    }
}

TEST(BranchDisplacement, UncorrelatedBranchesHitDiagonalNeighbours)
{
    const double h = 0.04;
    const NodeCoefficients nc = node_coefficients(0.0);
    const double r = std::sqrt(h);
    const Point expected[4] = {{r, r}, {r, -r}, {-r, -r}, {-r, r}};
    for (int k = 1; k <= 4; ++k) {
        const Point d = branch_displacement(nc, k, h);
        EXPECT_DOUBLE_EQ(d.x, expected[k - 1].x);
        EXPECT_DOUBLE_EQ(d.y, expected[k - 1].y);
        EXPECT_NEAR(std::hypot(d.x, d.y), std::sqrt(2 * h), 1e-15);
    }
}

TEST(BranchDisplacement, StrongCorrelationSignPattern)
{
    const NodeCoefficients nc = node_coefficients(0.9);
    const double theta = std::asin(0.9) / 2;
    const double alpha = std::sin(theta) + std::cos(theta);
    const double beta = std::sin(theta) - std::cos(theta);
    EXPECT_NEAR(-beta, std::sqrt(1 - 0.9), 1e-15);
    EXPECT_NEAR(alpha, std::sqrt(1 + 0.9), 1e-15);
    const Point d2 = branch_displacement(nc, 2, 1.0);
    const Point d4 = branch_displacement(nc, 4, 1.0);
    EXPECT_DOUBLE_EQ(d2.x, -beta);
    EXPECT_DOUBLE_EQ(d2.y, beta);
    EXPECT_DOUBLE_EQ(d4.x, beta);
    EXPECT_DOUBLE_EQ(d4.y, -beta);
    const Point d1 = branch_displacement(nc, 1, 1.0);
    const Point d3 = branch_displacement(nc, 3, 1.0);
    EXPECT_DOUBLE_EQ(d1.x, alpha);
    EXPECT_DOUBLE_EQ(d1.y, alpha);
    EXPECT_DOUBLE_EQ(d3.x, -alpha);
    EXPECT_DOUBLE_EQ(d3.y, -alpha);
}

TEST(HittingTime, DeepInteriorUsesFullStep)
{
    const Grid2D g = make_grid(0, 1, 0, 1, 100, 100);
    const NodeCoefficients nc = node_coefficients(0.5, 0.8, 0.6, 0.3, -0.2);
    for (int k = 1; k <= 4; ++k) {
        const HittingTime ht = hitting_time(g, nc, g.node(50, 50), k);
        EXPECT_EQ(ht.s, g.h());
        EXPECT_FALSE(ht.hit);
    }
}

TEST(HittingTime, ClosedFormWallCrossing)
{
    // rho = 1, sigma1 = 1, no drift; origin 0.01 from the right wall:
    // sqrt(2) sqrt(s) = 0.01  =>  s = 5e-5.
    const Grid2D g = make_grid(0, 1, 0, 1, 50, 50); // h = 0.02
    const NodeCoefficients nc = node_coefficients(1.0);
    const Point origin{0.99, 0.5};
    const HittingTime ht = hitting_time(g, nc, origin, 1);
    EXPECT_TRUE(ht.hit);
    EXPECT_EQ(ht.axis, 0);
    EXPECT_EQ(ht.wall, 1.0);
    EXPECT_NEAR(ht.s, 5e-5, 1e-15);
    EXPECT_NEAR(reference::bisection_hitting_time(g, nc, origin, 1), 5e-5, 1e-10);
}

TEST(HittingTime, OriginOnBoundaryIsRejected)
{
    const Grid2D g = make_grid(0, 1, 0, 1, 10, 10);
    try {
        hitting_time(g, node_coefficients(0.0), g.node(0, 4), 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::precondition);
    }
}

TEST(HittingTime, MatchesBisectionOracle)
{
    std::mt19937_64 rng(2024);
    int early = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto cfg = reference::random_configuration(rng);
        const Point origin = cfg.grid.node(cfg.node);
        for (int k = 1; k <= 4; ++k) {
            const double closed = hitting_time(cfg.grid, cfg.nc, origin, k).s;
            const double oracle = reference::bisection_hitting_time(cfg.grid, cfg.nc, origin, k);
            ASSERT_NEAR(closed, oracle, 1e-10) << "trial " << trial << " branch " << k;
            early += closed < cfg.grid.h();
        }
    }
    EXPECT_GT(early, 500); // the sample really exercises wall crossings
}

TEST(BranchWeights, SymmetricCases)
{
    const auto w = branch_weights(0.05, 0.05, 0.05, 0.05);
    for (double v : w)
        EXPECT_EQ(v, 0.25);
    const auto p = branch_weights(0.01, 0.03, 0.01, 0.03);
    EXPECT_DOUBLE_EQ(p[0], p[2]);
    EXPECT_DOUBLE_EQ(p[1], p[3]);
}

TEST(BranchWeights, OneShortBranch)
{
    const double h = 0.05;
    const std::array<double, 4> s{h, h, h / 4, h};
    const auto w = branch_weights(s);
    // Direct evaluation: sqrt terms r = sqrt(h), r3 = sqrt(h)/2.
    const double r = std::sqrt(h), r3 = r / 2;
    const double cross = r * r3 + r * r;
    EXPECT_NEAR(w[0], r * r3 * r / ((r + r3) * cross), 1e-15);
    EXPECT_NEAR(w[2], r * r * r / ((r + r3) * cross), 1e-15);
    EXPECT_NEAR(w[0], 2.0 / 9.0, 1e-15);
    EXPECT_NEAR(w[2], 4.0 / 9.0, 1e-15);
    EXPECT_NEAR(w[1], 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(w[3], 1.0 / 6.0, 1e-15);
    expect_weight_identities(s, w, h);
}

TEST(BranchWeights, IdentitiesOnRandomDraws)
{
    std::mt19937_64 rng(99);
    const double h = 0.05;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int n = 0; n < 100000; ++n) {
        std::array<double, 4> s;
        for (double& v : s)
            v = h * (1.0 - u(rng)); // (0, h]
        const auto w = branch_weights(s);
        double sum = 0.0;
        for (double v : w) {
            ASSERT_GE(v, 0.0);
            sum += v;
        }
        ASSERT_NEAR(sum, 1.0, 1e-12);
        ASSERT_NEAR(w[0] * s[0] + w[2] * s[2] - w[1] * s[1] - w[3] * s[3], 0.0, 1e-12 * h);
        ASSERT_NEAR(w[0] * std::sqrt(s[0]), w[2] * std::sqrt(s[2]), 1e-12);
        ASSERT_NEAR(w[1] * std::sqrt(s[1]), w[3] * std::sqrt(s[3]), 1e-12);
    }
}

TEST(BranchWeights, RejectsNonPositiveTimes)
{
    try {
        branch_weights(0.1, 0.0, 0.1, 0.1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::invalid_hitting_time);
    }
}

TEST(DirichletBranches, DeepInteriorNode)
{
    const Grid2D g = make_grid(0, 1, 0, 1, 40, 40);
    const BranchSet set = build_branchset_dirichlet(g, node_coefficients(0.9, 0.5, 1.0), {20, 20});
    for (int k = 0; k < 4; ++k) {
        EXPECT_EQ(set.branches[k].kind, BranchKind::interior);
        EXPECT_EQ(set.branches[k].s, g.h());
        EXPECT_EQ(set.weights[k], 0.25);
    }
}

TEST(DirichletBranches, StrongDriftTowardWallStopsEarly)
{
    const Grid2D g = make_grid(0, 1, 0, 1, 20, 20);
    const NodeCoefficients nc = node_coefficients(0.2, 0.3, 0.3, 8.0, 0.0);
    const NodeIndex node{19, 10};
    const BranchSet set = build_branchset_dirichlet(g, nc, node);
    int absorbed = 0;
    for (int k = 0; k < 4; ++k) {
        const Branch& br = set.branches[k];
        EXPECT_GT(br.s, 0.0);
        EXPECT_LE(br.s, g.h());
        if (br.kind == BranchKind::boundary_absorbed) {
            ++absorbed;
            EXPECT_LT(br.s, g.h());
            EXPECT_EQ(br.endpoint.x, 1.0);
            EXPECT_NEAR(br.s, reference::bisection_hitting_time(g, nc, g.node(node), br.k), 1e-10);
        }
        EXPECT_TRUE(g.contains(br.endpoint));
    }
    EXPECT_GE(absorbed, 1);
    std::array<double, 4> s;
    for (int k = 0; k < 4; ++k)
        s[k] = set.branches[k].s;
    expect_weight_identities(s, set.weights, g.h());
}

TEST(DirichletBranches, EndpointLandingOnWallIsAbsorbed)
{
    // rho = 0, sigma = 1: branch 1 moves (+sqrt h, +sqrt h) = 10 cells.
    const Grid2D g = make_grid(0, 1, 0, 1, 100, 100);
    const BranchSet set = build_branchset_dirichlet(g, node_coefficients(0.0), {90, 50});
    const Branch& br = set.branches[0];
    EXPECT_EQ(br.kind, BranchKind::boundary_absorbed);
    EXPECT_NEAR(br.s, g.h(), 1e-12);
    EXPECT_EQ(br.endpoint.x, 1.0);
    EXPECT_NEAR(br.endpoint.y, 0.6, 1e-12);
}

TEST(DirichletBranches, AbsorbedEndpointsLieOnBoundary)
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        const auto cfg = reference::random_configuration(rng);
        const BranchSet set = build_branchset_dirichlet(cfg.grid, cfg.nc, cfg.node);
        for (const Branch& br : set.branches) {
            ASSERT_GT(br.s, 0.0);
            ASSERT_LE(br.s, cfg.grid.h());
            ASSERT_TRUE(cfg.grid.contains(br.endpoint));
            if (br.kind == BranchKind::boundary_absorbed)
                ASSERT_TRUE(cfg.grid.on_boundary(br.endpoint));
            else
                ASSERT_EQ(br.s, cfg.grid.h());
        }
    }
}

TEST(NeumannBranches, ReflectsOvershoot)
{
    EXPECT_DOUBLE_EQ(reflect_coordinate(1.0 + 0.03, 0.0, 1.0), 1.0 - 0.03);
    EXPECT_DOUBLE_EQ(reflect_coordinate(-0.02, 0.0, 1.0), 0.02);
    EXPECT_EQ(reflect_coordinate(0.4, 0.0, 1.0), 0.4);
}

TEST(NeumannBranches, MirrorIsAnInvolutionOnOvershootBand)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double lo = -0.5, hi = 1.5, width = hi - lo;
    for (int n = 0; n < 10000; ++n) {
        const double over = hi + width * u(rng);
        ASSERT_NEAR(2 * hi - reflect_coordinate(over, lo, hi), over, 1e-14);
        const double under = lo - width * u(rng);
        ASSERT_NEAR(2 * lo - reflect_coordinate(under, lo, hi), under, 1e-14);
    }
}

TEST(NeumannBranches, CornerOvershootReflectsBothCoordinates)
{
    // rho = 0, sigma = 1 on h = 0.01: branch 3 moves (-0.1, -0.1) from (0.05, 0.02).
    const Grid2D g = make_grid(0, 1, 0, 1, 100, 100);
    const BranchSet set = build_branchset_neumann(g, node_coefficients(0.0), {5, 2});
    const Branch& br = set.branches[2];
    EXPECT_EQ(br.kind, BranchKind::reflected);
    EXPECT_NEAR(br.endpoint.x, 0.05, 1e-14);
    EXPECT_NEAR(br.endpoint.y, 0.08, 1e-14);
    for (int k = 0; k < 4; ++k) {
        EXPECT_EQ(set.branches[k].s, g.h());
        EXPECT_EQ(set.weights[k], 0.25);
    }
    EXPECT_EQ(set.branches[0].kind, BranchKind::interior);
}

TEST(NeumannBranches, DoubleOvershootIsAnError)
{
    const Grid2D g = make_grid(0, 1, 0, 1, 4, 4);
    try {
        build_branchset_neumann(g, node_coefficients(0.0, 5.0, 1.0), {1, 1});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::step_too_large);
    }
}

TEST(PeriodicBranches, WrapOperator)
{
    const Grid2D g = make_grid(0, 1, 0, 1, 10, 10);
    const Point w = wrap_point(g, {1.25, -0.1});
    EXPECT_NEAR(w.x, 0.25, 1e-15);
    EXPECT_NEAR(w.y, 0.9, 1e-15);
    const Point inside{0.3, 0.7};
    EXPECT_EQ(wrap_point(g, inside), inside);
    EXPECT_EQ(wrap_point(g, {1.0, 0.4}).x, 0.0);
    const Grid2D shifted = make_grid(2, 3.5, -1, 0, 10, 10);
    EXPECT_EQ(wrap_point(shifted, {3.5, -0.5}).x, 2.0);
    EXPECT_GE(wrap_coordinate(-1e-17, 0.0, 1.0), 0.0);
    EXPECT_LT(wrap_coordinate(-1e-17, 0.0, 1.0), 1.0);
}

TEST(PeriodicBranches, EndpointsWrapIntoFundamentalCell)
{
    const Grid2D g = make_grid(0, 1, 0, 1, 10, 10);
    const BranchSet set = build_branchset_periodic(g, node_coefficients(0.9, 1.0, 2.0, 3.0, -1.0), {0, 9});
    bool wrapped = false;
    for (const Branch& br : set.branches) {
        EXPECT_GE(br.endpoint.x, 0.0);
        EXPECT_LT(br.endpoint.x, 1.0);
        EXPECT_GE(br.endpoint.y, 0.0);
        EXPECT_LT(br.endpoint.y, 1.0);
        wrapped = wrapped || br.kind == BranchKind::wrapped;
    }
    EXPECT_TRUE(wrapped);
    EXPECT_THROW(build_branchset_periodic(g, node_coefficients(0.0), {10, 0}), Error);
}

TEST(MomentMatching, InteriorBranchesReproduceDriftAndCovariance)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double h = 0.01;
    for (int n = 0; n < 1000; ++n) {
        const double rho = n % 4 == 0 ? 1.0 : n % 4 == 1 ? -1.0 : n % 4 == 2 ? 0.9 : u(rng);
        const NodeCoefficients nc =
            node_coefficients(rho, 0.1 + std::abs(2 * u(rng)), 0.1 + std::abs(2 * u(rng)), 3 * u(rng), 3 * u(rng));
        double m1x = 0, m1y = 0, cxx = 0, cxy = 0, cyy = 0;
        for (int k = 1; k <= 4; ++k) {
            const Point d = branch_displacement(nc, k, h);
            m1x += 0.25 * d.x;
            m1y += 0.25 * d.y;
            const double ex = d.x - nc.b1 * h, ey = d.y - nc.b2 * h;
            cxx += 0.25 * ex * ex;
            cxy += 0.25 * ex * ey;
            cyy += 0.25 * ey * ey;
        }
        ASSERT_NEAR(m1x, nc.b1 * h, 1e-12 * h);
        ASSERT_NEAR(m1y, nc.b2 * h, 1e-12 * h);
        ASSERT_NEAR(cxx, h * nc.sigma1 * nc.sigma1, 1e-12 * h);
        ASSERT_NEAR(cxy, h * nc.rho * nc.sigma1 * nc.sigma2, 1e-12 * h);
        ASSERT_NEAR(cyy, h * nc.sigma2 * nc.sigma2, 1e-12 * h);
    }
}
