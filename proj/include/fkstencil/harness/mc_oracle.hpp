#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "../assembly.hpp"
#include "../branches.hpp"
#include "../interpolation.hpp"
#include "problems.hpp"

namespace fkstencil::harness {

struct McEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    long n_paths = 0;
    long truncated_paths = 0; // paths cut at the step cap
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Per-path seed from (seed, path index); paths can be simulated in any order.
inline std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path) noexcept
{
    return splitmix64(splitmix64(seed) ^ splitmix64(path + 0x632be59bd9b4e019ULL));
}

// One node's transition law: pick branch k with prob[k], multiply the path
// weight by discount[k], then either stop with terminal[k] (absorbed) or jump
// to a stencil corner with its interpolation weight.
struct NodeLaw {
    enum class Type { terminal, copy, branching } type = Type::branching;
    double terminal_value = 0.0; // Type::terminal
    int copy_target = -1;        // Type::copy
    double source = 0.0;
    std::array<double, 4> prob{};
    std::array<double, 4> discount{};
    std::array<bool, 4> absorbed{};
    std::array<double, 4> absorbed_value{};
    std::array<Stencil, 4> stencil{};
};

inline int pick(const std::array<double, 4>& p, double u) noexcept
{
    double acc = 0.0;
    int last = 0;
    for (int k = 0; k < 4; ++k) {
        if (p[k] <= 0.0)
            continue;
        acc += p[k];
        last = k;
        if (u < acc)
            return k;
    }
    return last;
}

} // namespace detail

/// Simulates the discrete branching chain underlying the scheme and returns
/// the mean discounted payoff from `node`. Its expectation is the fixed point
/// of the assembled linear system, so it checks assembly and solver from an
/// independent direction.
inline McEstimate mc_oracle(const ProblemCase& pc, const Grid2D& g, NodeIndex node, long n_paths,
                            std::uint64_t seed, long max_steps = 1'000'000)
{
    if (n_paths < 1000)
        throw Error(ErrorKind::invalid_argument, "mc_oracle needs at least 1000 paths");
    const BoundaryKind kind = pc.boundary_kind();
    using Law = detail::NodeLaw;

    std::vector<Law> laws(g.num_nodes());
    const double h = g.h();
    for (int i = 0; i <= g.m1(); ++i)
        for (int j = 0; j <= g.m2(); ++j) {
            Law& law = laws[g.flat(i, j)];
            const Point p = g.node(i, j);
            if (kind == BoundaryKind::periodic && (i == g.m1() || j == g.m2())) {
                law.type = Law::Type::copy;
                law.copy_target = g.flat(i % g.m1(), j % g.m2());
                continue;
            }
            if (kind != BoundaryKind::periodic && g.is_boundary(i, j)) {
                if (kind == BoundaryKind::dirichlet) {
                    law.type = Law::Type::terminal;
                    law.terminal_value = std::get<DirichletBoundary>(pc.boundary).value(p.x, p.y);
                } else {
                    law.type = Law::Type::copy;
                    NodeIndex src{i, j};
                    if (i == 0)
                        src.i = 1;
                    else if (i == g.m1())
                        src.i = g.m1() - 1;
                    else if (j == 0)
                        src.j = 1;
                    else
                        src.j = g.m2() - 1;
                    law.copy_target = g.flat(src);
                }
                continue;
            }
            const NodeCoefficients nc = eval_node(pc.coefficients, p);
            BranchSet set;
            if (kind == BoundaryKind::dirichlet)
                set = build_branchset_dirichlet(g, nc, {i, j});
            else if (kind == BoundaryKind::neumann)
                set = build_branchset_neumann(g, nc, {i, j});
            else
                set = build_branchset_periodic(g, nc, {i, j});
            double mean_time = 0.0;
            for (int k = 0; k < 4; ++k) {
                const Branch& br = set.branches[k];
                law.prob[k] = set.weights[k];
                law.discount[k] = 1.0 / (1.0 + nc.r * br.s);
                mean_time += set.weights[k] * br.s;
                if (br.kind == BranchKind::boundary_absorbed) {
                    law.absorbed[k] = true;
                    law.absorbed_value[k] =
                        std::get<DirichletBoundary>(pc.boundary).value(br.endpoint.x, br.endpoint.y);
                } else {
                    law.stencil[k] = interpolation_stencil(g, br.endpoint);
                    if (kind == BoundaryKind::periodic)
                        for (NodeIndex& n : law.stencil[k].nodes)
                            n = {n.i % g.m1(), n.j % g.m2()};
                }
            }
            law.source = nc.q * (kind == BoundaryKind::dirichlet ? mean_time : h);
        }

    // Paths whose remaining weight drops below this contribute nothing
    // representable to the payoff.
    constexpr double negligible_weight = 1e-17;

    McEstimate est;
    est.n_paths = n_paths;
    double mean = 0.0;
    double m2 = 0.0;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (long path = 0; path < n_paths; ++path) {
        std::mt19937_64 rng(detail::path_seed(seed, static_cast<std::uint64_t>(path)));
        int at = g.flat(node);
        double weight = 1.0;
        double payoff = 0.0;
        long steps = 0;
        while (true) {
            const Law& law = laws[at];
            if (law.type == Law::Type::terminal) {
                payoff += weight * law.terminal_value;
                break;
            }
            if (law.type == Law::Type::copy) {
                at = law.copy_target;
                continue;
            }
            if (++steps > max_steps) {
                ++est.truncated_paths;
                break;
            }
            payoff += weight * law.source;
            const int k = detail::pick(law.prob, unit(rng));
            weight *= law.discount[k];
            if (law.absorbed[k]) {
                payoff += weight * law.absorbed_value[k];
                break;
            }
            if (weight < negligible_weight)
                break;
            const Stencil& st = law.stencil[k];
            at = g.flat(st.nodes[detail::pick(st.weights, unit(rng))]);
        }
        const double delta = payoff - mean;
        mean += delta / static_cast<double>(path + 1);
        m2 += delta * (payoff - mean);
    }
    const double n = static_cast<double>(n_paths);
    est.mean = mean;
    est.standard_error = std::sqrt(m2 / (n - 1.0) / n);
    return est;
}

/// Five well-spread interior nodes: the centre and the four quarter points.
inline std::vector<NodeIndex> sample_nodes(const Grid2D& g)
{
    auto at = [](int m, int num, int den) { return std::clamp((m * num + den / 2) / den, 1, m - 1); };
    std::vector<NodeIndex> out;
    const int fr[5][2] = {{2, 2}, {1, 1}, {3, 1}, {1, 3}, {3, 3}};
    for (const auto& f : fr) {
        const NodeIndex n{at(g.m1(), f[0], 4), at(g.m2(), f[1], 4)};
        if (std::find(out.begin(), out.end(), n) == out.end())
            out.push_back(n);
    }
    return out;
}

} // namespace fkstencil::harness
