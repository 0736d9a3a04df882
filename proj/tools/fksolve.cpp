// Command-line driver: grid-refinement studies on the bundled problems.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <fkstencil/fkstencil.hpp>
#include <fkstencil/harness/mc_oracle.hpp>
#include <fkstencil/harness/problems.hpp>
#include <fkstencil/harness/study.hpp>

namespace fk = fkstencil;
namespace hs = fkstencil::harness;

namespace {

std::vector<std::pair<int, int>> parse_grids(const std::string& text)
{
    std::vector<std::pair<int, int>> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        const auto x = item.find('x');
        if (x == std::string::npos) {
            const int m = std::stoi(item);
            out.emplace_back(m, m);
        } else {
            out.emplace_back(std::stoi(item.substr(0, x)), std::stoi(item.substr(x + 1)));
        }
    }
    if (out.empty())
        throw fk::Error(fk::ErrorKind::invalid_argument, "empty grid list");
    return out;
}

void apply_boundary_override(hs::ProblemCase& pc, const std::string& kind)
{
    if (kind == "dirichlet") {
        if (!pc.exact_solution)
            throw fk::Error(fk::ErrorKind::invalid_argument, "dirichlet override needs an exact solution");
        pc.boundary = fk::DirichletBoundary{*pc.exact_solution};
    } else if (kind == "neumann") {
        pc.boundary = fk::NeumannBoundary{};
    } else if (kind == "periodic") {
        pc.boundary = fk::PeriodicBoundary{};
    } else {
        throw fk::Error(fk::ErrorKind::invalid_argument, "unknown boundary kind '" + kind + "'");
    }
}

void print_table(const hs::CaseReport& rep)
{
    std::printf("%6s %6s %14s %10s %14s %10s %8s %9s\n", "M1", "M2", "err_inf", "rate_inf", "err_l2",
                "rate_l2", "iters", "seconds");
    for (std::size_t k = 0; k < rep.rows.size(); ++k) {
        const auto& r = rep.rows[k];
        const auto& l = rep.levels[k];
        auto rate = [](const std::optional<double>& v) {
            char buf[32];
            if (v)
                std::snprintf(buf, sizeof buf, "%10.4f", *v);
            else
                std::snprintf(buf, sizeof buf, "%10s", "---");
            return std::string(buf);
        };
        std::printf("%6d %6d %14.4e %s %14.4e %s %8ld %9.3f\n", r.m1, r.m2, r.err_inf,
                    rate(r.rate_inf).c_str(), r.err_l2, rate(r.rate_l2).c_str(), l.iterations,
                    l.seconds);
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Expectation-based wide-stencil solver for 2D non-divergence elliptic problems"};

    std::string problem = "dirichlet-exp";
    std::string grids_text;
    std::string boundary;
    std::string method = "gs";
    double omega = 1.5;
    double tol = 1e-10;
    long max_iters = 0;
    std::string out_path;
    std::string dump_path;
    long mc_paths = 0;
    std::uint64_t seed = 20240601;
    double min_rate = 0.0;
    bool have_min_rate = false;
    bool list = false;

    app.add_option("--problem", problem, "problem name (see --list)");
    app.add_option("--grids", grids_text, "comma-separated grid list, e.g. 20,40,80 or 20x40");
    app.add_option("--boundary", boundary, "override boundary kind: dirichlet|neumann|periodic");
    app.add_option("--method", method, "jacobi|gs|sor")->check(CLI::IsMember({"jacobi", "gs", "sor"}));
    app.add_option("--omega", omega, "SOR relaxation factor in (0,2)");
    app.add_option("--tol", tol, "relative residual tolerance");
    app.add_option("--max-iters", max_iters, "iteration cap (default 100*M1*M2, at most 1e7)");
    app.add_option("--out", out_path, "write the error table as CSV");
    app.add_option("--dump-system", dump_path, "write the finest assembled system as triplets");
    app.add_option("--mc-check", mc_paths, "Monte Carlo paths for the fixed-point check on the first grid");
    app.add_option("--seed", seed, "Monte Carlo seed");
    auto* rate_opt = app.add_option("--min-rate", min_rate, "fail unless every L-inf rate reaches this");
    app.add_flag("--list", list, "list bundled problems and exit");

    CLI11_PARSE(app, argc, argv);
    have_min_rate = rate_opt->count() > 0;

    try {
        const hs::ProblemRegistry registry = hs::register_builtin_problems();
        if (list) {
            for (const auto& [name, pc] : registry)
                std::printf("%-16s %s\n", name.c_str(), pc.description.c_str());
            return 0;
        }
        const auto it = registry.find(problem);
        if (it == registry.end()) {
            std::cerr << "unknown problem '" << problem << "' (try --list)\n";
            return 1;
        }
        hs::ProblemCase pc = it->second;
        if (!boundary.empty())
            apply_boundary_override(pc, boundary);
        const auto grids = grids_text.empty() ? pc.grids : parse_grids(grids_text);

        fk::SolveConfig cfg;
        cfg.method = method == "jacobi" ? fk::Method::jacobi
                     : method == "sor"  ? fk::Method::sor
                                        : fk::Method::gauss_seidel;
        cfg.omega = omega;
        cfg.tol = tol;
        cfg.max_iters = max_iters;

        std::printf("problem %s (%s boundary)\n", pc.name.c_str(), fk::to_string(pc.boundary_kind()));
        const hs::CaseReport rep = hs::run_case(pc, cfg, grids);
        print_table(rep);

        bool ok = !rep.aborted;
        if (rep.aborted)
            std::printf("ABORTED: %s\n", rep.diagnostic.c_str());
        for (const auto& l : rep.levels)
            if (!l.m_matrix.ok()) {
                std::printf("M-matrix check failed on %dx%d\n", l.m1, l.m2);
                ok = false;
            }
        if (have_min_rate)
            for (const auto& r : rep.rows)
                if (r.rate_inf && *r.rate_inf < min_rate) {
                    std::printf("rate %.4f on %dx%d is below --min-rate %.4f\n", *r.rate_inf, r.m1, r.m2,
                                min_rate);
                    ok = false;
                }

        if (!out_path.empty() && !rep.rows.empty())
            hs::emit_csv(rep.rows, out_path);

        if (!dump_path.empty()) {
            const auto& [m1, m2] = grids.back();
            fk::write_triplets(fk::assemble(pc.grid(m1, m2), pc.coefficients, pc.boundary), dump_path);
        }

        if (mc_paths > 0) {
            const auto& [m1, m2] = grids.front();
            const hs::LevelSolution lvl = hs::solve_level(pc, m1, m2, cfg);
            std::printf("Monte Carlo check on %dx%d, %ld paths, seed %llu\n", m1, m2, mc_paths,
                        static_cast<unsigned long long>(seed));
            for (const fk::NodeIndex n : hs::sample_nodes(lvl.grid)) {
                const hs::McEstimate est = hs::mc_oracle(pc, lvl.grid, n, mc_paths, seed);
                const double fixed = lvl.nodal[lvl.grid.flat(n)];
                const double z = est.standard_error > 0 ? std::abs(est.mean - fixed) / est.standard_error : 0.0;
                const bool agree = std::abs(est.mean - fixed) <= 3.0 * est.standard_error + 1e-12;
                std::printf("  node (%d,%d): system %.8f  mc %.8f +- %.2e  |z| %.2f %s%s\n", n.i, n.j, fixed,
                            est.mean, est.standard_error, z, agree ? "ok" : "DISAGREE",
                            est.truncated_paths ? " (truncated paths)" : "");
                ok = ok && agree;
            }
        }
        return ok ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
