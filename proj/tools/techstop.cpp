#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "techstop/checks.hpp"
#include "techstop/comparative_statics.hpp"
#include "techstop/config.hpp"
#include "techstop/io.hpp"
#include "techstop/monte_carlo.hpp"
#include "techstop/value_surface.hpp"

namespace fs = std::filesystem;
using namespace techstop;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct Options {
    std::vector<std::string> configs;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::string grid;
    std::optional<double> x;
    std::optional<double> m;
    std::string level = "fast";
    std::string boundary;
    std::string mode;
    double shift = 0.0;
};

struct Axis {
    double lo;
    double hi;
    std::size_t n;
};

Axis parse_axis(const std::string& s) {
    double lo = 0.0;
    double hi = 0.0;
    unsigned long n = 0;
    char tail = 0;
    if (std::sscanf(s.c_str(), "%lf:%lf:%lu%c", &lo, &hi, &n, &tail) != 3 || n < 1 || hi < lo) {
        throw DomainError("--grid: expected x0:x1:n,m0:m1:n, got \"" + s + "\"");
    }
    return {lo, hi, n};
}

std::vector<double> axis_points(const Axis& a) {
    std::vector<double> v(a.n);
    for (std::size_t i = 0; i < a.n; ++i) {
        v[i] = a.n == 1 ? a.lo : a.lo + (a.hi - a.lo) * static_cast<double>(i) / (a.n - 1);
    }
    return v;
}

fs::path run_dir(const Options& o, const std::string& name) {
    fs::path dir = fs::path(o.out) / name;
    fs::create_directories(dir);
    return dir;
}

ProblemConfig load(const Options& o, std::size_t i = 0) {
    ProblemConfig cfg = load_config(o.configs.at(i));
    if (o.seed) cfg.sim.seed = *o.seed;
    return cfg;
}

struct Solved {
    Problem problem;
    BoundaryField field;
    BoundarySolution solution;

    explicit Solved(const ProblemConfig& cfg)
        : problem(cfg.problem()), field(problem), solution(find_endpoint(field, cfg.solver)) {}
};

ValueSurface surface(const ProblemConfig& cfg, const Options& o) {
    if (o.boundary.empty()) {
        Solved s(cfg);
        return ValueSurface(s.problem, s.solution.boundary);
    }
    Problem pb = cfg.problem();
    const double horizon = cfg.solver.horizon > 0.0 ? cfg.solver.horizon : default_horizon(pb, cfg.solver.survival_target);
    return ValueSurface(pb, read_boundary_csv(o.boundary, horizon));
}

int cmd_solve(const Options& o) {
    const ProblemConfig cfg = load(o);
    Solved s(cfg);
    const fs::path dir = run_dir(o, cfg.name);
    write_boundary_csv((dir / "boundary.csv").string(), s.solution, s.field);
    write_json((dir / "summary.json").string(), boundary_summary(s.solution, s.problem));
    const EndpointReport& r = s.solution.report;
    std::printf("m_low = %.12g  x_R = %.12g  m_xR = %.12g  horizon = %.8g  iterations = %d\n", r.m_low, r.x_R,
                r.m_xR, r.horizon, r.iterations);
    std::printf("wrote %s\n", dir.string().c_str());
    return 0;
}

int cmd_value(const Options& o) {
    const ProblemConfig cfg = load(o);
    std::vector<std::pair<double, double>> points;
    if (!o.grid.empty()) {
        const auto comma = o.grid.find(',');
        if (comma == std::string::npos) throw DomainError("--grid: expected x0:x1:n,m0:m1:n");
        const auto xs = axis_points(parse_axis(o.grid.substr(0, comma)));
        const auto ms = axis_points(parse_axis(o.grid.substr(comma + 1)));
        for (double m : ms) {
            for (double x : xs) {
                if (x <= m) points.emplace_back(x, m);
            }
        }
    } else {
        if (!o.x || !o.m) throw DomainError("value: give --x and --m, or --grid");
        if (*o.x > *o.m) throw DomainError("value: need x <= m");
        points.emplace_back(*o.x, *o.m);
    }
    const ValueSurface w = surface(cfg, o);
    const fs::path dir = run_dir(o, cfg.name);
    CsvWriter csv((dir / "values.csv").string(), {"x", "m", "region", "W", "Vbar", "dW_dx", "dW_dm"});
    for (const auto& [x, m] : points) {
        const Jet v = w.value_x(x, m);
        csv.cell(x).cell(m).cell(to_string(w.region(x, m))).cell(v.value);
        if (x == m) {
            csv.cell(w.initial_value(x));
        } else {
            csv.cell(std::string());
        }
        csv.cell(v.d1).cell(w.partial_m(x, m));
        csv.end_row();
    }
    if (points.size() == 1) {
        const auto [x, m] = points.front();
        std::printf("W(%g, %g) = %.12g  region %s\n", x, m, w.value(x, m), to_string(w.region(x, m)));
    }
    std::printf("wrote %s (%zu points)\n", (dir / "values.csv").string().c_str(), points.size());
    return 0;
}

int cmd_simulate(const Options& o) {
    ProblemConfig cfg = load(o);
    if (o.x) cfg.sim.start_x = *o.x;
    if (o.m) cfg.sim.start_m = *o.m;
    if (o.mode == "game") cfg.sim.start_m = cfg.sim.start_x;
    cfg.sim.validate();
    Solved s(cfg);
    const StoppingRule rule = StoppingRule::boundary(s.solution.boundary, s.problem.x_R(), o.shift);
    SimResult res;
    double analytic = 0.0;
    const ValueSurface w(s.problem, s.solution.boundary);
    if (o.mode == "game") {
        res = simulate_game_value(s.problem, rule, cfg.sim);
        analytic = w.initial_value(cfg.sim.start_x);
    } else if (o.mode.empty() || o.mode == "stopped") {
        res = simulate_stopped_value(s.problem, rule, cfg.sim);
        analytic = w.value(cfg.sim.start_x, cfg.sim.start_m);
    } else {
        throw DomainError("simulate: --mode must be stopped or game");
    }
    const fs::path dir = run_dir(o, cfg.name);
    CsvWriter csv((dir / "simulation.csv").string(),
                  {"x", "m", "mode", "seed", "estimate", "std_error", "n_paths", "n_stopped", "n_truncated", "analytic"});
    csv.cell(cfg.sim.start_x).cell(cfg.sim.start_m).cell(o.mode.empty() ? "stopped" : o.mode);
    csv.cell(std::to_string(cfg.sim.seed)).cell(res.estimate).cell(res.std_error);
    csv.cell(std::to_string(res.n_paths)).cell(std::to_string(res.n_stopped)).cell(std::to_string(res.n_truncated));
    csv.cell(analytic);
    csv.end_row();
    std::printf("estimate = %.10g  se = %.3g  analytic = %.10g  z = %.2f\n", res.estimate, res.std_error, analytic,
                res.std_error > 0.0 ? (res.estimate - analytic) / res.std_error : 0.0);
    return 0;
}

int cmd_check(const Options& o) {
    const ProblemConfig cfg = load(o);
    CheckLevel level = CheckLevel::Fast;
    if (o.level == "full") {
        level = CheckLevel::Full;
    } else if (o.level != "fast") {
        throw DomainError("check: --level must be fast or full");
    }
    const ValueSurface w = surface(cfg, o);
    const CheckReport rep = run_checks(w, level, cfg.sim.seed, cfg.sim.n_paths);
    const fs::path dir = run_dir(o, cfg.name);
    write_json((dir / "check.json").string(), to_json(rep));
    for (const auto& c : rep.results) {
        std::printf("%-20s %s  residual %.3g (tol %.3g)  %s\n", c.name.c_str(), c.passed ? "pass" : "FAIL",
                    c.max_residual, c.tolerance, c.detail.c_str());
    }
    return rep.passed() ? 0 : kExitCheckFailed;
}

int cmd_compare(const Options& o) {
    if (o.configs.size() != 2) throw DomainError("compare: give --config twice");
    const ProblemConfig a = load(o, 0);
    const ProblemConfig b = load(o, 1);
    const bool same_model = a.gbm.mu == b.gbm.mu && a.gbm.sigma == b.gbm.sigma && a.gbm.r == b.gbm.r &&
                            a.investment_cost == b.investment_cost && a.bargaining == b.bargaining;
    ComparisonReport rep;
    if (!same_model) {
        rep.reason = "the configs differ in the model, I or the bargaining rule";
    } else if (o.mode == "costs") {
        if (a.kappa != b.kappa) {
            rep.reason = "cost comparison needs equal kappa";
        } else {
            rep = compare_cost_laws(a.costs.law(), b.costs.law(), a.shared());
        }
    } else if (o.mode == "payoffs") {
        if (!(a.costs == b.costs)) {
            rep.reason = "payoff comparison needs equal cost laws";
        } else {
            rep = compare_payoffs(a.kappa, b.kappa, a.costs.law(), a.shared());
        }
    } else {
        throw DomainError("compare: --mode must be costs or payoffs");
    }
    const fs::path dir = run_dir(o, a.name + "_vs_" + b.name);
    write_json((dir / "compare.json").string(), to_json(rep));
    CsvWriter csv((dir / "compare.csv").string(), {"m", "b1", "b2", "b2_minus_b1"});
    for (std::size_t i = 0; i < rep.m.size(); ++i) {
        csv.cell(rep.m[i]).cell(rep.b1[i]).cell(rep.b2[i]).cell(rep.b2[i] - rep.b1[i]);
        csv.end_row();
    }
    std::printf("verdict: %s (%s)\n", to_string(rep.verdict), rep.reason.c_str());
    if (rep.verdict == Verdict::Inconclusive) return kExitConfig;
    return rep.verdict == Verdict::OrderingFails ? kExitCheckFailed : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal investment timing under technological breakthroughs"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.configs, "JSON problem file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "output root; files go to <out>/<run-name>/");
        sub->add_option("--seed", o.seed, "override sim.seed");
    };
    CLI::App* solve = app.add_subcommand("solve", "solve for the free boundary");
    common(solve);
    CLI::App* value = app.add_subcommand("value", "evaluate the value surface");
    common(value);
    value->add_option("--x", o.x);
    value->add_option("--m", o.m);
    value->add_option("--grid", o.grid, "x0:x1:n,m0:m1:n");
    value->add_option("--boundary", o.boundary, "boundary CSV to use instead of solving");
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo estimate under the boundary policy");
    common(simulate);
    simulate->add_option("--x", o.x);
    simulate->add_option("--m", o.m);
    simulate->add_option("--mode", o.mode, "stopped | game")->default_str("stopped");
    simulate->add_option("--shift", o.shift, "relative shift of the boundary");
    CLI::App* check = app.add_subcommand("check", "run the invariant suite");
    common(check);
    check->add_option("--level", o.level, "fast | full");
    check->add_option("--boundary", o.boundary, "boundary CSV to check instead of solving");
    CLI::App* compare = app.add_subcommand("compare", "comparative statics of two configs");
    common(compare);
    compare->add_option("--mode", o.mode, "costs | payoffs")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }
    if (!compare->parsed() && o.configs.size() != 1) {
        std::cerr << "error: --config given " << o.configs.size() << " times\n";
        return kExitConfig;
    }

    try {
        if (solve->parsed()) return cmd_solve(o);
        if (value->parsed()) return cmd_value(o);
        if (simulate->parsed()) return cmd_simulate(o);
        if (check->parsed()) return cmd_check(o);
        if (compare->parsed()) return cmd_compare(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    }
    return 0;
}
