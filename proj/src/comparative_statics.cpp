#include "techstop/comparative_statics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace techstop {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::OrderingHolds: return "ordering holds";
        case Verdict::OrderingFails: return "ordering fails";
        case Verdict::EqualWithinTolerance: return "equal within tolerance";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

std::vector<double> cost_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) throw DomainError("cost_grid: need 0 < lo < hi and n >= 2");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    return g;
}

namespace {

struct Solved {
    Problem problem;
    BoundarySolution solution;
};

Solved solve(const SharedSpec& spec, double kappa, const CostLaw& costs) {
    Problem pb = make_gbm_problem(spec.gbm, spec.investment_cost, kappa, costs, spec.bargaining);
    BoundaryField field(pb);
    BoundarySolution sol = find_endpoint(field, spec.solver);
    return {std::move(pb), std::move(sol)};
}

// Fills the common grid and the boundary verdict for the claim
// "instance 1 has the larger endpoint and the lower boundary" (direction +1).
void compare_boundaries(ComparisonReport& rep, const Solved& s1, const Solved& s2) {
    const double x_r = s1.problem.x_R();
    rep.m_low_1 = s1.solution.boundary.m_low();
    rep.m_low_2 = s2.solution.boundary.m_low();
    rep.margin = 1e-7 * x_r;
    const double lo = std::max(rep.m_low_1, rep.m_low_2);
    const double hi = 0.9 * std::min(s1.solution.report.horizon, s2.solution.report.horizon);
    rep.m = cost_grid(lo, hi, 200);
    rep.b1.clear();
    rep.b2.clear();
    double min_gap = std::numeric_limits<double>::infinity();
    double max_abs = 0.0;
    for (double m : rep.m) {
        const double b1 = s1.solution.boundary(m);
        const double b2 = s2.solution.boundary(m);
        rep.b1.push_back(b1);
        rep.b2.push_back(b2);
        min_gap = std::min(min_gap, rep.direction * (b2 - b1));
        max_abs = std::max(max_abs, std::abs(b2 - b1));
    }
    rep.min_gap = min_gap;
    if (rep.direction == 0) {
        const bool equal = std::abs(rep.m_low_1 - rep.m_low_2) <= rep.margin && max_abs <= rep.margin;
        rep.verdict = equal ? Verdict::EqualWithinTolerance : Verdict::OrderingFails;
        rep.min_gap = -max_abs;
        return;
    }
    const bool endpoints = rep.direction * (rep.m_low_1 - rep.m_low_2) > rep.margin;
    const bool curves = min_gap > rep.margin;
    rep.verdict = endpoints && curves && rep.side_failures == 0 ? Verdict::OrderingHolds : Verdict::OrderingFails;
}

}  // namespace

ComparisonReport compare_cost_laws(const CostLaw& costs1, const CostLaw& costs2, const SharedSpec& spec) {
    ComparisonReport rep;
    const TechnologyPayoffs payoffs(gbm_model(spec.gbm), spec.investment_cost, spec.kappa, spec.bargaining);
    const Problem p1(payoffs.model(), payoffs, costs1);
    const Problem p2(payoffs.model(), payoffs, costs2);
    const double h = std::max(default_horizon(p1, spec.solver.survival_target),
                              default_horizon(p2, spec.solver.survival_target));
    const std::vector<double> grid = cost_grid(1e-3 * payoffs.P(payoffs.x_R()).value, 2.0 * payoffs.P(h).value);

    bool identical = true;
    for (double z : grid) {
        const double a = costs1.hazard(z);
        const double b = costs2.hazard(z);
        if (std::abs(a - b) > 1e-12 * std::max(std::abs(a), std::abs(b))) identical = false;
    }
    if (identical) {
        rep.direction = 0;
    } else if (hazard_order_dominates(costs1, costs2, grid)) {
        rep.direction = 1;
    } else if (hazard_order_dominates(costs2, costs1, grid)) {
        rep.direction = -1;
    } else {
        rep.verdict = Verdict::Inconclusive;
        rep.reason = "the cost laws are not ordered by hazard rate on the grid";
        return rep;
    }

    const Solved s1 = solve(spec, spec.kappa, costs1);
    const Solved s2 = solve(spec, spec.kappa, costs2);

    if (rep.direction != 0) {
        // The higher-hazard field dominates above the lower-hazard boundary.
        const Solved& hi_hazard = rep.direction > 0 ? s1 : s2;
        const Solved& lo_hazard = rep.direction > 0 ? s2 : s1;
        const BoundaryField f_hi(hi_hazard.problem);
        const BoundaryField f_lo(lo_hazard.problem);
        const double lo = std::max(s1.solution.boundary.m_low(), s2.solution.boundary.m_low());
        const double hi = 0.9 * std::min(s1.solution.report.horizon, s2.solution.report.horizon);
        const std::vector<double> ms = cost_grid(lo, hi, 200);
        for (std::size_t i = 0; i < ms.size(); ++i) {
            const double m = ms[i];
            const double b = lo_hazard.solution.boundary(m);
            const double u = (static_cast<double>((i * 37) % 200) + 0.5) / 200.0;
            const double x = b + u * (m - b) * (1.0 - 1e-3);
            ++rep.side_checks;
            if (!(f_hi.E(x, m) > f_lo.E(x, m))) ++rep.side_failures;
        }
    }
    compare_boundaries(rep, s1, s2);
    rep.reason = rep.direction == 0 ? "identical hazard rates"
                 : rep.direction > 0 ? "the first cost law has the higher hazard rate"
                                     : "the second cost law has the higher hazard rate";
    return rep;
}

ComparisonReport compare_payoffs(double kappa1, double kappa2, const CostLaw& costs, const SharedSpec& spec) {
    ComparisonReport rep;
    if (!(kappa1 > 1.0) || !(kappa2 > 1.0)) {
        rep.reason = "both multipliers must exceed 1";
        return rep;
    }
    const Diffusion model = gbm_model(spec.gbm);
    const TechnologyPayoffs t1(model, spec.investment_cost, kappa1, spec.bargaining);
    const TechnologyPayoffs t2(model, spec.investment_cost, kappa2, spec.bargaining);
    const double x_r = t1.x_R();
    const Problem probe(model, t1, costs);
    const double h = default_horizon(probe, spec.solver.survival_target);

    const std::vector<double> zs = cost_grid(1e-3 * t1.P(x_r).value, 2.0 * std::max(t1.P(h).value, t2.P(h).value));
    if (!has_monotone_hazard(costs, zs)) {
        rep.reason = "the cost law does not have a monotone hazard rate on the grid";
        return rep;
    }
    const std::vector<double> xs = cost_grid(1e-2 * x_r, 1e1 * x_r);
    for (double x : xs) {
        if (!(model.h1(x).d2 > 0.0)) {
            rep.reason = "h1 is not convex on the grid";
            return rep;
        }
    }
    rep.direction = kappa1 > kappa2 ? 1 : kappa1 < kappa2 ? -1 : 0;

    if (rep.direction != 0) {
        const TechnologyPayoffs& big = rep.direction > 0 ? t1 : t2;
        const TechnologyPayoffs& small = rep.direction > 0 ? t2 : t1;
        for (double x : xs) {
            const Jet pb = big.P(x);
            const Jet ps = small.P(x);
            ++rep.side_checks;
            if (!(pb.value > ps.value && pb.d1 > ps.d1)) ++rep.side_failures;
        }
    }
    const Solved s1 = solve(spec, kappa1, costs);
    const Solved s2 = solve(spec, kappa2, costs);
    compare_boundaries(rep, s1, s2);
    rep.reason = rep.direction == 0 ? "equal multipliers"
                 : rep.direction > 0 ? "the first multiplier is larger"
                                     : "the second multiplier is larger";
    return rep;
}

}  // namespace techstop
