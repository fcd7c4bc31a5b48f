#pragma once

#include <string>
#include <vector>

#include "techstop/boundary.hpp"

namespace techstop {

/// Everything two compared problems share.
struct SharedSpec {
    GbmParams gbm;
    double investment_cost = 1.0;
    double kappa = 2.0;
    Bargaining bargaining = Bargaining::Nash;
    SolverOptions solver;
};

enum class Verdict { OrderingHolds, OrderingFails, EqualWithinTolerance, Inconclusive };

const char* to_string(Verdict v);

struct ComparisonReport {
    Verdict verdict = Verdict::Inconclusive;
    /// +1: instance 1 is expected to have the larger endpoint and the lower
    /// boundary, -1: the reverse, 0: the instances coincide.
    int direction = 0;
    std::string reason;
    double m_low_1 = 0.0;
    double m_low_2 = 0.0;
    double margin = 0.0;
    std::vector<double> m;
    std::vector<double> b1;
    std::vector<double> b2;
    /// Smallest value of direction * (b2 - b1) over the grid.
    double min_gap = 0.0;
    /// Field ordering E1 > E2 (cost mode) or P, P' ordering (payoff mode).
    std::size_t side_checks = 0;
    std::size_t side_failures = 0;
};

/// Boundaries under two cost laws. When costs1 has the higher hazard on the
/// grid, expects m_low_1 > m_low_2 and b2 > b1; swapped laws swap the claim.
ComparisonReport compare_cost_laws(const CostLaw& costs1, const CostLaw& costs2, const SharedSpec& spec);

/// Boundaries under two breakthrough multipliers. With kappa2 > kappa1 expects
/// m_low_2 > m_low_1 and b1 > b2.
ComparisonReport compare_payoffs(double kappa1, double kappa2, const CostLaw& costs, const SharedSpec& spec);

/// Cost samples used for hazard comparisons: 200 log-spaced points.
std::vector<double> cost_grid(double lo, double hi, std::size_t n = 200);

}  // namespace techstop
