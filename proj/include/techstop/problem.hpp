#pragma once

#include "techstop/diffusion.hpp"
#include "techstop/payoffs.hpp"
#include "techstop/threshold_law.hpp"

namespace techstop {

/// A fully specified stopping problem: diffusion, payoffs and breakthrough law.
struct Problem {
    Diffusion model;
    TechnologyPayoffs payoffs;
    ThresholdLaw law;

    Problem(Diffusion m, TechnologyPayoffs p, CostLaw costs)
        : model(std::move(m)), payoffs(std::move(p)), law(threshold_law_from_costs(costs, payoffs)) {}

    double x_R() const { return payoffs.x_R(); }
};

/// GBM model with linear payoffs; the usual entry point.
Problem make_gbm_problem(const GbmParams& gbm, double investment_cost, double kappa,
                         const CostLaw& costs, Bargaining rule = Bargaining::Nash);

}  // namespace techstop
