#include "techstop/problem.hpp"

namespace techstop {

Problem make_gbm_problem(const GbmParams& gbm, double investment_cost, double kappa,
                         const CostLaw& costs, Bargaining rule) {
    Diffusion model = gbm_model(gbm);
    TechnologyPayoffs payoffs(model, investment_cost, kappa, rule);
    return Problem(std::move(model), std::move(payoffs), costs);
}

}  // namespace techstop
