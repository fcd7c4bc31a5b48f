#pragma once

#include <vector>

#include "techstop/diffusion.hpp"
#include "techstop/numerics.hpp"

namespace techstop {

/// Payoff x -> slope * x - cost.
SmoothFn linear_payoff(double slope, double cost);

/// Solution of the one-dimensional problem sup_tau E[e^{-r tau} g(X_tau)]
/// under a single sign change of Lg - rg: stop on [threshold, beta).
struct StandaloneSolution {
    double sign_change = 0.0;  ///< x0 where Lg - rg changes sign
    double threshold = 0.0;    ///< smooth-fit threshold > x0
    double payoff_at_threshold = 0.0;
    double h1_at_threshold = 0.0;

    /// h1(x)/h1(threshold) * g(threshold) below the threshold, g(x) from it on.
    Jet value(const Diffusion& model, const SmoothFn& payoff, double x) const;
};

/// Locates the sign change of Lg - rg on a log grid spanning scale*1e-6 ..
/// scale*1e6 (clipped to the state interval). Throws NumericalError when the
/// grid shows no sign change or more than one.
double sign_change_point(const Diffusion& model, const SmoothFn& payoff, double scale);

/// Smooth-fit threshold by bisection after geometric bracket expansion from
/// x0; absolute tolerance 1e-12 * scale.
StandaloneSolution solve_standalone(const Diffusion& model, const SmoothFn& payoff, double scale);

enum class Bargaining { Nash, Shapley };

/// Continuation payoff of the decision maker (dm) and the successful
/// developer's share at a breakthrough.
struct BargainingSplit {
    double dm = 0.0;
    double developer = 0.0;
};

/// Stand-alone payoff R(x) = x - I, breakthrough payoff U(x) = kappa x - I,
/// their stand-alone values V_R, V_U and the bargaining split G, P.
class TechnologyPayoffs {
public:
    TechnologyPayoffs(Diffusion model, double investment_cost, double kappa,
                      Bargaining rule = Bargaining::Nash);

    const Diffusion& model() const { return model_; }
    double investment_cost() const { return cost_; }
    double kappa() const { return kappa_; }
    Bargaining bargaining() const { return rule_; }

    double x_R() const { return r_sol_.threshold; }
    double x_U() const { return u_sol_.threshold; }
    double x0_R() const { return r_sol_.sign_change; }
    const StandaloneSolution& standalone_R() const { return r_sol_; }
    const StandaloneSolution& standalone_U() const { return u_sol_; }

    Jet R(double x) const { return payoff_R_(x); }
    Jet U(double x) const { return payoff_U_(x); }
    const SmoothFn& payoff_R() const { return payoff_R_; }
    Jet V_R(double x) const;
    Jet V_U(double x) const;

    /// Decision maker's continuation payoff under the configured rule.
    Jet G(double x) const;
    /// Developer's share under the configured rule. At the kinks x_U and
    /// x_R the second derivative is the right-sided one.
    Jet P(double x) const;

    /// Monotone inverse of P on (0, inf).
    double developer_share_inverse(double z) const;

private:
    Diffusion model_;
    double cost_;
    double kappa_;
    Bargaining rule_;
    SmoothFn payoff_R_;
    SmoothFn payoff_U_;
    StandaloneSolution r_sol_;
    StandaloneSolution u_sol_;
    std::vector<double> inv_x_;
    std::vector<double> inv_p_;
};

/// G = (V_U + V_R)/2, P = (V_U - V_R)/2.
BargainingSplit nash_split(const TechnologyPayoffs& payoffs, double x);

/// Gbar = (2 V_U + V_R)/3, Punder = (V_U - V_R)/6.
BargainingSplit shapley_split(const TechnologyPayoffs& payoffs, double x);

/// L(x) = (L R - r R)(x); negative beyond x0_R.
double drift_term_L(const TechnologyPayoffs& payoffs, double x);

}  // namespace techstop
