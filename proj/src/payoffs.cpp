#include "techstop/payoffs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace techstop {

SmoothFn linear_payoff(double slope, double cost) {
    return [slope, cost](double x) { return Jet{slope * x - cost, slope, 0.0}; };
}

Jet StandaloneSolution::value(const Diffusion& model, const SmoothFn& payoff, double x) const {
    if (x >= threshold) return payoff(x);
    const Jet h = model.h1(x);
    const double k = payoff_at_threshold / h1_at_threshold;
    return {k * h.value, k * h.d1, k * h.d2};
}

namespace {

double excess_drift(const Diffusion& model, const SmoothFn& payoff, double x) {
    const Jet g = payoff(x);
    return apply_generator(model, g, x) - model.rate() * g.value;
}

std::vector<double> search_grid(const Diffusion& model, double scale) {
    std::vector<double> grid;
    const int n = 241;
    for (int i = 0; i < n; ++i) {
        const double x = scale * std::pow(10.0, -6.0 + 12.0 * i / (n - 1));
        if (model.contains(x)) grid.push_back(x);
    }
    return grid;
}

}  // namespace

double sign_change_point(const Diffusion& model, const SmoothFn& payoff, double scale) {
    const std::vector<double> grid = search_grid(model, scale);
    if (grid.size() < 2) throw NumericalError("sign_change_point: empty search grid");

    int changes = 0;
    std::size_t at = 0;
    double prev = excess_drift(model, payoff, grid.front());
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double cur = excess_drift(model, payoff, grid[i]);
        if (prev > 0.0 && cur <= 0.0) {
            ++changes;
            at = i;
        } else if (prev <= 0.0 && cur > 0.0) {
            changes += 2;  // wrong direction
        }
        prev = cur;
    }
    if (changes != 1) {
        throw NumericalError("sign_change_point: L g - r g must change sign exactly once, from + to -");
    }
    return bisect([&](double x) { return excess_drift(model, payoff, x); }, grid[at - 1], grid[at],
                  1e-14 * grid[at]);
}

StandaloneSolution solve_standalone(const Diffusion& model, const SmoothFn& payoff, double scale) {
    const double x0 = sign_change_point(model, payoff, scale);
    // g(x) = payoff'(x) h1(x) - payoff(x) h1'(x); positive just above x0 and
    // negative past the threshold.
    auto g = [&](double x) {
        const Jet p = payoff(x);
        const Jet h = model.h1(x);
        return (p.d1 * h.value - p.value * h.d1) / h.value;
    };
    double lo = x0;
    double hi = x0;
    for (int k = 0; k < 200; ++k) {
        const double next = std::isfinite(model.beta()) ? 0.5 * (hi + model.beta()) : 2.0 * hi + scale;
        if (g(next) < 0.0) {
            hi = next;
            break;
        }
        lo = next;
        hi = next;
    }
    if (!(g(hi) < 0.0)) {
        throw NumericalError("solve_standalone: no smooth-fit threshold found above x0");
    }
    if (!(g(lo) > 0.0)) {
        // x0 itself can sit exactly on the root only for degenerate payoffs.
        throw NumericalError("solve_standalone: smooth-fit function is not positive at x0");
    }
    StandaloneSolution s;
    s.sign_change = x0;
    s.threshold = bisect(g, lo, hi, 1e-12 * scale);
    s.payoff_at_threshold = payoff(s.threshold).value;
    s.h1_at_threshold = model.h1(s.threshold).value;
    if (!(s.payoff_at_threshold > 0.0)) {
        throw NumericalError("solve_standalone: payoff must be positive at the threshold");
    }
    return s;
}

TechnologyPayoffs::TechnologyPayoffs(Diffusion model, double investment_cost, double kappa,
                                     Bargaining rule)
    : model_(std::move(model)), cost_(investment_cost), kappa_(kappa), rule_(rule) {
    if (!(cost_ > 0.0) || !std::isfinite(cost_)) throw DomainError("payoffs: I must be > 0");
    if (!(kappa_ > 1.0) || !std::isfinite(kappa_)) throw DomainError("payoffs: kappa must be > 1");
    payoff_R_ = linear_payoff(1.0, cost_);
    payoff_U_ = linear_payoff(kappa_, cost_);
    r_sol_ = solve_standalone(model_, payoff_R_, cost_);
    u_sol_ = solve_standalone(model_, payoff_U_, cost_);

    // Monotone (x, P(x)) table for inversion.
    const int n = 400;
    const double lo = 1e-4 * std::min(x_U(), x_R());
    const double hi = 1e3 * std::max(x_U(), x_R());
    inv_x_.reserve(n);
    inv_p_.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double x = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
        if (!model_.contains(x)) continue;
        inv_x_.push_back(x);
        inv_p_.push_back(P(x).value);
    }
    for (std::size_t i = 1; i < inv_p_.size(); ++i) {
        if (!(inv_p_[i] > inv_p_[i - 1])) {
            throw NumericalError("payoffs: developer share P is not strictly increasing");
        }
    }
}

Jet TechnologyPayoffs::V_R(double x) const { return r_sol_.value(model_, payoff_R_, x); }
Jet TechnologyPayoffs::V_U(double x) const { return u_sol_.value(model_, payoff_U_, x); }

Jet TechnologyPayoffs::G(double x) const {
    const Jet u = V_U(x);
    const Jet v = V_R(x);
    if (rule_ == Bargaining::Nash) {
        return {0.5 * (u.value + v.value), 0.5 * (u.d1 + v.d1), 0.5 * (u.d2 + v.d2)};
    }
    return {(2.0 * u.value + v.value) / 3.0, (2.0 * u.d1 + v.d1) / 3.0, (2.0 * u.d2 + v.d2) / 3.0};
}

Jet TechnologyPayoffs::P(double x) const {
    const Jet u = V_U(x);
    const Jet v = V_R(x);
    const double k = rule_ == Bargaining::Nash ? 0.5 : 1.0 / 6.0;
    return {k * (u.value - v.value), k * (u.d1 - v.d1), k * (u.d2 - v.d2)};
}

double TechnologyPayoffs::developer_share_inverse(double z) const {
    if (!(z > 0.0) || !std::isfinite(z)) {
        throw DomainError("developer_share_inverse: z must be positive and finite");
    }
    auto f = [&](double x) { return P(x).value - z; };
    double lo = 0.0;
    double hi = 0.0;
    const auto it = std::upper_bound(inv_p_.begin(), inv_p_.end(), z);
    if (it == inv_p_.begin()) {
        hi = inv_x_.front();
        lo = 0.5 * hi;
        while (f(lo) > 0.0) {
            hi = lo;
            lo *= 0.5;
            if (!model_.contains(lo)) throw NumericalError("developer_share_inverse: underflow");
        }
    } else if (it == inv_p_.end()) {
        lo = inv_x_.back();
        hi = 2.0 * lo;
        while (f(hi) < 0.0) {
            lo = hi;
            hi *= 2.0;
            if (!model_.contains(hi)) throw NumericalError("developer_share_inverse: overflow");
        }
    } else {
        const auto i = static_cast<std::size_t>(it - inv_p_.begin());
        lo = inv_x_[i - 1];
        hi = inv_x_[i];
    }
    return bisect(f, lo, hi, 4e-16 * hi);
}

BargainingSplit nash_split(const TechnologyPayoffs& payoffs, double x) {
    if (!payoffs.model().contains(x)) throw DomainError("nash_split: x outside the state interval");
    const double u = payoffs.V_U(x).value;
    const double v = payoffs.V_R(x).value;
    return {0.5 * (u + v), 0.5 * (u - v)};
}

BargainingSplit shapley_split(const TechnologyPayoffs& payoffs, double x) {
    if (!payoffs.model().contains(x)) throw DomainError("shapley_split: x outside the state interval");
    const double u = payoffs.V_U(x).value;
    const double v = payoffs.V_R(x).value;
    return {(2.0 * u + v) / 3.0, (u - v) / 6.0};
}

double drift_term_L(const TechnologyPayoffs& payoffs, double x) {
    const Jet r = payoffs.R(x);
    return apply_generator(payoffs.model(), r, x) - payoffs.model().rate() * r.value;
}

}  // namespace techstop
