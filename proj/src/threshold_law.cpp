#include "techstop/threshold_law.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>

namespace techstop {

CostLaw CostLaw::exponential(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("costs: exponential rate must be > 0");
    CostLaw law;
    law.family_ = Family::Exponential;
    law.params_[0] = rate;
    law.density_ = [rate](double z) { return z < 0.0 ? 0.0 : rate * std::exp(-rate * z); };
    law.cdf_ = [rate](double z) { return z <= 0.0 ? 0.0 : -std::expm1(-rate * z); };
    law.survival_ = [rate](double z) { return z <= 0.0 ? 1.0 : std::exp(-rate * z); };
    law.hazard_ = [rate](double z) { return z < 0.0 ? 0.0 : rate; };
    return law;
}

CostLaw CostLaw::lognormal(double location, double scale) {
    if (!std::isfinite(location)) throw DomainError("costs: lognormal location must be finite");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("costs: lognormal scale must be > 0");
    CostLaw law;
    law.family_ = Family::Lognormal;
    law.params_[0] = location;
    law.params_[1] = scale;
    law.density_ = [location, scale](double z) {
        if (z <= 0.0) return 0.0;
        const double u = (std::log(z) - location) / scale;
        return std::exp(-0.5 * u * u) / (z * scale * std::sqrt(2.0 * std::numbers::pi));
    };
    law.cdf_ = [location, scale](double z) {
        if (z <= 0.0) return 0.0;
        return 0.5 * std::erfc(-(std::log(z) - location) / (scale * std::numbers::sqrt2));
    };
    law.survival_ = [location, scale](double z) {
        if (z <= 0.0) return 1.0;
        return 0.5 * std::erfc((std::log(z) - location) / (scale * std::numbers::sqrt2));
    };
    return law;
}

CostLaw CostLaw::custom(std::function<double(double)> density, std::function<double(double)> cdf,
                        std::function<double(double)> survival) {
    if (!density || !cdf) throw DomainError("costs: custom law needs density and cdf");
    CostLaw law;
    law.family_ = Family::Custom;
    law.density_ = std::move(density);
    law.cdf_ = cdf;
    if (survival) {
        law.survival_ = std::move(survival);
    } else {
        law.survival_ = [c = std::move(cdf)](double z) { return 1.0 - c(z); };
    }
    return law;
}

double CostLaw::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("costs: quantile needs p in (0, 1)");
    switch (family_) {
        case Family::Exponential: return -std::log1p(-p) / params_[0];
        case Family::Lognormal:
            return std::exp(params_[0] - params_[1] * std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p));
        case Family::Custom: break;
    }
    double hi = 1.0;
    for (int k = 0; cdf_(hi) < p; ++k) {
        hi *= 2.0;
        if (k > 1100) throw NumericalError("costs: quantile out of range");
    }
    double lo = 0.5 * hi;
    for (int k = 0; lo > 0.0 && cdf_(lo) > p; ++k) {
        hi = lo;
        lo *= 0.5;
        if (k > 1100) throw NumericalError("costs: quantile out of range");
    }
    return bisect([&](double z) { return cdf_(z) - p; }, lo, hi, 4e-16 * hi);
}

std::string CostLaw::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (family_) {
        case Family::Exponential: os << "exponential(rate=" << params_[0] << ")"; break;
        case Family::Lognormal:
            os << "lognormal(location=" << params_[0] << ", scale=" << params_[1] << ")";
            break;
        case Family::Custom: os << "custom"; break;
    }
    return os.str();
}

ThresholdLaw::ThresholdLaw(CostLaw costs, TechnologyPayoffs payoffs)
    : costs_(std::move(costs)), payoffs_(std::move(payoffs)) {}

double ThresholdLaw::cdf(double m) const { return costs_.cdf(payoffs_.P(m).value); }

double ThresholdLaw::survival(double m) const { return costs_.survival(payoffs_.P(m).value); }

double ThresholdLaw::density(double m) const {
    const Jet p = payoffs_.P(m);
    return p.d1 * costs_.density(p.value);
}

double ThresholdLaw::hazard(double m) const {
    const Jet p = payoffs_.P(m);
    return p.d1 * costs_.hazard(p.value);
}

ThresholdLaw threshold_law_from_costs(const CostLaw& costs, const TechnologyPayoffs& payoffs) {
    return ThresholdLaw(costs, payoffs);
}

bool hazard_order_dominates(const CostLaw& a, const CostLaw& b, std::span<const double> grid) {
    if (grid.empty()) return false;
    for (double z : grid) {
        if (!(a.hazard(z) > b.hazard(z))) return false;
    }
    return true;
}

bool has_monotone_hazard(const CostLaw& law, std::span<const double> grid) {
    for (std::size_t i = 1; i < grid.size(); ++i) {
        // Relative slack absorbs rounding for constant hazards.
        const double h0 = law.hazard(grid[i - 1]);
        const double h1 = law.hazard(grid[i]);
        if (h1 < h0 - 1e-12 * std::abs(h0)) return false;
    }
    return true;
}

}  // namespace techstop
