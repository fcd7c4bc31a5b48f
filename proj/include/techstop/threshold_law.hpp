#pragma once

#include <functional>
#include <span>
#include <string>

#include "techstop/payoffs.hpp"

namespace techstop {

/// Law of the developers' sunk cost Z on (0, inf).
class CostLaw {
public:
    enum class Family { Exponential, Lognormal, Custom };

    static CostLaw exponential(double rate);
    static CostLaw lognormal(double location, double scale);
    /// Custom law from density and cdf; the survival function defaults to 1 - cdf.
    static CostLaw custom(std::function<double(double)> density, std::function<double(double)> cdf,
                          std::function<double(double)> survival = {});

    Family family() const { return family_; }
    double parameter(int i) const { return params_[i]; }

    double density(double z) const { return density_(z); }
    double cdf(double z) const { return cdf_(z); }
    double survival(double z) const { return survival_(z); }
    double hazard(double z) const { return hazard_ ? hazard_(z) : density_(z) / survival_(z); }
    /// Inverse cdf for p in (0, 1).
    double quantile(double p) const;

    std::string describe() const;

private:
    CostLaw() = default;
    Family family_ = Family::Custom;
    double params_[2] = {0.0, 0.0};
    std::function<double(double)> density_;
    std::function<double(double)> cdf_;
    std::function<double(double)> survival_;
    std::function<double(double)> hazard_;
};

/// Law of the breakthrough threshold Y = P^{-1}(Z): F = F_Z o P, f = P' f_Z o P.
class ThresholdLaw {
public:
    ThresholdLaw(CostLaw costs, TechnologyPayoffs payoffs);

    double cdf(double m) const;
    /// 1 - F(m), computed without cancellation.
    double survival(double m) const;
    double density(double m) const;
    /// Breakthrough rate f / (1 - F).
    double hazard(double m) const;

    const CostLaw& costs() const { return costs_; }

private:
    CostLaw costs_;
    TechnologyPayoffs payoffs_;
};

ThresholdLaw threshold_law_from_costs(const CostLaw& costs, const TechnologyPayoffs& payoffs);

/// True iff the hazard of `a` strictly exceeds that of `b` at every grid point.
bool hazard_order_dominates(const CostLaw& a, const CostLaw& b, std::span<const double> grid);

/// True iff the hazard of `law` is nondecreasing along the (sorted) grid.
bool has_monotone_hazard(const CostLaw& law, std::span<const double> grid);

}  // namespace techstop
