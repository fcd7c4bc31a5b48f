#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace techstop {

/// Value of a scalar function together with its first two derivatives.
struct Jet {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

using SmoothFn = std::function<Jet(double)>;

/// Raised when a numerical procedure cannot produce a trustworthy answer
/// (bracketing failure, non-convergence, non-finite evaluations).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an argument lies outside the domain of an operation.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Bisection on a bracket [lo, hi] with f(lo) and f(hi) of opposite signs.
/// Stops once the bracket is narrower than `abs_tol` or after `max_iter` halvings.
template <typename F>
double bisect(F&& f, double lo, double hi, double abs_tol, int max_iter = 400) {
    double f_lo = f(lo);
    const double f_hi = f(hi);
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if (std::signbit(f_lo) == std::signbit(f_hi)) {
        throw NumericalError("bisect: bracket [" + std::to_string(lo) + ", " + std::to_string(hi) +
                             "] does not enclose a sign change");
    }
    for (int i = 0; i < max_iter && hi - lo > abs_tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double f_mid = f(mid);
        if (f_mid == 0.0) return mid;
        if (std::signbit(f_mid) == std::signbit(f_lo)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Adaptive Gauss-Kronrod (7/15) integral of f over [a, b], split at any
/// breakpoints that fall strictly inside the interval.
template <typename F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-10,
                 const std::vector<double>& breakpoints = {}) {
    if (a == b) return 0.0;
    double sign = 1.0;
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }
    std::vector<double> knots{a};
    for (double p : breakpoints) {
        if (p > a && p < b) knots.push_back(p);
    }
    knots.push_back(b);
    std::sort(knots.begin(), knots.end());

    using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        double err = 0.0;
        const double piece = Rule::integrate(f, knots[i], knots[i + 1], 20, rel_tol, &err);
        if (!std::isfinite(piece)) {
            throw NumericalError("integrate: non-finite quadrature result");
        }
        total += piece;
    }
    return sign * total;
}

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace techstop
