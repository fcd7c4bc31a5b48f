#pragma once

#include "techstop/boundary.hpp"

namespace techstop {

enum class Region { Stop, LeftOfStop, RightOfStop, BelowMlow };

const char* to_string(Region r);

/// Which regime's formula applies on the line m = m_low.
enum class Side { Left, Right };

/// Value function W(x, m) built from the free boundary.
///
/// Regions: Stop (m >= m_low, x_R <= x <= b(m)), LeftOfStop (m >= m_low,
/// x < x_R), RightOfStop (m >= m_low, b(m) < x <= m), BelowMlow (m < m_low).
class ValueSurface {
public:
    ValueSurface(Problem problem, FreeBoundary boundary);

    const Problem& problem() const { return problem_; }
    const FreeBoundary& boundary() const { return boundary_; }
    double m_low() const { return boundary_.m_low(); }

    Region region(double x, double m) const;

    /// Coefficients of h1 and h2 to the right of the stopping set (m >= m_low).
    double A(double m) const;
    double B(double m) const;
    /// (1 - F(m)) times the derivative of R/h2 in zeta at b(m); equals A(m).
    double A_transformed(double m) const;
    /// Coefficient of h1 below m_low.
    double C(double m) const;

    /// Closed-form m-derivatives (they do not use b').
    double A_prime(double m) const;
    double B_prime(double m) const;
    double C_prime(double m) const;

    double value(double x, double m) const;
    /// W(., m) at x with first and second x-derivatives.
    Jet value_x(double x, double m) const;
    double partial_x(double x, double m) const { return value_x(x, m).d1; }
    double partial_m(double x, double m, Side side = Side::Right) const;

    /// Vbar(x) = W(x, x) + F(x) G(x).
    double initial_value(double x) const;

private:
    void check_point(double x, double m) const;
    double anchor() const { return r_at_xr_ / h1_at_xr_; }

    Problem problem_;
    FreeBoundary boundary_;
    double x_r_;
    double r_at_xr_;
    double h1_at_xr_;
    double c_low_;  ///< C(m_low) = A(m_low)
};

}  // namespace techstop
