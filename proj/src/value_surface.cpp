#include "techstop/value_surface.hpp"

#include <cmath>

namespace techstop {

const char* to_string(Region r) {
    switch (r) {
        case Region::Stop: return "Stop";
        case Region::LeftOfStop: return "LeftOfStop";
        case Region::RightOfStop: return "RightOfStop";
        case Region::BelowMlow: return "BelowMlow";
    }
    return "?";
}

ValueSurface::ValueSurface(Problem problem, FreeBoundary boundary)
    : problem_(std::move(problem)), boundary_(std::move(boundary)) {
    if (boundary_.empty()) throw DomainError("ValueSurface: empty boundary");
    x_r_ = problem_.x_R();
    r_at_xr_ = problem_.payoffs.R(x_r_).value;
    h1_at_xr_ = problem_.model.h1(x_r_).value;
    c_low_ = problem_.law.survival(m_low()) * anchor();
}

void ValueSurface::check_point(double x, double m) const {
    if (!problem_.model.contains(x) || !problem_.model.contains(m)) {
        throw DomainError("ValueSurface: (x, m) outside the state interval");
    }
    if (x > m) throw DomainError("ValueSurface: need x <= m");
}

Region ValueSurface::region(double x, double m) const {
    check_point(x, m);
    if (m < m_low()) return Region::BelowMlow;
    if (x < x_r_) return Region::LeftOfStop;
    if (x <= boundary_(m)) return Region::Stop;
    return Region::RightOfStop;
}

double ValueSurface::A(double m) const {
    const double b = boundary_(m);
    const Diffusion& d = problem_.model;
    const Jet r = problem_.payoffs.R(b);
    const Jet h = d.h2(b);
    return problem_.law.survival(m) / (d.gamma() * d.scale_deriv(b)) * (r.d1 * h.value - r.value * h.d1);
}

double ValueSurface::B(double m) const {
    const double b = boundary_(m);
    const Diffusion& d = problem_.model;
    const Jet r = problem_.payoffs.R(b);
    const Jet h = d.h1(b);
    return -problem_.law.survival(m) / (d.gamma() * d.scale_deriv(b)) * (r.d1 * h.value - r.value * h.d1);
}

double ValueSurface::A_transformed(double m) const {
    const TransformCache t(problem_);
    return problem_.law.survival(m) * t.R_hat_at(boundary_(m)).d1;
}

double ValueSurface::C(double m) const {
    if (m > m_low()) throw DomainError("ValueSurface::C: need m <= m_low");
    const Diffusion& d = problem_.model;
    auto integrand = [&](double y) {
        return problem_.law.density(y) * problem_.payoffs.G(y).value / d.h1(y).value;
    };
    const double tail = integrate(integrand, m, m_low(), 1e-10,
                                  {problem_.payoffs.x_U(), problem_.payoffs.x_R()});
    return c_low_ + tail;
}

double ValueSurface::A_prime(double m) const {
    const double b = boundary_(m);
    const Diffusion& d = problem_.model;
    const double h1b = d.h1(b).value;
    const double h2b = d.h2(b).value;
    const double h1m = d.h1(m).value;
    const double h2m = d.h2(m).value;
    const double den = h1m * h2b - h1b * h2m;
    const double r = problem_.payoffs.R(b).value;
    const double g = problem_.payoffs.G(m).value;
    return problem_.law.density(m) / den * (r * h2m - g * h2b);
}

double ValueSurface::B_prime(double m) const {
    const double b = boundary_(m);
    const Diffusion& d = problem_.model;
    const double h1b = d.h1(b).value;
    const double h2b = d.h2(b).value;
    const double h1m = d.h1(m).value;
    const double h2m = d.h2(m).value;
    const double den = h1m * h2b - h1b * h2m;
    const double r = problem_.payoffs.R(b).value;
    const double g = problem_.payoffs.G(m).value;
    return -problem_.law.density(m) / den * (r * h1m - g * h1b);
}

double ValueSurface::C_prime(double m) const {
    return -problem_.law.density(m) * problem_.payoffs.G(m).value / problem_.model.h1(m).value;
}

Jet ValueSurface::value_x(double x, double m) const {
    const Diffusion& d = problem_.model;
    switch (region(x, m)) {
        case Region::Stop: {
            const double s = problem_.law.survival(m);
            const Jet r = problem_.payoffs.R(x);
            return {s * r.value, s * r.d1, s * r.d2};
        }
        case Region::LeftOfStop: {
            const double k = problem_.law.survival(m) * anchor();
            const Jet h = d.h1(x);
            return {k * h.value, k * h.d1, k * h.d2};
        }
        case Region::RightOfStop: {
            const double a = A(m);
            const double b = B(m);
            const Jet u = d.h1(x);
            const Jet v = d.h2(x);
            return {a * u.value + b * v.value, a * u.d1 + b * v.d1, a * u.d2 + b * v.d2};
        }
        case Region::BelowMlow: {
            const double c = C(m);
            const Jet h = d.h1(x);
            return {c * h.value, c * h.d1, c * h.d2};
        }
    }
    return {};
}

double ValueSurface::value(double x, double m) const { return value_x(x, m).value; }

double ValueSurface::partial_m(double x, double m, Side side) const {
    check_point(x, m);
    const Diffusion& d = problem_.model;
    const bool below = m < m_low() || (m == m_low() && side == Side::Left);
    if (below) return C_prime(m) * d.h1(x).value;
    const double f = problem_.law.density(m);
    if (x < x_r_) return -f * d.h1(x).value * anchor();
    if (x <= boundary_(m)) return -f * problem_.payoffs.R(x).value;
    return A_prime(m) * d.h1(x).value + B_prime(m) * d.h2(x).value;
}

double ValueSurface::initial_value(double x) const {
    return value(x, x) + problem_.law.cdf(x) * problem_.payoffs.G(x).value;
}

}  // namespace techstop
