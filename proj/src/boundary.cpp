#include "techstop/boundary.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/interpolators/pchip.hpp>

namespace techstop {

TransformCache::TransformCache(const Problem& problem) : problem_(&problem) {}

Jet TransformCache::zeta(double x) const {
    const Diffusion& d = problem_->model;
    const Jet a = d.h1(x);
    const Jet b = d.h2(x);
    const double w = a.d1 * b.value - a.value * b.d1;
    const double w1 = a.d2 * b.value - a.value * b.d2;
    return {a.value / b.value, w / (b.value * b.value),
            (w1 * b.value - 2.0 * b.d1 * w) / (b.value * b.value * b.value)};
}

double TransformCache::zeta_inv(double y) const {
    const Diffusion& d = problem_->model;
    if (!(y > 0.0) || !std::isfinite(y)) throw DomainError("zeta_inv: y must be positive and finite");
    auto f = [&](double x) { return zeta(x).value - y; };
    double lo = std::isfinite(d.beta()) ? 0.5 * (d.alpha() + d.beta()) : d.alpha() + 1.0;
    double hi = lo;
    for (int k = 0; f(lo) > 0.0; ++k) {
        hi = lo;
        lo = d.alpha() + 0.5 * (lo - d.alpha());
        if (k > 2000 || !d.contains(lo)) throw NumericalError("zeta_inv: underflow");
    }
    for (int k = 0; f(hi) < 0.0; ++k) {
        lo = hi;
        hi = std::isfinite(d.beta()) ? 0.5 * (hi + d.beta()) : 2.0 * hi + 1.0;
        if (k > 2000 || !d.contains(hi)) throw NumericalError("zeta_inv: overflow");
    }
    return bisect(f, lo, hi, 4e-16 * hi);
}

Jet TransformCache::transform_at(const Jet& u, double x) const {
    const Diffusion& d = problem_->model;
    const Jet h = d.h2(x);
    const double gs = d.gamma() * d.scale_deriv(x);
    const double sig = d.volatility(x);
    const double excess = apply_generator(d, u, x) - d.rate() * u.value;
    return {u.value / h.value, (u.d1 * h.value - u.value * h.d1) / gs,
            2.0 * excess * h.value * h.value * h.value / (sig * sig * gs * gs)};
}

Jet TransformCache::R_hat_at(double x) const { return transform_at(problem_->payoffs.R(x), x); }

Jet TransformCache::G_hat_at(double x) const { return transform_at(problem_->payoffs.G(x), x); }

SolverOptions SolverOptions::scaled(double factor) const {
    SolverOptions o = *this;
    o.rtol *= factor;
    o.atol *= factor;
    o.eps_diag *= factor;
    o.bisect_tol *= factor;
    return o;
}

BoundaryField::BoundaryField(Problem problem) : problem_(std::move(problem)), transform_(problem_) {}

double BoundaryField::prefactor(double x, double m) const {
    const Diffusion& d = problem_.model;
    const double sig = d.volatility(x);
    return -problem_.law.hazard(m) * sig * sig * d.gamma() * d.scale_deriv(x) /
           (2.0 * L(x) * d.h2(x).value);
}

double BoundaryField::eta_at(double x, double m) const {
    const Diffusion& d = problem_.model;
    const Jet h1x = d.h1(x);
    const Jet h2x = d.h2(x);
    const double h1m = d.h1(m).value;
    const double h2m = d.h2(m).value;
    const Jet r = problem_.payoffs.R(x);
    const double dz = h1m / h2m - h1x.value / h2x.value;
    const double g_hat = problem_.payoffs.G(m).value / h2m;
    const double r_hat = r.value / h2x.value;
    const double r_hat_d = (r.d1 * h2x.value - r.value * h2x.d1) / (d.gamma() * d.scale_deriv(x));
    return (g_hat - r_hat) / dz - r_hat_d;
}

double BoundaryField::eta(double z, double y) const {
    if (!(z > y)) throw DomainError("eta: need z > y");
    const double x = transform_.zeta_inv(y);
    const double m = transform_.zeta_inv(z);
    const Jet r = transform_.R_hat_at(x);
    const double g = transform_.G_hat_at(m).value;
    return (g - r.value) / (z - y) - r.d1;
}

double BoundaryField::E(double x, double m) const {
    if (x < problem_.x_R() || !(m > x)) {
        std::ostringstream os;
        os.precision(17);
        os << "E: (x, m) = (" << x << ", " << m << ") outside x_R <= x < m";
        throw DomainError(os.str());
    }
    return prefactor(x, m) * eta_at(x, m);
}

double BoundaryField::E_raw(double x, double m) const {
    if (x < problem_.x_R() || !(m > x)) throw DomainError("E_raw: (x, m) outside x_R <= x < m");
    const Diffusion& d = problem_.model;
    const Jet h1x = d.h1(x);
    const Jet h2x = d.h2(x);
    const double h1m = d.h1(m).value;
    const double h2m = d.h2(m).value;
    const Jet r = problem_.payoffs.R(x);
    const double g = problem_.payoffs.G(m).value;
    const double sig = d.volatility(x);
    const double den = h1m * h2x.value - h1x.value * h2m;
    const double gs = d.gamma() * d.scale_deriv(x);
    const double brace = gs / den * (r.value * h2m - g * h2x.value) + r.d1 * h2x.value - r.value * h2x.d1;
    return problem_.law.hazard(m) * sig * sig / (2.0 * L(x) * h2x.value) * brace;
}

double BoundaryField::null_curve(double x) const {
    if (x < problem_.x_R()) throw DomainError("null_curve: x must be >= x_R");
    const Diffusion& d = problem_.model;
    auto f = [&](double m) { return eta_at(x, m); };
    double lo = x + 1e-9 * (1.0 + x);
    for (int k = 0; !(f(lo) > 0.0); ++k) {
        lo = x + 0.5 * (lo - x);
        if (k > 60 || !(lo > x)) throw NumericalError("null_curve: eta not positive near the diagonal");
    }
    double hi = 2.0 * x;
    if (!d.contains(hi)) hi = 0.5 * (x + d.beta());
    for (int k = 0; !(f(hi) < 0.0); ++k) {
        lo = hi;
        hi = std::isfinite(d.beta()) ? 0.5 * (hi + d.beta()) : x + 2.0 * (hi - x);
        if (k > 200) throw NumericalError("null_curve: eta has no root above x (A6/A7 violated?)");
    }
    return bisect(f, lo, hi, 1e-14 * hi);
}

double BoundaryField::null_curve_inverse(double m) const {
    const double x_r = problem_.x_R();
    auto f = [&](double x) { return eta_at(x, m); };
    if (!(f(x_r) < 0.0)) throw DomainError("null_curve_inverse: m must exceed m_{x_R}");
    double hi = m - 1e-9 * (1.0 + m);
    for (int k = 0; !(f(hi) > 0.0); ++k) {
        hi = m - 0.5 * (m - hi);
        if (k > 60) throw NumericalError("null_curve_inverse: eta not positive near the diagonal");
    }
    return bisect(f, x_r, hi, 1e-14 * m);
}

const char* to_string(TrajectoryClass c) {
    switch (c) {
        case TrajectoryClass::HitsDiagonal: return "HitsDiagonal";
        case TrajectoryClass::HitsNullCurve: return "HitsNullCurve";
        case TrajectoryClass::ReachesHorizon: return "ReachesHorizon";
    }
    return "?";
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr std::array<double, 7> kC{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr std::array<double, 7> kB5{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr std::array<double, 7> kB4{5179.0 / 57600, 0.0, 7571.0 / 16695, 393.0 / 640,
                                    -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

std::string where(double b, double m) {
    std::ostringstream os;
    os.precision(17);
    os << "(b, m) = (" << b << ", " << m << ")";
    return os.str();
}

// dir = +1 integrates forward in m with classification; dir = -1 backward.
Trajectory run(const BoundaryField& field, double b0, double m0, double m_end, int dir,
               const SolverOptions& opts) {
    Trajectory tr;
    double m = m0;
    double b = b0;
    double h = 1e-6 * (1.0 + m0);
    const bool forward = dir > 0;

    auto field_at = [&](double x, double mm) { return field.E(x, mm); };
    auto diagonal_hit = [&](double x, double mm) { return mm - x < opts.eps_diag * (1.0 + mm); };

    if (diagonal_hit(b, m)) {
        if (!forward) throw NumericalError("integrate_backward: start on the diagonal " + where(b, m));
        tr.kind = TrajectoryClass::HitsDiagonal;
        tr.m.push_back(m);
        tr.b.push_back(b);
        tr.slope.push_back(std::numeric_limits<double>::infinity());
        return tr;
    }
    double k1 = field_at(b, m);
    tr.m.push_back(m);
    tr.b.push_back(b);
    tr.slope.push_back(k1);

    std::array<double, 7> k{};
    while (true) {
        const double remaining = forward ? m_end - m : m - m_end;
        if (remaining <= 0.0) {
            tr.kind = TrajectoryClass::ReachesHorizon;
            break;
        }
        const double d = m - b;
        if (diagonal_hit(b, m)) {
            if (!forward) throw NumericalError("integrate_backward: reached the diagonal at " + where(b, m));
            tr.kind = TrajectoryClass::HitsDiagonal;
            break;
        }
        if (!std::isfinite(k1)) throw NumericalError("boundary ODE: non-finite field at " + where(b, m));
        if (forward && k1 <= 0.0) {
            tr.kind = TrajectoryClass::HitsNullCurve;
            break;
        }
        h = std::min({h, remaining, 0.25 * d / std::max(1.0, std::abs(k1))});
        if (h < 1e-15 * (1.0 + m)) {
            if (!forward) throw NumericalError("integrate_backward: step underflow at " + where(b, m));
            tr.kind = TrajectoryClass::HitsDiagonal;
            break;
        }

        k[0] = dir * k1;
        bool valid = true;
        for (int i = 1; i < 7 && valid; ++i) {
            double bi = b;
            for (int j = 0; j < i; ++j) bi += h * kA[i][j] * k[j];
            const double mi = m + dir * kC[i] * h;
            if (!(mi - bi > 0.0) || bi < field.problem().x_R()) {
                valid = false;
                break;
            }
            k[i] = dir * field_at(bi, mi);
            if (!std::isfinite(k[i])) valid = false;
        }
        if (!valid) {
            h *= 0.25;
            ++tr.rejected;
            continue;
        }
        double b5 = b;
        double b4 = b;
        for (int i = 0; i < 7; ++i) {
            b5 += h * kB5[i] * k[i];
            b4 += h * kB4[i] * k[i];
        }
        const double err = std::abs(b5 - b4) / (opts.atol + opts.rtol * std::abs(b5));
        if (err <= 1.0) {
            m = (remaining - h <= 0.0) ? m_end : m + dir * h;
            b = b5;
            k1 = dir * k[6];
            tr.m.push_back(m);
            tr.b.push_back(b);
            tr.slope.push_back(k1);
            h *= err > 0.0 ? std::min(5.0, 0.9 * std::pow(err, -0.2)) : 5.0;
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.25));
            ++tr.rejected;
        }
    }
    if (!forward) {
        std::reverse(tr.m.begin(), tr.m.end());
        std::reverse(tr.b.begin(), tr.b.end());
        std::reverse(tr.slope.begin(), tr.slope.end());
    }
    return tr;
}

}  // namespace

Trajectory classify_trajectory(const BoundaryField& field, double m0, double horizon,
                               const SolverOptions& opts) {
    const double x_r = field.problem().x_R();
    if (!(m0 > x_r)) throw DomainError("classify_trajectory: m0 must exceed x_R");
    if (!(horizon > m0)) throw DomainError("classify_trajectory: horizon must exceed m0");
    return run(field, x_r, m0, horizon, +1, opts);
}

Trajectory integrate_backward(const BoundaryField& field, double b_end, double m_end, double m_stop,
                              const SolverOptions& opts) {
    if (!(m_stop < m_end)) throw DomainError("integrate_backward: need m_stop < m_end");
    return run(field, b_end, m_end, m_stop, -1, opts);
}

FreeBoundary::FreeBoundary(std::vector<double> m, std::vector<double> b, std::vector<double> slope,
                           double horizon)
    : m_(std::move(m)), b_(std::move(b)), s_(std::move(slope)), horizon_(horizon) {
    if (m_.size() < 2 || b_.size() != m_.size() || s_.size() != m_.size()) {
        throw DomainError("FreeBoundary: need at least two samples with matching slopes");
    }
    for (std::size_t i = 0; i + 1 < m_.size(); ++i) {
        if (!(m_[i + 1] > m_[i])) throw DomainError("FreeBoundary: m grid must be strictly increasing");
        if (!(b_[i + 1] > b_[i])) throw DomainError("FreeBoundary: b must be strictly increasing");
    }
    for (double& s : s_) {
        if (!(s >= 0.0)) s = 0.0;
    }
    // Fritsch-Carlson limiter.
    for (std::size_t i = 0; i + 1 < m_.size(); ++i) {
        const double delta = (b_[i + 1] - b_[i]) / (m_[i + 1] - m_[i]);
        const double a = s_[i] / delta;
        const double c = s_[i + 1] / delta;
        const double r2 = a * a + c * c;
        if (r2 > 9.0) {
            const double tau = 3.0 / std::sqrt(r2);
            s_[i] = tau * a * delta;
            s_[i + 1] = tau * c * delta;
        }
    }
}

FreeBoundary FreeBoundary::from_samples(std::vector<double> m, std::vector<double> b, double horizon) {
    if (m.size() < 2 || b.size() != m.size()) throw DomainError("FreeBoundary: need at least two samples");
    std::vector<double> slopes(m.size());
    if (m.size() < 4) {
        const double delta = (b.back() - b.front()) / (m.back() - m.front());
        std::fill(slopes.begin(), slopes.end(), delta);
    } else {
        boost::math::interpolators::pchip<std::vector<double>> p{std::vector<double>(m),
                                                                 std::vector<double>(b)};
        for (std::size_t i = 0; i < m.size(); ++i) slopes[i] = p.prime(m[i]);
    }
    return FreeBoundary(std::move(m), std::move(b), std::move(slopes), horizon);
}

std::size_t FreeBoundary::segment(double m) const {
    const auto it = std::upper_bound(m_.begin(), m_.end(), m);
    const auto i = static_cast<std::size_t>(it - m_.begin());
    return std::min(std::max<std::size_t>(i, 1), m_.size() - 1) - 1;
}

double FreeBoundary::operator()(double m) const {
    if (m_.empty()) throw DomainError("FreeBoundary: empty");
    if (m < m_.front()) throw DomainError("FreeBoundary: m below the endpoint m_low");
    if (m >= m_.back()) return b_.back() + std::min(s_.back(), 1.0) * (m - m_.back());
    const std::size_t i = segment(m);
    const double h = m_[i + 1] - m_[i];
    const double t = (m - m_[i]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * b_[i] + (t3 - 2 * t2 + t) * h * s_[i] + (-2 * t3 + 3 * t2) * b_[i + 1] +
           (t3 - t2) * h * s_[i + 1];
}

double FreeBoundary::derivative(double m) const {
    if (m_.empty()) throw DomainError("FreeBoundary: empty");
    if (m < m_.front()) throw DomainError("FreeBoundary: m below the endpoint m_low");
    if (m >= m_.back()) return std::min(s_.back(), 1.0);
    const std::size_t i = segment(m);
    const double h = m_[i + 1] - m_[i];
    const double t = (m - m_[i]) / h;
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * b_[i] + (6 * t - 6 * t2) * b_[i + 1]) / h + (3 * t2 - 4 * t + 1) * s_[i] +
           (3 * t2 - 2 * t) * s_[i + 1];
}

double default_horizon(const Problem& problem, double survival_target) {
    if (!(survival_target > 0.0 && survival_target < 1.0)) {
        throw DomainError("default_horizon: survival target must lie in (0, 1)");
    }
    const Diffusion& d = problem.model;
    auto f = [&](double m) { return problem.law.survival(m) - survival_target; };
    double lo = problem.x_R();
    if (f(lo) < 0.0) return lo;
    double hi = lo;
    for (int k = 0; f(hi) >= 0.0; ++k) {
        lo = hi;
        hi = std::isfinite(d.beta()) ? 0.5 * (hi + d.beta()) : 2.0 * hi;
        if (k > 200) throw NumericalError("default_horizon: survival does not reach the target");
    }
    return bisect(f, lo, hi, 1e-12 * hi);
}

namespace {

double interpolate(const Trajectory& t, double m) {
    const auto it = std::lower_bound(t.m.begin(), t.m.end(), m);
    if (it == t.m.begin()) return t.b.front();
    if (it == t.m.end()) return t.b.back();
    const auto i = static_cast<std::size_t>(it - t.m.begin());
    const double h = t.m[i] - t.m[i - 1];
    const double u = (m - t.m[i - 1]) / h;
    const double u2 = u * u;
    const double u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * t.b[i - 1] + (u3 - 2 * u2 + u) * h * t.slope[i - 1] +
           (-2 * u3 + 3 * u2) * t.b[i] + (u3 - u2) * h * t.slope[i];
}

}  // namespace

BoundarySolution find_endpoint(const BoundaryField& field, const SolverOptions& opts) {
    const Problem& pb = field.problem();
    EndpointReport rep;
    rep.x_R = pb.x_R();
    rep.m_xR = field.null_curve(rep.x_R);
    rep.horizon = opts.horizon > 0.0 ? opts.horizon : default_horizon(pb, opts.survival_target);
    rep.horizon = std::max(rep.horizon, 1.5 * rep.m_xR);
    const double probe = opts.probe_factor * rep.horizon;

    double lo = rep.x_R;
    double hi = rep.m_xR;
    double tol = opts.bisect_tol * rep.x_R;

    auto probe_class = [&](double m0) {
        const Trajectory t = classify_trajectory(field, m0, probe, opts);
        rep.trace.push_back({m0, t.kind, t.end_m()});
        ++rep.iterations;
        return t.kind;
    };
    // Edge search once a probe survives: moves the D|0 or 0|N transition.
    auto refine = [&](double a, double c, TrajectoryClass move_hi_on) {
        while (c - a > tol && rep.iterations < opts.max_iter) {
            const double mid = 0.5 * (a + c);
            if (probe_class(mid) == move_hi_on) {
                c = mid;
            } else {
                a = mid;
            }
        }
        return std::pair{a, c};
    };

    Trajectory witness;
    while (true) {
        bool surviving = false;
        while (hi - lo > tol && rep.iterations < opts.max_iter) {
            const double mid = 0.5 * (lo + hi);
            const TrajectoryClass c = probe_class(mid);
            if (c == TrajectoryClass::HitsDiagonal) {
                lo = mid;
            } else if (c == TrajectoryClass::HitsNullCurve) {
                hi = mid;
            } else {
                lo = refine(lo, mid, TrajectoryClass::ReachesHorizon).first;
                hi = refine(mid, hi, TrajectoryClass::HitsNullCurve).second;
                surviving = true;
                break;
            }
        }
        rep.bracket_lo = lo;
        rep.bracket_hi = hi;
        rep.m_low = 0.5 * (lo + hi);
        witness = classify_trajectory(field, rep.m_low, rep.horizon, opts);
        rep.witness_end = witness.end_m();
        if (witness.kind == TrajectoryClass::ReachesHorizon || surviving) break;
        if (rep.retries >= 8 || rep.iterations >= opts.max_iter) {
            std::ostringstream os;
            os.precision(17);
            os << "find_endpoint: bracket [" << lo << ", " << hi << "] collapsed without a trajectory "
               << "reaching the horizon " << rep.horizon << " (last witness " << to_string(witness.kind)
               << " at m = " << witness.end_m() << ")";
            throw NumericalError(os.str());
        }
        ++rep.retries;
        tol *= 0.5;
    }
    if (witness.kind != TrajectoryClass::ReachesHorizon) {
        throw NumericalError("find_endpoint: surviving probe but witness left the band");
    }

    std::vector<double> ms = witness.m;
    std::vector<double> bs = witness.b;
    std::vector<double> ss = witness.slope;

    if (opts.backward_tail) {
        // Forward trajectories separate from the separatrix exponentially;
        // keep the witness only while the bracket edges still agree closely.
        const Trajectory a = classify_trajectory(field, lo, rep.horizon, opts);
        const Trajectory c = classify_trajectory(field, hi, rep.horizon, opts);
        const double m_ref = std::max(hi, ms[1]);
        const double gap0 = std::abs(interpolate(a, m_ref) - interpolate(c, m_ref));
        const double gap_limit = std::max(10.0 * gap0, 1e-12 * rep.x_R);
        const double edge_end = std::min(a.end_m(), c.end_m());
        std::size_t cut = ms.size() - 1;
        for (std::size_t i = 1; i < ms.size(); ++i) {
            if (ms[i] <= m_ref) continue;
            if (ms[i] >= edge_end || std::abs(interpolate(a, ms[i]) - interpolate(c, ms[i])) > gap_limit) {
                cut = i;
                break;
            }
        }
        cut = std::max<std::size_t>(cut, 1);
        rep.splice_m = ms[cut];
        const double grid_end = std::max(opts.grid_factor * rep.horizon, rep.splice_m * 1.5);
        rep.tail_start = std::max(opts.tail_factor * rep.horizon, 2.0 * grid_end);
        const double x_null = field.null_curve_inverse(rep.tail_start);
        auto tail_from = [&](double w) {
            const double b_start = x_null + w * (rep.tail_start - x_null);
            return integrate_backward(field, b_start, rep.tail_start, rep.splice_m, opts);
        };
        Trajectory back = tail_from(0.5);
        const Trajectory other = tail_from(0.9);
        rep.tail_spread = std::abs(interpolate(back, grid_end) - interpolate(other, grid_end));
        while (back.m.size() > 2 && back.m[back.m.size() - 2] >= grid_end) {
            back.m.pop_back();
            back.b.pop_back();
            back.slope.pop_back();
        }

        ms.resize(cut + 1);
        bs.resize(cut + 1);
        ss.resize(cut + 1);
        for (std::size_t i = 0; i < back.m.size(); ++i) {
            if (back.m[i] <= rep.splice_m) continue;
            if (!(back.b[i] > bs.back())) continue;
            ms.push_back(back.m[i]);
            bs.push_back(back.b[i]);
            ss.push_back(back.slope[i]);
        }
    }
    BoundarySolution sol{FreeBoundary(std::move(ms), std::move(bs), std::move(ss), rep.horizon), rep};
    return sol;
}

}  // namespace techstop
