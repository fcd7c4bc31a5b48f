#include "techstop/checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "techstop/monte_carlo.hpp"

namespace techstop {

bool CheckReport::passed() const {
    return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

const CheckResult* CheckReport::find(const std::string& name) const {
    for (const auto& r : results) {
        if (r.name == name) return &r;
    }
    return nullptr;
}

namespace {

double rel(double a, double b, double scale) { return std::abs(a - b) / std::max(scale, 1e-300); }

double upper_m(const ValueSurface& w) { return 0.9 * w.boundary().horizon(); }

// Point (x, m) with m log-uniform on [lo, hi] and x log-uniform on [1e-3 m, m].
struct PointSampler {
    std::mt19937_64 gen;
    double lo;
    double hi;
    std::uniform_real_distribution<double> unit{0.0, 1.0};

    PointSampler(std::uint64_t seed, double lo_, double hi_) : gen(seed), lo(lo_), hi(hi_) {}

    std::pair<double, double> operator()() {
        const double m = lo * std::pow(hi / lo, unit(gen));
        const double x = m * std::pow(1e-3, unit(gen));
        return {std::min(x, m), m};
    }
};

// (1 - F(m)) times the derivative of R/h_k at b, divided by gamma S'(b); the
// coefficient functions A and B as functions of b at fixed m.
double coef_of_b(const Problem& pb, double b, bool first) {
    const Diffusion& d = pb.model;
    const Jet r = pb.payoffs.R(b);
    const Jet h = first ? d.h2(b) : d.h1(b);
    const double v = (r.d1 * h.value - r.value * h.d1) / (d.gamma() * d.scale_deriv(b));
    return first ? v : -v;
}

std::string fmt(const char* label, double v) {
    std::ostringstream os;
    os.precision(3);
    os << label << v;
    return os.str();
}

}  // namespace

std::vector<double> sample_m(const ValueSurface& w, std::size_t n) {
    const double lo = w.m_low();
    const double hi = std::max(upper_m(w), lo * 1.01);
    std::vector<double> m(n);
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = lo * std::pow(hi / lo, n > 1 ? static_cast<double>(i) / (n - 1) : 0.0);
    }
    return m;
}

CheckResult check_boundary_structure(const ValueSurface& w) {
    CheckResult res{"boundary_structure", true, 0.0, 1e-7, 0, ""};
    const FreeBoundary& b = w.boundary();
    const double x_r = w.problem().x_R();
    res.max_residual = std::abs(b(b.m_low()) - x_r) / x_r;
    if (res.max_residual > res.tolerance) {
        res.passed = false;
        res.detail = "b(m_low) differs from x_R";
    }
    const auto& ms = b.m_grid();
    const auto& bs = b.b_grid();
    res.samples = ms.size();
    for (std::size_t i = 0; i < ms.size(); ++i) {
        if (bs[i] < x_r * (1.0 - 1e-12) || !(bs[i] < ms[i])) {
            res.passed = false;
            res.detail = fmt("b outside [x_R, m) at m = ", ms[i]);
            break;
        }
        if (i > 0 && !(bs[i] > bs[i - 1])) {
            res.passed = false;
            res.detail = fmt("b not increasing at m = ", ms[i]);
            break;
        }
    }
    return res;
}

CheckResult check_smooth_fit(const ValueSurface& w, std::size_t n, double tol) {
    CheckResult res{"smooth_fit", true, 0.0, tol, n, ""};
    const Problem& pb = w.problem();
    const Diffusion& d = pb.model;
    const std::vector<double> ms = sample_m(w, n);
    const double x_r = pb.x_R();
    const double x_u = pb.payoffs.x_U();
    double a = w.C(w.m_low());
    double bcoef = 0.0;
    double prev = ms.front();
    const std::vector<double>& nodes = w.boundary().m_grid();
    for (double m : ms) {
        if (m > prev) {
            std::vector<double> knots{x_r, x_u};
            for (double y : nodes) {
                if (y > prev && y < m) knots.push_back(y);
            }
            a = w.A(prev) + integrate([&](double y) { return w.A_prime(y); }, prev, m, 1e-10, knots);
            bcoef = w.B(prev) + integrate([&](double y) { return w.B_prime(y); }, prev, m, 1e-10, knots);
            prev = m;
        }
        const double b = w.boundary()(m);
        const double lhs = a * d.h1(b).d1 + bcoef * d.h2(b).d1;
        const double rhs = pb.law.survival(m) * pb.payoffs.R(b).d1;
        const double e = rel(lhs, rhs, std::abs(rhs));
        if (e > res.max_residual) {
            res.max_residual = e;
            res.detail = fmt("worst at m = ", m);
        }
    }
    res.passed = res.max_residual < tol;
    return res;
}

CheckResult check_neumann(const ValueSurface& w, std::size_t n, double tol) {
    CheckResult res{"neumann", true, 0.0, tol, 0, ""};
    const Problem& pb = w.problem();
    const Diffusion& d = pb.model;
    const FreeBoundary& bd = w.boundary();
    // Grid nodes carry the slope of the boundary equation; sample among them.
    std::vector<double> nodes;
    for (double m : bd.m_grid()) {
        if (m > bd.m_low() && m <= upper_m(w)) nodes.push_back(m);
    }
    if (nodes.empty()) nodes = sample_m(w, n);
    const std::size_t count = std::min(n, nodes.size());
    for (std::size_t k = 0; k < count; ++k) {
        const double m = nodes[count > 1 ? k * (nodes.size() - 1) / (count - 1) : 0];
        const double b = bd(m);
        const double db = bd.derivative(m);
        const double hb = 1e-5 * b;
        const double s = pb.law.survival(m);
        const double f = pb.law.density(m);
        double dcoef[2];
        for (int i = 0; i < 2; ++i) {
            const bool first = i == 0;
            const double phi = coef_of_b(pb, b, first);
            const double dphi = (coef_of_b(pb, b + hb, first) - coef_of_b(pb, b - hb, first)) / (2.0 * hb);
            dcoef[i] = -f * phi + s * dphi * db;
        }
        const double lhs = dcoef[0] * d.h1(m).value + dcoef[1] * d.h2(m).value;
        const double rhs = -f * pb.payoffs.G(m).value;
        const double e = rel(lhs, rhs, std::abs(rhs));
        ++res.samples;
        if (e > res.max_residual) {
            res.max_residual = e;
            res.detail = fmt("worst at m = ", m);
        }
    }
    res.passed = res.max_residual < tol;
    return res;
}

CheckResult check_pde_residual(const ValueSurface& w, std::size_t n, double tol, std::uint64_t seed) {
    CheckResult res{"pde_residual", true, 0.0, tol, 0, ""};
    const Problem& pb = w.problem();
    const Diffusion& d = pb.model;
    const double r = d.rate();
    const double x_r = pb.x_R();
    PointSampler sample(seed, 0.1 * w.m_low(), upper_m(w));
    std::size_t stop_points = 0;
    std::size_t attempts = 0;
    while (res.samples < n && attempts < 100 * n) {
        ++attempts;
        const auto [x, m] = sample();
        if (x >= m * (1.0 - 1e-6)) continue;
        const Region reg = w.region(x, m);
        const Jet v = w.value_x(x, m);
        const double lv = apply_generator(d, v, x) - r * v.value;
        if (reg == Region::Stop) {
            const double b = w.boundary()(m);
            if (x <= x_r * (1.0 + 1e-6) || x >= b * (1.0 - 1e-6)) continue;
            ++stop_points;
            if (lv > 0.0) {
                res.passed = false;
                res.detail = fmt("positive residual in the stopping set at x = ", x);
            }
            continue;
        }
        if (reg == Region::RightOfStop && x <= w.boundary()(m) * (1.0 + 1e-6)) continue;
        const double sig = d.volatility(x);
        const double scale = std::abs(d.drift(x) * v.d1) + std::abs(0.5 * sig * sig * v.d2) + std::abs(r * v.value);
        const double e = std::abs(lv) / std::max(scale, 1e-300);
        ++res.samples;
        if (e > res.max_residual) res.max_residual = e;
    }
    if (res.max_residual >= tol) res.passed = false;
    if (res.detail.empty()) res.detail = fmt("stopping-set points: ", static_cast<double>(stop_points));
    return res;
}

CheckResult check_continuity(const ValueSurface& w, std::size_t n, double tol) {
    CheckResult res{"continuity", true, 0.0, tol, 0, ""};
    const Problem& pb = w.problem();
    const Diffusion& d = pb.model;
    const double x_r = pb.x_R();
    const double anchor = pb.payoffs.R(x_r).value / d.h1(x_r).value;
    auto note = [&](double e, const char* where, double at) {
        ++res.samples;
        if (e > res.max_residual) {
            res.max_residual = e;
            res.detail = fmt(where, at);
        }
    };
    for (double m : sample_m(w, n)) {
        const double s = pb.law.survival(m);
        const double b = w.boundary()(m);
        const double stop_b = s * pb.payoffs.R(b).value;
        const double right_b = w.A(m) * d.h1(b).value + w.B(m) * d.h2(b).value;
        note(rel(stop_b, right_b, std::abs(stop_b)), "x = b(m) at m = ", m);
        const double stop_xr = s * pb.payoffs.R(x_r).value;
        const double left_xr = s * d.h1(x_r).value * anchor;
        note(rel(stop_xr, left_xr, std::abs(stop_xr)), "x = x_R at m = ", m);
    }
    // Across m = m_low for x below it.
    const double ml = w.m_low();
    const double c = w.C(ml);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = ml * std::pow(1e-3, static_cast<double>(i) / std::max<std::size_t>(n - 1, 1));
        const double below = c * d.h1(x).value;
        const double above = w.value(x, ml);
        note(rel(below, above, std::abs(above)), "m = m_low at x = ", x);
    }
    res.passed = res.max_residual < tol;
    return res;
}

CheckResult check_bounds(const ValueSurface& w, std::size_t n, std::uint64_t seed) {
    CheckResult res{"bounds", true, 0.0, 0.0, n, ""};
    const Problem& pb = w.problem();
    PointSampler sample(seed, 0.1 * w.m_low(), upper_m(w));
    double min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const auto [x, m] = sample();
        const double s = pb.law.survival(m);
        const double v = w.value(x, m);
        const double lower = s * std::max(pb.payoffs.R(x).value, 0.0);
        const double upper = s * pb.payoffs.G(x).value;
        const bool stop = w.region(x, m) == Region::Stop;
        const bool ok_lower = stop ? v >= lower * (1.0 - 1e-14) : v > lower;
        if (!ok_lower || !(v < upper) || !(v > 0.0)) {
            res.passed = false;
            res.detail = fmt("violated at x = ", x) + fmt(", m = ", m);
            return res;
        }
        if (!stop) min_margin = std::min(min_margin, (v - lower) / v);
    }
    res.max_residual = min_margin;
    res.detail = fmt("smallest relative continuation margin ", min_margin);
    return res;
}

CheckResult check_monotonicity(const ValueSurface& w, std::size_t n, double fd_tol, std::uint64_t seed) {
    CheckResult res{"monotonicity", true, 0.0, fd_tol, 0, ""};
    const Problem& pb = w.problem();
    const double x_r = pb.x_R();
    const double ml = w.m_low();
    PointSampler sample(seed ^ 0x9e3779b97f4a7c15ULL, 0.1 * ml, upper_m(w));
    auto fail = [&](const std::string& why) {
        if (res.passed) res.detail = why;
        res.passed = false;
    };
    for (std::size_t i = 0; i < n; ++i) {
        const auto [x, m] = sample();
        ++res.samples;
        const double pm = w.partial_m(x, m);
        const double px = w.partial_x(x, m);
        if (!(pm < 0.0)) fail(fmt("dW/dm >= 0 at x = ", x) + fmt(", m = ", m));
        if (!(px > 0.0)) fail(fmt("dW/dx <= 0 at x = ", x) + fmt(", m = ", m));

        const double b = m >= ml ? w.boundary()(m) : 0.0;
        auto near = [](double a, double c, double h) { return std::abs(a - c) < 4.0 * h; };
        const Region reg = w.region(x, m);
        const double hx = 1e-5 * x;
        if (x + 4.0 * hx < m && !near(x, x_r, hx) && !(m >= ml && near(x, b, hx))) {
            const double fd = (w.value(x + hx, m) - w.value(x - hx, m)) / (2.0 * hx);
            res.max_residual = std::max(res.max_residual, rel(fd, px, std::abs(px)));
        }
        const double hm = (reg == Region::BelowMlow ? 1e-3 : 1e-5) * m;
        const bool crosses_b = m >= ml && std::abs(x - b) < 4.0 * std::abs(w.boundary().derivative(m)) * hm + 1e-9;
        if (m - hm > x && !near(m, ml, hm) && !crosses_b) {
            const double fd = (w.value(x, m + hm) - w.value(x, m - hm)) / (2.0 * hm);
            res.max_residual = std::max(res.max_residual, rel(fd, pm, std::abs(pm)));
        }
    }
    if (res.max_residual >= fd_tol) fail(fmt("finite differences disagree by ", res.max_residual));
    for (int k = 0; k < 20; ++k) {
        const double x = ml * (0.05 + 0.9 * (k + 0.5) / 20.0);
        if (!(w.partial_m(x, ml, Side::Right) > w.partial_m(x, ml, Side::Left))) {
            fail(fmt("kink sign fails at x = ", x));
        }
    }
    return res;
}

CheckResult check_coefficients(const ValueSurface& w, std::size_t n) {
    CheckResult res{"coefficients", true, 0.0, 1e-9, 0, ""};
    const double ml = w.m_low();
    for (double m : sample_m(w, n)) {
        ++res.samples;
        const double a = w.A(m);
        const double bcoef = w.B(m);
        res.max_residual = std::max(res.max_residual, rel(a, w.A_transformed(m), std::abs(a)));
        if (!(a > 0.0) || (m > ml && !(bcoef > 0.0))) {
            res.passed = false;
            res.detail = fmt("nonpositive coefficient at m = ", m);
        }
        const double mb = ml * static_cast<double>(res.samples) / (n + 1);
        if (!(w.C(mb) > 0.0)) {
            res.passed = false;
            res.detail = fmt("C nonpositive at m = ", mb);
        }
    }
    if (res.max_residual >= res.tolerance) {
        res.passed = false;
        res.detail = "closed forms of A disagree";
    }
    return res;
}

CheckResult check_monte_carlo(const ValueSurface& w, std::size_t n_paths, std::uint64_t seed, double z) {
    CheckResult res{"monte_carlo", true, 0.0, z, 0, ""};
    const Problem& pb = w.problem();
    const double x_r = pb.x_R();
    const double ml = w.m_low();
    const double m_hi = 1.5 * ml;
    const double b_hi = w.boundary()(m_hi);
    const std::pair<double, double> points[] = {
        {0.5 * ml, 0.5 * ml},
        {0.75 * x_r, m_hi},
        {0.5 * (x_r + b_hi), m_hi},
        {0.5 * (b_hi + m_hi), m_hi},
    };
    std::ostringstream os;
    os.precision(6);
    for (const auto& [x, m] : points) {
        SimConfig cfg;
        cfg.n_paths = n_paths;
        cfg.seed = seed;
        cfg.start_x = x;
        cfg.start_m = m;
        const SimResult sim = simulate_stopped_value(pb, w.boundary(), cfg);
        const double exact = w.value(x, m);
        const double dev = std::abs(sim.estimate - exact);
        const double score = sim.std_error > 0.0 ? dev / sim.std_error : (dev <= 1e-12 * std::abs(exact) ? 0.0 : 1e300);
        res.max_residual = std::max(res.max_residual, score);
        ++res.samples;
        os << "(" << x << "," << m << ") " << to_string(w.region(x, m)) << " W=" << exact << " mc=" << sim.estimate
           << " se=" << sim.std_error << "; ";
    }
    res.passed = res.max_residual < z;
    res.detail = os.str();
    return res;
}

CheckReport run_checks(const ValueSurface& w, CheckLevel level, std::uint64_t seed, std::size_t mc_paths) {
    CheckReport rep;
    auto guarded = [&](const char* name, auto&& fn) {
        try {
            rep.results.push_back(fn());
        } catch (const std::exception& e) {
            rep.results.push_back(CheckResult{name, false, 0.0, 0.0, 0, e.what()});
        }
    };
    guarded("boundary_structure", [&] { return check_boundary_structure(w); });
    guarded("smooth_fit", [&] { return check_smooth_fit(w); });
    guarded("neumann", [&] { return check_neumann(w); });
    guarded("pde_residual", [&] { return check_pde_residual(w, 1000, 1e-7, seed); });
    guarded("continuity", [&] { return check_continuity(w); });
    guarded("bounds", [&] { return check_bounds(w, 10000, seed); });
    guarded("monotonicity", [&] { return check_monotonicity(w, 1000, 1e-5, seed); });
    guarded("coefficients", [&] { return check_coefficients(w); });
    if (level == CheckLevel::Full) {
        guarded("monte_carlo", [&] { return check_monte_carlo(w, mc_paths, seed); });
    }
    return rep;
}

}  // namespace techstop
