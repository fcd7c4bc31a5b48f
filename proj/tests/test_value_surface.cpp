#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "reference.hpp"

using namespace techstop;
using doctest::Approx;

namespace {

const ValueSurface& W() { return ref::surface(); }
const Problem& pb() { return W().problem(); }
double x_r() { return pb().x_R(); }
double m_low() { return W().m_low(); }
double top() { return 0.9 * W().boundary().horizon(); }

struct Sample {
    double x;
    double m;
};

std::vector<Sample> random_points(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Sample> out;
    const double lo = 0.1 * m_low();
    for (std::size_t i = 0; i < n; ++i) {
        const double m = lo * std::pow(top() / lo, u(gen));
        out.push_back({m * std::pow(1e-3, u(gen)), m});
    }
    return out;
}

}  // namespace

TEST_CASE("regions and interface conventions") {
    const double b = W().boundary()(12.0);
    CHECK(W().region(0.5 * x_r(), 12.0) == Region::LeftOfStop);
    CHECK(W().region(x_r(), 12.0) == Region::Stop);
    CHECK(W().region(b, 12.0) == Region::Stop);
    CHECK(W().region(b * (1.0 + 1e-12), 12.0) == Region::RightOfStop);
    CHECK(W().region(1.0, 0.99 * m_low()) == Region::BelowMlow);
    CHECK(W().region(1.0, m_low()) == Region::LeftOfStop);
    CHECK(W().region(x_r(), m_low()) == Region::Stop);
    CHECK(W().region(0.5 * (x_r() + m_low()), m_low()) == Region::RightOfStop);
    CHECK_THROWS_AS(W().value(5.0, 4.0), DomainError);
    CHECK_THROWS_AS(W().region(-1.0, 4.0), DomainError);
}

TEST_CASE("closed forms by region") {
    const double m = 15.0;
    const double s = pb().law.survival(m);
    const double b = W().boundary()(m);
    const double xs = 0.5 * (x_r() + b);
    CHECK(W().value(xs, m) == Approx(s * (xs - 1.0)).epsilon(1e-14));
    const double xl = 1.7;
    CHECK(W().value(xl, m) == Approx(s * std::pow(xl / x_r(), ref::kPhi) * (x_r() - 1.0)).epsilon(1e-13));
    const double xr = 0.5 * (b + m);
    CHECK(W().value(xr, m) ==
          Approx(W().A(m) * std::pow(xr, ref::kPhi) + W().B(m) * std::pow(xr, 1.0 - ref::kPhi)).epsilon(1e-13));
    const double mb = 5.0;
    CHECK(W().value(2.0, mb) == Approx(W().C(mb) * std::pow(2.0, ref::kPhi)).epsilon(1e-13));
}

TEST_CASE("coefficient A") {
    for (int i = 0; i < 100; ++i) {
        const double m = m_low() * std::pow(top() / m_low(), i / 99.0);
        CHECK(W().A(m) > 0.0);
        CHECK(W().A(m) == Approx(W().A_transformed(m)).epsilon(1e-9));
    }
    const double anchor = pb().law.survival(m_low()) * (x_r() - 1.0) / std::pow(x_r(), ref::kPhi);
    CHECK(W().A(m_low()) == Approx(anchor).epsilon(1e-9));
}

TEST_CASE("coefficient B") {
    CHECK(std::abs(W().B(m_low())) < 1e-12 * W().A(m_low()));
    for (int i = 1; i < 100; ++i) {
        const double m = m_low() * std::pow(top() / m_low(), i / 99.0);
        CHECK(W().B(m) > 0.0);
    }
    const double h = 1e-5 * m_low();
    CHECK((W().B(m_low() + h) - W().B(m_low())) / h > 0.0);
    CHECK(W().B_prime(m_low()) > 0.0);
}

TEST_CASE("coefficient C") {
    CHECK(W().C(m_low()) == Approx(W().A(m_low())).epsilon(1e-10));
    // Independent quadrature of f G / h1.
    using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;
    auto integrand = [&](double y) { return pb().law.density(y) * pb().payoffs.G(y).value / std::pow(y, ref::kPhi); };
    for (double m : {0.05, 0.8, 1.309, 2.0, 2.618, 5.0, 8.0}) {
        double tail = 0.0;
        double a = m;
        for (double knot : {pb().payoffs.x_U(), x_r(), m_low()}) {
            if (knot <= a) continue;
            tail += Rule::integrate(integrand, a, knot, 15, 1e-13);
            a = knot;
        }
        CHECK(W().C(m) == Approx(W().C(m_low()) + tail).epsilon(1e-10));
        CHECK(W().C(m) > 0.0);
        const double h = 1e-4 * m;
        const double fd = (W().C(m + h) - W().C(m - h)) / (2.0 * h);
        CHECK(fd < 0.0);
        if (std::abs(m - x_r()) > 1e-2 && std::abs(m - pb().payoffs.x_U()) > 1e-2) {
            CHECK(fd == Approx(W().C_prime(m)).epsilon(1e-6));
        }
    }
    CHECK_THROWS_AS(W().C(1.01 * m_low()), DomainError);
}

TEST_CASE("value matching and continuity") {
    for (int i = 0; i < 100; ++i) {
        const double m = m_low() * std::pow(top() / m_low(), i / 99.0);
        const double b = W().boundary()(m);
        const double s = pb().law.survival(m);
        CHECK(W().A(m) * std::pow(b, ref::kPhi) + W().B(m) * std::pow(b, 1.0 - ref::kPhi) ==
              Approx(s * (b - 1.0)).epsilon(1e-10));
    }
    const double triple = W().value(x_r(), m_low());
    CHECK(triple == Approx(pb().law.survival(m_low()) * (x_r() - 1.0)).epsilon(1e-14));
    CHECK(triple == Approx(W().C(m_low()) * std::pow(x_r(), ref::kPhi)).epsilon(1e-10));
    for (double x : {0.3, 1.0, 2.0, 4.0, 7.0}) {
        CHECK(W().value(x, m_low() * (1.0 - 1e-12)) == Approx(W().value(x, m_low())).epsilon(1e-9));
    }
}

TEST_CASE("bounds and positivity") {
    for (const Sample& p : random_points(1000, 17)) {
        const double s = pb().law.survival(p.m);
        const double w = W().value(p.x, p.m);
        CHECK(w > 0.0);
        CHECK(w >= s * std::max(p.x - 1.0, 0.0) * (1.0 - 1e-14));
        CHECK(w < s * pb().payoffs.G(p.x).value);
    }
}

TEST_CASE("initial value") {
    CHECK(W().initial_value(1e-6) < 1e-9);
    for (double x : {0.5, 1.0, 3.0, 6.0, 12.0}) {
        CHECK(W().initial_value(x) ==
              Approx(W().value(x, x) + pb().law.cdf(x) * pb().payoffs.G(x).value).epsilon(1e-14));
        CHECK(W().initial_value(x) > pb().payoffs.V_R(x).value);
    }
}

TEST_CASE("derivative in m") {
    for (const Sample& p : random_points(1000, 23)) {
        if (std::abs(p.m - m_low()) < 1e-9) continue;
        CHECK(W().partial_m(p.x, p.m) < 0.0);
    }
    for (int k = 0; k < 20; ++k) {
        const double x = m_low() * (0.02 + 0.95 * k / 20.0);
        CHECK(W().partial_m(x, m_low(), Side::Right) > W().partial_m(x, m_low(), Side::Left));
    }
    for (double m : {0.5, 3.0, m_low(), 10.0, 20.0}) {
        CHECK(W().partial_m(m, m) == Approx(-pb().law.density(m) * pb().payoffs.G(m).value).epsilon(1e-6));
    }
    for (double m : {9.0, 14.0, 22.0}) {
        const double b = W().boundary()(m);
        const double want = -pb().law.density(m) * (b - 1.0);
        CHECK(W().partial_m(b, m) == Approx(want).epsilon(1e-12));
        const double right = W().A_prime(m) * std::pow(b, ref::kPhi) + W().B_prime(m) * std::pow(b, 1.0 - ref::kPhi);
        CHECK(right == Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("derivative in x") {
    for (const Sample& p : random_points(1000, 29)) CHECK(W().partial_x(p.x, p.m) > 0.0);
    for (double m : {9.0, 14.0, 22.0}) {
        const double b = W().boundary()(m);
        const double right = W().A(m) * ref::kPhi * std::pow(b, ref::kPhi - 1.0) +
                             W().B(m) * (1.0 - ref::kPhi) * std::pow(b, -ref::kPhi);
        CHECK(right == Approx(pb().law.survival(m)).epsilon(1e-9));
    }
}

TEST_CASE("partials agree with finite differences") {
    int tested = 0;
    for (const Sample& p : random_points(400, 31)) {
        const double h = 1e-5 * p.x;
        const double b = p.m >= m_low() ? W().boundary()(p.m) : 0.0;
        if (p.x + 4.0 * h >= p.m || std::abs(p.x - x_r()) < 4.0 * h || std::abs(p.x - b) < 4.0 * h) continue;
        const double fdx = (W().value(p.x + h, p.m) - W().value(p.x - h, p.m)) / (2.0 * h);
        CHECK(fdx == Approx(W().partial_x(p.x, p.m)).epsilon(1e-6));
        const double hm = (p.m < m_low() ? 1e-3 : 1e-6) * p.m;
        if (p.m - hm <= p.x || std::abs(p.m - m_low()) < 4.0 * hm || std::abs(p.x - b) < 1e-3 * p.m) continue;
        const double fdm = (W().value(p.x, p.m + hm) - W().value(p.x, p.m - hm)) / (2.0 * hm);
        CHECK(fdm == Approx(W().partial_m(p.x, p.m)).epsilon(1e-5));
        ++tested;
    }
    CHECK(tested > 200);
}

TEST_CASE("generator residual") {
    const Diffusion& d = pb().model;
    for (const Sample& p : random_points(1000, 37)) {
        const Region reg = W().region(p.x, p.m);
        const Jet v = W().value_x(p.x, p.m);
        const double res = apply_generator(d, v, p.x) - d.rate() * v.value;
        if (reg == Region::Stop) {
            if (p.x > x_r() * (1.0 + 1e-9)) CHECK(res <= 0.0);
        } else {
            CHECK(std::abs(res) <= 1e-10 * d.rate() * std::abs(v.value));
        }
    }
}
