#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "reference.hpp"

using namespace techstop;
using doctest::Approx;

namespace {

TechnologyPayoffs golden_payoffs() { return TechnologyPayoffs(gbm_model(ref::golden()), 1.0, 2.0); }

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return g;
}

}  // namespace

TEST_CASE("exponential costs composed with the developer share") {
    const double lambda = 1.3;
    const TechnologyPayoffs p = golden_payoffs();
    const ThresholdLaw q(CostLaw::exponential(lambda), p);
    for (double m : log_grid(1e-3, 40.0, 60)) {
        const Jet s = p.P(m);
        CHECK(q.cdf(m) == Approx(-std::expm1(-lambda * s.value)).epsilon(1e-12));
        CHECK(q.survival(m) == Approx(std::exp(-lambda * s.value)).epsilon(1e-12));
        CHECK(q.hazard(m) == Approx(lambda * s.d1).epsilon(1e-12));
    }
    for (double m : {2.7, 5.0, 12.0}) {
        CHECK(q.density(m) == Approx(0.5 * lambda * std::exp(-lambda * 0.5 * m)).epsilon(1e-12));
    }
}

TEST_CASE("threshold law shape") {
    const ThresholdLaw q(CostLaw::lognormal(0.2, 0.7), golden_payoffs());
    CHECK(q.cdf(1e-6) < 1e-12);
    CHECK(q.cdf(500.0) > 1.0 - 1e-9);
    double prev = 0.0;
    for (double m : log_grid(1e-3, 200.0, 300)) {
        CHECK(q.density(m) > 0.0);
        CHECK(q.cdf(m) >= prev);
        prev = q.cdf(m);
        CHECK(std::abs(q.cdf(m) + q.survival(m) - 1.0) < 1e-15);
        const double tail = q.cdf(m) < 0.5 ? 1.0 - q.cdf(m) : q.survival(m);
        CHECK(q.hazard(m) == Approx(q.density(m) / tail).epsilon(1e-10));
    }
}

TEST_CASE("density integrates to one") {
    const TechnologyPayoffs p = golden_payoffs();
    const ThresholdLaw q(CostLaw::exponential(1.0), p);
    double top = 1.0;
    while (q.cdf(top) <= 1.0 - 1e-9) top *= 1.5;
    using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
    auto f = [&](double m) { return q.density(m); };
    const double knots[] = {0.0, p.x_U(), p.x_R(), top};
    double total = 0.0;
    for (int i = 0; i < 3; ++i) total += Rule::integrate(f, knots[i], knots[i + 1], 15, 1e-12);
    CHECK(std::abs(total - 1.0) < 1e-6);
    CHECK(q.survival(top) < 1e-9);
}

TEST_CASE("hazard-rate order") {
    const std::vector<double> grid = log_grid(1e-3, 50.0, 200);
    CHECK(hazard_order_dominates(CostLaw::exponential(2.0), CostLaw::exponential(1.0), grid));
    CHECK_FALSE(hazard_order_dominates(CostLaw::exponential(1.0), CostLaw::exponential(2.0), grid));
    CHECK_FALSE(hazard_order_dominates(CostLaw::exponential(1.0), CostLaw::exponential(1.0), grid));

    const CostLaw a = CostLaw::lognormal(0.0, 0.5);
    const CostLaw b = CostLaw::lognormal(1.0, 0.5);
    const boost::math::lognormal_distribution<double> da(0.0, 0.5);
    const boost::math::lognormal_distribution<double> db(1.0, 0.5);
    bool expected = true;
    for (double z : grid) {
        const double ha = boost::math::pdf(da, z) / boost::math::cdf(boost::math::complement(da, z));
        const double hb = boost::math::pdf(db, z) / boost::math::cdf(boost::math::complement(db, z));
        CHECK(a.hazard(z) == Approx(ha).epsilon(1e-9));
        expected = expected && ha > hb;
    }
    CHECK(hazard_order_dominates(a, b, grid) == expected);
}

TEST_CASE("monotone hazard") {
    const std::vector<double> grid = log_grid(1e-3, 50.0, 200);
    CHECK(has_monotone_hazard(CostLaw::exponential(1.0), grid));
    CHECK_FALSE(has_monotone_hazard(CostLaw::lognormal(0.0, 1.0), grid));
}

TEST_CASE("quantile inverts the cdf") {
    for (const CostLaw& law : {CostLaw::exponential(0.7), CostLaw::lognormal(-0.3, 1.2)}) {
        for (double u : {1e-9, 0.01, 0.5, 0.99, 1.0 - 1e-9}) {
            CHECK(law.cdf(law.quantile(u)) == Approx(u).epsilon(1e-9));
        }
    }
    const CostLaw c = CostLaw::custom([](double z) { return std::exp(-z); }, [](double z) { return -std::expm1(-z); });
    CHECK(c.quantile(0.5) == Approx(std::log(2.0)).epsilon(1e-9));
    CHECK(c.hazard(3.0) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("invalid cost laws are rejected") {
    CHECK_THROWS_AS(CostLaw::exponential(0.0), DomainError);
    CHECK_THROWS_AS(CostLaw::exponential(-1.0), DomainError);
    CHECK_THROWS_AS(CostLaw::lognormal(0.0, 0.0), DomainError);
    CHECK_THROWS_AS(CostLaw::exponential(1.0).quantile(1.0), DomainError);
}
