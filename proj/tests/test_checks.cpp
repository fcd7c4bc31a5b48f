#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "reference.hpp"
#include "techstop/checks.hpp"

using namespace techstop;

namespace {

const CheckReport& reference_report() {
    static const CheckReport r = run_checks(ref::surface(), CheckLevel::Fast);
    return r;
}

ValueSurface scaled_surface(double factor) {
    const FreeBoundary& b = ref::solution().boundary;
    std::vector<double> bs = b.b_grid();
    for (double& v : bs) v *= factor;
    return ValueSurface(ref::problem(), FreeBoundary::from_samples(b.m_grid(), bs, b.horizon()));
}

}  // namespace

TEST_CASE("the reference solution passes every fast check") {
    const CheckReport& r = reference_report();
    for (const CheckResult& c : r.results) {
        INFO(c.name << ": " << c.detail);
        CHECK(c.passed);
        CHECK(c.samples > 0);
    }
    CHECK(r.passed());
    CHECK(r.results.size() == 8);
    CHECK(r.find("monte_carlo") == nullptr);
}

TEST_CASE("residuals are well inside their tolerances") {
    const CheckReport& r = reference_report();
    CHECK(r.find("smooth_fit")->max_residual < 1e-8);
    CHECK(r.find("neumann")->max_residual < 1e-9);
    CHECK(r.find("pde_residual")->max_residual < 1e-12);
    CHECK(r.find("continuity")->max_residual < 1e-10);
    CHECK(r.find("coefficients")->max_residual < 1e-12);
}

TEST_CASE("sample grid") {
    const std::vector<double> m = sample_m(ref::surface(), 50);
    CHECK(m.size() == 50);
    CHECK(m.front() == doctest::Approx(ref::surface().m_low()));
    CHECK(m.back() == doctest::Approx(0.9 * ref::solution().boundary.horizon()));
    for (std::size_t i = 1; i < m.size(); ++i) CHECK(m[i] > m[i - 1]);
}

TEST_CASE("a displaced boundary fails smooth fit") {
    for (double factor : {1.05, 0.95}) {
        const ValueSurface w = scaled_surface(factor);
        const CheckResult c = check_smooth_fit(w);
        CHECK_FALSE(c.passed);
        CHECK(c.max_residual > 1e-3);
        CHECK_FALSE(run_checks(w, CheckLevel::Fast).passed());
    }
}

TEST_CASE("monte carlo check at a modest path count") {
    const CheckResult c = check_monte_carlo(ref::surface(), 4000, 42);
    INFO(c.detail);
    CHECK(c.passed);
    CHECK(c.samples == 4);
}

TEST_CASE("lookup of missing checks") {
    CheckReport r;
    CHECK(r.find("smooth_fit") == nullptr);
    CHECK(r.passed());
}
