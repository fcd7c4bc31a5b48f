#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "techstop/value_surface.hpp"

namespace techstop {

enum class CheckLevel { Fast, Full };

struct CheckResult {
    std::string name;
    bool passed = false;
    /// Largest residual seen (relative unless the name says otherwise).
    double max_residual = 0.0;
    double tolerance = 0.0;
    std::size_t samples = 0;
    std::string detail;
};

struct CheckReport {
    std::vector<CheckResult> results;
    bool passed() const;
    const CheckResult* find(const std::string& name) const;
};

/// Sample m values log-spaced on [m_low, 0.9 * horizon].
std::vector<double> sample_m(const ValueSurface& w, std::size_t n);

/// b(m_low) = x_R, b increasing and x_R <= b(m) < m along the grid.
CheckResult check_boundary_structure(const ValueSurface& w);

/// At m_low the coefficients start from A = C(m_low), B = 0; between sample
/// points they are carried by their closed-form m-derivatives from the
/// previous sample. The resulting x-slope at b(m) is compared with
/// (1 - F(m)) R'(b(m)).
CheckResult check_smooth_fit(const ValueSurface& w, std::size_t n = 100, double tol = 1e-6);

/// Central differences of A and B against -f(m) G(m) on the diagonal.
CheckResult check_neumann(const ValueSurface& w, std::size_t n = 100, double tol = 1e-6);

/// L W - r W = 0 at interior continuation points (relative to the size of the
/// terms), and <= 0 at interior stopping points.
CheckResult check_pde_residual(const ValueSurface& w, std::size_t n = 1000, double tol = 1e-7,
                               std::uint64_t seed = 42);

/// Formulas of adjacent regions agree on the interfaces x = b(m), x = x_R and m = m_low.
CheckResult check_continuity(const ValueSurface& w, std::size_t n = 100, double tol = 1e-8);

/// (1 - F) max(R, 0) <= W < (1 - F) G at random points.
CheckResult check_bounds(const ValueSurface& w, std::size_t n = 10000, std::uint64_t seed = 42);

/// dW/dm < 0 off the kink line, dW/dx > 0, kink sign at m_low and agreement of
/// the analytic partials with central differences.
CheckResult check_monotonicity(const ValueSurface& w, std::size_t n = 1000, double fd_tol = 1e-5,
                               std::uint64_t seed = 42);

/// A > 0, B > 0 above m_low, C > 0 below, and the two forms of A agree.
CheckResult check_coefficients(const ValueSurface& w, std::size_t n = 100);

/// Stopped-value MC at one point per region within `z` standard errors.
CheckResult check_monte_carlo(const ValueSurface& w, std::size_t n_paths, std::uint64_t seed,
                              double z = 3.0);

/// Runs every analytic check; `Full` adds the MC comparison.
CheckReport run_checks(const ValueSurface& w, CheckLevel level, std::uint64_t seed = 42,
                       std::size_t mc_paths = 20000);

}  // namespace techstop
