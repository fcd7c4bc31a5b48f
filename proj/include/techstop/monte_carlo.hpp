#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

#include "techstop/boundary.hpp"

namespace techstop {

struct SimConfig {
    std::size_t n_paths = 10000;
    double dt = 1e-3;
    double t_max = 0.0;  ///< 0 selects -ln(1e-8)/r
    std::uint64_t seed = 42;
    double start_x = 1.0;
    double start_m = 1.0;
    /// A path ends once the discounted value still to come is provably below this.
    double tail_tol = 1e-7;
    /// Far from every level the step grows to dt * 4^k while z * sigma * sqrt(step)
    /// plus the drift stays below the log-distance; 0 disables growth.
    double safety_z = 6.0;
    int max_level = 8;
    /// Sample the running maximum inside each step from the Brownian bridge;
    /// false keeps the maximum over the step endpoints only.
    bool bridge_max = true;

    void validate() const;
    double horizon_time(double r) const;
};

struct SimResult {
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    std::size_t n_stopped = 0;
    std::size_t n_truncated = 0;
};

/// Stopping rule of the observed path (X, M).
class StoppingRule {
public:
    enum class Kind { Boundary, Threshold, Never };

    /// Stop on [x_R, b(M)(1 + shift)] once M >= m_low; the upper edge is
    /// clipped to the band [x_R, M).
    static StoppingRule boundary(const FreeBoundary& b, double x_r, double shift = 0.0);
    /// Stop as soon as X >= level.
    static StoppingRule threshold(double level);
    static StoppingRule never();

    Kind kind() const { return kind_; }
    double shift() const { return shift_; }
    double level() const { return level_; }
    const FreeBoundary* curve() const { return boundary_; }

    /// Upper edge of the stopping strip at maximum m (boundary rules), or NaN if inactive.
    double upper_edge(double m) const;

private:
    Kind kind_ = Kind::Never;
    const FreeBoundary* boundary_ = nullptr;
    double x_r_ = 0.0;
    double shift_ = 0.0;
    double level_ = std::numeric_limits<double>::infinity();
};

/// Per-path generator: xoshiro256** seeded through splitmix64 from seed ^ index.
class PathRng {
public:
    using result_type = std::uint64_t;
    PathRng(std::uint64_t seed, std::uint64_t index);
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();
    /// Uniform on the open interval (0, 1).
    double uniform();

private:
    std::uint64_t s_[4];
};

/// X after `steps` exact log-normal increments of length t / steps from x0.
double simulate_gbm_endpoint(const GbmParams& gbm, double x0, double t, std::size_t steps, PathRng& rng);

/// MC estimate of the value of stopping (X, M) by `rule`, including the
/// breakthrough integral over increments of M.
SimResult simulate_stopped_value(const Problem& problem, const StoppingRule& rule, const SimConfig& cfg);
SimResult simulate_stopped_value(const Problem& problem, const FreeBoundary& boundary, const SimConfig& cfg);

/// MC estimate of the original problem with a random threshold Y = P^{-1}(Z),
/// Z drawn from `costs`. The game starts at M = X = cfg.start_x.
SimResult simulate_game_value(const Problem& problem, const StoppingRule& rule, const CostLaw& costs,
                              const SimConfig& cfg);
SimResult simulate_game_value(const Problem& problem, const StoppingRule& rule, const SimConfig& cfg);

struct MaxIntegralReport {
    std::size_t n_paths = 0;
    std::size_t n_moving = 0;  ///< paths whose maximum increased
    double max_abs_diff = 0.0;
    double max_rel_diff = 0.0;
    double mean_abs_diff = 0.0;
    double mean_sum = 0.0;       ///< discrete sum, averaged
    double mean_integral = 0.0;  ///< first-passage integral, averaged
    bool passed = false;
};

/// Compares, path by path, the discrete sum over increments of M with the
/// integral over levels y of e^{-r tau(y)} G(y) f(y), tau(y) the first passage
/// time interpolated log-linearly along the path. Paths are not stopped.
MaxIntegralReport maximum_integral_check(const Problem& problem, const SimConfig& cfg,
                                         double rel_tol = 1e-2);

}  // namespace techstop
