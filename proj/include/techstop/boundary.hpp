#pragma once

#include <string>
#include <vector>

#include "techstop/problem.hpp"

namespace techstop {

/// Change of variables y = zeta(x) = h1(x)/h2(x) under which the decreasing
/// solution h2 becomes the natural numeraire.
class TransformCache {
public:
    explicit TransformCache(const Problem& problem);

    /// zeta with its first derivative (d2 is the second derivative).
    Jet zeta(double x) const;
    double zeta_inv(double y) const;

    /// (u/h2) o zeta^{-1} and its derivatives in y, evaluated at y = zeta(x).
    Jet transform_at(const Jet& u, double x) const;
    Jet R_hat_at(double x) const;
    Jet G_hat_at(double x) const;
    Jet R_hat(double y) const { return R_hat_at(zeta_inv(y)); }
    Jet G_hat(double y) const { return G_hat_at(zeta_inv(y)); }

private:
    const Problem* problem_;
};

/// Options of the shooting procedure.
struct SolverOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double eps_diag = 1e-9;      ///< diagonal proximity, relative to 1 + m
    double bisect_tol = 1e-8;    ///< bracket width, relative to x_R
    int max_iter = 200;
    double horizon = 0.0;        ///< 0 selects the survival-based default
    double survival_target = 1e-6;
    double probe_factor = 16.0;  ///< probe trajectories run to probe_factor * horizon
    double tail_factor = 4.0;    ///< backward tail starts at tail_factor * horizon
    double grid_factor = 2.0;    ///< the returned grid ends at grid_factor * horizon
    bool backward_tail = true;

    /// Every tolerance (and eps_diag) multiplied by `factor`.
    SolverOptions scaled(double factor) const;
};

/// Vector field of the boundary ODE b'(m) = E(b(m), m) on x_R <= x < m.
class BoundaryField {
public:
    explicit BoundaryField(Problem problem);
    BoundaryField(const BoundaryField& other) : BoundaryField(other.problem_) {}
    BoundaryField& operator=(const BoundaryField&) = delete;

    const Problem& problem() const { return problem_; }
    const TransformCache& transform() const { return transform_; }

    /// Transformed form; sign equals the sign of eta.
    double E(double x, double m) const;
    /// Direct form built from h1, h2 without the change of variables.
    double E_raw(double x, double m) const;

    /// eta(z, y) in transformed coordinates, z > y >= zeta(x_R).
    double eta(double z, double y) const;
    /// eta(zeta(m), zeta(x)) without inverting zeta.
    double eta_at(double x, double m) const;

    /// Root m_x > x of eta(zeta(.), zeta(x)).
    double null_curve(double x) const;
    /// Inverse of the null curve: the x < m with m_x = m (requires m > m_{x_R}).
    double null_curve_inverse(double m) const;

    double L(double x) const { return drift_term_L(problem_.payoffs, x); }

private:
    double prefactor(double x, double m) const;

    Problem problem_;
    TransformCache transform_;
};

enum class TrajectoryClass { HitsDiagonal, HitsNullCurve, ReachesHorizon };

const char* to_string(TrajectoryClass c);

struct Trajectory {
    TrajectoryClass kind = TrajectoryClass::ReachesHorizon;
    std::vector<double> m;
    std::vector<double> b;
    std::vector<double> slope;  ///< E(b_i, m_i)
    int rejected = 0;

    double end_m() const { return m.back(); }
};

/// Integrates b' = E(b, m) from (x_R, m0) towards `horizon`.
Trajectory classify_trajectory(const BoundaryField& field, double m0, double horizon,
                               const SolverOptions& opts = {});

/// Integrates b' = E(b, m) backwards from (b_end, m_end) down to m_stop.
Trajectory integrate_backward(const BoundaryField& field, double b_end, double m_end, double m_stop,
                              const SolverOptions& opts = {});

/// Monotone interpolant of b over a grid starting at (m_low, x_R).
class FreeBoundary {
public:
    FreeBoundary() = default;
    /// Hermite cubic through (m_i, b_i) with slopes s_i, limited to stay monotone.
    FreeBoundary(std::vector<double> m, std::vector<double> b, std::vector<double> slope,
                 double horizon);
    /// Grid only; slopes from the monotone PCHIP rule.
    static FreeBoundary from_samples(std::vector<double> m, std::vector<double> b, double horizon);

    double m_low() const { return m_.front(); }
    /// Last grid abscissa; beyond it b is extended linearly with slope <= 1.
    double m_max() const { return m_.back(); }
    double horizon() const { return horizon_; }
    const std::vector<double>& m_grid() const { return m_; }
    const std::vector<double>& b_grid() const { return b_; }
    const std::vector<double>& slopes() const { return s_; }
    bool empty() const { return m_.empty(); }

    double operator()(double m) const;
    double derivative(double m) const;

private:
    std::size_t segment(double m) const;

    std::vector<double> m_;
    std::vector<double> b_;
    std::vector<double> s_;
    double horizon_ = 0.0;
};

struct ShootingStep {
    double m0 = 0.0;
    TrajectoryClass kind = TrajectoryClass::ReachesHorizon;
    double exit_m = 0.0;
};

/// Diagnostics of the endpoint search.
struct EndpointReport {
    double x_R = 0.0;
    double m_xR = 0.0;
    double horizon = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    double m_low = 0.0;
    int iterations = 0;
    int retries = 0;
    double witness_end = 0.0;  ///< where the forward witness trajectory stops
    double splice_m = 0.0;     ///< forward grid below, backward tail above (0: no tail)
    double tail_start = 0.0;
    double tail_spread = 0.0;  ///< |b| gap at the grid end between two tail starts
    std::vector<ShootingStep> trace;
};

struct BoundarySolution {
    FreeBoundary boundary;
    EndpointReport report;
};

/// m at which 1 - F(m) falls below `survival_target`.
double default_horizon(const Problem& problem, double survival_target = 1e-6);

/// Shooting by bisection on m0 in (x_R, m_{x_R}).
BoundarySolution find_endpoint(const BoundaryField& field, const SolverOptions& opts = {});

}  // namespace techstop
