#pragma once

#include <functional>
#include <limits>
#include <optional>

#include "techstop/numerics.hpp"

namespace techstop {

/// Geometric Brownian motion dX = mu X dt + sigma X dW, discounted at rate r.
struct GbmParams {
    double mu = 0.0;     ///< drift rate (1/time)
    double sigma = 0.0;  ///< volatility (1/sqrt(time))
    double r = 0.0;      ///< discount rate (1/time)

    /// Throws DomainError naming the violated constraint.
    void validate() const;
};

/// Exponents of the GBM fundamental solutions h1(x) = x^beta1, h2(x) = x^beta2.
struct GbmExponents {
    double nu = 0.0;
    double beta1 = 0.0;
    double beta2 = 0.0;
};

GbmExponents gbm_exponents(const GbmParams& params);

/// User-supplied description of a one-dimensional diffusion with natural
/// endpoints. Fundamental solutions and the scale density must come with
/// analytic derivatives; nothing is constructed numerically from mu and sigma.
struct CustomDiffusion {
    double alpha = 0.0;
    double beta = std::numeric_limits<double>::infinity();
    double r = 0.0;
    std::function<double(double)> drift;
    std::function<double(double)> volatility;
    SmoothFn h1;  ///< increasing positive solution of Lu - ru = 0
    SmoothFn h2;  ///< decreasing positive solution of Lu - ru = 0
    std::function<double(double)> scale_deriv;
};

/// A diffusion X on (alpha, beta) together with its fundamental solutions,
/// scale density and the Wronskian ratio gamma.
///
/// Immutable after construction; all members are pure functions.
class Diffusion {
public:
    static Diffusion from_custom(CustomDiffusion spec);

    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    bool contains(double x) const { return x > alpha_ && x < beta_; }

    double rate() const { return r_; }
    double drift(double x) const { return drift_(x); }
    double volatility(double x) const { return volatility_(x); }

    Jet h1(double x) const { return h1_(x); }
    Jet h2(double x) const { return h2_(x); }
    double scale_deriv(double x) const { return scale_deriv_(x); }

    /// (h1' h2 - h1 h2') / S', constant in x.
    double gamma() const { return gamma_; }

    /// Wronskian ratio evaluated at x (diagnostic; equals gamma() for a valid model).
    double wronskian_ratio(double x) const;

    const std::optional<GbmParams>& gbm() const { return gbm_; }
    const std::optional<GbmExponents>& exponents() const { return exponents_; }

private:
    friend Diffusion gbm_model(const GbmParams& params);
    Diffusion() = default;

    double alpha_ = 0.0;
    double beta_ = std::numeric_limits<double>::infinity();
    double r_ = 0.0;
    double gamma_ = 0.0;
    std::function<double(double)> drift_;
    std::function<double(double)> volatility_;
    SmoothFn h1_;
    SmoothFn h2_;
    std::function<double(double)> scale_deriv_;
    std::optional<GbmParams> gbm_;
    std::optional<GbmExponents> exponents_;
};

/// Closed-form GBM model: h1 = x^beta1, h2 = x^beta2, S'(x) = x^(-2nu-1),
/// gamma = beta1 - beta2 on (0, inf). Powers are evaluated in log space.
Diffusion gbm_model(const GbmParams& params);

/// E_x[exp(-r tau(y))]: h1(x)/h1(y) for x <= y, h2(x)/h2(y) otherwise.
double hitting_laplace(const Diffusion& model, double x, double y);

/// Generator L u(x) = mu(x) u'(x) + sigma(x)^2 u''(x) / 2.
double apply_generator(const Diffusion& model, const Jet& u, double x);

}  // namespace techstop
