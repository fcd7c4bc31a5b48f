#include "techstop/diffusion.hpp"

#include <cmath>
#include <string>

namespace techstop {

void GbmParams::validate() const {
    if (!std::isfinite(mu) || !std::isfinite(sigma) || !std::isfinite(r)) {
        throw DomainError("gbm: mu, sigma and r must be finite");
    }
    if (!(sigma > 0.0)) throw DomainError("gbm: sigma must be > 0");
    if (!(r > 0.0)) throw DomainError("gbm: r must be > 0");
    if (!(mu < r)) throw DomainError("gbm: drift mu must be < r");
}

GbmExponents gbm_exponents(const GbmParams& p) {
    const double s2 = p.sigma * p.sigma;
    const double nu = p.mu / s2 - 0.5;
    const double root = std::sqrt(nu * nu + 2.0 * p.r / s2);
    return {nu, -nu + root, -nu - root};
}

namespace {

// x^k with its derivatives, computed as exp(k ln x).
Jet power_jet(double x, double k) {
    const double v = std::exp(k * std::log(x));
    const double d1 = k * v / x;
    return {v, d1, (k - 1.0) * d1 / x};
}

}  // namespace

Diffusion gbm_model(const GbmParams& params) {
    params.validate();
    const GbmExponents ex = gbm_exponents(params);

    Diffusion d;
    d.alpha_ = 0.0;
    d.beta_ = std::numeric_limits<double>::infinity();
    d.r_ = params.r;
    d.gamma_ = ex.beta1 - ex.beta2;
    const double mu = params.mu;
    const double sigma = params.sigma;
    d.drift_ = [mu](double x) { return mu * x; };
    d.volatility_ = [sigma](double x) { return sigma * x; };
    d.h1_ = [b = ex.beta1](double x) { return power_jet(x, b); };
    d.h2_ = [b = ex.beta2](double x) { return power_jet(x, b); };
    d.scale_deriv_ = [k = -2.0 * ex.nu - 1.0](double x) { return std::exp(k * std::log(x)); };
    d.gbm_ = params;
    d.exponents_ = ex;
    return d;
}

Diffusion Diffusion::from_custom(CustomDiffusion spec) {
    if (!(spec.alpha < spec.beta)) throw DomainError("diffusion: need alpha < beta");
    if (!(spec.r > 0.0)) throw DomainError("diffusion: r must be > 0");
    if (!spec.drift || !spec.volatility || !spec.h1 || !spec.h2 || !spec.scale_deriv) {
        throw DomainError("diffusion: all evaluators must be supplied");
    }
    Diffusion d;
    d.alpha_ = spec.alpha;
    d.beta_ = spec.beta;
    d.r_ = spec.r;
    d.drift_ = std::move(spec.drift);
    d.volatility_ = std::move(spec.volatility);
    d.h1_ = std::move(spec.h1);
    d.h2_ = std::move(spec.h2);
    d.scale_deriv_ = std::move(spec.scale_deriv);

    // Reference point for gamma: any interior point will do.
    double ref = 1.0;
    if (!d.contains(ref)) {
        ref = std::isfinite(spec.beta) ? 0.5 * (spec.alpha + spec.beta) : spec.alpha + 1.0;
    }
    d.gamma_ = d.wronskian_ratio(ref);
    if (!(d.gamma_ > 0.0) || !std::isfinite(d.gamma_)) {
        throw DomainError("diffusion: Wronskian ratio must be positive");
    }
    return d;
}

double Diffusion::wronskian_ratio(double x) const {
    const Jet a = h1_(x);
    const Jet b = h2_(x);
    return (a.d1 * b.value - a.value * b.d1) / scale_deriv_(x);
}

double hitting_laplace(const Diffusion& model, double x, double y) {
    if (!model.contains(x) || !model.contains(y)) {
        throw DomainError("hitting_laplace: x and y must lie in the state interval");
    }
    if (x <= y) return model.h1(x).value / model.h1(y).value;
    return model.h2(x).value / model.h2(y).value;
}

double apply_generator(const Diffusion& model, const Jet& u, double x) {
    if (!model.contains(x)) throw DomainError("apply_generator: x outside the state interval");
    const double s = model.volatility(x);
    return model.drift(x) * u.d1 + 0.5 * s * s * u.d2;
}

}  // namespace techstop
