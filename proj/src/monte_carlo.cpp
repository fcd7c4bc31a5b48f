#include "techstop/monte_carlo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/random/normal_distribution.hpp>

namespace techstop {

void SimConfig::validate() const {
    if (n_paths < 1) throw DomainError("sim: n_paths must be >= 1");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("sim: dt must be > 0");
    if (t_max != 0.0 && !(t_max >= dt)) throw DomainError("sim: t_max must be >= dt");
    if (!(start_x > 0.0) || !(start_m >= start_x)) throw DomainError("sim: need 0 < start x <= start m");
    if (!(tail_tol > 0.0)) throw DomainError("sim: tail_tol must be > 0");
    if (safety_z < 0.0 || max_level < 0 || max_level > 20) throw DomainError("sim: invalid step growth settings");
}

double SimConfig::horizon_time(double r) const { return t_max > 0.0 ? t_max : -std::log(1e-8) / r; }

StoppingRule StoppingRule::boundary(const FreeBoundary& b, double x_r, double shift) {
    if (b.empty()) throw DomainError("StoppingRule: empty boundary");
    if (!(shift > -1.0)) throw DomainError("StoppingRule: shift must exceed -1");
    StoppingRule s;
    s.kind_ = Kind::Boundary;
    s.boundary_ = &b;
    s.x_r_ = x_r;
    s.shift_ = shift;
    return s;
}

StoppingRule StoppingRule::threshold(double level) {
    if (!(level > 0.0)) throw DomainError("StoppingRule: threshold must be > 0");
    StoppingRule s;
    s.kind_ = Kind::Threshold;
    s.level_ = level;
    return s;
}

StoppingRule StoppingRule::never() { return StoppingRule{}; }

double StoppingRule::upper_edge(double m) const {
    if (kind_ != Kind::Boundary || m < boundary_->m_low()) return std::numeric_limits<double>::quiet_NaN();
    double v = (*boundary_)(m) * (1.0 + shift_);
    v = std::min(v, m * (1.0 - 1e-12));
    return std::max(v, x_r_);
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

PathRng::PathRng(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t x = seed ^ index;
    for (auto& s : s_) s = splitmix64(x);
}

PathRng::result_type PathRng::operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double PathRng::uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

namespace {

// Piecewise-linear table on a uniform grid in u = ln m.
class LogTable {
public:
    LogTable() = default;
    template <typename F>
    LogTable(double u0, double u1, double spacing, F&& f) : u0_(u0) {
        const auto n = static_cast<std::size_t>(std::ceil((u1 - u0) / spacing)) + 1;
        inv_ = (n > 1) ? static_cast<double>(n - 1) / (u1 - u0) : 0.0;
        v_.resize(n);
        for (std::size_t i = 0; i < n; ++i) v_[i] = f(u0 + (u1 - u0) * static_cast<double>(i) / (n - 1));
        u1_ = u1;
    }
    bool covers(double u) const { return !v_.empty() && u >= u0_ && u < u1_; }
    double operator()(double u) const {
        const double s = (u - u0_) * inv_;
        const auto i = std::min(static_cast<std::size_t>(s), v_.size() - 2);
        const double w = s - static_cast<double>(i);
        return v_[i] + w * (v_[i + 1] - v_[i]);
    }
    // Value at the grid node at or below u.
    double floor_node(double u) const { return v_[static_cast<std::size_t>((u - u0_) * inv_)]; }

private:
    double u0_ = 0.0;
    double u1_ = 0.0;
    double inv_ = 0.0;
    std::vector<double> v_;
};

enum class Mode { Stopped, Game };

struct Summary {
    std::vector<double> values;
    std::size_t stopped = 0;
    std::size_t truncated = 0;

    SimResult finish() const {
        SimResult r;
        r.n_paths = values.size();
        r.n_stopped = stopped;
        r.n_truncated = truncated;
        CompensatedSum s;
        for (double v : values) s.add(v);
        const double n = static_cast<double>(values.size());
        r.estimate = s.value() / n;
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        if (values.size() > 1 && *lo < *hi) {
            CompensatedSum q;
            for (double v : values) q.add((v - r.estimate) * (v - r.estimate));
            r.std_error = std::sqrt(q.value() / (n - 1.0) / n);
        }
        return r;
    }
};

class Simulator {
public:
    Simulator(const Problem& pb, const StoppingRule& rule, const SimConfig& cfg, Mode mode)
        : pb_(pb), rule_(rule), cfg_(cfg), mode_(mode) {
        cfg.validate();
        if (!pb.model.gbm()) throw DomainError("monte carlo: the model must be a geometric Brownian motion");
        const GbmParams g = *pb.model.gbm();
        sigma_ = g.sigma;
        r_ = g.r;
        drift_ = g.mu - 0.5 * g.sigma * g.sigma;
        t_max_ = cfg.horizon_time(r_);
        lxr_ = std::log(pb.x_R());
        vr_scale_ = pb.payoffs.R(pb.x_R()).value / pb.model.h1(pb.x_R()).value;
        const int levels = cfg.safety_z > 0.0 ? cfg.max_level : 0;
        for (int k = 0; k <= levels; ++k) {
            Level lv;
            lv.dt = cfg.dt * std::pow(4.0, k);
            lv.mean = drift_ * lv.dt;
            lv.sd = sigma_ * std::sqrt(lv.dt);
            lv.disc = std::exp(-r_ * lv.dt);
            lv.half = std::exp(0.5 * r_ * lv.dt);
            lv.reach = cfg.safety_z * lv.sd + std::abs(lv.mean);
            levels_.push_back(lv);
        }

        const double m_start = mode == Mode::Game ? cfg.start_x : cfg.start_m;
        const double m_top = std::max(8.0 * m_start, 4.0 * default_horizon(pb, 1e-6));
        u_lo_ = std::log(m_start);
        u_hi_ = std::log(m_top);
        if (mode == Mode::Stopped) {
            g_tab_ = LogTable(u_lo_, u_hi_, 1e-4, [&](double u) { return gf(std::exp(u)); });
            // T(m) = integral of G f / h1 above m; coarse table, read at the node below.
            const double spacing = 1e-2;
            const auto n = static_cast<std::size_t>(std::ceil((u_hi_ - u_lo_) / spacing)) + 1;
            std::vector<double> node(n);
            for (std::size_t i = 0; i < n; ++i) node[i] = std::exp(u_lo_ + (u_hi_ - u_lo_) * i / (n - 1));
            std::vector<double> cum(n);
            cum[n - 1] = tail_beyond(node[n - 1]);
            for (std::size_t i = n - 1; i-- > 0;) cum[i] = cum[i + 1] + weighted_gf(node[i], node[i + 1]);
            t_tab_ = LogTable(u_lo_, u_hi_, spacing, [&](double u) {
                const auto i = static_cast<std::size_t>(std::llround((u - u_lo_) / (u_hi_ - u_lo_) * (n - 1)));
                return cum[std::min(i, n - 1)];
            });
        }
        if (rule.kind() == StoppingRule::Kind::Boundary) {
            const double u0 = std::log(rule.curve()->m_low());
            if (u0 < u_hi_) {
                edge_tab_ = LogTable(u0, u_hi_, 1e-4, [&](double u) { return std::log(rule.upper_edge(std::exp(u))); });
            }
            m_low_ = rule.curve()->m_low();
        }
    }

    SimResult run(const CostLaw* costs) {
        Summary sum;
        sum.values.reserve(cfg_.n_paths);
        for (std::size_t i = 0; i < cfg_.n_paths; ++i) {
            PathRng rng(cfg_.seed, i);
            const Outcome o = path(rng, costs);
            sum.values.push_back(o.value);
            if (o.truncated) {
                ++sum.truncated;
            } else {
                ++sum.stopped;
            }
        }
        return sum.finish();
    }

private:
    struct Level {
        double dt, mean, sd, disc, half, reach;
    };
    struct Outcome {
        double value = 0.0;
        bool truncated = false;
    };
    struct Strip {
        bool active = false;
        double lo = 0.0;  // log edges
        double hi = 0.0;
    };

    double gf(double m) const { return pb_.payoffs.G(m).value * pb_.law.density(m); }

    double weighted_gf(double a, double b) const {
        return integrate([&](double y) { return gf(y) / pb_.model.h1(y).value; }, a, b, 1e-8,
                         {pb_.payoffs.x_U(), pb_.payoffs.x_R()});
    }

    double tail_beyond(double m) const {
        double total = 0.0;
        double a = m;
        for (int k = 0; k < 60; ++k) {
            const double piece = weighted_gf(a, 2.0 * a);
            total += piece;
            a *= 2.0;
            if (piece <= 1e-16 * total || !pb_.model.contains(2.0 * a)) break;
        }
        return total;
    }

    static bool bridge_crossed(double d0, double d1, double var, PathRng& rng) {
        const double e = 2.0 * d0 * d1 / var;
        return e < 40.0 && rng.uniform() < std::exp(-e);
    }

    double g_at(double m, double u) const { return g_tab_.covers(u) ? g_tab_(u) : gf(m); }

    double edge_at(double m, double u) const {
        if (edge_tab_.covers(u)) return edge_tab_(u);
        return std::log(rule_.upper_edge(m));
    }

    Strip strip_at(double m, double um) const {
        Strip s;
        switch (rule_.kind()) {
            case StoppingRule::Kind::Boundary:
                if (m >= m_low_) {
                    s.active = true;
                    s.lo = lxr_;
                    s.hi = edge_at(m, um);
                }
                break;
            case StoppingRule::Kind::Threshold:
                s.active = true;
                s.lo = std::log(rule_.level());
                s.hi = std::numeric_limits<double>::infinity();
                break;
            case StoppingRule::Kind::Never: break;
        }
        return s;
    }

    // Bound on the discounted value still to come, per unit of current discount.
    double remaining_bound(double x, double m, double um) {
        const double h1x = pb_.model.h1(x).value;
        const double vr = x < pb_.x_R() ? h1x * vr_scale_ : pb_.payoffs.R(x).value;
        if (mode_ == Mode::Game) return vr + h1x * g_over_h1_y_;
        if (m != bound_m_) {
            bound_m_ = m;
            bound_s_ = pb_.law.survival(m);
            bound_t_ = t_tab_.covers(um) ? t_tab_.floor_node(um) : tail_beyond(m);
        }
        return bound_s_ * vr + h1x * bound_t_;
    }

    Outcome path(PathRng& rng, const CostLaw* costs) {
        boost::random::normal_distribution<double> normal;
        Outcome out;
        double lx = std::log(cfg_.start_x);
        double m = mode_ == Mode::Game ? cfg_.start_x : cfg_.start_m;
        double lm = std::log(m);
        double y = 0.0;
        double ly = std::numeric_limits<double>::infinity();
        if (mode_ == Mode::Game) {
            y = pb_.payoffs.developer_share_inverse(costs->quantile(rng.uniform()));
            if (y <= cfg_.start_x) {
                out.value = pb_.payoffs.G(cfg_.start_x).value;
                return out;
            }
            ly = std::log(y);
            g_over_h1_y_ = pb_.payoffs.G(y).value / pb_.model.h1(y).value;
        }
        Strip strip = strip_at(m, lm);
        auto payoff = [&](double x) {
            const double r = pb_.payoffs.R(x).value;
            return mode_ == Mode::Game ? r : pb_.law.survival(m) * r;
        };
        if (strip.active && lx >= strip.lo && lx <= strip.hi) {
            out.value = payoff(cfg_.start_x);
            return out;
        }

        double t = 0.0;
        double disc = 1.0;
        double acc = 0.0;
        int since_check = 0;
        const int top = static_cast<int>(levels_.size()) - 1;
        while (true) {
            if (t >= t_max_) {
                out.value = acc;
                out.truncated = true;
                return out;
            }
            double dist = lm - lx;
            if (strip.active) {
                if (lx > strip.hi) {
                    dist = std::min(dist, lx - strip.hi);
                } else if (lx < strip.lo) {
                    dist = std::min(dist, strip.lo - lx);
                }
            }
            int k = 0;
            while (k < top && levels_[k + 1].reach <= dist) ++k;
            const Level& lv = levels_[k];

            const double prev = lx;
            lx += lv.mean + lv.sd * normal(rng);
            t += lv.dt;
            disc *= lv.disc;

            if (strip.active) {
                double stop_at = std::numeric_limits<double>::quiet_NaN();
                // Entry during a step is valued at the edge crossed; a step that
                // ends on the same side crossed with the Brownian-bridge probability.
                const double var = lv.sd * lv.sd;
                if (prev > strip.hi) {
                    if (lx <= strip.hi || bridge_crossed(prev - strip.hi, lx - strip.hi, var, rng)) {
                        stop_at = strip.hi;
                    }
                } else if (prev < strip.lo) {
                    if (lx >= strip.lo || bridge_crossed(strip.lo - prev, strip.lo - lx, var, rng)) {
                        stop_at = strip.lo;
                    }
                } else {
                    stop_at = lx;
                }
                if (!std::isnan(stop_at) && strip.lo < ly) {
                    out.value = acc + disc * payoff(std::exp(stop_at));
                    return out;
                }
            }
            double l_top = lx;
            if (cfg_.bridge_max) {
                const double var = lv.sd * lv.sd;
                if (std::max(prev, lx) >= lm || 2.0 * (lm - prev) * (lm - lx) / var < 40.0) {
                    const double d = lx - prev;
                    l_top = 0.5 * (prev + lx + std::sqrt(d * d - 2.0 * var * std::log(rng.uniform())));
                }
            }
            if (l_top > lm) {
                if (l_top >= ly) {
                    out.value = disc * pb_.payoffs.G(y).value;
                    return out;
                }
                const double m_new = std::exp(l_top);
                if (mode_ == Mode::Stopped) {
                    const double u_mid = 0.5 * (lm + l_top);
                    acc += disc * lv.half * g_at(std::exp(u_mid), u_mid) * (m_new - m);
                }
                m = m_new;
                lm = l_top;
                strip = strip_at(m, lm);
            }

            if (k > 0 || ++since_check >= 128) {
                since_check = 0;
                if (disc * remaining_bound(std::exp(lx), m, lm) < cfg_.tail_tol) {
                    out.value = acc;
                    out.truncated = true;
                    return out;
                }
            }
        }
    }

    const Problem& pb_;
    const StoppingRule& rule_;
    const SimConfig& cfg_;
    Mode mode_;
    double sigma_ = 0.0;
    double r_ = 0.0;
    double drift_ = 0.0;
    double t_max_ = 0.0;
    double lxr_ = 0.0;
    double m_low_ = std::numeric_limits<double>::infinity();
    double u_lo_ = 0.0;
    double u_hi_ = 0.0;
    std::vector<Level> levels_;
    LogTable g_tab_;
    LogTable t_tab_;
    LogTable edge_tab_;
    double vr_scale_ = 0.0;
    double g_over_h1_y_ = 0.0;
    double bound_m_ = -1.0;
    double bound_s_ = 0.0;
    double bound_t_ = 0.0;
};

}  // namespace

double simulate_gbm_endpoint(const GbmParams& gbm, double x0, double t, std::size_t steps, PathRng& rng) {
    if (!(x0 > 0.0) || !(t > 0.0) || steps < 1) throw DomainError("simulate_gbm_endpoint: need x0 > 0, t > 0, steps >= 1");
    boost::random::normal_distribution<double> normal;
    const double dt = t / static_cast<double>(steps);
    const double mean = (gbm.mu - 0.5 * gbm.sigma * gbm.sigma) * dt;
    const double sd = gbm.sigma * std::sqrt(dt);
    double lx = std::log(x0);
    for (std::size_t i = 0; i < steps; ++i) lx += mean + sd * normal(rng);
    return std::exp(lx);
}

SimResult simulate_stopped_value(const Problem& problem, const StoppingRule& rule, const SimConfig& cfg) {
    Simulator sim(problem, rule, cfg, Mode::Stopped);
    return sim.run(nullptr);
}

SimResult simulate_stopped_value(const Problem& problem, const FreeBoundary& boundary, const SimConfig& cfg) {
    return simulate_stopped_value(problem, StoppingRule::boundary(boundary, problem.x_R()), cfg);
}

SimResult simulate_game_value(const Problem& problem, const StoppingRule& rule, const CostLaw& costs,
                              const SimConfig& cfg) {
    Simulator sim(problem, rule, cfg, Mode::Game);
    return sim.run(&costs);
}

SimResult simulate_game_value(const Problem& problem, const StoppingRule& rule, const SimConfig& cfg) {
    return simulate_game_value(problem, rule, problem.law.costs(), cfg);
}

MaxIntegralReport maximum_integral_check(const Problem& problem, const SimConfig& cfg, double rel_tol) {
    cfg.validate();
    if (!problem.model.gbm()) throw DomainError("monte carlo: the model must be a geometric Brownian motion");
    const GbmParams g = *problem.model.gbm();
    const double drift = (g.mu - 0.5 * g.sigma * g.sigma) * cfg.dt;
    const double sd = g.sigma * std::sqrt(cfg.dt);
    const double r = g.r;
    const double t_max = cfg.horizon_time(r);
    auto gf = [&](double y) { return problem.payoffs.G(y).value * problem.law.density(y); };
    using Rule = boost::math::quadrature::gauss<double, 7>;

    MaxIntegralReport rep;
    rep.n_paths = cfg.n_paths;
    CompensatedSum abs_diff;
    CompensatedSum sums;
    CompensatedSum integrals;
    for (std::size_t i = 0; i < cfg.n_paths; ++i) {
        PathRng rng(cfg.seed, i);
        boost::random::normal_distribution<double> normal;
        double lx = std::log(cfg.start_x);
        double lm = std::log(cfg.start_m);
        double m = cfg.start_m;
        double t = 0.0;
        double sum = 0.0;
        double quad = 0.0;
        bool moved = false;
        const auto steps = static_cast<std::size_t>(std::ceil(t_max / cfg.dt));
        for (std::size_t s = 0; s < steps; ++s) {
            const double prev = lx;
            lx += drift + sd * normal(rng);
            const double t_prev = t;
            t += cfg.dt;
            if (lx > lm) {
                moved = true;
                const double m_new = std::exp(lx);
                const double mid = std::exp(0.5 * (lm + lx));
                sum += std::exp(-r * (t - 0.5 * cfg.dt)) * gf(mid) * (m_new - m);
                const double slope = cfg.dt / (lx - prev);
                quad += Rule::integrate(
                    [&](double y) {
                        const double tau = t_prev + slope * (std::log(y) - prev);
                        return std::exp(-r * tau) * gf(y);
                    },
                    m, m_new);
                m = m_new;
                lm = lx;
            }
        }
        const double diff = std::abs(sum - quad);
        abs_diff.add(diff);
        sums.add(sum);
        integrals.add(quad);
        rep.max_abs_diff = std::max(rep.max_abs_diff, diff);
        if (moved) {
            ++rep.n_moving;
            if (quad > 0.0) rep.max_rel_diff = std::max(rep.max_rel_diff, diff / quad);
        }
    }
    const double n = static_cast<double>(cfg.n_paths);
    rep.mean_abs_diff = abs_diff.value() / n;
    rep.mean_sum = sums.value() / n;
    rep.mean_integral = integrals.value() / n;
    rep.passed = rep.max_rel_diff <= rel_tol;
    return rep;
}

}  // namespace techstop
