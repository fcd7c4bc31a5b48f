#include "techstop/config.hpp"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

namespace techstop {

using nlohmann::json;

CostLaw CostSpec::law() const {
    switch (family) {
        case CostLaw::Family::Exponential: return CostLaw::exponential(rate);
        case CostLaw::Family::Lognormal: return CostLaw::lognormal(location, scale);
        case CostLaw::Family::Custom: break;
    }
    throw ConfigError("costs.family: custom laws cannot be configured from JSON");
}

Problem ProblemConfig::problem() const {
    return make_gbm_problem(gbm, investment_cost, kappa, costs.law(), bargaining);
}

SharedSpec ProblemConfig::shared() const {
    SharedSpec s;
    s.gbm = gbm;
    s.investment_cost = investment_cost;
    s.kappa = kappa;
    s.bargaining = bargaining;
    s.solver = solver;
    return s;
}

namespace {

class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    void allow(std::initializer_list<const char*> keys) const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            bool known = false;
            for (const char* k : keys) known = known || it.key() == k;
            if (!known) throw ConfigError(field(it.key()) + ": unknown key");
        }
    }

    bool has(const char* key) const { return j_.contains(key); }

    double number(const char* key) const {
        const json& v = at(key);
        if (!v.is_number()) throw ConfigError(field(key) + ": expected a number");
        return v.get<double>();
    }
    double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

    std::uint64_t count(const char* key, std::uint64_t fallback) const {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_number_unsigned()) throw ConfigError(field(key) + ": expected a non-negative integer");
        return v.get<std::uint64_t>();
    }

    std::string text(const char* key) const {
        const json& v = at(key);
        if (!v.is_string()) throw ConfigError(field(key) + ": expected a string");
        return v.get<std::string>();
    }

    bool flag(const char* key, bool fallback) const {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_boolean()) throw ConfigError(field(key) + ": expected true or false");
        return v.get<bool>();
    }

    std::string field(const std::string& key) const { return path_ + "." + key; }

private:
    const json& at(const char* key) const {
        if (!j_.contains(key)) throw ConfigError(field(key) + ": missing");
        return j_.at(key);
    }

    const json& j_;
    std::string path_;
};

template <typename F>
void guard(const std::string& field, F&& check) {
    try {
        check();
    } catch (const DomainError& e) {
        const std::string msg = e.what();
        throw ConfigError(msg.rfind(field + ":", 0) == 0 ? msg : field + ": " + msg);
    }
}

std::string line_of(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

ProblemConfig parse_config(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": syntax error at " + line_of(text, e.byte == 0 ? 0 : e.byte - 1));
    }
    const Section top(root, "config");
    top.allow({"name", "model", "payoffs", "costs", "solver", "sim"});

    ProblemConfig cfg;
    if (top.has("name")) cfg.name = top.text("name");

    if (!top.has("model")) throw ConfigError("config.model: missing");
    const Section model(root.at("model"), "model");
    model.allow({"model", "mu", "sigma", "r"});
    if (model.text("model") != "gbm") throw ConfigError("model.model: only \"gbm\" is supported");
    cfg.gbm.mu = model.number("mu");
    cfg.gbm.sigma = model.number("sigma");
    cfg.gbm.r = model.number("r");
    if (!(cfg.gbm.sigma > 0.0)) throw ConfigError("model.sigma: must be > 0");
    if (!(cfg.gbm.r > 0.0)) throw ConfigError("model.r: must be > 0");
    if (!(cfg.gbm.mu < cfg.gbm.r)) throw ConfigError("model.mu: must be < r");
    guard("model", [&] { cfg.gbm.validate(); });

    if (!top.has("payoffs")) throw ConfigError("config.payoffs: missing");
    const Section pay(root.at("payoffs"), "payoffs");
    pay.allow({"I", "kappa", "bargaining"});
    cfg.investment_cost = pay.number("I");
    cfg.kappa = pay.number("kappa");
    if (!(cfg.investment_cost > 0.0)) throw ConfigError("payoffs.I: must be > 0");
    if (!(cfg.kappa > 1.0)) throw ConfigError("payoffs.kappa: must be > 1");
    if (pay.has("bargaining")) {
        const std::string rule = pay.text("bargaining");
        if (rule == "nash") {
            cfg.bargaining = Bargaining::Nash;
        } else if (rule == "shapley") {
            cfg.bargaining = Bargaining::Shapley;
        } else {
            throw ConfigError("payoffs.bargaining: expected \"nash\" or \"shapley\"");
        }
    }

    if (!top.has("costs")) throw ConfigError("config.costs: missing");
    const Section costs(root.at("costs"), "costs");
    const std::string family = costs.text("family");
    if (family == "exponential") {
        costs.allow({"family", "rate"});
        cfg.costs.family = CostLaw::Family::Exponential;
        cfg.costs.rate = costs.number("rate");
        if (!(cfg.costs.rate > 0.0)) throw ConfigError("costs.rate: must be > 0");
    } else if (family == "lognormal") {
        costs.allow({"family", "location", "scale"});
        cfg.costs.family = CostLaw::Family::Lognormal;
        cfg.costs.location = costs.number("location");
        cfg.costs.scale = costs.number("scale");
        if (!(cfg.costs.scale > 0.0)) throw ConfigError("costs.scale: must be > 0");
    } else {
        throw ConfigError("costs.family: expected \"exponential\" or \"lognormal\"");
    }
    guard("costs", [&] { (void)cfg.costs.law(); });

    if (top.has("solver")) {
        const Section s(root.at("solver"), "solver");
        s.allow({"rtol", "atol", "eps_diag", "bisect_tol", "max_iter", "horizon", "survival_target",
                 "backward_tail"});
        SolverOptions& o = cfg.solver;
        o.rtol = s.number("rtol", o.rtol);
        o.atol = s.number("atol", o.atol);
        o.eps_diag = s.number("eps_diag", o.eps_diag);
        o.bisect_tol = s.number("bisect_tol", o.bisect_tol);
        o.max_iter = static_cast<int>(s.count("max_iter", static_cast<std::uint64_t>(o.max_iter)));
        o.horizon = s.number("horizon", o.horizon);
        o.survival_target = s.number("survival_target", o.survival_target);
        o.backward_tail = s.flag("backward_tail", o.backward_tail);
        for (const char* k : {"rtol", "atol", "eps_diag", "bisect_tol"}) {
            if (s.has(k) && !(s.number(k) > 0.0)) throw ConfigError(s.field(k) + ": must be > 0");
        }
        if (o.max_iter < 1) throw ConfigError("solver.max_iter: must be >= 1");
        if (o.horizon < 0.0) throw ConfigError("solver.horizon: must be >= 0");
        if (!(o.survival_target > 0.0 && o.survival_target < 1.0)) {
            throw ConfigError("solver.survival_target: must lie in (0, 1)");
        }
    }

    if (top.has("sim")) {
        const Section s(root.at("sim"), "sim");
        s.allow({"n_paths", "dt", "t_max", "seed", "x", "m", "tail_tol", "bridge_max"});
        SimConfig& c = cfg.sim;
        c.n_paths = s.count("n_paths", c.n_paths);
        c.dt = s.number("dt", c.dt);
        c.t_max = s.number("t_max", c.t_max);
        c.seed = s.count("seed", c.seed);
        c.start_x = s.number("x", c.start_x);
        c.start_m = s.number("m", c.start_m);
        c.tail_tol = s.number("tail_tol", c.tail_tol);
        c.bridge_max = s.flag("bridge_max", c.bridge_max);
        if (c.n_paths < 1) throw ConfigError("sim.n_paths: must be >= 1");
        if (!(c.dt > 0.0)) throw ConfigError("sim.dt: must be > 0");
        if (c.t_max < 0.0) throw ConfigError("sim.t_max: must be >= 0");
        if (!(c.start_x > 0.0)) throw ConfigError("sim.x: must be > 0");
        if (!(c.start_m >= c.start_x)) throw ConfigError("sim.m: must be >= x");
        guard("sim", [&] { c.validate(); });
    }
    return cfg;
}

ProblemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    ProblemConfig cfg = parse_config(ss.str(), path);
    if (cfg.name.empty()) cfg.name = std::filesystem::path(path).stem().string();
    return cfg;
}

}  // namespace techstop
