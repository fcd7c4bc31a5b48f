#pragma once

#include <stdexcept>
#include <string>

#include "techstop/comparative_statics.hpp"
#include "techstop/monte_carlo.hpp"

namespace techstop {

/// Invalid configuration; the message names the offending field (and the
/// line for syntax errors).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CostSpec {
    CostLaw::Family family = CostLaw::Family::Exponential;
    double rate = 1.0;
    double location = 0.0;
    double scale = 1.0;

    CostLaw law() const;
    bool operator==(const CostSpec&) const = default;
};

struct ProblemConfig {
    std::string name;
    GbmParams gbm;
    double investment_cost = 1.0;
    double kappa = 2.0;
    Bargaining bargaining = Bargaining::Nash;
    CostSpec costs;
    SolverOptions solver;
    SimConfig sim;

    Problem problem() const;
    SharedSpec shared() const;
};

/// Parses a JSON document with sections model, payoffs, costs (required) and
/// solver, sim, name (optional). Unknown keys are errors.
ProblemConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ProblemConfig load_config(const std::string& path);

}  // namespace techstop
