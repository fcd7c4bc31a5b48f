#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "reference.hpp"
#include "techstop/config.hpp"
#include "techstop/io.hpp"

using namespace techstop;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

const char* kReference = R"({
  "name": "reference",
  "model": {"model": "gbm", "mu": 0.0, "sigma": 0.31622776601683794, "r": 0.05},
  "payoffs": {"I": 1.0, "kappa": 2.0, "bargaining": "nash"},
  "costs": {"family": "exponential", "rate": 1.0},
  "sim": {"n_paths": 20000, "dt": 0.001, "seed": 42, "x": 1.0, "m": 1.0}
})";

std::string with(const std::string& from, const std::string& to) {
    std::string s = kReference;
    const auto at = s.find(from);
    REQUIRE(at != std::string::npos);
    return s.replace(at, from.size(), to);
}

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("techstop_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("reference configuration") {
    const ProblemConfig c = parse_config(kReference);
    CHECK(c.name == "reference");
    CHECK(c.gbm.sigma * c.gbm.sigma == Approx(0.1).epsilon(1e-15));
    CHECK(c.kappa == 2.0);
    CHECK(c.bargaining == Bargaining::Nash);
    CHECK(c.costs.family == CostLaw::Family::Exponential);
    CHECK(c.sim.n_paths == 20000);
    CHECK(c.sim.seed == 42);
    CHECK(c.sim.bridge_max);
    CHECK_FALSE(parse_config(with(R"("seed": 42)", R"("seed": 42, "bridge_max": false)")).sim.bridge_max);
    CHECK(error_of(with(R"("seed": 42)", R"("seed": 42, "bridge_max": 1)")).find("sim.bridge_max") != std::string::npos);
    const Problem p = c.problem();
    CHECK(p.x_R() == Approx(ref::kPhi * ref::kPhi).epsilon(1e-12));
    CHECK(c.shared().kappa == 2.0);
}

TEST_CASE("optional sections") {
    const ProblemConfig c = parse_config(with(R"("costs": {"family": "exponential", "rate": 1.0})",
                                              R"("costs": {"family": "lognormal", "location": 0.5, "scale": 2.0},
                                                 "solver": {"rtol": 1e-11, "max_iter": 80})"));
    CHECK(c.costs.family == CostLaw::Family::Lognormal);
    CHECK(c.costs.location == 0.5);
    CHECK(c.costs.scale == 2.0);
    CHECK(c.solver.rtol == 1e-11);
    CHECK(c.solver.max_iter == 80);
}

TEST_CASE("the name defaults to the file stem") {
    const fs::path d = scratch_dir("stem");
    std::string text = kReference;
    text.erase(text.find("\"name\""), std::string(R"("name": "reference",)").size());
    std::ofstream(d / "my_run.json") << text;
    CHECK(load_config((d / "my_run.json").string()).name == "my_run");
    CHECK_THROWS_AS(load_config((d / "absent.json").string()), ConfigError);
}

TEST_CASE("configuration errors name the field") {
    CHECK(error_of(with(R"("rate": 1.0)", R"("rate": 1.0, "shape": 2)")).find("costs.shape: unknown key") !=
          std::string::npos);
    CHECK(error_of(with(R"("kappa": 2.0)", R"("kappa": 1.0)")).find("payoffs.kappa") != std::string::npos);
    CHECK(error_of(with(R"("mu": 0.0)", R"("mu": 0.06)")).find("model.mu") != std::string::npos);
    CHECK(error_of(with(R"("rate": 1.0)", R"("rate": -1.0)")).find("costs.rate") != std::string::npos);
    CHECK(error_of(with(R"("n_paths": 20000)", R"("n_paths": 0)")).find("sim.n_paths") != std::string::npos);
    CHECK(error_of(with(R"("n_paths": 20000)", R"("n_paths": "many")")).find("sim.n_paths") != std::string::npos);
    CHECK(error_of(with(R"("bargaining": "nash")", R"("bargaining": "auction")")).find("payoffs.bargaining") !=
          std::string::npos);
    CHECK(error_of(with(R"("family": "exponential")", R"("family": "weibull")")).find("costs.family") !=
          std::string::npos);
    CHECK(error_of(with(R"("m": 1.0)", R"("m": 0.5)")).find("sim.m") != std::string::npos);
    CHECK(error_of(R"({"payoffs": {}, "costs": {}})").find("config.model: missing") != std::string::npos);
}

TEST_CASE("syntax errors report the line") {
    const std::string e = error_of(with(R"("kappa": 2.0,)", R"("kappa": 2.0,,)"));
    CHECK(e.find("line 4") != std::string::npos);
}

TEST_CASE("number formatting keeps every digit") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(std::stod(format_double(ref::kPhi)) == ref::kPhi);
    CHECK(format_double(2.0) == "2");
}

TEST_CASE("csv layout") {
    const fs::path d = scratch_dir("csv");
    {
        CsvWriter w((d / "t.csv").string(), {"a", "b"});
        w.cell(1.5).cell("x");
        w.end_row();
    }
    CHECK(slurp(d / "t.csv") == std::string("# techstop ") + kVersion + "\na,b\n1.5,x\n");
}

TEST_CASE("boundary csv round trip") {
    const fs::path d = scratch_dir("roundtrip");
    const BoundaryField field(ref::problem());
    const BoundarySolution& sol = ref::solution();
    write_boundary_csv((d / "boundary.csv").string(), sol, field);
    const FreeBoundary back = read_boundary_csv((d / "boundary.csv").string(), sol.boundary.horizon());
    REQUIRE(back.m_grid().size() == sol.boundary.m_grid().size());
    for (std::size_t i = 0; i < back.m_grid().size(); ++i) {
        CHECK(back.m_grid()[i] == sol.boundary.m_grid()[i]);
        CHECK(back.b_grid()[i] == sol.boundary.b_grid()[i]);
    }
    for (double m : {8.5, 12.0, 20.0}) CHECK(back(m) == Approx(sol.boundary(m)).epsilon(1e-14));

    write_boundary_csv((d / "again.csv").string(), sol, field);
    CHECK(slurp(d / "boundary.csv") == slurp(d / "again.csv"));
}

TEST_CASE("json summaries") {
    const nlohmann::json s = boundary_summary(ref::solution(), ref::problem());
    CHECK(s.dump().find("m_low") != std::string::npos);
    SimResult r;
    r.estimate = 0.25;
    r.n_paths = 10;
    const nlohmann::json j = to_json(r);
    CHECK(j.at("estimate").get<double>() == 0.25);
    CHECK(j.at("n_paths").get<std::size_t>() == 10);
}
