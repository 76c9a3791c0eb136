#include <doctest.h>

#include "polarpark/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace polarpark;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("polarpark_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json base() {
    return json{{"controller", "GloBa"},
                {"gains", {1, 1, 1, 1}},
                {"initial_conditions", json::array({json{{"polar", {2.0, 0.5, -0.5}}}})}};
}

}  // namespace

TEST_CASE("config parsing") {
    const auto cfg = parse_experiment_config(base());
    REQUIRE(cfg.controllers.size() == 1);
    CHECK(cfg.controllers[0] == ControllerKind::GloBa);
    CHECK(cfg.initial_conditions[0].polar.rho == 2.0);
    CHECK(cfg.sim.integrator == Integrator::RK45Adaptive);

    json j = base();
    j["initial_conditions"] = json::array({json{{"cartesian", {{"x", -1.0}, {"y", 0.0}, {"theta", 0.0}}}}});
    const auto c2 = parse_experiment_config(j);
    CHECK(c2.initial_conditions[0].polar.rho == doctest::Approx(1.0));
    CHECK(c2.initial_conditions[0].source == "cartesian");

    j = base();
    j.erase("initial_conditions");
    j["circle"] = {{"rho", 3.0}, {"count", 8}, {"heading", 0.0}};
    const auto c3 = parse_experiment_config(j);
    REQUIRE(c3.initial_conditions.size() == 8);
    for (const auto& ic : c3.initial_conditions) CHECK(ic.polar.rho == 3.0);

    j = base();
    j["sim"] = {{"integrator", "rk4"}, {"dt", 0.02}, {"frame", "cartesian"}, {"steering", "off"}};
    const auto c4 = parse_experiment_config(j);
    CHECK(c4.sim.integrator == Integrator::RK4Fixed);
    CHECK(c4.sim.frame == Frame::Cartesian);
    CHECK(c4.sim.steering == Steering::Off);
}

TEST_CASE("config errors") {
    json j = base();
    j["bogus"] = 1;
    CHECK_THROWS_WITH_AS(parse_experiment_config(j), doctest::Contains("unknown key"), ConfigError);

    j = base();
    j["gains"] = {1, 1, 1};
    CHECK_THROWS_AS(parse_experiment_config(j), ConfigError);

    j = base();
    j["controller"] = "PID";
    CHECK_THROWS_AS(parse_experiment_config(j), ConfigError);

    j = base();
    j["controller"] = "BoLSA";
    j["gains"] = {1, 1, 0.1, 1};
    CHECK_THROWS_WITH_AS(parse_experiment_config(j), doctest::Contains("gains rejected"), ConfigError);
    j["gain_check"] = "positive_only";
    CHECK_NOTHROW(parse_experiment_config(j));

    j = base();
    j["initial_conditions"] = json::array({json{{"polar", {0.0, 0.1, 0.1}}}});
    CHECK_THROWS_AS(parse_experiment_config(j), ConfigError);

    j = base();
    j["initial_conditions"] = json::array({json{{"cartesian", {0.0, 0.0, 1.0}}}});
    CHECK_THROWS_AS(parse_experiment_config(j), ConfigError);

    j = base();
    j["sim"] = {{"dt", -1.0}};
    CHECK_THROWS_AS(parse_experiment_config(j), ConfigError);

    CHECK_THROWS_AS(load_experiment_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("trajectory CSV header and byte stability") {
    const ControllerSpec spec(ControllerKind::BarFli, {1, 1, 1, 1});
    SimConfig cfg;
    cfg.integrator = Integrator::RK4Fixed;
    cfg.t_final = 2.0;
    std::ostringstream a, b;
    write_trajectory_csv(a, simulate(spec, {2.0, 1.0, 0.5}, cfg));
    write_trajectory_csv(b, simulate(spec, {2.0, 1.0, 0.5}, cfg));
    CHECK(a.str() == b.str());
    const std::string text = a.str();
    CHECK(text.substr(0, text.find('\n')) == "t,x,y,theta,rho,delta,gamma,v,omega,V");
    CHECK(std::count(text.begin(), text.end(), '\n') == 202);
}

TEST_CASE("simulate command writes trajectories and a summary") {
    const fs::path out = scratch("simulate");
    json j = base();
    j["controllers"] = {"GloBa", "BAgAl"};
    j.erase("controller");
    const auto cfg = parse_experiment_config(j);
    std::ostringstream log;
    CHECK(cmd_simulate(cfg, out, log) == exit_code::kOk);
    CHECK(fs::exists(out / "traj_GloBa_0.csv"));
    CHECK(fs::exists(out / "traj_BAgAl_0.csv"));
    const json summary = json::parse(slurp(out / "summary.json"));
    REQUIRE(summary["runs"].size() == 2);
    CHECK(summary["runs"][0]["status"] == "Captured");
    CHECK(summary["runs"][0]["V_monotone"] == true);
}

TEST_CASE("an initial state on the barrier becomes an error entry") {
    const fs::path out = scratch("barrier");
    json j = base();
    j["controller"] = "BAR-FLi";
    j["initial_conditions"] = json::array({json{{"polar", {1.0, kPi, 0.0}}}, json{{"polar", {1.0, 0.3, 0.0}}}});
    const auto cfg = parse_experiment_config(j);
    std::ostringstream log;
    CHECK(cmd_simulate(cfg, out, log) == exit_code::kOk);
    const json summary = json::parse(slurp(out / "summary.json"));
    CHECK(summary["runs"][0].contains("error"));
    CHECK(summary["runs"][1]["status"] == "Captured");

    j["initial_conditions"] = json::array({json{{"polar", {1.0, kPi, 0.0}}}});
    CHECK(cmd_simulate(parse_experiment_config(j), out, log) == exit_code::kRuntime);
}

TEST_CASE("compare needs two controllers") {
    std::ostringstream log;
    CHECK_THROWS_AS(cmd_compare(parse_experiment_config(base()), scratch("cmp1"), log), ConfigError);

    json j = base();
    j.erase("controller");
    j["controllers"] = {"GloBa", "BarFli"};
    const fs::path out = scratch("cmp2");
    CHECK(cmd_compare(parse_experiment_config(j), out, log) == exit_code::kOk);
    const std::string table = slurp(out / "compare.csv");
    CHECK(table.rfind("ic,controller,status,capture_time,path_length,max_abs_omega,min_dist_excluded,flag", 0) == 0);
    CHECK(fs::exists(out / "similarity.csv"));
}

TEST_CASE("sweep is reproducible for a seed") {
    json j = base();
    j["controller"] = "BoLSA";
    j["sweep"] = {{"count", 4}, {"rho", {0.5, 2.0}}, {"angle_bound", 2.0}};
    j["seed"] = 11;
    const auto cfg = parse_experiment_config(j);
    std::ostringstream log;
    const fs::path a = scratch("sweep_a"), b = scratch("sweep_b");
    CHECK(cmd_sweep(cfg, a, log) == exit_code::kOk);
    CHECK(cmd_sweep(cfg, b, log) == exit_code::kOk);
    CHECK(slurp(a / "sweep.csv") == slurp(b / "sweep.csv"));
}

TEST_CASE("verify command") {
    std::ostringstream log;
    const fs::path out = scratch("verify");
    CHECK_THROWS_AS(cmd_verify("nope", out, 1, log), ConfigError);
    CHECK(cmd_verify("lemma1", out, 1, log) == exit_code::kOk);
    const json bundle = json::parse(slurp(out / "verify_lemma1.json"));
    REQUIRE(bundle.is_array());
    for (const char* key : {"check", "grid", "gains", "worst_point", "worst_margin", "pass"}) {
        CHECK(bundle[0].contains(key));
    }
}

TEST_CASE("shipped configs parse") {
    for (const char* name : {"fig3_globa.json", "fig4_compare.json", "sweep_bagal.json"}) {
        CHECK_NOTHROW(load_experiment_config(fs::path(POLARPARK_CONFIG_DIR) / name));
    }
}
