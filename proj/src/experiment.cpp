#include "polarpark/experiment.hpp"

#include "polarpark/verify.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace polarpark {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, _] : j.items()) {
        if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

double get_number(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ConfigError("'" + key + "' must be a number");
    return j.at(key).get<double>();
}

Gains parse_gains(const json& j) {
    Gains g;
    if (j.is_array()) {
        if (j.size() != 4) throw ConfigError("gains array must have 4 entries [k1, k2, k3, k4]");
        for (const auto& v : j) {
            if (!v.is_number()) throw ConfigError("gains must be numbers");
        }
        g = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
    } else if (j.is_object()) {
        require_keys(j, {"k1", "k2", "k3", "k4"}, "gains");
        g.k1 = get_number(j, "k1", g.k1);
        g.k2 = get_number(j, "k2", g.k2);
        g.k3 = get_number(j, "k3", g.k3);
        g.k4 = get_number(j, "k4", g.k4);
    } else {
        throw ConfigError("gains must be an object or an array");
    }
    return g;
}

std::array<double, 3> triple(const json& j, const std::array<const char*, 3>& names, const std::string& what) {
    if (j.is_array()) {
        if (j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number()) {
            throw ConfigError(what + " must be an array of 3 numbers");
        }
        return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
    }
    if (j.is_object()) {
        require_keys(j, {names[0], names[1], names[2]}, what);
        std::array<double, 3> out{};
        for (std::size_t i = 0; i < 3; ++i) {
            if (!j.contains(names[i])) throw ConfigError(what + " is missing '" + names[i] + "'");
            out[i] = get_number(j, names[i], 0.0);
        }
        return out;
    }
    throw ConfigError(what + " must be an array or an object");
}

InitialCondition parse_ic(const json& j) {
    require_keys(j, {"polar", "cartesian"}, "initial condition");
    if (j.contains("polar") == j.contains("cartesian")) {
        throw ConfigError("initial condition needs exactly one of 'polar' or 'cartesian'");
    }
    if (j.contains("polar")) {
        const auto p = triple(j.at("polar"), {"rho", "delta", "gamma"}, "polar initial condition");
        if (!(p[0] > 0.0)) throw ConfigError("polar initial condition needs rho > 0");
        return {{p[0], p[1], p[2]}, "polar"};
    }
    const auto c = triple(j.at("cartesian"), {"x", "y", "theta"}, "cartesian initial condition");
    try {
        return {cart_to_polar({c[0], c[1], c[2]}), "cartesian"};
    } catch (const DomainError& e) {
        throw ConfigError(std::string("cartesian initial condition: ") + e.what());
    }
}

void parse_sim(const json& j, SimConfig& sim) {
    require_keys(j,
                 {"dt", "t_final", "capture_radius", "integrator", "abs_tol", "rel_tol", "dt_min", "dt_max",
                  "output_dt", "frame", "steering"},
                 "sim");
    sim.dt = get_number(j, "dt", sim.dt);
    sim.t_final = get_number(j, "t_final", sim.t_final);
    sim.capture_radius = get_number(j, "capture_radius", sim.capture_radius);
    sim.abs_tol = get_number(j, "abs_tol", sim.abs_tol);
    sim.rel_tol = get_number(j, "rel_tol", sim.rel_tol);
    sim.dt_min = get_number(j, "dt_min", sim.dt_min);
    sim.dt_max = get_number(j, "dt_max", sim.dt_max);
    sim.output_dt = get_number(j, "output_dt", sim.output_dt);
    if (j.contains("integrator")) {
        const auto s = j.at("integrator").get<std::string>();
        if (s == "rk45") sim.integrator = Integrator::RK45Adaptive;
        else if (s == "rk4") sim.integrator = Integrator::RK4Fixed;
        else throw ConfigError("sim.integrator must be 'rk45' or 'rk4'");
    }
    if (j.contains("frame")) {
        const auto s = j.at("frame").get<std::string>();
        if (s == "polar") sim.frame = Frame::Polar;
        else if (s == "cartesian") sim.frame = Frame::Cartesian;
        else throw ConfigError("sim.frame must be 'polar' or 'cartesian'");
    }
    if (j.contains("steering")) {
        const auto s = j.at("steering").get<std::string>();
        if (s == "feedback") sim.steering = Steering::Feedback;
        else if (s == "off") sim.steering = Steering::Off;
        else throw ConfigError("sim.steering must be 'feedback' or 'off'");
    }
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j) {
    require_keys(j,
                 {"controller", "controllers", "gains", "gain_check", "initial_conditions", "circle", "sim",
                  "monitor", "seed", "sweep", "similarity_tol"},
                 "config");
    ExperimentConfig cfg;
    try {
        if (j.contains("controller")) {
            cfg.controllers.push_back(controller_kind_from_string(j.at("controller").get<std::string>()));
        }
        if (j.contains("controllers")) {
            for (const auto& c : j.at("controllers")) {
                cfg.controllers.push_back(controller_kind_from_string(c.get<std::string>()));
            }
        }
        if (cfg.controllers.empty()) throw ConfigError("config needs 'controller' or 'controllers'");

        if (j.contains("gains")) cfg.gains = parse_gains(j.at("gains"));
        if (j.contains("gain_check")) {
            const auto s = j.at("gain_check").get<std::string>();
            if (s == "strict") cfg.gain_check = GainCheck::Strict;
            else if (s == "positive_only") cfg.gain_check = GainCheck::PositiveOnly;
            else throw ConfigError("gain_check must be 'strict' or 'positive_only'");
        }
        for (ControllerKind k : cfg.controllers) {
            try {
                (void)ControllerSpec(k, cfg.gains, cfg.gain_check);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("gains rejected: ") + e.what());
            }
        }

        if (j.contains("initial_conditions")) {
            for (const auto& ic : j.at("initial_conditions")) cfg.initial_conditions.push_back(parse_ic(ic));
        }
        if (j.contains("circle")) {
            const json& c = j.at("circle");
            require_keys(c, {"rho", "count", "heading"}, "circle");
            const double rho = get_number(c, "rho", 1.0);
            const double heading = get_number(c, "heading", 0.0);
            const int count = c.value("count", 8);
            if (!(rho > 0.0) || count < 1) throw ConfigError("circle needs rho > 0 and count >= 1");
            for (int i = 0; i < count; ++i) {
                // Positions at polar angles offset by half a slot, so none sits on
                // the excluded ray delta = pi.
                const double delta = -kPi + 2.0 * kPi * (i + 0.5) / count;
                cfg.initial_conditions.push_back({{rho, delta, wrap_angle(delta - heading)}, "circle"});
            }
        }

        if (j.contains("sim")) parse_sim(j.at("sim"), cfg.sim);
        cfg.sim.validate();

        if (j.contains("monitor")) {
            const json& m = j.at("monitor");
            require_keys(m, {"form", "order"}, "monitor");
            const auto form = compositor_form_from_string(m.value("form", std::string{"sum"}));
            const auto order = compositor_order_from_string(m.value("order", std::string{"rho_first"}));
            cfg.monitor = form == CompositorForm::Sum      ? Compositor::sum(order)
                          : form == CompositorForm::LogSum ? Compositor::log_sum(order)
                                                           : Compositor::exp_product(order);
        }
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("sweep")) {
            const json& s = j.at("sweep");
            require_keys(s, {"count", "rho", "angle_bound"}, "sweep");
            cfg.sweep.count = s.value("count", cfg.sweep.count);
            if (s.contains("rho")) {
                const auto& r = s.at("rho");
                if (!r.is_array() || r.size() != 2) throw ConfigError("sweep.rho must be [min, max]");
                cfg.sweep.rho_min = r[0].get<double>();
                cfg.sweep.rho_max = r[1].get<double>();
            }
            cfg.sweep.angle_bound = get_number(s, "angle_bound", cfg.sweep.angle_bound);
            if (!(cfg.sweep.rho_min > 0.0) || !(cfg.sweep.rho_max >= cfg.sweep.rho_min) ||
                !(cfg.sweep.angle_bound > 0.0)) {
                throw ConfigError("sweep ranges must satisfy 0 < rho_min <= rho_max and angle_bound > 0");
            }
        }
        cfg.similarity_tol = get_number(j, "similarity_tol", cfg.similarity_tol);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_experiment_config(j);
}

namespace {

void put(std::ostream& os, double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    os.write(buf.data(), res.ptr - buf.data());
}

json polar_json(const PolarState& p) {
    return json{{"rho", p.rho}, {"delta", p.delta}, {"gamma", p.gamma}};
}

constexpr double kMonotoneTol = 1e-8;

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << kTrajectoryCsvHeader << '\n';
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& c = traj.cartesian[i];
        const auto& p = traj.polar[i];
        const auto& u = traj.inputs[i];
        const double row[] = {traj.times[i], c.x, c.y, c.theta, p.rho, p.delta, p.gamma, u.v, u.omega,
                              traj.lyapunov[i]};
        for (std::size_t k = 0; k < std::size(row); ++k) {
            if (k) os << ',';
            put(os, row[k]);
        }
        os << '\n';
    }
}

json summarize(const Trajectory& traj) {
    json s;
    s["status"] = to_string(traj.status);
    s["capture_time"] = traj.status == SimStatus::Captured ? json(traj.times.back()) : json(nullptr);
    s["path_length"] = traj.path_length;
    const auto& p = traj.polar.back();
    const auto& c = traj.cartesian.back();
    s["final_state"] = json{{"t", traj.times.back()}, {"rho", p.rho},  {"delta", p.delta},
                            {"gamma", p.gamma},       {"x", c.x},      {"y", c.y},
                            {"theta", c.theta}};
    s["V_monotone"] = traj.max_lyapunov_increase() <= kMonotoneTol;
    s["max_abs_omega"] = traj.max_abs_omega;
    if (!traj.message.empty()) s["message"] = traj.message;
    return s;
}

namespace {

struct RunResult {
    std::optional<Trajectory> traj;
    std::string error;
};

// Runs every initial condition concurrently; results keep the input order.
std::vector<RunResult> run_all(const ControllerSpec& spec, const std::vector<InitialCondition>& ics,
                               const SimConfig& sim, const Compositor& monitor, bool require_open_space) {
    const CompositeLyapunovFn V(monitor, LyapunovFn(spec));
    std::vector<std::future<RunResult>> jobs;
    for (const auto& ic : ics) {
        jobs.push_back(std::async(std::launch::async, [&spec, &sim, &V, ic, require_open_space] {
            RunResult r;
            if (require_open_space && !contains(spec.space(), ic.polar)) {
                r.error = steering_defined(spec.kind(), ic.polar.delta, ic.polar.gamma)
                              ? "initial state outside " + to_string(spec.space())
                              : "steering undefined at initial state";
                return r;
            }
            try {
                r.traj = simulate(spec, ic.polar, sim, V);
            } catch (const std::exception& e) {
                r.error = e.what();
            }
            return r;
        }));
    }
    std::vector<RunResult> out;
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    out << std::setw(2) << j << '\n';
}

}  // namespace

int cmd_simulate(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& log) {
    if (cfg.initial_conditions.empty()) throw ConfigError("simulate needs at least one initial condition");
    ensure_dir(out_dir);
    json summary;
    summary["gains"] = gains_to_json(cfg.gains);
    summary["runs"] = json::array();
    bool any_ok = false;
    for (ControllerKind kind : cfg.controllers) {
        const ControllerSpec spec(kind, cfg.gains, cfg.gain_check);
        const auto results = run_all(spec, cfg.initial_conditions, cfg.sim, cfg.monitor, true);
        for (std::size_t i = 0; i < results.size(); ++i) {
            json entry{{"controller", to_string(kind)},
                       {"index", i},
                       {"initial_state", polar_json(cfg.initial_conditions[i].polar)}};
            const RunResult& r = results[i];
            if (!r.traj) {
                entry["error"] = r.error;
                log << to_string(kind) << " IC " << i << ": error: " << r.error << '\n';
            } else {
                const std::string name = "traj_" + to_string(kind) + "_" + std::to_string(i) + ".csv";
                std::ofstream csv(out_dir / name);
                write_trajectory_csv(csv, *r.traj);
                entry.update(summarize(*r.traj));
                entry["csv"] = name;
                if (r.traj->status != SimStatus::BoundaryStop) any_ok = true;
                log << to_string(kind) << " IC " << i << ": " << to_string(r.traj->status) << '\n';
            }
            summary["runs"].push_back(entry);
        }
    }
    write_json(out_dir / "summary.json", summary);
    return any_ok ? exit_code::kOk : exit_code::kRuntime;
}

double max_position_gap(const Trajectory& a, const Trajectory& b) {
    const std::size_t n = std::min(a.size(), b.size());
    double gap = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        gap = std::max(gap, std::hypot(a.cartesian[i].x - b.cartesian[i].x, a.cartesian[i].y - b.cartesian[i].y));
    }
    return gap;
}

int cmd_compare(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& log) {
    if (cfg.controllers.size() < 2) throw ConfigError("compare needs at least two controllers");
    if (cfg.initial_conditions.empty()) throw ConfigError("compare needs at least one initial condition");
    ensure_dir(out_dir);
    SimConfig sim = cfg.sim;
    if (!(sim.output_dt > 0.0)) sim.output_dt = 0.05;

    std::vector<std::vector<RunResult>> results;
    for (ControllerKind kind : cfg.controllers) {
        const ControllerSpec spec(kind, cfg.gains, cfg.gain_check);
        results.push_back(run_all(spec, cfg.initial_conditions, sim, cfg.monitor, true));
    }

    std::ofstream table(out_dir / "compare.csv");
    table << "ic,controller,status,capture_time,path_length,max_abs_omega,min_dist_excluded,flag\n";
    bool any_ok = false;
    for (std::size_t i = 0; i < cfg.initial_conditions.size(); ++i) {
        for (std::size_t c = 0; c < cfg.controllers.size(); ++c) {
            const RunResult& r = results[c][i];
            table << i << ',' << to_string(cfg.controllers[c]) << ',';
            if (!r.traj) {
                table << "Error,,,,,flagged: " << r.error << '\n';
                continue;
            }
            const Trajectory& t = *r.traj;
            if (t.status != SimStatus::BoundaryStop) any_ok = true;
            table << to_string(t.status) << ',';
            if (t.status == SimStatus::Captured) put(table, t.times.back());
            table << ',';
            put(table, t.path_length);
            table << ',';
            put(table, t.max_abs_omega);
            table << ',';
            put(table, t.min_boundary_distance);
            table << ",ok\n";
        }
    }

    std::ofstream sim_csv(out_dir / "similarity.csv");
    sim_csv << "ic,controller_a,controller_b,max_position_gap,similar\n";
    for (std::size_t i = 0; i < cfg.initial_conditions.size(); ++i) {
        for (std::size_t a = 0; a < cfg.controllers.size(); ++a) {
            for (std::size_t b = a + 1; b < cfg.controllers.size(); ++b) {
                const RunResult& ra = results[a][i];
                const RunResult& rb = results[b][i];
                if (!ra.traj || !rb.traj) continue;
                const double gap = max_position_gap(*ra.traj, *rb.traj);
                sim_csv << i << ',' << to_string(cfg.controllers[a]) << ',' << to_string(cfg.controllers[b]) << ',';
                put(sim_csv, gap);
                sim_csv << ',' << (gap < cfg.similarity_tol ? "true" : "false") << '\n';
            }
        }
    }
    log << "compare: " << cfg.controllers.size() << " controllers x " << cfg.initial_conditions.size()
        << " initial conditions written to " << out_dir.string() << '\n';
    return any_ok ? exit_code::kOk : exit_code::kRuntime;
}

int cmd_sweep(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& log) {
    ensure_dir(out_dir);
    std::ofstream out(out_dir / "sweep.csv");
    out << "controller,index,rho0,delta0,gamma0,status,capture_time,path_length,V_monotone\n";
    bool any_ok = false;
    for (ControllerKind kind : cfg.controllers) {
        const ControllerSpec spec(kind, cfg.gains, cfg.gain_check);
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> rho(cfg.sweep.rho_min, cfg.sweep.rho_max);
        const double db = bounds_delta(spec.space()) ? std::min(cfg.sweep.angle_bound, kPi - 0.05)
                                                     : cfg.sweep.angle_bound;
        const double gb = bounds_gamma(spec.space()) ? std::min(cfg.sweep.angle_bound, kPi - 0.05)
                                                     : cfg.sweep.angle_bound;
        std::uniform_real_distribution<double> del(-db, db);
        std::uniform_real_distribution<double> gam(-gb, gb);
        std::vector<InitialCondition> ics;
        for (std::size_t i = 0; i < cfg.sweep.count; ++i) {
            const double r = rho(rng);
            const double d = del(rng);
            const double g = gam(rng);
            ics.push_back({{r, d, g}, "sweep"});
        }
        const auto results = run_all(spec, ics, cfg.sim, cfg.monitor, true);
        std::size_t captured = 0;
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& p = ics[i].polar;
            out << to_string(kind) << ',' << i << ',';
            put(out, p.rho);
            out << ',';
            put(out, p.delta);
            out << ',';
            put(out, p.gamma);
            out << ',';
            const RunResult& r = results[i];
            if (!r.traj) {
                out << "Error,,,\n";
                continue;
            }
            const Trajectory& t = *r.traj;
            if (t.status != SimStatus::BoundaryStop) any_ok = true;
            if (t.status == SimStatus::Captured) ++captured;
            out << to_string(t.status) << ',';
            if (t.status == SimStatus::Captured) put(out, t.times.back());
            out << ',';
            put(out, t.path_length);
            out << ',' << (t.max_lyapunov_increase() <= kMonotoneTol ? "true" : "false") << '\n';
        }
        log << to_string(kind) << ": " << captured << "/" << results.size() << " captured\n";
    }
    return any_ok ? exit_code::kOk : exit_code::kRuntime;
}

int cmd_verify(const std::string& suite, const fs::path& out_dir, std::uint64_t seed, std::ostream& log) {
    if (!is_known_suite(suite)) throw ConfigError("unknown suite '" + suite + "'");
    ensure_dir(out_dir);
    const auto reports = run_battery(suite, seed);
    json bundle = json::array();
    bool all_pass = true;
    log << std::left << std::setw(48) << "check" << std::setw(16) << "worst_margin" << "result\n";
    for (const auto& r : reports) {
        bundle.push_back(r);
        all_pass = all_pass && r.pass;
        log << std::left << std::setw(48) << r.check << std::setw(16) << std::setprecision(6) << r.worst_margin
            << (r.pass ? "PASS" : "FAIL") << '\n';
    }
    write_json(out_dir / ("verify_" + suite + ".json"), bundle);
    log << (all_pass ? "all checks certified on grid" : "one or more checks FAILED") << '\n';
    return all_pass ? exit_code::kOk : exit_code::kVerificationFailed;
}

}  // namespace polarpark
