#pragma once

#include "polarpark/controllers.hpp"
#include "polarpark/lyapunov.hpp"
#include "polarpark/sim.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace polarpark {

/// Invalid or inconsistent experiment configuration (exit code 1).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kVerificationFailed = 2;
inline constexpr int kRuntime = 3;
}  // namespace exit_code

inline constexpr const char* kTrajectoryCsvHeader = "t,x,y,theta,rho,delta,gamma,v,omega,V";

struct InitialCondition {
    PolarState polar;
    std::string source;  ///< "polar", "cartesian" or "circle"
};

/// Random initial conditions for the sweep command. Barriered angles are
/// additionally clipped to the controller's open space.
struct SweepConfig {
    std::size_t count{32};
    double rho_min{0.5};
    double rho_max{5.0};
    double angle_bound{3.0};
};

struct ExperimentConfig {
    std::vector<ControllerKind> controllers;
    Gains gains;
    GainCheck gain_check{GainCheck::Strict};
    std::vector<InitialCondition> initial_conditions;
    SimConfig sim;
    Compositor monitor{Compositor::sum()};
    std::uint64_t seed{1};
    SweepConfig sweep;
    double similarity_tol{0.05};  ///< [m], max position gap for "similar" trajectories
};

/// Parses and validates the JSON experiment schema (see README).
/// Throws ConfigError.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Writes the trajectory CSV (header kTrajectoryCsvHeader, one row per sample).
/// Numbers use the shortest round-trip representation, so output is
/// byte-stable for identical inputs.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Per-trajectory summary used by the simulate command.
nlohmann::json summarize(const Trajectory& traj);

/// Each command writes its files under out_dir and returns an exit code.
/// Messages go to `log`.
int cmd_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_compare(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_verify(const std::string& suite, const std::filesystem::path& out_dir, std::uint64_t seed,
               std::ostream& log);

/// Largest Cartesian position gap between two trajectories sampled on the
/// same time grid (compared over their common prefix).
double max_position_gap(const Trajectory& a, const Trajectory& b);

}  // namespace polarpark
