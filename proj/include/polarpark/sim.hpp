#pragma once

#include "polarpark/controllers.hpp"
#include "polarpark/geometry.hpp"
#include "polarpark/lyapunov.hpp"

#include <optional>
#include <string>
#include <vector>

namespace polarpark {

struct PolarRate {
    double rho_dot{0.0};
    double delta_dot{0.0};
    double gamma_dot{0.0};
};

struct CartesianRate {
    double x_dot{0.0};
    double y_dot{0.0};
    double theta_dot{0.0};
};

enum class Frame { Polar, Cartesian };
enum class Integrator { RK4Fixed, RK45Adaptive };

/// Feedback: omega = (k1/2) sin 2gamma + omega_tilde. Off: omega = 0 with the
/// forward-velocity law still active.
enum class Steering { Feedback, Off };

struct SimConfig {
    double dt{0.01};             ///< fixed step (RK4) or initial step (RK45) [s]
    double t_final{60.0};        ///< [s]
    double capture_radius{1e-3}; ///< rho, |delta|, |gamma| all below this stops the run
    Frame frame{Frame::Polar};
    Integrator integrator{Integrator::RK45Adaptive};
    double abs_tol{1e-10};
    double rel_tol{1e-10};
    double dt_min{1e-9};         ///< RK45 step rejection floor
    double dt_max{0.5};
    /// When > 0, samples are recorded on this uniform time grid (the adaptive
    /// integrator lands on every grid point). Otherwise every accepted step
    /// is recorded.
    double output_dt{0.0};
    Steering steering{Steering::Feedback};

    /// Throws std::invalid_argument on inconsistent settings.
    void validate() const;
};

enum class SimStatus { Captured, HorizonReached, BoundaryStop };
std::string to_string(SimStatus s);

struct Trajectory {
    std::vector<double> times;
    std::vector<PolarState> polar;          ///< unwrapped angles
    std::vector<CartesianState> cartesian;  ///< heading unwrapped
    std::vector<ControlInput> inputs;
    std::vector<double> lyapunov;           ///< attached V; +inf outside its space
    SimStatus status{SimStatus::HorizonReached};
    std::string message;

    // Accumulated over every accepted step, not only the recorded samples.
    double path_length{0.0};
    double max_abs_omega{0.0};
    double min_boundary_distance{0.0};  ///< to the excluded set of the controller's space

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    /// Largest increase between consecutive recorded V samples (0 if none).
    [[nodiscard]] double max_lyapunov_increase() const noexcept;
};

/// Closed-loop polar dynamics with the v/rho cancellation applied:
/// (-k1 rho cos^2 gamma, (k1/2) sin 2gamma, -omega_tilde).
PolarRate rhs_polar(const ControllerSpec& spec, const PolarState& p);

/// Polar dynamics with omega = 0.
PolarRate rhs_polar_unsteered(const Gains& g, const PolarState& p) noexcept;

/// Unicycle kinematics under the feedback, evaluated through cart_to_polar.
/// Throws DomainError at the origin.
CartesianRate rhs_cartesian(const ControllerSpec& spec, const CartesianState& c);

/// Same as rhs_cartesian, but the polar angle is lifted to the branch nearest
/// `delta_ref` and gamma = delta - theta uses the unwrapped heading. Needed
/// for controllers that are not 2pi-periodic in delta (GloBa).
CartesianRate rhs_cartesian_lifted(const ControllerSpec& spec, const CartesianState& c,
                                   double delta_ref, Steering steering = Steering::Feedback);

/// Integrates from x0 (polar; angles taken as given, no wrapping) until
/// capture, t_final, or step collapse near an excluded set. The attached V
/// defaults to the sum composite of the controller's CLF.
/// Throws DomainError if x0 is outside the controller's domain.
Trajectory simulate(const ControllerSpec& spec, const PolarState& x0, const SimConfig& cfg);
Trajectory simulate(const ControllerSpec& spec, const PolarState& x0, const SimConfig& cfg,
                    const CompositeLyapunovFn& monitor);

}  // namespace polarpark
