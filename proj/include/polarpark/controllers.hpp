#pragma once

#include "polarpark/geometry.hpp"

#include <string>

namespace polarpark {

/// The four steering laws for the (delta, gamma) subsystem.
///  - GloBa:  global backstepping, Delta = delta, space S.
///  - BarFli: backstepping with delta barrier, Delta = 2 tan(delta/2), space S1.
///  - BoLSA:  passivity-based, bounded in the line-of-sight angle, space S2.
///  - BAgAl:  passivity-based, both angles bounded, space S3.
enum class ControllerKind { GloBa, BarFli, BoLSA, BAgAl };

std::string to_string(ControllerKind kind);
ControllerKind controller_kind_from_string(const std::string& name);

/// Open state space on which the closed loop (and its CLF) is defined.
StateSpace state_space_of(ControllerKind kind) noexcept;

[[nodiscard]] constexpr bool is_backstepping(ControllerKind kind) noexcept {
    return kind == ControllerKind::GloBa || kind == ControllerKind::BarFli;
}

struct Gains {
    double k1{1.0};
    double k2{1.0};
    double k3{1.0};
    double k4{1.0};
};

/// How strictly gain hypotheses are enforced when building a ControllerSpec.
enum class GainCheck {
    /// All gains > 0, and k1*k3 >= k2^2 for BoLSA / BAgAl.
    Strict,
    /// Positivity only. Used to reproduce published runs whose gains fall
    /// outside the sufficient condition; such specs report certified() == false.
    PositiveOnly,
};

class ControllerSpec {
public:
    /// Throws std::invalid_argument if the gains are not admissible for `kind`.
    ControllerSpec(ControllerKind kind, Gains gains, GainCheck check = GainCheck::Strict);

    [[nodiscard]] ControllerKind kind() const noexcept { return kind_; }
    [[nodiscard]] const Gains& gains() const noexcept { return gains_; }
    [[nodiscard]] StateSpace space() const noexcept { return state_space_of(kind_); }
    /// True when the gains satisfy every hypothesis of the strict decrease result.
    [[nodiscard]] bool certified() const noexcept { return certified_; }

private:
    ControllerKind kind_;
    Gains gains_;
    bool certified_;
};

/// Whether k1 k3 >= k2^2 (the passivity designs' gain condition).
bool satisfies_gain_condition(const Gains& g) noexcept;

struct ControlInput {
    double v{0.0};            ///< forward velocity [m/s]
    double omega{0.0};        ///< angular velocity [rad/s]
    double omega_tilde{0.0};  ///< residual steering after cancelling (k1/2) sin 2 gamma
};

/// Delta(delta) and its derivative for the backstepping designs.
struct DeltaShape {
    double value{0.0};
    double slope{1.0};
};

/// Quantities of the backstepping change of variables at one state.
struct BacksteppingAux {
    double Delta{0.0};
    double dDelta_ddelta{1.0};
    double z{0.0};    ///< gamma + atan(2 k2 Delta) / 2
    double psi{1.0};  ///< interconnection coefficient
};

/// v = k1 rho cos(gamma). Defined everywhere, including rho = 0.
double forward_velocity(const PolarState& p, const Gains& g) noexcept;

/// GloBa: (delta, 1). BarFli: (2 tan(delta/2), 1 + tan^2(delta/2)).
/// Passivity kinds have no shaping and are rejected.
DeltaShape delta_shaping(ControllerKind kind, double delta);

/// Below this |z| psi switches to its Taylor expansion.
inline constexpr double kPsiSeriesThreshold = 1e-4;

/// psi(z, gamma) = (sin(2z - 2 gamma) + sin(2 gamma)) / 2z, evaluated in the
/// expanded form that only needs z, k2 and Delta (gamma is implied by
/// z = gamma + atan(2 k2 Delta)/2). Continuous at z = 0 with value
/// 1/sqrt(1 + 4 k2^2 Delta^2) = cos(2 gamma).
double psi(double z, double k2, double Delta) noexcept;

BacksteppingAux backstepping_aux(ControllerKind kind, const Gains& g, double delta, double gamma);

/// Designed residual steering omega_tilde(delta, gamma).
/// Throws DomainError for BarFli / BAgAl when |delta| >= pi.
double omega_tilde(const ControllerSpec& spec, double delta, double gamma);

/// Full feedback: v from forward_velocity, omega = (k1/2) sin 2 gamma + omega_tilde.
ControlInput control(const ControllerSpec& spec, const PolarState& p);

/// True when the steering law is finite at (delta, gamma). BoLSA's and BAgAl's
/// gamma factor extends continuously through |gamma| = pi, so only the delta
/// barrier of BarFli / BAgAl matters here.
bool steering_defined(ControllerKind kind, double delta, double gamma) noexcept;

}  // namespace polarpark
