#pragma once

#include "polarpark/controllers.hpp"
#include "polarpark/geometry.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>

namespace polarpark {

/// Partial derivatives of V_dg with respect to (delta, gamma).
struct AngularGradient {
    double d_delta{0.0};
    double d_gamma{0.0};
};

/// Residual steering law omega_tilde(delta, gamma). Lets checks run against
/// laws other than the designed one (e.g. mutated controllers).
using SteeringFn = std::function<double(double delta, double gamma)>;

/// Strict (or barrier) CLF V_dg(delta, gamma) paired with one steering law.
///
///  - GloBa / BarFli: V = Delta^2 + q^2 z^2, q = sqrt(k1/k3).
///  - BoLSA: V = k3 (1 + (2q^2 + U)/(2 q k2)) U + (delta + 2q tan(gamma/2))^2,
///           U = delta^2 + 4 q^2 tan^2(gamma/2).
///  - BAgAl: V = a((1+U)^3 - 1) + (tan(delta/2) + q tan(gamma/2))^2,
///           U = tan^2(delta/2) + q^2 tan^2(gamma/2),
///           a = max(k1 q, 2 sqrt(k1 k2)) / (3 k2 q^2).
///
/// All evaluations throw DomainError("barrier blow-up ...") outside the
/// open angular space of the controller.
class LyapunovFn {
public:
    LyapunovFn(ControllerKind kind, Gains gains);
    explicit LyapunovFn(const ControllerSpec& spec) : LyapunovFn(spec.kind(), spec.gains()) {}

    [[nodiscard]] ControllerKind kind() const noexcept { return kind_; }
    [[nodiscard]] const Gains& gains() const noexcept { return gains_; }
    [[nodiscard]] StateSpace space() const noexcept { return state_space_of(kind_); }
    /// q = sqrt(k1 / k3).
    [[nodiscard]] double q() const noexcept;
    /// BAgAl scaling constant a; zero for other kinds.
    [[nodiscard]] double bagal_a() const noexcept;

    [[nodiscard]] bool defined_at(double delta, double gamma) const noexcept;

    [[nodiscard]] double value(double delta, double gamma) const;
    [[nodiscard]] AngularGradient gradient(double delta, double gamma) const;

    /// Time derivative along the designed closed loop. Backstepping kinds use
    /// the closed-form identity
    ///   -2 k1 k2 Delta^2 Delta' / sqrt(1 + 4 k2^2 Delta^2) - 2 k4 q^2 z^2;
    /// passivity kinds use the chain rule with analytic partials.
    [[nodiscard]] double v_dot(double delta, double gamma) const;

    /// (dV/d delta) (k1/2) sin 2gamma - (dV/d gamma) omega_tilde, with
    /// omega_tilde either the designed law or `steering`.
    [[nodiscard]] double v_dot_chain_rule(double delta, double gamma) const;
    [[nodiscard]] double v_dot_chain_rule(double delta, double gamma, const SteeringFn& steering) const;

    /// The designed steering law for this CLF's controller.
    [[nodiscard]] ControllerSpec controller() const;

private:
    void require_defined(double delta, double gamma) const;

    ControllerKind kind_;
    Gains gains_;
};

/// Which square enters the BoLSA derivative bound: (delta + q tan(gamma/2))^2
/// (Displayed) or (delta + 2q tan(gamma/2))^2 (TwoQ).
enum class BolsaBoundVariant { Displayed, TwoQ };

/// Right-hand side of the BoLSA derivative bound,
///   -2 k1 k2 V0 - (3/2) k2 (delta + c q tan(gamma/2))^2 - 2 k1 q V0^2,
/// with V0 = 4 tan^2(gamma/2) and c = 1 (Displayed) or 2 (TwoQ).
double bolsa_vdot_bound(const Gains& g, double delta, double gamma, BolsaBoundVariant variant);

// --- Composite CLFs ----------------------------------------------------------

struct CompositorValue {
    double value{0.0};
    double d_r{0.0};
    double d_s{0.0};
};

enum class CompositorForm { Sum, LogSum, ExpProduct, Custom };
enum class CompositorOrder { RhoFirst, VdgFirst };

/// Outer function W(r, s) of a composite V = W(rho^2, V_dg) (RhoFirst) or
/// V = W(V_dg, rho^2) (VdgFirst).
struct Compositor {
    CompositorForm form{CompositorForm::Sum};
    CompositorOrder order{CompositorOrder::RhoFirst};
    /// Only used when form == Custom; must return the value and both partials.
    std::function<CompositorValue(double r, double s)> custom;
    std::string name;

    [[nodiscard]] CompositorValue evaluate(double r, double s) const;
    [[nodiscard]] std::string label() const;

    static Compositor sum(CompositorOrder order = CompositorOrder::RhoFirst);
    static Compositor log_sum(CompositorOrder order = CompositorOrder::RhoFirst);
    static Compositor exp_product(CompositorOrder order = CompositorOrder::RhoFirst);
    static Compositor make_custom(std::string name, std::function<CompositorValue(double, double)> fn,
                                  CompositorOrder order = CompositorOrder::RhoFirst);
};

std::string to_string(CompositorForm form);
std::string to_string(CompositorOrder order);
CompositorForm compositor_form_from_string(const std::string& name);
CompositorOrder compositor_order_from_string(const std::string& name);

/// First violated admissibility condition of a compositor, if any.
struct CompositorViolation {
    int condition{0};  ///< 1: positivity, 2: radial unboundedness, 3: positive partials
    double r{0.0};
    double s{0.0};
    std::string message;
};

/// Checks W(0,0)=0, W>0 and both partials > 0 off the origin on a log-spaced
/// grid over [0, 1e4]^2, plus a radial unboundedness probe out to r+s = 1e8.
std::optional<CompositorViolation> find_compositor_violation(const Compositor& comp);

/// V(rho, delta, gamma) built from a compositor and an angular CLF.
class CompositeLyapunovFn {
public:
    /// Throws std::invalid_argument (with the witness point) when a custom
    /// compositor fails the admissibility check.
    CompositeLyapunovFn(Compositor comp, LyapunovFn inner);

    [[nodiscard]] const Compositor& compositor() const noexcept { return comp_; }
    [[nodiscard]] const LyapunovFn& inner() const noexcept { return inner_; }
    [[nodiscard]] StateSpace space() const noexcept { return inner_.space(); }

    [[nodiscard]] double value(const PolarState& p) const;
    /// (dV/d rho, dV/d delta, dV/d gamma).
    [[nodiscard]] std::array<double, 3> gradient(const PolarState& p) const;

    /// Closed-loop derivative with rho' = -k1 rho cos^2 gamma,
    /// delta' = (k1/2) sin 2gamma and gamma' = -omega_tilde.
    [[nodiscard]] double v_dot(const PolarState& p) const;
    [[nodiscard]] double v_dot(const PolarState& p, const SteeringFn& steering) const;

private:
    [[nodiscard]] std::pair<double, double> rs(double rho2, double vdg) const noexcept;

    Compositor comp_;
    LyapunovFn inner_;
};

inline CompositeLyapunovFn composite(Compositor comp, LyapunovFn inner) {
    return CompositeLyapunovFn(std::move(comp), std::move(inner));
}

}  // namespace polarpark
