#include "polarpark/controllers.hpp"

#include <cmath>
#include <stdexcept>

namespace polarpark {

std::string to_string(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::GloBa: return "GloBa";
        case ControllerKind::BarFli: return "BarFli";
        case ControllerKind::BoLSA: return "BoLSA";
        case ControllerKind::BAgAl: return "BAgAl";
    }
    return "?";
}

ControllerKind controller_kind_from_string(const std::string& name) {
    if (name == "GloBa" || name == "globa") return ControllerKind::GloBa;
    if (name == "BarFli" || name == "BAR-FLi" || name == "barfli") return ControllerKind::BarFli;
    if (name == "BoLSA" || name == "bolsa") return ControllerKind::BoLSA;
    if (name == "BAgAl" || name == "bagal") return ControllerKind::BAgAl;
    throw std::invalid_argument("unknown controller '" + name + "'");
}

StateSpace state_space_of(ControllerKind kind) noexcept {
    switch (kind) {
        case ControllerKind::GloBa: return StateSpace::S;
        case ControllerKind::BarFli: return StateSpace::S1;
        case ControllerKind::BoLSA: return StateSpace::S2;
        case ControllerKind::BAgAl: return StateSpace::S3;
    }
    return StateSpace::S;
}

bool satisfies_gain_condition(const Gains& g) noexcept {
    return g.k1 * g.k3 >= g.k2 * g.k2;
}

ControllerSpec::ControllerSpec(ControllerKind kind, Gains gains, GainCheck check)
    : kind_(kind), gains_(gains), certified_(true) {
    const auto positive = [](double k) { return std::isfinite(k) && k > 0.0; };
    if (!positive(gains.k1) || !positive(gains.k2) || !positive(gains.k3) || !positive(gains.k4)) {
        throw std::invalid_argument("gains k1..k4 must be finite and > 0");
    }
    if (!is_backstepping(kind) && !satisfies_gain_condition(gains)) {
        if (check == GainCheck::Strict) {
            throw std::invalid_argument(to_string(kind) + " requires k1*k3 >= k2^2");
        }
        certified_ = false;
    }
}

double forward_velocity(const PolarState& p, const Gains& g) noexcept {
    return g.k1 * p.rho * std::cos(p.gamma);
}

DeltaShape delta_shaping(ControllerKind kind, double delta) {
    switch (kind) {
        case ControllerKind::GloBa: return {delta, 1.0};
        case ControllerKind::BarFli: {
            if (!(std::abs(delta) < kPi)) {
                throw DomainError("delta shaping outside T1: |delta| >= pi");
            }
            const double t = std::tan(delta / 2.0);
            return {2.0 * t, 1.0 + t * t};
        }
        default: throw std::invalid_argument("delta shaping applies to backstepping controllers only");
    }
}

double psi(double z, double k2, double Delta) noexcept {
    const double x = 2.0 * k2 * Delta;
    const double scale = 1.0 / std::sqrt(1.0 + x * x);
    double sinc2z;  // sin(2z) / 2z
    double vers;    // (1 - cos 2z) / 2z = sin^2(z) / z
    if (std::abs(z) > kPsiSeriesThreshold) {
        const double s = std::sin(z);
        sinc2z = std::sin(2.0 * z) / (2.0 * z);
        vers = s * s / z;
    } else {
        const double z2 = z * z;
        sinc2z = 1.0 - 2.0 * z2 / 3.0;
        vers = z * (1.0 - z2 / 3.0);
    }
    return scale * (sinc2z + x * vers);
}

BacksteppingAux backstepping_aux(ControllerKind kind, const Gains& g, double delta, double gamma) {
    const DeltaShape shape = delta_shaping(kind, delta);
    BacksteppingAux aux;
    aux.Delta = shape.value;
    aux.dDelta_ddelta = shape.slope;
    aux.z = gamma + 0.5 * std::atan(2.0 * g.k2 * shape.value);
    aux.psi = psi(aux.z, g.k2, shape.value);
    return aux;
}

namespace {

// cos(gamma) / (1 + tan^2(gamma/2))^2 written as cos(gamma) (1 + cos gamma)^2 / 4,
// which stays finite through |gamma| = pi.
double los_factor(double gamma) {
    const double c = std::cos(gamma);
    return c * (1.0 + c) * (1.0 + c) / 4.0;
}

}  // namespace

bool steering_defined(ControllerKind kind, double delta, double gamma) noexcept {
    if (!std::isfinite(delta) || !std::isfinite(gamma)) return false;
    if (kind == ControllerKind::BarFli || kind == ControllerKind::BAgAl) {
        return std::abs(delta) < kPi;
    }
    return true;
}

double omega_tilde(const ControllerSpec& spec, double delta, double gamma) {
    const Gains& g = spec.gains();
    if (!steering_defined(spec.kind(), delta, gamma)) {
        throw DomainError("steering undefined at |delta| >= pi for " + to_string(spec.kind()));
    }
    switch (spec.kind()) {
        case ControllerKind::GloBa:
        case ControllerKind::BarFli: {
            const BacksteppingAux a = backstepping_aux(spec.kind(), g, delta, gamma);
            const double feedforward =
                g.k1 * g.k2 * std::sin(2.0 * gamma) /
                (2.0 * (1.0 + 4.0 * g.k2 * g.k2 * a.Delta * a.Delta));
            return g.k4 * a.z + a.dDelta_ddelta * (feedforward + g.k3 * a.psi * a.Delta);
        }
        case ControllerKind::BoLSA:
            return g.k2 * std::sin(gamma) + g.k3 * los_factor(gamma) * delta;
        case ControllerKind::BAgAl: {
            const double s = std::tan(delta / 2.0);
            return g.k2 * std::sin(gamma) + 2.0 * g.k3 * los_factor(gamma) * (1.0 + s * s) * s;
        }
    }
    return 0.0;
}

ControlInput control(const ControllerSpec& spec, const PolarState& p) {
    ControlInput u;
    u.v = forward_velocity(p, spec.gains());
    u.omega_tilde = omega_tilde(spec, p.delta, p.gamma);
    u.omega = 0.5 * spec.gains().k1 * std::sin(2.0 * p.gamma) + u.omega_tilde;
    return u;
}

}  // namespace polarpark
