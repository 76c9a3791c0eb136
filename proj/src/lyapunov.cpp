#include "polarpark/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace polarpark {

LyapunovFn::LyapunovFn(ControllerKind kind, Gains gains) : kind_(kind), gains_(gains) {
    const auto positive = [](double k) { return std::isfinite(k) && k > 0.0; };
    if (!positive(gains.k1) || !positive(gains.k2) || !positive(gains.k3) || !positive(gains.k4)) {
        throw std::invalid_argument("Lyapunov function gains must be finite and > 0");
    }
}

double LyapunovFn::q() const noexcept { return std::sqrt(gains_.k1 / gains_.k3); }

double LyapunovFn::bagal_a() const noexcept {
    if (kind_ != ControllerKind::BAgAl) return 0.0;
    const double qq = q();
    const double num = std::max(gains_.k1 * qq, 2.0 * std::sqrt(gains_.k1 * gains_.k2));
    return num / (3.0 * gains_.k2 * qq * qq);
}

bool LyapunovFn::defined_at(double delta, double gamma) const noexcept {
    return contains_angles(space(), delta, gamma);
}

void LyapunovFn::require_defined(double delta, double gamma) const {
    if (!defined_at(delta, gamma)) {
        throw DomainError("barrier blow-up: (delta, gamma) outside the open space of the " +
                          to_string(kind_) + " CLF");
    }
}

ControllerSpec LyapunovFn::controller() const {
    return ControllerSpec(kind_, gains_, GainCheck::PositiveOnly);
}

double LyapunovFn::value(double delta, double gamma) const {
    require_defined(delta, gamma);
    const Gains& g = gains_;
    const double qq = q();
    switch (kind_) {
        case ControllerKind::GloBa:
        case ControllerKind::BarFli: {
            const BacksteppingAux a = backstepping_aux(kind_, g, delta, gamma);
            return a.Delta * a.Delta + qq * qq * a.z * a.z;
        }
        case ControllerKind::BoLSA: {
            const double t = std::tan(gamma / 2.0);
            const double U = delta * delta + 4.0 * qq * qq * t * t;
            const double w = delta + 2.0 * qq * t;
            return g.k3 * (1.0 + (2.0 * qq * qq + U) / (2.0 * qq * g.k2)) * U + w * w;
        }
        case ControllerKind::BAgAl: {
            const double s = std::tan(delta / 2.0);
            const double t = std::tan(gamma / 2.0);
            const double U = s * s + qq * qq * t * t;
            const double w = s + qq * t;
            return bagal_a() * (std::pow(1.0 + U, 3) - 1.0) + w * w;
        }
    }
    return 0.0;
}

AngularGradient LyapunovFn::gradient(double delta, double gamma) const {
    require_defined(delta, gamma);
    const Gains& g = gains_;
    const double qq = q();
    AngularGradient grad;
    switch (kind_) {
        case ControllerKind::GloBa:
        case ControllerKind::BarFli: {
            const BacksteppingAux a = backstepping_aux(kind_, g, delta, gamma);
            const double dz_ddelta =
                g.k2 * a.dDelta_ddelta / (1.0 + 4.0 * g.k2 * g.k2 * a.Delta * a.Delta);
            grad.d_delta = 2.0 * a.Delta * a.dDelta_ddelta + 2.0 * qq * qq * a.z * dz_ddelta;
            grad.d_gamma = 2.0 * qq * qq * a.z;
            break;
        }
        case ControllerKind::BoLSA: {
            const double t = std::tan(gamma / 2.0);
            const double sec2 = 1.0 + t * t;  // 2 d tan(gamma/2) / d gamma
            const double U = delta * delta + 4.0 * qq * qq * t * t;
            const double w = delta + 2.0 * qq * t;
            const double dV_dU = g.k3 + g.k3 * (qq * qq + U) / (qq * g.k2);
            grad.d_delta = dV_dU * 2.0 * delta + 2.0 * w;
            grad.d_gamma = dV_dU * 4.0 * qq * qq * t * sec2 + 2.0 * w * qq * sec2;
            break;
        }
        case ControllerKind::BAgAl: {
            const double s = std::tan(delta / 2.0);
            const double t = std::tan(gamma / 2.0);
            const double sec2d = 1.0 + s * s;
            const double sec2g = 1.0 + t * t;
            const double U = s * s + qq * qq * t * t;
            const double w = s + qq * t;
            const double dV_dU = 3.0 * bagal_a() * (1.0 + U) * (1.0 + U);
            grad.d_delta = dV_dU * s * sec2d + w * sec2d;
            grad.d_gamma = dV_dU * qq * qq * t * sec2g + w * qq * sec2g;
            break;
        }
    }
    return grad;
}

double LyapunovFn::v_dot(double delta, double gamma) const {
    if (!is_backstepping(kind_)) return v_dot_chain_rule(delta, gamma);
    require_defined(delta, gamma);
    const Gains& g = gains_;
    const double qq = q();
    const BacksteppingAux a = backstepping_aux(kind_, g, delta, gamma);
    return -2.0 * g.k1 * g.k2 * a.Delta * a.Delta * a.dDelta_ddelta /
               std::sqrt(1.0 + 4.0 * g.k2 * g.k2 * a.Delta * a.Delta) -
           2.0 * g.k4 * qq * qq * a.z * a.z;
}

double LyapunovFn::v_dot_chain_rule(double delta, double gamma) const {
    const ControllerSpec spec = controller();
    return v_dot_chain_rule(delta, gamma,
                            [&spec](double d, double gm) { return omega_tilde(spec, d, gm); });
}

double LyapunovFn::v_dot_chain_rule(double delta, double gamma, const SteeringFn& steering) const {
    const AngularGradient grad = gradient(delta, gamma);
    return grad.d_delta * 0.5 * gains_.k1 * std::sin(2.0 * gamma) -
           grad.d_gamma * steering(delta, gamma);
}

double bolsa_vdot_bound(const Gains& g, double delta, double gamma, BolsaBoundVariant variant) {
    if (!(std::abs(gamma) < kPi)) {
        throw DomainError("BoLSA bound undefined at |gamma| >= pi");
    }
    const double qq = std::sqrt(g.k1 / g.k3);
    const double t = std::tan(gamma / 2.0);
    const double v0 = 4.0 * t * t;
    const double c = variant == BolsaBoundVariant::Displayed ? 1.0 : 2.0;
    const double w = delta + c * qq * t;
    return -2.0 * g.k1 * g.k2 * v0 - 1.5 * g.k2 * w * w - 2.0 * g.k1 * qq * v0 * v0;
}

// --- Compositors -------------------------------------------------------------

CompositorValue Compositor::evaluate(double r, double s) const {
    switch (form) {
        case CompositorForm::Sum: return {r + s, 1.0, 1.0};
        case CompositorForm::LogSum: return {std::log1p(r) + s, 1.0 / (1.0 + r), 1.0};
        case CompositorForm::ExpProduct: {
            const double e = std::exp(s);
            return {(1.0 + r) * e - 1.0, e, (1.0 + r) * e};
        }
        case CompositorForm::Custom:
            if (!custom) throw std::invalid_argument("custom compositor has no function");
            return custom(r, s);
    }
    return {};
}

std::string Compositor::label() const {
    const std::string base = form == CompositorForm::Custom && !name.empty() ? name : to_string(form);
    return base + "/" + to_string(order);
}

Compositor Compositor::sum(CompositorOrder order) { return {CompositorForm::Sum, order, {}, "sum"}; }
Compositor Compositor::log_sum(CompositorOrder order) {
    return {CompositorForm::LogSum, order, {}, "log_sum"};
}
Compositor Compositor::exp_product(CompositorOrder order) {
    return {CompositorForm::ExpProduct, order, {}, "exp_product"};
}
Compositor Compositor::make_custom(std::string name, std::function<CompositorValue(double, double)> fn,
                                   CompositorOrder order) {
    return {CompositorForm::Custom, order, std::move(fn), std::move(name)};
}

std::string to_string(CompositorForm form) {
    switch (form) {
        case CompositorForm::Sum: return "sum";
        case CompositorForm::LogSum: return "log_sum";
        case CompositorForm::ExpProduct: return "exp_product";
        case CompositorForm::Custom: return "custom";
    }
    return "?";
}

std::string to_string(CompositorOrder order) {
    return order == CompositorOrder::RhoFirst ? "rho_first" : "vdg_first";
}

CompositorForm compositor_form_from_string(const std::string& name) {
    if (name == "sum") return CompositorForm::Sum;
    if (name == "log_sum") return CompositorForm::LogSum;
    if (name == "exp_product") return CompositorForm::ExpProduct;
    throw std::invalid_argument("unknown compositor form '" + name + "'");
}

CompositorOrder compositor_order_from_string(const std::string& name) {
    if (name == "rho_first") return CompositorOrder::RhoFirst;
    if (name == "vdg_first") return CompositorOrder::VdgFirst;
    throw std::invalid_argument("unknown compositor order '" + name + "'");
}

std::optional<CompositorViolation> find_compositor_violation(const Compositor& comp) {
    std::vector<double> grid{0.0};
    for (int i = 0; i <= 40; ++i) grid.push_back(std::pow(10.0, -6.0 + 0.25 * i));

    const auto witness = [](int cond, double r, double s, const std::string& what) {
        std::ostringstream msg;
        msg << "compositor condition " << cond << " fails at (r, s) = (" << r << ", " << s
            << "): " << what;
        return CompositorViolation{cond, r, s, msg.str()};
    };

    const CompositorValue origin = comp.evaluate(0.0, 0.0);
    if (!(std::abs(origin.value) <= 1e-12)) return witness(1, 0.0, 0.0, "W(0,0) != 0");

    for (double r : grid) {
        for (double s : grid) {
            if (r == 0.0 && s == 0.0) continue;
            if (!(comp.evaluate(r, s).value > 0.0)) return witness(1, r, s, "W not positive");
        }
    }

    // Radial unboundedness: the minimum over directions r + s = R must keep
    // growing and eventually leave any bounded level.
    std::vector<double> minima;
    for (double R : {1e2, 1e4, 1e6, 1e8}) {
        double m = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= 16; ++k) {
            const double lam = k / 16.0;
            m = std::min(m, comp.evaluate(lam * R, (1.0 - lam) * R).value);
        }
        minima.push_back(m);
    }
    for (std::size_t i = 1; i < minima.size(); ++i) {
        if (!(minima[i] > minima[i - 1] || minima[i] == std::numeric_limits<double>::infinity())) {
            return witness(2, 0.0, std::pow(10.0, 2.0 * (i + 1)), "W not growing along r + s");
        }
    }
    if (!(minima.back() >= 2.0 * minima.front())) {
        return witness(2, 0.0, 1e8, "W appears bounded along r + s");
    }

    for (double r : grid) {
        for (double s : grid) {
            if (r == 0.0 && s == 0.0) continue;
            const CompositorValue w = comp.evaluate(r, s);
            if (!(w.d_r > 0.0)) return witness(3, r, s, "dW/dr not positive");
            if (!(w.d_s > 0.0)) return witness(3, r, s, "dW/ds not positive");
        }
    }
    return std::nullopt;
}

CompositeLyapunovFn::CompositeLyapunovFn(Compositor comp, LyapunovFn inner)
    : comp_(std::move(comp)), inner_(std::move(inner)) {
    if (comp_.form == CompositorForm::Custom) {
        if (const auto bad = find_compositor_violation(comp_)) {
            throw std::invalid_argument(bad->message);
        }
    }
}

std::pair<double, double> CompositeLyapunovFn::rs(double rho2, double vdg) const noexcept {
    return comp_.order == CompositorOrder::RhoFirst ? std::pair{rho2, vdg} : std::pair{vdg, rho2};
}

double CompositeLyapunovFn::value(const PolarState& p) const {
    const auto [r, s] = rs(p.rho * p.rho, inner_.value(p.delta, p.gamma));
    return comp_.evaluate(r, s).value;
}

std::array<double, 3> CompositeLyapunovFn::gradient(const PolarState& p) const {
    const auto [r, s] = rs(p.rho * p.rho, inner_.value(p.delta, p.gamma));
    const CompositorValue w = comp_.evaluate(r, s);
    const bool rho_first = comp_.order == CompositorOrder::RhoFirst;
    const double dW_drho2 = rho_first ? w.d_r : w.d_s;
    const double dW_dvdg = rho_first ? w.d_s : w.d_r;
    const AngularGradient ag = inner_.gradient(p.delta, p.gamma);
    return {dW_drho2 * 2.0 * p.rho, dW_dvdg * ag.d_delta, dW_dvdg * ag.d_gamma};
}

double CompositeLyapunovFn::v_dot(const PolarState& p) const {
    const ControllerSpec spec = inner_.controller();
    return v_dot(p, [&spec](double d, double g) { return omega_tilde(spec, d, g); });
}

double CompositeLyapunovFn::v_dot(const PolarState& p, const SteeringFn& steering) const {
    const double k1 = inner_.gains().k1;
    const auto grad = gradient(p);
    const double c = std::cos(p.gamma);
    return -grad[0] * k1 * p.rho * c * c + grad[1] * 0.5 * k1 * std::sin(2.0 * p.gamma) -
           grad[2] * steering(p.delta, p.gamma);
}

}  // namespace polarpark
