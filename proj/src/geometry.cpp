#include "polarpark/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace polarpark {

double wrap_angle(double a) noexcept {
    constexpr double two_pi = 2.0 * kPi;
    double w = a - two_pi * std::round(a / two_pi);
    if (w <= -kPi) w += two_pi;
    if (w > kPi) w -= two_pi;
    return w;
}

PolarState cart_to_polar(const CartesianState& c) {
    if (c.x == 0.0 && c.y == 0.0) {
        throw DomainError("polar chart undefined at rho=0");
    }
    PolarState p;
    p.rho = std::hypot(c.x, c.y);
    p.delta = wrap_angle(std::atan2(c.y, c.x) + kPi);
    p.gamma = wrap_angle(p.delta - c.theta);
    return p;
}

CartesianState polar_to_cart(const PolarState& p) {
    if (!(p.rho > 0.0)) {
        throw DomainError("polar_to_cart requires rho > 0");
    }
    // atan2(y, x) = delta - pi, so (x, y) = -rho (cos delta, sin delta).
    return {-p.rho * std::cos(p.delta), -p.rho * std::sin(p.delta), p.delta - p.gamma};
}

bool contains_angles(StateSpace s, double delta, double gamma) noexcept {
    if (!std::isfinite(delta) || !std::isfinite(gamma)) return false;
    if (bounds_delta(s) && !(std::abs(delta) < kPi)) return false;
    if (bounds_gamma(s) && !(std::abs(gamma) < kPi)) return false;
    return true;
}

bool contains(StateSpace s, const PolarState& p) noexcept {
    return p.rho > 0.0 && std::isfinite(p.rho) && contains_angles(s, p.delta, p.gamma);
}

namespace {

double barrier_term(double angle) {
    if (!(std::abs(angle) < kPi)) {
        throw DomainError("metric infinite: angle on or beyond the barrier |.|=pi");
    }
    return 2.0 * std::tan(std::abs(angle) / 2.0);
}

}  // namespace

double metric(StateSpace s, const PolarState& p) {
    if (!(p.rho >= 0.0) || !std::isfinite(p.rho)) {
        throw DomainError("metric requires finite rho >= 0");
    }
    const double d = bounds_delta(s) ? barrier_term(p.delta) : std::abs(p.delta);
    const double g = bounds_gamma(s) ? barrier_term(p.gamma) : std::abs(p.gamma);
    return p.rho + d + g;
}

double boundary_distance(StateSpace s, double delta, double gamma) noexcept {
    double d = std::numeric_limits<double>::infinity();
    if (bounds_delta(s)) d = std::min(d, kPi - std::abs(delta));
    if (bounds_gamma(s)) d = std::min(d, kPi - std::abs(gamma));
    return d;
}

std::string to_string(StateSpace s) {
    switch (s) {
        case StateSpace::S: return "S";
        case StateSpace::S1: return "S1";
        case StateSpace::S2: return "S2";
        case StateSpace::S3: return "S3";
    }
    return "?";
}

StateSpace state_space_from_string(const std::string& name) {
    if (name == "S") return StateSpace::S;
    if (name == "S1") return StateSpace::S1;
    if (name == "S2") return StateSpace::S2;
    if (name == "S3") return StateSpace::S3;
    throw std::invalid_argument("unknown state space '" + name + "'");
}

}  // namespace polarpark
