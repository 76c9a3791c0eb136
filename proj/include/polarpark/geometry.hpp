#pragma once

#include <numbers>
#include <stdexcept>
#include <string>

namespace polarpark {

inline constexpr double kPi = std::numbers::pi;

/// Raised when a state lies outside the domain where an expression is defined
/// (polar chart at the origin, barrier boundaries, undefined steering).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Vehicle pose in the plane. The target pose is the origin with zero heading.
struct CartesianState {
    double x{0.0};      ///< [m]
    double y{0.0};      ///< [m]
    double theta{0.0};  ///< heading [rad]
};

/// Polar working coordinates of the unicycle.
struct PolarState {
    double rho{0.0};    ///< distance to target [m]
    double delta{0.0};  ///< polar angle, atan2(y, x) + pi [rad]
    double gamma{0.0};  ///< line-of-sight angle, delta - theta [rad]
};

/// Open state spaces: S = {rho>0} x R^2, S1 adds |delta|<pi, S2 adds
/// |gamma|<pi, S3 adds both.
enum class StateSpace { S, S1, S2, S3 };

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a) noexcept;

PolarState cart_to_polar(const CartesianState& c);
CartesianState polar_to_cart(const PolarState& p);

[[nodiscard]] constexpr bool bounds_delta(StateSpace s) noexcept {
    return s == StateSpace::S1 || s == StateSpace::S3;
}
[[nodiscard]] constexpr bool bounds_gamma(StateSpace s) noexcept {
    return s == StateSpace::S2 || s == StateSpace::S3;
}

/// Angular part of the membership test, i.e. (delta, gamma) in T, T1, T2 or T3.
bool contains_angles(StateSpace s, double delta, double gamma) noexcept;

/// Full membership test including rho > 0.
bool contains(StateSpace s, const PolarState& p) noexcept;

/// State-space metric. Barriered coordinates contribute 2 tan(|.|/2).
/// Accepts rho = 0 (closure of the space) so the origin has metric 0.
/// Throws DomainError on or beyond a barrier.
double metric(StateSpace s, const PolarState& p);

/// Distance from (delta, gamma) to the excluded boundary of the space, or
/// +inf for S.
double boundary_distance(StateSpace s, double delta, double gamma) noexcept;

std::string to_string(StateSpace s);
StateSpace state_space_from_string(const std::string& name);

}  // namespace polarpark
