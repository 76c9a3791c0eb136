#pragma once

// Test-only reference formulas, written from the defining expressions and
// kept independent of the library's evaluation paths.

#include <cmath>

namespace oracle {

inline constexpr double pi = 3.14159265358979323846;

/// psi in its defining form (sin(2z - 2 gamma) + sin(2 gamma)) / 2z.
inline double psi_first_form(double z, double gamma) {
    return (std::sin(2.0 * z - 2.0 * gamma) + std::sin(2.0 * gamma)) / (2.0 * z);
}

/// Backstepping steering with psi evaluated in its defining form.
inline double backstepping_omega_tilde(bool barrier, double k1, double k2, double k3, double k4, double delta,
                                       double gamma) {
    const double D = barrier ? 2.0 * std::tan(delta / 2.0) : delta;
    const double Dp = barrier ? 1.0 / std::pow(std::cos(delta / 2.0), 2) : 1.0;
    const double z = gamma + 0.5 * std::atan(2.0 * k2 * D);
    const double ps = psi_first_form(z, gamma);
    return k4 * z + Dp * (k1 * k2 * std::sin(2.0 * gamma) / (2.0 * (1.0 + 4.0 * k2 * k2 * D * D)) + k3 * ps * D);
}

/// BoLSA CLF assembled from its proof ingredients: k3 U + Pi0 + (k3/k2) q U + k3/(2 q k2) U^2.
inline double bolsa_v_proof_form(double k1, double k2, double k3, double delta, double gamma) {
    const double q = std::sqrt(k1 / k3);
    const double t = std::tan(gamma / 2.0);
    const double U = delta * delta + q * q * 4.0 * t * t;
    const double z = delta + 2.0 * q * t;
    return k3 * U + z * z + k3 / k2 * q * U + k3 / (2.0 * q * k2) * U * U;
}

/// Cartesian velocity pushed through the polar transformation's Jacobian.
struct PolarFromCartesian {
    double rho_dot, delta_dot, gamma_dot;
};
inline PolarFromCartesian jacobian_push(double x, double y, double xd, double yd, double thetad) {
    const double r2 = x * x + y * y;
    const double r = std::sqrt(r2);
    const double rho_dot = (x * xd + y * yd) / r;
    const double delta_dot = (x * yd - y * xd) / r2;
    return {rho_dot, delta_dot, delta_dot - thetad};
}

}  // namespace oracle
