#pragma once

#include "polarpark/controllers.hpp"
#include "polarpark/geometry.hpp"
#include "polarpark/lyapunov.hpp"
#include "polarpark/sim.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace polarpark {

/// Outcome of one grid/sample certification. Evidence on a finite set of
/// points, not a proof.
///
/// `worst_margin` is the largest value of the check's violation quantity over
/// the domain; the check passes when it is below `tolerance` (or equal to it,
/// for non-strict checks).
struct CertReport {
    std::string check;
    nlohmann::json grid;            ///< domain description: ranges, counts, seeds
    nlohmann::json gains;           ///< gain set(s) used, or null
    std::vector<double> worst_point;
    double worst_margin{0.0};
    double tolerance{0.0};
    bool strict{false};
    bool pass{false};
    std::string notes;

    /// Recomputes `pass` from margin and tolerance.
    void settle() noexcept;
};

void to_json(nlohmann::json& j, const CertReport& r);
void from_json(const nlohmann::json& j, CertReport& r);
nlohmann::json gains_to_json(const Gains& g);

// Tolerance ladder.
inline constexpr double kEqualityTol = 1e-10;
inline constexpr double kFiniteDifferenceTol = 1e-5;
inline constexpr double kInequalitySlack = 1e-12;
inline constexpr double kBolsaBoundSlack = 1e-9;

/// Sampling box for (rho, delta, gamma). Barriered angles are drawn from
/// (-pi + barrier_margin, pi - barrier_margin); unbounded ones from
/// [-angle_bound, angle_bound].
struct SampleDomain {
    double rho_max{10.0};
    double angle_bound{10.0};
    double barrier_margin{0.01};
};

nlohmann::json to_json(const SampleDomain& d, StateSpace space);

/// Uniform random states in the space restricted to the domain; deterministic
/// for a given seed. The origin is never produced.
std::vector<PolarState> sample_states(StateSpace space, std::size_t n, std::uint64_t seed,
                                      const SampleDomain& domain = {});

/// Tensor grid over the angular part, endpoints included, origin removed.
std::vector<std::pair<double, double>> angular_grid(StateSpace space, std::size_t n_delta,
                                                    std::size_t n_gamma,
                                                    const SampleDomain& domain = {});

/// Random gain sets with k1 k3 >= k2^2 (k3 drawn as k2^2/k1 times a factor in [1, 4]).
std::vector<Gains> random_valid_gains(std::size_t n, std::uint64_t seed);

/// 1 - k cos g (1 + cos g) <= 2 (1 + k) tan^2(g/2). Throws std::invalid_argument
/// when any k < 1 or any |gamma| >= pi.
CertReport check_lemma1(const std::vector<double>& k_grid, const std::vector<double>& gamma_grid);

/// Backstepping closed-form derivative vs. the chain-rule derivative, relative
/// error max(1, |closed form|)-scaled, against kEqualityTol.
CertReport check_vdot_identity(const LyapunovFn& fn, const std::vector<std::pair<double, double>>& points);

/// V_dg' < 0 at every non-origin point.
CertReport check_strict_decrease(const LyapunovFn& fn, const std::vector<std::pair<double, double>>& points);

/// Exact BoLSA derivative against the selected bound, with kBolsaBoundSlack.
CertReport check_bolsa_bound(const Gains& gains, BolsaBoundVariant variant,
                             const std::vector<std::pair<double, double>>& points);

/// CLF item (2): with v/rho = k1 cos gamma and the steering law's omega,
/// [-V_rho rho cos g + (V_delta + V_gamma) sin g] v/rho - V_gamma omega < 0.
CertReport check_clf(const CompositeLyapunovFn& fn, const ControllerSpec& spec,
                     const std::vector<PolarState>& samples);
/// Same with an arbitrary residual steering law (omega = (k1/2) sin 2g + steering).
CertReport check_clf(const CompositeLyapunovFn& fn, const Gains& gains, const SteeringFn& steering,
                     const std::vector<PolarState>& samples, const std::string& label);

/// Compositor admissibility plus composite decrease along the closed loop
/// of `fn`'s controller on the samples.
CertReport check_proposition1(const Compositor& comp, const LyapunovFn& fn,
                              const std::vector<PolarState>& samples);

/// Decay surrogate: final metric below 1e-3 and attached V non-increasing
/// (increase at most 1e-8). Throws DomainError if the trajectory leaves the space.
CertReport check_kl_decay(const Trajectory& traj, StateSpace space);

/// Analytic vs. central finite differences (step 1e-6). The error is the
/// Euclidean norm of the difference over max(1, |fd gradient|).
CertReport check_gradient(const LyapunovFn& fn, const std::vector<std::pair<double, double>>& points,
                          double tol = kFiniteDifferenceTol);
CertReport check_gradient(const CompositeLyapunovFn& fn, const std::vector<PolarState>& samples,
                          double tol = kFiniteDifferenceTol);

/// Selectors: all, lemma1, clf, prop1, kl, gradient, decrease.
bool is_known_suite(const std::string& selector);
std::vector<CertReport> run_battery(const std::string& selector, std::uint64_t seed = 1);

}  // namespace polarpark
