#include "polarpark/verify.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace polarpark {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// JSON has no inf/nan; encode them as strings so reports round-trip.
json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double parse_number(const json& j) {
    if (j.is_number()) return j.get<double>();
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw std::invalid_argument("bad number in report: " + s);
}

// Tracks the worst (largest) violation quantity and where it occurred.
struct Worst {
    double margin{-kInf};
    std::vector<double> point;

    void offer(double m, std::vector<double> p) {
        if (m > margin || std::isnan(m)) {
            if (std::isnan(margin)) return;
            margin = m;
            point = std::move(p);
        }
    }
};

CertReport make_report(std::string name, json grid, json gains, const Worst& w, double tol,
                       bool strict) {
    CertReport r;
    r.check = std::move(name);
    r.grid = std::move(grid);
    r.gains = std::move(gains);
    r.worst_margin = w.margin;
    r.worst_point = w.point;
    r.tolerance = tol;
    r.strict = strict;
    r.settle();
    return r;
}

json points_domain(const std::vector<std::pair<double, double>>& pts) {
    double dmin = kInf, dmax = -kInf, gmin = kInf, gmax = -kInf;
    for (const auto& [d, g] : pts) {
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
        gmin = std::min(gmin, g);
        gmax = std::max(gmax, g);
    }
    return json{{"points", pts.size()},
                {"delta", {number(dmin), number(dmax)}},
                {"gamma", {number(gmin), number(gmax)}}};
}

json states_domain(const std::vector<PolarState>& pts) {
    double rmax = 0.0, dabs = 0.0, gabs = 0.0;
    for (const auto& p : pts) {
        rmax = std::max(rmax, p.rho);
        dabs = std::max(dabs, std::abs(p.delta));
        gabs = std::max(gabs, std::abs(p.gamma));
    }
    return json{{"samples", pts.size()},
                {"rho_max", rmax},
                {"abs_delta_max", dabs},
                {"abs_gamma_max", gabs}};
}

}  // namespace

void CertReport::settle() noexcept {
    if (std::isnan(worst_margin)) {
        pass = false;
        return;
    }
    pass = strict ? worst_margin < tolerance : worst_margin <= tolerance;
}

json gains_to_json(const Gains& g) {
    return json{{"k1", g.k1}, {"k2", g.k2}, {"k3", g.k3}, {"k4", g.k4}};
}

void to_json(json& j, const CertReport& r) {
    json point = json::array();
    for (double v : r.worst_point) point.push_back(number(v));
    j = json{{"check", r.check},
             {"grid", r.grid},
             {"gains", r.gains},
             {"worst_point", point},
             {"worst_margin", number(r.worst_margin)},
             {"tolerance", number(r.tolerance)},
             {"strict", r.strict},
             {"pass", r.pass},
             {"notes", r.notes}};
}

void from_json(const json& j, CertReport& r) {
    r.check = j.at("check").get<std::string>();
    r.grid = j.at("grid");
    r.gains = j.at("gains");
    r.worst_point.clear();
    for (const auto& v : j.at("worst_point")) r.worst_point.push_back(parse_number(v));
    r.worst_margin = parse_number(j.at("worst_margin"));
    r.tolerance = parse_number(j.at("tolerance"));
    r.strict = j.at("strict").get<bool>();
    r.pass = j.at("pass").get<bool>();
    r.notes = j.value("notes", std::string{});
}

json to_json(const SampleDomain& d, StateSpace space) {
    return json{{"space", to_string(space)},
                {"rho_max", d.rho_max},
                {"angle_bound", d.angle_bound},
                {"barrier_margin", d.barrier_margin}};
}

namespace {

std::pair<double, double> angle_range(bool barriered, const SampleDomain& d) {
    const double b = barriered ? kPi - d.barrier_margin : d.angle_bound;
    return {-b, b};
}

}  // namespace

std::vector<PolarState> sample_states(StateSpace space, std::size_t n, std::uint64_t seed,
                                      const SampleDomain& domain) {
    std::mt19937_64 rng(seed);
    const auto [dlo, dhi] = angle_range(bounds_delta(space), domain);
    const auto [glo, ghi] = angle_range(bounds_gamma(space), domain);
    std::uniform_real_distribution<double> rho(0.0, domain.rho_max);
    std::uniform_real_distribution<double> del(dlo, dhi);
    std::uniform_real_distribution<double> gam(glo, ghi);
    std::vector<PolarState> out;
    out.reserve(n);
    while (out.size() < n) {
        PolarState p{rho(rng), del(rng), gam(rng)};
        if (p.rho == 0.0) continue;
        out.push_back(p);
    }
    return out;
}

std::vector<std::pair<double, double>> angular_grid(StateSpace space, std::size_t n_delta,
                                                    std::size_t n_gamma, const SampleDomain& domain) {
    if (n_delta < 2 || n_gamma < 2) throw std::invalid_argument("angular_grid needs >= 2 points per axis");
    const auto [dlo, dhi] = angle_range(bounds_delta(space), domain);
    const auto [glo, ghi] = angle_range(bounds_gamma(space), domain);
    std::vector<std::pair<double, double>> out;
    out.reserve(n_delta * n_gamma);
    for (std::size_t i = 0; i < n_delta; ++i) {
        const double d = dlo + (dhi - dlo) * static_cast<double>(i) / static_cast<double>(n_delta - 1);
        for (std::size_t k = 0; k < n_gamma; ++k) {
            const double g = glo + (ghi - glo) * static_cast<double>(k) / static_cast<double>(n_gamma - 1);
            if (d == 0.0 && g == 0.0) continue;
            out.emplace_back(d, g);
        }
    }
    return out;
}

std::vector<Gains> random_valid_gains(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> base(0.2, 3.0);
    std::uniform_real_distribution<double> factor(1.0, 4.0);
    std::vector<Gains> out;
    for (std::size_t i = 0; i < n; ++i) {
        Gains g;
        g.k1 = base(rng);
        g.k2 = base(rng);
        g.k3 = g.k2 * g.k2 / g.k1 * factor(rng);
        g.k4 = base(rng);
        out.push_back(g);
    }
    return out;
}

CertReport check_lemma1(const std::vector<double>& k_grid, const std::vector<double>& gamma_grid) {
    for (double k : k_grid) {
        if (!(k >= 1.0)) throw std::invalid_argument("lemma inequality requires k >= 1");
    }
    for (double g : gamma_grid) {
        if (!(std::abs(g) < kPi)) throw std::invalid_argument("lemma inequality grid requires |gamma| < pi");
    }
    Worst w;
    for (double k : k_grid) {
        for (double g : gamma_grid) {
            const double c = std::cos(g);
            const double t = std::tan(g / 2.0);
            const double lhs = 1.0 - k * c * (1.0 + c);
            const double rhs = 2.0 * (1.0 + k) * t * t;
            w.offer(lhs - rhs, {k, g});
        }
    }
    json grid{{"k", k_grid}, {"gamma_points", gamma_grid.size()}};
    if (!gamma_grid.empty()) {
        grid["gamma"] = {*std::min_element(gamma_grid.begin(), gamma_grid.end()),
                         *std::max_element(gamma_grid.begin(), gamma_grid.end())};
    }
    auto r = make_report("lemma1", grid, nullptr, w, kInequalitySlack, false);
    r.notes = "max of LHS - RHS; certified on grid";
    return r;
}

CertReport check_vdot_identity(const LyapunovFn& fn, const std::vector<std::pair<double, double>>& points) {
    if (!is_backstepping(fn.kind())) {
        throw std::invalid_argument("closed-form derivative identity applies to GloBa / BarFli only");
    }
    Worst w;
    for (const auto& [d, g] : points) {
        const double closed = fn.v_dot(d, g);
        const double chain = fn.v_dot_chain_rule(d, g);
        w.offer(std::abs(closed - chain) / std::max(1.0, std::abs(closed)), {d, g});
    }
    auto r = make_report("vdot_identity/" + to_string(fn.kind()), points_domain(points),
                         gains_to_json(fn.gains()), w, kEqualityTol, false);
    r.notes = "relative gap between closed-form and chain-rule derivative";
    return r;
}

CertReport check_strict_decrease(const LyapunovFn& fn, const std::vector<std::pair<double, double>>& points) {
    Worst w;
    for (const auto& [d, g] : points) {
        if (d == 0.0 && g == 0.0) continue;
        w.offer(fn.v_dot(d, g), {d, g});
    }
    auto r = make_report("strict_decrease/" + to_string(fn.kind()), points_domain(points),
                         gains_to_json(fn.gains()), w, 0.0, true);
    r.notes = "max of V_dg' off the origin; certified on grid";
    return r;
}

CertReport check_bolsa_bound(const Gains& gains, BolsaBoundVariant variant,
                             const std::vector<std::pair<double, double>>& points) {
    const LyapunovFn fn(ControllerKind::BoLSA, gains);
    Worst w;
    for (const auto& [d, g] : points) {
        w.offer(fn.v_dot(d, g) - bolsa_vdot_bound(gains, d, g, variant), {d, g});
    }
    const std::string tag = variant == BolsaBoundVariant::Displayed ? "displayed" : "two_q";
    auto r = make_report("bolsa_bound/" + tag, points_domain(points), gains_to_json(gains), w,
                         kBolsaBoundSlack, false);
    r.notes = satisfies_gain_condition(gains) ? "max of V' - bound"
                                              : "max of V' - bound; gains violate k1*k3 >= k2^2";
    return r;
}

CertReport check_clf(const CompositeLyapunovFn& fn, const Gains& gains, const SteeringFn& steering,
                     const std::vector<PolarState>& samples, const std::string& label) {
    Worst w;
    const double k1 = gains.k1;
    for (const auto& p : samples) {
        if (p.rho == 0.0 && p.delta == 0.0 && p.gamma == 0.0) continue;
        const auto grad = fn.gradient(p);
        const double c = std::cos(p.gamma);
        const double s = std::sin(p.gamma);
        const double v_over_rho = k1 * c;
        const double omega = 0.5 * k1 * std::sin(2.0 * p.gamma) + steering(p.delta, p.gamma);
        const double expr = (-grad[0] * p.rho * c + (grad[1] + grad[2]) * s) * v_over_rho - grad[2] * omega;
        w.offer(expr, {p.rho, p.delta, p.gamma});
    }
    auto r = make_report("clf/" + label, states_domain(samples), gains_to_json(gains), w, 0.0, true);
    r.notes = "max of the CLF decrease expression with the designed inputs";
    return r;
}

CertReport check_clf(const CompositeLyapunovFn& fn, const ControllerSpec& spec,
                     const std::vector<PolarState>& samples) {
    return check_clf(
        fn, spec.gains(), [&spec](double d, double g) { return omega_tilde(spec, d, g); }, samples,
        to_string(spec.kind()) + "/" + fn.compositor().label());
}

CertReport check_proposition1(const Compositor& comp, const LyapunovFn& fn,
                              const std::vector<PolarState>& samples) {
    const std::string name = "prop1/" + to_string(fn.kind()) + "/" + comp.label();
    if (const auto bad = find_compositor_violation(comp)) {
        Worst w;
        // Violation quantity: |W(0,0)|, -W off the origin, -min partial, or 1
        // for the unboundedness probe.
        const CompositorValue v = comp.evaluate(bad->r, bad->s);
        double m = 1.0;
        if (bad->condition == 1) {
            m = (bad->r == 0.0 && bad->s == 0.0) ? std::abs(v.value) : -v.value;
        } else if (bad->condition == 3) {
            m = -std::min(v.d_r, v.d_s);
        }
        w.offer(m, {bad->r, bad->s});
        auto r = make_report(name, json{{"r_s_grid", "{0} U logspace(1e-6, 1e4, 41)"}},
                             gains_to_json(fn.gains()), w, 0.0, true);
        r.notes = bad->message;
        return r;
    }
    const CompositeLyapunovFn V(comp, fn);
    Worst w;
    for (const auto& p : samples) {
        if (p.rho == 0.0 && p.delta == 0.0 && p.gamma == 0.0) continue;
        w.offer(V.v_dot(p), {p.rho, p.delta, p.gamma});
    }
    json grid = states_domain(samples);
    grid["r_s_grid"] = "{0} U logspace(1e-6, 1e4, 41)";
    auto r = make_report(name, grid, gains_to_json(fn.gains()), w, 0.0, true);
    r.notes = "compositor conditions hold on grid; margin is max of composite V'";
    return r;
}

CertReport check_kl_decay(const Trajectory& traj, StateSpace space) {
    constexpr double metric_target = 1e-3;
    constexpr double increase_tol = 1e-8;
    if (traj.polar.empty()) throw std::invalid_argument("empty trajectory");
    std::vector<double> m;
    m.reserve(traj.polar.size());
    for (const auto& p : traj.polar) {
        try {
            m.push_back(metric(space, p));
        } catch (const DomainError&) {
            throw DomainError("trajectory left the state space " + to_string(space));
        }
    }
    const double final_metric = m.back();
    const double increase = traj.max_lyapunov_increase();
    Worst w;
    const PolarState& last = traj.polar.back();
    w.offer(std::max(final_metric - metric_target, increase - increase_tol),
            {traj.times.back(), last.rho, last.delta, last.gamma});
    json grid{{"space", to_string(space)},
              {"samples", traj.size()},
              {"t_final", traj.times.back()},
              {"initial_metric", m.front()},
              {"final_metric", final_metric},
              {"max_V_increase", number(increase)}};
    auto r = make_report("kl_decay/" + to_string(space), grid, nullptr, w, 0.0, true);
    std::ostringstream notes;
    notes << "metric " << m.front() << " -> " << final_metric << "; status " << to_string(traj.status);
    r.notes = notes.str();
    return r;
}

namespace {

constexpr double kFdStep = 1e-6;

// |analytic - fd| / max(1, |fd|) in the Euclidean norm.
template <std::size_t N>
double normwise_error(const std::array<double, N>& analytic, const std::array<double, N>& fd) {
    double diff = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        diff += (analytic[i] - fd[i]) * (analytic[i] - fd[i]);
        ref += fd[i] * fd[i];
    }
    return std::sqrt(diff) / std::max(1.0, std::sqrt(ref));
}

}  // namespace

CertReport check_gradient(const LyapunovFn& fn, const std::vector<std::pair<double, double>>& points,
                          double tol) {
    Worst w;
    const double h = kFdStep;
    for (const auto& [d, g] : points) {
        const AngularGradient a = fn.gradient(d, g);
        const double fd_d = (fn.value(d + h, g) - fn.value(d - h, g)) / (2.0 * h);
        const double fd_g = (fn.value(d, g + h) - fn.value(d, g - h)) / (2.0 * h);
        w.offer(normwise_error<2>({a.d_delta, a.d_gamma}, {fd_d, fd_g}), {d, g});
    }
    auto r = make_report("gradient/" + to_string(fn.kind()), points_domain(points),
                         gains_to_json(fn.gains()), w, tol, false);
    r.notes = "central differences, step 1e-6";
    return r;
}

CertReport check_gradient(const CompositeLyapunovFn& fn, const std::vector<PolarState>& samples,
                          double tol) {
    Worst w;
    const double h = kFdStep;
    for (const auto& p : samples) {
        const auto a = fn.gradient(p);
        std::array<double, 3> fd{};
        for (int i = 0; i < 3; ++i) {
            PolarState up = p, dn = p;
            double* u = i == 0 ? &up.rho : i == 1 ? &up.delta : &up.gamma;
            double* l = i == 0 ? &dn.rho : i == 1 ? &dn.delta : &dn.gamma;
            *u += h;
            *l -= h;
            fd[static_cast<std::size_t>(i)] = (fn.value(up) - fn.value(dn)) / (2.0 * h);
        }
        w.offer(normwise_error(a, fd), {p.rho, p.delta, p.gamma});
    }
    auto r = make_report("gradient/" + to_string(fn.inner().kind()) + "/" + fn.compositor().label(),
                         states_domain(samples), gains_to_json(fn.inner().gains()), w, tol, false);
    r.notes = "central differences, step 1e-6";
    return r;
}

// --- Battery -----------------------------------------------------------------

bool is_known_suite(const std::string& s) {
    return s == "all" || s == "lemma1" || s == "clf" || s == "prop1" || s == "kl" ||
           s == "gradient" || s == "decrease";
}

namespace {

constexpr ControllerKind kAllKinds[] = {ControllerKind::GloBa, ControllerKind::BarFli,
                                        ControllerKind::BoLSA, ControllerKind::BAgAl};

std::vector<Compositor> all_compositors() {
    std::vector<Compositor> out;
    for (auto order : {CompositorOrder::RhoFirst, CompositorOrder::VdgFirst}) {
        out.push_back(Compositor::sum(order));
        out.push_back(Compositor::log_sum(order));
        out.push_back(Compositor::exp_product(order));
    }
    return out;
}

// Domain for composites: the exp-product compositor overflows for large V_dg,
// so composites are sampled on a smaller angular box than the bare CLFs.
SampleDomain composite_domain(ControllerKind kind, const Compositor& comp) {
    SampleDomain d;
    if (comp.form == CompositorForm::ExpProduct) {
        d.angle_bound = 1.0;
        d.rho_max = 3.0;
        d.barrier_margin = kind == ControllerKind::GloBa ? 0.01 : 2.0;
    }
    return d;
}

std::vector<double> lemma1_gamma_grid() {
    std::vector<double> g;
    const std::size_t n = 10000;
    const double lo = -kPi + 1e-3, hi = kPi - 1e-3;
    for (std::size_t i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * static_cast<double>(i) / (n - 1));
    return g;
}

PolarState kl_initial_state(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::GloBa: return {5.0, 3.0, 2.0};
        case ControllerKind::BarFli: return {2.0, 3.0, 0.5};
        case ControllerKind::BoLSA: return {3.0, 4.0, 2.5};
        case ControllerKind::BAgAl: return {3.0, 2.5, -2.5};
    }
    return {};
}

}  // namespace

std::vector<CertReport> run_battery(const std::string& selector, std::uint64_t seed) {
    if (!is_known_suite(selector)) throw std::invalid_argument("unknown suite '" + selector + "'");
    const bool all = selector == "all";
    const Gains gains{1.0, 1.0, 1.0, 1.0};
    std::vector<std::future<CertReport>> jobs;
    const auto spawn = [&jobs](auto fn) { jobs.push_back(std::async(std::launch::async, std::move(fn))); };

    if (all || selector == "lemma1") {
        spawn([] { return check_lemma1({1.0, 1.5, 2.0, 5.0, 10.0, 100.0}, lemma1_gamma_grid()); });
    }
    for (ControllerKind kind : kAllKinds) {
        const LyapunovFn fn(kind, gains);
        const ControllerSpec spec(kind, gains);
        if (all || selector == "decrease") {
            spawn([fn] { return check_strict_decrease(fn, angular_grid(fn.space(), 100, 100)); });
            if (is_backstepping(kind)) {
                spawn([fn] { return check_vdot_identity(fn, angular_grid(fn.space(), 100, 100)); });
            }
        }
        if (all || selector == "gradient") {
            spawn([fn, seed] {
                std::vector<std::pair<double, double>> pts;
                for (const auto& p : sample_states(fn.space(), 1000, seed)) pts.emplace_back(p.delta, p.gamma);
                return check_gradient(fn, pts);
            });
        }
        for (const Compositor& comp : all_compositors()) {
            const SampleDomain dom = composite_domain(kind, comp);
            if (all || selector == "clf") {
                spawn([comp, fn, spec, dom, seed] {
                    return check_clf(CompositeLyapunovFn(comp, fn), spec,
                                     sample_states(fn.space(), 10000, seed, dom));
                });
            }
            if (all || selector == "prop1") {
                spawn([comp, fn, dom, seed] {
                    return check_proposition1(comp, fn, sample_states(fn.space(), 2000, seed + 1, dom));
                });
            }
            if (all || selector == "gradient") {
                spawn([comp, fn, dom, seed] {
                    return check_gradient(CompositeLyapunovFn(comp, fn),
                                          sample_states(fn.space(), 1000, seed + 2, dom));
                });
            }
        }
        if (all || selector == "kl") {
            spawn([spec] {
                SimConfig cfg;
                cfg.capture_radius = 3e-4;
                cfg.t_final = 120.0;
                const Trajectory traj = simulate(spec, kl_initial_state(spec.kind()), cfg);
                return check_kl_decay(traj, spec.space());
            });
        }
    }
    if (all || selector == "decrease") {
        spawn([] {
            return check_bolsa_bound(Gains{1.0, 1.0, 1.0, 1.0}, BolsaBoundVariant::Displayed,
                                     angular_grid(StateSpace::S2, 200, 200));
        });
    }

    std::vector<CertReport> out;
    out.reserve(jobs.size());
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

}  // namespace polarpark
