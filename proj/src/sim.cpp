#include "polarpark/sim.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace polarpark {

namespace odeint = boost::numeric::odeint;
using OdeState = std::array<double, 3>;

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("sim: dt must be > 0");
    if (!(t_final > 0.0)) throw std::invalid_argument("sim: t_final must be > 0");
    if (!(capture_radius >= 0.0)) throw std::invalid_argument("sim: capture_radius must be >= 0");
    if (!(abs_tol > 0.0) || !(rel_tol >= 0.0)) throw std::invalid_argument("sim: bad tolerances");
    if (!(dt_min > 0.0) || !(dt_max >= dt_min)) throw std::invalid_argument("sim: bad step bounds");
    if (!(output_dt >= 0.0)) throw std::invalid_argument("sim: output_dt must be >= 0");
}

std::string to_string(SimStatus s) {
    switch (s) {
        case SimStatus::Captured: return "Captured";
        case SimStatus::HorizonReached: return "HorizonReached";
        case SimStatus::BoundaryStop: return "BoundaryStop";
    }
    return "?";
}

double Trajectory::max_lyapunov_increase() const noexcept {
    double worst = 0.0;
    for (std::size_t i = 1; i < lyapunov.size(); ++i) {
        const double a = lyapunov[i - 1];
        const double b = lyapunov[i];
        if (std::isinf(a) && std::isinf(b)) continue;
        worst = std::max(worst, b - a);
    }
    return worst;
}

PolarRate rhs_polar(const ControllerSpec& spec, const PolarState& p) {
    const double k1 = spec.gains().k1;
    const double c = std::cos(p.gamma);
    const double drift = 0.5 * k1 * std::sin(2.0 * p.gamma);
    return {-k1 * p.rho * c * c, drift, -omega_tilde(spec, p.delta, p.gamma)};
}

PolarRate rhs_polar_unsteered(const Gains& g, const PolarState& p) noexcept {
    const double c = std::cos(p.gamma);
    const double drift = 0.5 * g.k1 * std::sin(2.0 * p.gamma);
    return {-g.k1 * p.rho * c * c, drift, drift};
}

namespace {

PolarState lift(const CartesianState& c, double delta_ref) {
    if (c.x == 0.0 && c.y == 0.0) throw DomainError("polar chart undefined at rho=0");
    PolarState p;
    p.rho = std::hypot(c.x, c.y);
    const double raw = std::atan2(c.y, c.x) + kPi;
    p.delta = delta_ref + wrap_angle(raw - delta_ref);
    p.gamma = p.delta - c.theta;
    return p;
}

CartesianRate kinematics(const CartesianState& c, double v, double omega) noexcept {
    return {v * std::cos(c.theta), v * std::sin(c.theta), omega};
}

}  // namespace

CartesianRate rhs_cartesian(const ControllerSpec& spec, const CartesianState& c) {
    const ControlInput u = control(spec, cart_to_polar(c));
    return kinematics(c, u.v, u.omega);
}

CartesianRate rhs_cartesian_lifted(const ControllerSpec& spec, const CartesianState& c,
                                   double delta_ref, Steering steering) {
    const PolarState p = lift(c, delta_ref);
    if (steering == Steering::Off) {
        return kinematics(c, forward_velocity(p, spec.gains()), 0.0);
    }
    const ControlInput u = control(spec, p);
    return kinematics(c, u.v, u.omega);
}

namespace {

class Runner {
public:
    Runner(const ControllerSpec& spec, const SimConfig& cfg, const CompositeLyapunovFn& monitor)
        : spec_(spec), cfg_(cfg), monitor_(monitor) {}

    Trajectory run(const PolarState& x0);

private:
    // Polar view of an integrator state. Cartesian states are lifted around
    // the last accepted polar angle.
    [[nodiscard]] PolarState to_polar(const OdeState& x) const {
        if (cfg_.frame == Frame::Polar) return {x[0], x[1], x[2]};
        return lift({x[0], x[1], x[2]}, delta_ref_);
    }

    void rhs(const OdeState& x, OdeState& dxdt) const {
        for (double v : x) {
            if (!std::isfinite(v)) throw DomainError("non-finite state");
        }
        if (cfg_.frame == Frame::Polar) {
            const PolarState p{x[0], x[1], x[2]};
            const PolarRate r = cfg_.steering == Steering::Feedback ? rhs_polar(spec_, p)
                                                                   : rhs_polar_unsteered(spec_.gains(), p);
            dxdt = {r.rho_dot, r.delta_dot, r.gamma_dot};
        } else {
            const CartesianRate r =
                rhs_cartesian_lifted(spec_, {x[0], x[1], x[2]}, delta_ref_, cfg_.steering);
            dxdt = {r.x_dot, r.y_dot, r.theta_dot};
        }
        for (double v : dxdt) {
            if (!std::isfinite(v)) throw DomainError("non-finite right-hand side");
        }
    }

    [[nodiscard]] ControlInput input_at(const PolarState& p) const {
        if (cfg_.steering == Steering::Off) {
            const double k1 = spec_.gains().k1;
            return {forward_velocity(p, spec_.gains()), 0.0, -0.5 * k1 * std::sin(2.0 * p.gamma)};
        }
        try {
            return control(spec_, p);
        } catch (const DomainError&) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            return {forward_velocity(p, spec_.gains()), nan, nan};
        }
    }

    [[nodiscard]] double lyapunov_at(const PolarState& p) const {
        try {
            return monitor_.value(p);
        } catch (const DomainError&) {
            return std::numeric_limits<double>::infinity();
        }
    }

    [[nodiscard]] bool captured(const PolarState& p) const {
        const double r = cfg_.capture_radius;
        return p.rho < r && std::abs(p.delta) < r && std::abs(p.gamma) < r;
    }

    void accept(double t, const OdeState& x, bool record);

    const ControllerSpec& spec_;
    const SimConfig& cfg_;
    const CompositeLyapunovFn& monitor_;
    Trajectory traj_;
    double delta_ref_{0.0};
    std::optional<CartesianState> last_position_;
};

void Runner::accept(double t, const OdeState& x, bool record) {
    const PolarState p = to_polar(x);
    delta_ref_ = p.delta;
    const CartesianState c = cfg_.frame == Frame::Cartesian
                                 ? CartesianState{x[0], x[1], x[2]}
                                 : CartesianState{-p.rho * std::cos(p.delta), -p.rho * std::sin(p.delta),
                                                  p.delta - p.gamma};
    const ControlInput u = input_at(p);
    if (last_position_) {
        traj_.path_length += std::hypot(c.x - last_position_->x, c.y - last_position_->y);
    }
    last_position_ = c;
    if (std::isfinite(u.omega)) traj_.max_abs_omega = std::max(traj_.max_abs_omega, std::abs(u.omega));
    traj_.min_boundary_distance =
        std::min(traj_.min_boundary_distance, boundary_distance(spec_.space(), p.delta, p.gamma));
    if (!record) return;
    traj_.times.push_back(t);
    traj_.polar.push_back(p);
    traj_.cartesian.push_back(c);
    traj_.inputs.push_back(u);
    traj_.lyapunov.push_back(lyapunov_at(p));
}

Trajectory Runner::run(const PolarState& x0) {
    if (!(x0.rho >= 0.0) || !std::isfinite(x0.rho) ||
        !steering_defined(spec_.kind(), x0.delta, x0.gamma)) {
        throw DomainError("steering undefined: initial state outside the domain of " +
                          to_string(spec_.kind()));
    }
    if (cfg_.frame == Frame::Cartesian && !(x0.rho > 0.0)) {
        throw DomainError("polar chart undefined at rho=0");
    }
    traj_.min_boundary_distance = std::numeric_limits<double>::infinity();

    OdeState x;
    if (cfg_.frame == Frame::Polar) {
        x = {x0.rho, x0.delta, x0.gamma};
    } else {
        x = {-x0.rho * std::cos(x0.delta), -x0.rho * std::sin(x0.delta), x0.delta - x0.gamma};
    }
    delta_ref_ = x0.delta;

    const auto system = [this](const OdeState& s, OdeState& ds, double /*t*/) { rhs(s, ds); };
    const bool sampled = cfg_.output_dt > 0.0;
    const double eps_t = 1e-12 * std::max(1.0, cfg_.t_final);
    double t = 0.0;
    std::size_t next_sample = 1;
    const auto sample_time = [&](std::size_t k) {
        return std::min(cfg_.t_final, static_cast<double>(k) * cfg_.output_dt);
    };

    accept(t, x, true);
    if (captured(to_polar(x))) {
        traj_.status = SimStatus::Captured;
        return std::move(traj_);
    }

    odeint::runge_kutta4<OdeState> rk4;
    auto rk45 = odeint::make_controlled(cfg_.abs_tol, cfg_.rel_tol, odeint::runge_kutta_dopri5<OdeState>());
    double dt = std::min(cfg_.dt, cfg_.dt_max);

    while (t < cfg_.t_final - eps_t) {
        double target = cfg_.t_final;
        if (sampled) target = sample_time(next_sample);
        double h = std::min({dt, cfg_.dt_max, target - t});
        if (cfg_.integrator == Integrator::RK4Fixed) h = std::min(cfg_.dt, target - t);

        OdeState trial = x;
        double t_trial = t;
        bool ok = false;
        try {
            if (cfg_.integrator == Integrator::RK4Fixed) {
                rk4.do_step(system, trial, t_trial, h);
                t_trial += h;
                ok = true;
            } else {
                double h_try = h;
                ok = rk45.try_step(system, trial, t_trial, h_try) == odeint::success;
                if (ok) {
                    // Keep the grown step for the next attempt, not the clipped one.
                    dt = (h < dt) ? std::max(dt, h_try) : h_try;
                } else {
                    dt = h_try;
                }
            }
            for (double v : trial) {
                if (!std::isfinite(v)) throw DomainError("non-finite state");
            }
        } catch (const DomainError& e) {
            ok = false;
            if (cfg_.integrator == Integrator::RK4Fixed) {
                traj_.status = SimStatus::BoundaryStop;
                traj_.message = std::string("fixed step left the domain: ") + e.what();
                return std::move(traj_);
            }
            dt = 0.5 * h;
        }

        if (!ok) {
            if (dt < cfg_.dt_min) {
                std::ostringstream msg;
                const PolarState p = to_polar(x);
                msg << "step size fell below " << cfg_.dt_min << " at t=" << t << " (rho=" << p.rho
                    << ", delta=" << p.delta << ", gamma=" << p.gamma << ")";
                traj_.status = SimStatus::BoundaryStop;
                traj_.message = msg.str();
                return std::move(traj_);
            }
            continue;
        }

        x = trial;
        t = t_trial;
        bool record = true;
        if (sampled) {
            record = std::abs(t - target) <= eps_t;
            if (record) {
                t = target;
                ++next_sample;
            }
        }
        const PolarState p = to_polar(x);
        const bool done = captured(p);
        accept(t, x, record || done);
        if (done) {
            traj_.status = SimStatus::Captured;
            return std::move(traj_);
        }
    }
    traj_.status = SimStatus::HorizonReached;
    return std::move(traj_);
}

}  // namespace

Trajectory simulate(const ControllerSpec& spec, const PolarState& x0, const SimConfig& cfg,
                    const CompositeLyapunovFn& monitor) {
    cfg.validate();
    Runner runner(spec, cfg, monitor);
    return runner.run(x0);
}

Trajectory simulate(const ControllerSpec& spec, const PolarState& x0, const SimConfig& cfg) {
    const CompositeLyapunovFn monitor(Compositor::sum(), LyapunovFn(spec));
    return simulate(spec, x0, cfg, monitor);
}

}  // namespace polarpark
