#include <doctest.h>

#include "oracles.hpp"
#include "polarpark/lyapunov.hpp"
#include "polarpark/verify.hpp"

#include <cmath>
#include <random>

using namespace polarpark;

namespace {

constexpr ControllerKind kKinds[] = {ControllerKind::GloBa, ControllerKind::BarFli, ControllerKind::BoLSA,
                                     ControllerKind::BAgAl};

// V along the closed-loop flow, central difference in time.
double vdot_by_flow(const LyapunovFn& fn, double d, double g, double h) {
    const ControllerSpec spec = fn.controller();
    const auto field = [&](double dd, double gg) {
        return std::pair{0.5 * fn.gains().k1 * std::sin(2 * gg), -omega_tilde(spec, dd, gg)};
    };
    const auto [fd, fg] = field(d, g);
    return (fn.value(d + h * fd, g + h * fg) - fn.value(d - h * fd, g - h * fg)) / (2 * h);
}

}  // namespace

TEST_CASE("V_dg vanishes at the origin for every controller") {
    for (auto kind : kKinds) {
        CHECK(LyapunovFn(kind, {1.2, 0.7, 1.9, 0.4}).value(0.0, 0.0) == 0.0);
    }
}

TEST_CASE("V_dg frozen values") {
    const LyapunovFn globa(ControllerKind::GloBa, {1, 1, 1, 1});
    CHECK(globa.value(1.0, 0.0) == doctest::Approx(1.30644457082827466).epsilon(1e-14));

    const LyapunovFn bolsa(ControllerKind::BoLSA, {1.0, 1.0, 0.1, 1.0});
    CHECK(bolsa.value(1.0, 0.0) == doctest::Approx(1.43203915431767983).epsilon(1e-14));

    const LyapunovFn bagal(ControllerKind::BAgAl, {1, 1, 1, 1});
    CHECK(bagal.bagal_a() == doctest::Approx(2.0 / 3.0));
    CHECK(bagal.value(1.0, 0.5) == doctest::Approx(1.66646088977947998).epsilon(1e-14));
}

TEST_CASE("BoLSA CLF equals its proof decomposition") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> k(0.2, 3.0), d(-10.0, 10.0), g(-3.1, 3.1);
    for (int i = 0; i < 2000; ++i) {
        const Gains gains{k(rng), k(rng), k(rng), 1.0};
        const double delta = d(rng), gamma = g(rng);
        const double ref = oracle::bolsa_v_proof_form(gains.k1, gains.k2, gains.k3, delta, gamma);
        REQUIRE(LyapunovFn(ControllerKind::BoLSA, gains).value(delta, gamma) ==
                doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("barrier CLFs reject the boundary and blow up near it") {
    const Gains g{1, 1, 1, 1};
    CHECK_THROWS_WITH_AS((void)LyapunovFn(ControllerKind::BarFli, g).value(kPi, 0.0),
                         doctest::Contains("barrier blow-up"), DomainError);
    CHECK_THROWS_AS((void)LyapunovFn(ControllerKind::BoLSA, g).value(0.0, -kPi), DomainError);
    CHECK_THROWS_AS((void)LyapunovFn(ControllerKind::BAgAl, g).gradient(0.0, 4.0), DomainError);
    CHECK_NOTHROW((void)LyapunovFn(ControllerKind::GloBa, g).value(12.0, -9.0));

    const double near = kPi - 1e-6;
    CHECK(LyapunovFn(ControllerKind::BarFli, g).value(near, 0.0) > 1e6);
    CHECK(LyapunovFn(ControllerKind::BoLSA, g).value(0.0, near) > 1e6);
    CHECK(LyapunovFn(ControllerKind::BAgAl, g).value(-near, 0.0) > 1e6);
    CHECK(LyapunovFn(ControllerKind::BAgAl, g).value(0.0, -near) > 1e6);
}

TEST_CASE("V_dg is positive off the origin on dense grids") {
    for (auto kind : kKinds) {
        const LyapunovFn fn(kind, {0.8, 1.1, 1.6, 0.9});
        for (const auto& [d, g] : angular_grid(fn.space(), 151, 151)) {
            REQUIRE(fn.value(d, g) > 0.0);
        }
    }
}

TEST_CASE("GloBa derivative frozen value and chain-rule agreement") {
    const LyapunovFn globa(ControllerKind::GloBa, {1, 1, 1, 1});
    CHECK(globa.v_dot(0.0, 0.0) == 0.0);
    CHECK(globa.v_dot(1.0, 0.0) == doctest::Approx(-1.50731633265646520).epsilon(1e-14));
    CHECK(globa.v_dot_chain_rule(1.0, 0.0) == doctest::Approx(-1.50731633265646520).epsilon(1e-12));
}

TEST_CASE("analytic derivative matches finite differences along the flow") {
    const LyapunovFn bolsa(ControllerKind::BoLSA, {1.0, 1.0, 0.1, 1.0});
    CHECK(std::abs(bolsa.v_dot(0.5, 0.5) - vdot_by_flow(bolsa, 0.5, 0.5, 1e-5)) < 1e-6);

    for (auto kind : kKinds) {
        const LyapunovFn fn(kind, {1.3, 0.8, 1.1, 0.7});
        for (const auto& [d, g] : std::vector<std::pair<double, double>>{{0.3, -0.4}, {-1.2, 2.0}, {2.5, 1.0}}) {
            const double a = fn.v_dot(d, g), fd = vdot_by_flow(fn, d, g, 1e-5);
            CHECK(std::abs(a - fd) <= 1e-6 * std::max(1.0, std::abs(a)));
        }
    }
}

TEST_CASE("angular gradient examples") {
    const LyapunovFn globa(ControllerKind::GloBa, {1, 1, 1, 1});
    const double z = 0.5 * std::atan(2.0);
    CHECK(globa.gradient(1.0, 0.0).d_gamma == doctest::Approx(2.0 * z));

    const LyapunovFn bolsa(ControllerKind::BoLSA, {1.0, 1.0, 0.1, 1.0});
    const double h = 1e-6;
    const double fd = (bolsa.value(0.5 + h, 0.5) - bolsa.value(0.5 - h, 0.5)) / (2 * h);
    CHECK(std::abs(bolsa.gradient(0.5, 0.5).d_delta - fd) / std::abs(fd) < 1e-5);
}

TEST_CASE("BoLSA bound formula") {
    const Gains g{1, 1, 1, 1};
    CHECK(bolsa_vdot_bound(g, 0.0, 0.0, BolsaBoundVariant::Displayed) == 0.0);
    // delta = 1, gamma = 0: only the square term survives.
    CHECK(bolsa_vdot_bound(g, 1.0, 0.0, BolsaBoundVariant::TwoQ) == doctest::Approx(-1.5));
    CHECK_THROWS_AS(bolsa_vdot_bound(g, 0.0, kPi, BolsaBoundVariant::Displayed), DomainError);
}

TEST_CASE("compositor values") {
    const LyapunovFn globa(ControllerKind::GloBa, {1, 1, 1, 1});
    CHECK(CompositeLyapunovFn(Compositor::sum(), globa).value({1.0, 0.0, 0.0}) == doctest::Approx(1.0));
    CHECK(CompositeLyapunovFn(Compositor::log_sum(), globa).value({1.0, 0.0, 0.0}) ==
          doctest::Approx(std::log(2.0)));
    const double s = globa.value(0.4, -0.3);
    CHECK(CompositeLyapunovFn(Compositor::exp_product(), globa).value({0.0, 0.4, -0.3}) ==
          doctest::Approx(std::exp(s) - 1.0));
    CHECK(CompositeLyapunovFn(Compositor::sum(), globa).gradient({2.0, 0.0, 0.0})[0] == doctest::Approx(4.0));
    // VdgFirst swaps the roles: ln(1 + V_dg) + rho^2.
    CHECK(CompositeLyapunovFn(Compositor::log_sum(CompositorOrder::VdgFirst), globa).value({2.0, 0.4, -0.3}) ==
          doctest::Approx(std::log1p(s) + 4.0));
}

TEST_CASE("custom compositors are validated") {
    const LyapunovFn fn(ControllerKind::GloBa, {1, 1, 1, 1});
    const auto product = Compositor::make_custom("product", [](double r, double s) {
        return CompositorValue{r * s, s, r};
    });
    const auto bad = find_compositor_violation(product);
    REQUIRE(bad.has_value());
    CHECK(bad->condition == 1);
    CHECK((bad->r == 0.0 || bad->s == 0.0));
    CHECK_THROWS_WITH_AS(CompositeLyapunovFn(product, fn), doctest::Contains("condition 1"), std::invalid_argument);

    const auto saturating = Compositor::make_custom("saturating", [](double r, double s) {
        const double e = std::exp(-(r + s));
        return CompositorValue{1.0 - e, e, e};
    });
    const auto sat = find_compositor_violation(saturating);
    REQUIRE(sat.has_value());
    CHECK(sat->condition == 2);

    const auto quadratic = Compositor::make_custom("r2s", [](double r, double s) {
        return CompositorValue{r * r + r + s, 2 * r + 1, 1.0};
    });
    CHECK_FALSE(find_compositor_violation(quadratic).has_value());
    CHECK_NOTHROW(CompositeLyapunovFn(quadratic, fn));

    for (auto order : {CompositorOrder::RhoFirst, CompositorOrder::VdgFirst}) {
        CHECK_FALSE(find_compositor_violation(Compositor::sum(order)));
        CHECK_FALSE(find_compositor_violation(Compositor::log_sum(order)));
        CHECK_FALSE(find_compositor_violation(Compositor::exp_product(order)));
    }
}

TEST_CASE("composites are monotone along rays") {
    for (auto kind : kKinds) {
        const LyapunovFn fn(kind, {1, 1, 1, 1});
        for (auto comp : {Compositor::sum(), Compositor::log_sum(CompositorOrder::VdgFirst),
                          Compositor::exp_product()}) {
            const CompositeLyapunovFn V(comp, fn);
            double prev = -1.0;
            for (double rho = 0.0; rho < 5.0; rho += 0.25) {
                const double v = V.value({rho, 0.3, -0.2});
                REQUIRE(v > prev);
                prev = v;
            }
            prev = -1.0;
            for (double a = 0.0; a < 1.5; a += 0.1) {
                const double v = V.value({1.0, a, a});
                REQUIRE(v > prev);
                prev = v;
            }
        }
    }
}

TEST_CASE("composite derivative is negative off the origin") {
    for (auto kind : kKinds) {
        const LyapunovFn fn(kind, {1.0, 0.9, 1.4, 1.2});
        for (auto comp : {Compositor::sum(), Compositor::log_sum(), Compositor::exp_product(CompositorOrder::VdgFirst)}) {
            const CompositeLyapunovFn V(comp, fn);
            SampleDomain dom;
            dom.angle_bound = 1.0;
            dom.barrier_margin = 2.0;
            dom.rho_max = 3.0;
            for (const auto& p : sample_states(fn.space(), 500, 17, dom)) {
                REQUIRE(V.v_dot(p) < 0.0);
            }
            CHECK(V.v_dot({1.0, 0.0, 0.0}) < 0.0);
        }
    }
}
