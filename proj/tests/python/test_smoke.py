import json
import math

import pytest

import polarpark as pp


def test_polar_round_trip():
    p = pp.cart_to_polar(pp.CartesianState(-1.0, 0.0, 0.0))
    assert p.rho == pytest.approx(1.0)
    c = pp.polar_to_cart(pp.PolarState(2.0, 0.3, -0.4))
    back = pp.cart_to_polar(c)
    assert back.delta == pytest.approx(0.3)
    assert back.gamma == pytest.approx(-0.4)


def test_origin_raises():
    with pytest.raises(ValueError):
        pp.cart_to_polar(pp.CartesianState(0.0, 0.0, 1.0))


def test_frozen_steering_and_clf():
    spec = pp.ControllerSpec(pp.ControllerKind.GloBa, pp.Gains(1, 1, 1, 1))
    assert pp.omega_tilde(spec, 1.0, 0.0) == pytest.approx(1.36143980337138284, rel=1e-13)
    fn = pp.LyapunovFn(pp.ControllerKind.GloBa, pp.Gains(1, 1, 1, 1))
    assert fn.value(1.0, 0.0) == pytest.approx(1.30644457082827466, rel=1e-13)
    assert fn.v_dot(1.0, 0.0) < 0


def test_barrier_raises():
    fn = pp.LyapunovFn(pp.ControllerKind.BAgAl, pp.Gains(1, 1, 1, 1))
    with pytest.raises(ValueError):
        fn.value(math.pi, 0.0)


def test_simulate_captures():
    spec = pp.ControllerSpec(pp.ControllerKind.BoLSA, pp.Gains(1, 1, 1, 1))
    traj = pp.simulate(spec, pp.PolarState(2.0, 1.0, -1.0), pp.SimConfig())
    assert traj.status == pp.SimStatus.Captured
    assert traj.max_lyapunov_increase() <= 1e-8


def test_lemma_report():
    rep = pp.check_lemma1([1.0, 2.0], [0.1 * i for i in range(-30, 31)])
    assert rep["pass"]
    assert set(rep) >= {"check", "grid", "gains", "worst_point", "worst_margin", "pass"}
    json.dumps(rep)
