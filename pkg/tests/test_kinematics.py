"""Second-order kinematics example: dynamics, symmetry actions, lift, chart."""

import numpy as np
import pytest

from eqf.filter import ChartDomainError
from eqf.groups import DomainError, Sim3, rotation_between
from eqf.kinematics import (BearingRange, KinematicInput, KinematicState,
                            OriginChart, bearing, input_action, lift, measure,
                            output, output_diff, range_to, state_action, step)

DT = 0.01


def sample_state(rng, pos_scale=30.0, vel_scale=3.0):
    p = rng.normal(size=3) * pos_scale
    while np.linalg.norm(p) < 1.0:
        p = rng.normal(size=3) * pos_scale
    return KinematicState(p, rng.normal(size=3) * vel_scale)


def sample_input(rng):
    return KinematicInput(rng.normal(size=3), rng.normal(size=3))


def sample_group(rng, scale=0.7):
    return Sim3.exp(rng.normal(size=7) * scale)


def test_dynamics_zero_input_zero_velocity():
    xi = KinematicState([0, 0, 50], [0, 0, 0])
    out = step(xi, KinematicInput([0, 0, 0], [0, 0, 0]), 0.37)
    assert np.array_equal(out.p, xi.p)
    assert np.array_equal(out.v, xi.v)


def test_dynamics_worked_example():
    xi = KinematicState([0, 0, 50], [1, 0, 0])
    out = step(xi, KinematicInput([0, 0, 0], [0, 2, 0]), 0.01)
    assert np.allclose(out.p, [0.01, 1e-4, 50.0], atol=1e-15)
    assert np.allclose(out.v, [1.0, 0.02, 0.0], atol=1e-15)


def test_dynamics_flow_property_constant_velocity():
    rng = np.random.default_rng(40)
    for _ in range(100):
        xi = sample_state(rng)
        u = KinematicInput(rng.normal(size=3), np.zeros(3))
        full = step(xi, u, 0.02)
        half = step(step(xi, u, 0.01), u, 0.01)
        assert np.allclose(full.as_vector(), half.as_vector(), atol=1e-12)


def test_dynamics_small_step_slope():
    # first-order slope matches the continuous kinematics pdot = v + omega, vdot = a
    rng = np.random.default_rng(41)
    t = 1e-6
    for _ in range(50):
        xi, u = sample_state(rng), sample_input(rng)
        out = step(xi, u, t)
        slope_p = (out.p - xi.p) / t
        slope_v = (out.v - xi.v) / t
        assert np.linalg.norm(slope_p - (xi.v + u.omega)) < 1e-4 * (1 + np.linalg.norm(xi.v))
        assert np.linalg.norm(slope_v - u.accel) < 1e-4 * (1 + np.linalg.norm(u.accel))


def test_state_action_worked_example():
    out = state_action(Sim3(np.eye(3), 2.0, np.zeros(3)),
                       KinematicState([0, 0, 50], [0, 0, 0]))
    assert np.allclose(out.p, [0, 0, 25], atol=1e-15)
    assert np.array_equal(out.v, np.zeros(3))


def test_state_action_axioms():
    rng = np.random.default_rng(42)
    e = Sim3.identity()
    worst = 0.0
    for _ in range(1000):
        X, Y = sample_group(rng), sample_group(rng)
        xi = sample_state(rng)
        assert np.array_equal(state_action(e, xi).as_vector(), xi.as_vector())
        lhs = state_action(Y, state_action(X, xi)).as_vector()
        rhs = state_action(X * Y, xi).as_vector()
        worst = max(worst, np.abs(lhs - rhs).max() / max(1.0, np.abs(rhs).max()))
    assert worst < 1e-10


def test_input_action_worked_example():
    out = input_action(Sim3(np.eye(3), 2.0, np.array([0., 0., 1.])),
                       KinematicInput([0, 0, 0], [0, 2, 0]))
    assert np.allclose(out.omega, [0, 0, 0.5], atol=1e-15)
    assert np.allclose(out.accel, [0, 1, 0], atol=1e-15)


def test_input_action_axioms():
    rng = np.random.default_rng(43)
    e = Sim3.identity()
    worst = 0.0
    for _ in range(1000):
        X, Y = sample_group(rng), sample_group(rng)
        u = sample_input(rng)
        out = input_action(e, u)
        assert np.array_equal(out.omega, u.omega) and np.array_equal(out.accel, u.accel)
        a = input_action(Y, input_action(X, u))
        b = input_action(X * Y, u)
        err = max(np.abs(a.omega - b.omega).max(), np.abs(a.accel - b.accel).max())
        worst = max(worst, err / max(1.0, np.abs(b.omega).max(), np.abs(b.accel).max()))
    assert worst < 1e-10


def test_system_equivariance():
    # step(phi_X xi, psi_X u) == phi_X step(xi, u): the symmetry carries solutions
    rng = np.random.default_rng(44)
    worst = 0.0
    for _ in range(1000):
        X, xi, u = sample_group(rng), sample_state(rng), sample_input(rng)
        lhs = step(state_action(X, xi), input_action(X, u), DT).as_vector()
        rhs = state_action(X, step(xi, u, DT)).as_vector()
        worst = max(worst, np.abs(lhs - rhs).max() / max(1.0, np.abs(rhs).max()))
    assert worst < 1e-9


def test_transitivity_explicit_construction():
    rng = np.random.default_rng(45)
    for _ in range(300):
        a, b = sample_state(rng), sample_state(rng)
        na, nb = np.linalg.norm(a.p), np.linalg.norm(b.p)
        R = rotation_between(b.p / nb, a.p / na)
        r = na / nb
        beta = a.v - r * (R @ b.v)
        moved = state_action(Sim3(R, r, beta), a)
        assert np.linalg.norm(moved.as_vector() - b.as_vector()) < 1e-9 * max(1.0, nb)


def test_lift_condition():
    rng = np.random.default_rng(46)
    worst = 0.0
    for _ in range(10_000):
        xi, u = sample_state(rng), sample_input(rng)
        lam = lift(xi, u, DT)
        got = state_action(lam, xi).as_vector()
        want = step(xi, u, DT).as_vector()
        worst = max(worst, np.abs(got - want).max() / max(1.0, np.abs(want).max()))
    assert worst < 1e-9


def test_lift_equivariance():
    rng = np.random.default_rng(47)
    worst = 0.0
    for _ in range(10_000):
        X, xi, u = sample_group(rng), sample_state(rng), sample_input(rng)
        lhs = lift(state_action(X, xi), input_action(X, u), DT)
        rhs = X.inverse() * lift(xi, u, DT) * X
        worst = max(worst, np.abs(lhs.matrix() - rhs.matrix()).max())
    assert worst < 1e-9


def test_lift_trivial_at_rest():
    lam = lift(KinematicState([0, 0, 50], [0, 0, 0]),
               KinematicInput([0, 0, 0], [0, 0, 0]), DT)
    assert np.array_equal(lam.R, np.eye(3))
    assert lam.scale == 1.0
    assert np.array_equal(lam.trans, np.zeros(3))


def test_lift_rejects_degenerate_positions():
    with pytest.raises(DomainError):
        lift(KinematicState([0, 0, 0], [0, 0, 0]),
             KinematicInput([0, 0, 0], [0, 0, 0]), DT)
    # velocity that lands the position exactly at zero after one step
    xi = KinematicState([1.0, 0, 0], [-100.0, 0, 0])
    with pytest.raises(DomainError):
        lift(xi, KinematicInput([0, 0, 0], [0, 0, 0]), DT)


def test_outputs():
    xi = KinematicState([0, 0, 50], [1, 2, 3])
    assert np.allclose(bearing(xi), [0, 0, 1], atol=1e-15)
    assert range_to(xi) == 50.0
    y = measure(xi)
    assert isinstance(y, BearingRange)
    assert np.allclose(y.stacked(), [0, 0, 1, 50], atol=1e-15)
    assert np.array_equal(output(xi), y.stacked())
    with pytest.raises(DomainError):
        bearing(KinematicState([0, 0, 0], [0, 0, 0]))


def test_bearing_unit_norm_and_equivariance():
    rng = np.random.default_rng(48)
    for _ in range(300):
        xi = sample_state(rng)
        X = sample_group(rng)
        y1 = bearing(xi)
        assert abs(np.linalg.norm(y1) - 1.0) < 1e-12
        assert np.allclose(bearing(state_action(X, xi)), X.R.T @ y1, atol=1e-10)
        assert abs(range_to(state_action(X, xi)) - range_to(xi) / X.scale) < 1e-9


def test_output_diff_matches_fd():
    rng = np.random.default_rng(49)
    for _ in range(50):
        xi = sample_state(rng)
        Dh = output_diff(xi)
        x0 = xi.as_vector()
        fd = np.zeros((4, 6))
        h = 1e-6
        for i in range(6):
            d = np.zeros(6)
            d[i] = h
            fd[:, i] = (output(KinematicState.from_vector(x0 + d)) -
                        output(KinematicState.from_vector(x0 - d))) / (2 * h)
        assert np.abs(Dh - fd).max() < 1e-6
        # bearing rows tangent to the sphere at the bearing
        assert np.linalg.norm(bearing(xi) @ Dh[:3, :]) < 1e-12


ORIGIN = KinematicState([0.0, 0.0, 50.0], [0.0, 0.0, 0.0])


def test_chart_center():
    chart = OriginChart(ORIGIN)
    assert np.allclose(chart.to_state(np.zeros(6)).as_vector(), ORIGIN.as_vector(),
                       atol=1e-15)
    assert np.linalg.norm(chart.to_coords(ORIGIN)) < 1e-15


def test_chart_roundtrip_small_coords():
    rng = np.random.default_rng(50)
    chart = OriginChart(ORIGIN)
    worst = 0.0
    for _ in range(1000):
        eps = rng.normal(size=6)
        eps *= rng.uniform(0, 0.5) / np.linalg.norm(eps)
        worst = max(worst, np.abs(chart.to_coords(chart.to_state(eps)) - eps).max())
    assert worst < 1e-9


def test_chart_roundtrip_from_states():
    rng = np.random.default_rng(51)
    origin = KinematicState([5.0, -3.0, 40.0], [1.0, 0.0, -2.0])
    chart = OriginChart(origin)
    worst = 0.0
    for _ in range(1000):
        xi = sample_state(rng)
        back = chart.to_state(chart.to_coords(xi)).as_vector()
        worst = max(worst, np.abs(back - xi.as_vector()).max() / max(1.0, np.abs(xi.as_vector()).max()))
    assert worst < 1e-9


def test_chart_domain_errors():
    chart = OriginChart(ORIGIN)
    with pytest.raises(ChartDomainError):
        chart.to_coords(KinematicState([0, 0, 0], [0, 0, 0]))
    with pytest.raises(ChartDomainError):
        chart.to_coords(KinematicState([0, 0, -50.0], [0, 0, 0]))
    with pytest.raises(ChartDomainError):
        OriginChart(KinematicState([0, 0, 0], [1, 1, 1]))


def test_stabilizer_and_rank():
    rng = np.random.default_rng(52)
    for _ in range(50):
        origin = sample_state(rng)
        chart = OriginChart(origin)
        D = chart.action_diff_origin
        assert np.linalg.matrix_rank(D) == 6
        nhat = origin.p / np.linalg.norm(origin.p)
        gen = np.concatenate([nhat, [0.0], -np.cross(nhat, origin.v)])
        assert np.linalg.norm(D @ gen) < 1e-10 * max(1.0, np.abs(D).max())


def test_action_diff_origin_matches_fd():
    rng = np.random.default_rng(53)
    origin = sample_state(rng)
    chart = OriginChart(origin)
    D = chart.action_diff_origin
    h = 1e-7
    for _ in range(100):
        w = rng.normal(size=7)
        hi = state_action(Sim3.exp(h * w), origin).as_vector()
        lo = state_action(Sim3.exp(-h * w), origin).as_vector()
        assert np.linalg.norm(D @ w - (hi - lo) / (2 * h)) < 1e-4


def test_tangent_to_algebra_right_inverse():
    rng = np.random.default_rng(54)
    for _ in range(30):
        origin = sample_state(rng)
        chart = OriginChart(origin)
        nhat = origin.p / np.linalg.norm(origin.p)
        assert np.linalg.norm(chart.tangent_to_algebra(np.zeros(6))) == 0.0
        for w in rng.normal(size=(10, 6)):
            v = chart.tangent_to_algebra(w)
            assert np.linalg.norm(chart.action_diff_origin @ v - w) < 1e-10 * max(1.0, np.abs(w).max())
            assert abs(v[:3] @ nhat) < 1e-10  # rotation part stays in the horizontal plane
