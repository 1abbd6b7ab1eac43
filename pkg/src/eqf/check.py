"""Fast self-diagnostics over the library's core identities.

Each check draws a modest random sample, evaluates an exact identity the
implementation is supposed to satisfy, and reports the worst residual
against its tolerance.  Intended for `eqf check` and smoke tests; the full
test suite runs the same identities at much larger sample sizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import filter as flt
from .filter import ConcentratedGaussian, chart_sensitivity, verify_linearization
from .groups import Sim3
from .kinematics import (KinematicInput, KinematicState, make_model,
                         input_action, lift, measure, state_action, step)


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self):
        return self.residual < self.tolerance


def _sample_algebra(rng, n):
    v = rng.normal(size=(n, 7))
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    return v * np.minimum(1.0, 2.0 / norms)


def _sample_state(rng):
    p = rng.normal(size=3) * 20.0
    while np.linalg.norm(p) < 1.0:
        p = rng.normal(size=3) * 20.0
    return KinematicState(p, rng.normal(size=3) * 2.0)


def _sample_input(rng):
    return KinematicInput(rng.normal(size=3), rng.normal(size=3))


def _group_axioms(rng, n=200):
    worst = 0.0
    for _ in range(n):
        a, b, c = (Sim3.exp(v) for v in _sample_algebra(rng, 3))
        lhs, rhs = (a * b) * c, a * (b * c)
        worst = max(worst,
                    np.abs(lhs.matrix() - rhs.matrix()).max(),
                    np.abs((a * a.inverse()).matrix() - np.eye(4)).max())
    return worst


def _exp_log(rng, n=200):
    worst = 0.0
    for v in _sample_algebra(rng, n):
        worst = max(worst, np.abs(Sim3.exp(v).log() - v).max())
    return worst


def _adjoint(rng, n=200):
    worst = 0.0
    for _ in range(n):
        a, b = (Sim3.exp(v) for v in _sample_algebra(rng, 2))
        worst = max(worst, np.abs((a * b).adjoint() - a.adjoint() @ b.adjoint()).max())
    return worst


def _action_axioms(rng, n=200):
    worst = 0.0
    for _ in range(n):
        X, Z = (Sim3.exp(v) for v in _sample_algebra(rng, 2))
        xi, u = _sample_state(rng), _sample_input(rng)
        ab = state_action(X, state_action(Z, xi))
        ba = state_action(Z * X, xi)
        worst = max(worst, np.abs(ab.as_vector() - ba.as_vector()).max())
        ua = input_action(X, input_action(Z, u))
        ub = input_action(Z * X, u)
        worst = max(worst, np.abs(ua.omega - ub.omega).max(),
                    np.abs(ua.accel - ub.accel).max())
    return worst


def _lift_condition(rng, n=200, dt=0.01):
    worst = 0.0
    for _ in range(n):
        xi, u = _sample_state(rng), _sample_input(rng)
        flow = step(xi, u, dt)
        lifted = state_action(lift(xi, u, dt), xi)
        worst = max(worst, np.abs(flow.as_vector() - lifted.as_vector()).max())
    return worst


def _equivariance(rng, n=200, dt=0.01):
    worst = 0.0
    for _ in range(n):
        X = Sim3.exp(_sample_algebra(rng, 1)[0])
        xi, u = _sample_state(rng), _sample_input(rng)
        lhs = step(state_action(X, xi), input_action(X, u), dt)
        rhs = state_action(X, step(xi, u, dt))
        worst = max(worst, np.abs(lhs.as_vector() - rhs.as_vector()).max())
    return worst


def _output_equivariance(rng, n=200):
    worst = 0.0
    for _ in range(n):
        X = Sim3.exp(_sample_algebra(rng, 1)[0])
        xi = _sample_state(rng)
        y = measure(xi)
        ya = measure(state_action(X, xi))
        worst = max(worst,
                    np.abs(ya.bearing - X.R.T @ y.bearing).max(),
                    abs(ya.range - y.range / X.scale))
    return worst


def _chart_roundtrip(rng, n=200):
    model = make_model(KinematicState(np.array([0.0, 0.0, 50.0]), np.zeros(3)), 0.01)
    worst = 0.0
    for _ in range(n):
        eps = rng.normal(size=6) * 0.15
        back = model.chart_inv(model.chart(eps))
        worst = max(worst, np.abs(back - eps).max())
    return worst


def _linearization(rng, n=20):
    model = make_model(KinematicState(np.array([0.0, 0.0, 50.0]), np.zeros(3)), 0.01)
    worst = 0.0
    for _ in range(n):
        ref = Sim3.exp(0.1 * _sample_algebra(rng, 1)[0])
        u = _sample_input(rng)
        dev_a, dev_c = verify_linearization(model, ref, u)
        worst = max(worst, dev_a, dev_c)
    return worst


def _error_dynamics(rng, n_steps=200, dt=0.01):
    origin = KinematicState(np.array([0.0, 0.0, 50.0]), np.zeros(3))
    model = make_model(origin, dt)
    cov = 0.5 * np.eye(6)
    belief = ConcentratedGaussian(Sim3.identity(), np.zeros(6), cov)
    xi = KinematicState(origin.p + rng.normal(size=3),
                        origin.v + rng.normal(size=3) * 0.3)
    err = flt.equivariant_error(model, belief.ref, xi)
    P = 1e-6 * np.eye(6)
    Q = np.diag([1e-4, 1e-4, 1e-4, 0.5])
    worst = 0.0
    for k in range(n_steps):
        u = KinematicInput(np.zeros(3), np.array([0.0, np.cos(k * dt), 0.0]))
        u0 = flt.origin_input(model, belief.ref, u)
        xi = step(xi, u, dt)
        belief = flt.predict(belief, model, u, P)
        y = measure(xi).stacked()
        y = y + np.concatenate([rng.normal(size=3) * 1e-3, [rng.normal() * 0.2]])
        belief = flt.update(belief, model, y, Q)
        delta = model.coords_to_algebra @ belief.mean
        belief = flt.reset(belief, model)
        err = flt.error_dynamics_step(model, err, u0, delta)
        direct = flt.equivariant_error(model, belief.ref, xi)
        worst = max(worst, np.abs(err.as_vector() - direct.as_vector()).max())
    return worst


def _reset_congruence(rng, n=50):
    origin = KinematicState(np.array([0.0, 0.0, 50.0]), np.zeros(3))
    model = make_model(origin, 0.01)
    worst = 0.0
    for _ in range(n):
        A = rng.normal(size=(6, 6)) * 0.3
        cov = A @ A.T + 0.1 * np.eye(6)
        mu = rng.normal(size=6) * 0.05
        belief = ConcentratedGaussian(Sim3.exp(0.1 * _sample_algebra(rng, 1)[0]), mu, cov)
        after = flt.reset(belief, model)
        delta = model.coords_to_algebra @ mu
        T = (model.algebra_to_coords @ Sim3.exp(0.5 * delta).adjoint()
             @ model.coords_to_algebra)
        expected = T @ cov @ T.T
        worst = max(worst, np.abs(after.cov - expected).max())
    return worst


def run_checks(seed=0):
    """Run every self-check; returns a list of CheckResult."""
    rng = np.random.default_rng(seed)
    return [
        CheckResult("group axioms", _group_axioms(rng), 1e-12),
        CheckResult("exp/log roundtrip", _exp_log(rng), 1e-9),
        CheckResult("adjoint homomorphism", _adjoint(rng), 1e-10),
        CheckResult("action axioms", _action_axioms(rng), 1e-10),
        CheckResult("lift condition", _lift_condition(rng), 1e-9),
        CheckResult("system equivariance", _equivariance(rng), 1e-9),
        CheckResult("output equivariance", _output_equivariance(rng), 1e-9),
        CheckResult("chart roundtrip", _chart_roundtrip(rng), 1e-9),
        CheckResult("linearization vs finite differences", _linearization(rng), 1e-5),
        CheckResult("error dynamics identity", _error_dynamics(rng), 1e-7),
        CheckResult("reset covariance congruence", _reset_congruence(rng), 1e-12),
    ]


def format_results(results):
    lines = []
    width = max(len(r.name) for r in results)
    for r in results:
        status = "ok  " if r.passed else "FAIL"
        lines.append(f"{status}  {r.name.ljust(width)}  residual {r.residual:.3e}"
                     f"  tolerance {r.tolerance:.1e}")
    return "\n".join(lines)
