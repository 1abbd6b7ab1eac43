"""Second-order point kinematics under a rotation/scaling/velocity symmetry.

State: position p and velocity v of a tracked point in R^3.  Discrete
dynamics with sample time dt, angular-velocity input omega and acceleration
input a:

    p+ = p + dt (v + omega) + dt^2/2 a
    v+ = v + dt a

The symmetry group is Sim3 acting on the right:

    state_action((R, r, t), (p, v)) = ((1/r) R^T p, (1/r) R^T (v - t))
    input_action((R, r, t), (omega, a)) = ((1/r) R^T (omega + t), (1/r) R^T a)

The action is transitive on states with p != 0, so a filter can track any
such state through a group element acting on a fixed origin.  Outputs are
the bearing p/|p| and the range |p|.

OriginChart builds local coordinates around an origin state: it selects a
horizontal complement of the stabilizer algebra at the origin and composes
the group exponential with the action.  make_model wires everything into a
filter.SystemModel with analytic Jacobians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .filter import ChartDomainError, SystemModel
from .groups import (DomainError, Sim3, rotation_between, skew, tangent_frame,
                     _cross3, _translation_factor)


@dataclass(frozen=True)
class KinematicState:
    """Position and velocity of the tracked point."""

    p: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float).reshape(3))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float).reshape(3))

    def as_vector(self):
        return np.concatenate([self.p, self.v])

    @classmethod
    def from_vector(cls, x):
        x = np.asarray(x, dtype=float).reshape(6)
        return cls(x[:3], x[3:])


@dataclass(frozen=True)
class KinematicInput:
    """Angular-velocity and acceleration inputs."""

    omega: np.ndarray
    accel: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "omega", np.asarray(self.omega, dtype=float).reshape(3))
        object.__setattr__(self, "accel", np.asarray(self.accel, dtype=float).reshape(3))


@dataclass(frozen=True)
class BearingRange:
    """Unit bearing vector and range to the tracked point."""

    bearing: np.ndarray
    range: float

    def __post_init__(self):
        object.__setattr__(self, "bearing", np.asarray(self.bearing, dtype=float).reshape(3))
        object.__setattr__(self, "range", float(self.range))

    def stacked(self):
        return np.concatenate([self.bearing, [self.range]])


def step(state, u, dt):
    """One step of the discrete dynamics."""
    p = state.p + dt * (state.v + u.omega) + 0.5 * dt * dt * u.accel
    return KinematicState(p, state.v + dt * u.accel)


def state_action(X, state):
    """Right action of Sim3 on states."""
    k = X.R.T / X.scale
    return KinematicState(k @ state.p, k @ (state.v - X.trans))


def input_action(X, u):
    """Right action of Sim3 on inputs, compatible with the dynamics."""
    k = X.R.T / X.scale
    return KinematicInput(k @ (u.omega + X.trans), k @ u.accel)


def lift(state, u, dt):
    """Group element reproducing one dynamics step through the action.

    state_action(lift(xi, u), xi) == step(xi, u, dt).  Undefined when the
    position is at or passes through the observer (zero norm).
    """
    p = state.p
    pn = math.sqrt(float(p @ p))
    if pn == 0.0:
        raise DomainError("lift undefined at zero position")
    p_next = p + dt * (state.v + u.omega) + 0.5 * dt * dt * u.accel
    qn = math.sqrt(float(p_next @ p_next))
    if qn == 0.0:
        raise DomainError("lift undefined: the step passes through zero position")
    R = rotation_between(p_next / qn, p / pn)
    r = pn / qn
    beta = state.v - r * (R @ (state.v + dt * u.accel))
    return Sim3(R, r, beta)


def bearing(state):
    """Unit vector toward the point; undefined at zero position."""
    n = math.sqrt(float(state.p @ state.p))
    if n == 0.0:
        raise DomainError("bearing undefined at zero position")
    return state.p / n


def range_to(state):
    """Distance to the point."""
    return math.sqrt(float(state.p @ state.p))


def measure(state):
    return BearingRange(bearing(state), range_to(state))


def output(state):
    """Stacked measurement vector [bearing, range]."""
    return measure(state).stacked()


def output_diff(state):
    """Jacobian of output w.r.t. (p, v); bearing rows are tangent to the sphere."""
    n = math.sqrt(float(state.p @ state.p))
    if n == 0.0:
        raise DomainError("output undefined at zero position")
    y = state.p / n
    Dh = np.zeros((4, 6))
    Dh[:3, :3] = (np.eye(3) - np.outer(y, y)) / n
    Dh[3, :3] = y
    return Dh


class OriginChart:
    """Local coordinates on states around a fixed origin with nonzero position.

    Coordinates eps in R^6 are (rotation about the two directions transverse
    to the origin bearing, log scale, three velocity-offset components); the
    chart is eps -> state_action(Sim3.exp(B eps), origin).  B spans a
    complement of the stabilizer algebra at the origin, so the chart is a
    local diffeomorphism with a closed-form inverse.
    """

    def __init__(self, origin):
        pn = np.linalg.norm(origin.p)
        if pn == 0.0:
            raise ChartDomainError("chart origin needs a nonzero position")
        self.origin = origin
        self.rho = pn
        self.nhat = origin.p / pn
        t1, t2 = tangent_frame(self.nhat)
        self.frame = (t1, t2)

        B = np.zeros((7, 6))
        B[0:3, 0] = t1
        B[0:3, 1] = t2
        B[3, 2] = 1.0
        B[4:7, 3:6] = np.eye(3)
        self.B = B

        # derivative of the action at the identity, algebra -> state tangent
        D = np.zeros((6, 7))
        D[0:3, 0:3] = skew(origin.p)
        D[0:3, 3] = -origin.p
        D[3:6, 0:3] = skew(origin.v)
        D[3:6, 3] = -origin.v
        D[3:6, 4:7] = -np.eye(3)
        self.action_diff_origin = D

        self.M = D @ B
        self._Minv = np.linalg.inv(self.M)

    def to_state(self, eps):
        eps = np.asarray(eps, dtype=float).reshape(6)
        return state_action(Sim3.exp(self.B @ eps), self.origin)

    def to_coords(self, state):
        """Closed-form chart inverse.

        Splits off the unique minimal rotation carrying the state bearing to
        the origin bearing (its axis is transverse to both), then solves the
        scale and velocity parts exactly.  Fails when the state position is
        zero or opposite the origin bearing.
        """
        pn = math.sqrt(float(state.p @ state.p))
        if pn == 0.0:
            raise ChartDomainError("state outside chart: zero position")
        phat = state.p / pn
        c = float(phat @ self.nhat)
        if c <= -1.0 + 1e-12:
            raise ChartDomainError("state outside chart: bearing opposite the origin")
        k = _cross3(phat, self.nhat)
        sn = math.sqrt(float(k @ k))
        omega = np.zeros(3) if sn < 1e-12 else (np.arctan2(sn, c) / sn) * k
        s = math.log(self.rho / pn)
        X = Sim3.exp(np.concatenate([omega, [s], np.zeros(3)]))
        beta = self.origin.v - X.scale * (X.R @ state.v)
        b = np.linalg.solve(_translation_factor(s, omega), beta)
        t1, t2 = self.frame
        return np.array([omega @ t1, omega @ t2, s, b[0], b[1], b[2]])

    def coords_diff(self):
        """Derivative of to_state at eps = 0 in the (p, v) embedding."""
        return self.M

    def tangent_to_algebra(self, w):
        """Right inverse of the action derivative with image in the chart plane."""
        return self.B @ (self._Minv @ np.asarray(w, dtype=float))

    def sensitivity(self, X):
        """Chart coordinates per state perturbation at the moved origin.

        For a reference X, perturbing the state phi(X, origin) by dxi moves
        the local coordinates by sensitivity(X) @ dxi.
        """
        k = X.scale * X.R
        J = np.zeros((6, 6))
        J[:3, :3] = k
        J[3:, 3:] = k
        return self._Minv @ J


def transition_matrix(dt):
    """Jacobian of step w.r.t. (p, v) (constant in the state)."""
    F = np.eye(6)
    F[0:3, 3:6] = dt * np.eye(3)
    return F


def action_matrix(X):
    """Jacobian of state_action w.r.t. (p, v) (block diagonal, state-free)."""
    k = X.R.T / X.scale
    J = np.zeros((6, 6))
    J[:3, :3] = k
    J[3:, 3:] = k
    return J


def make_model(origin, dt):
    """filter.SystemModel for the bearing/range tracking problem."""
    chart = OriginChart(origin)
    Ftr = transition_matrix(dt)
    K = chart.B
    Kinv = chart._Minv @ chart.action_diff_origin
    return SystemModel(
        group=Sim3,
        origin=origin,
        coords_dim=6,
        algebra_dim=7,
        phi=state_action,
        psi=input_action,
        lift=lambda xi, u: lift(xi, u, dt),
        transition=lambda xi, u: step(xi, u, dt),
        output=output,
        chart=chart.to_state,
        chart_inv=chart.to_coords,
        coords_to_algebra=K,
        algebra_to_coords=Kinv,
        state_to_vec=lambda s: s.as_vector(),
        vec_to_state=KinematicState.from_vector,
        transition_diff=lambda xi, u: Ftr,
        action_diff=lambda X, xi: action_matrix(X),
        output_diff=output_diff,
        chart_diff=chart.M,
    )
