"""Symmetry-based filtering on a homogeneous space.

The estimator tracks a group element ref (the lifted state estimate) and a
Gaussian in local coordinates around the point ref acts the chart origin to:
mean mu and covariance cov describe the state error expressed through the
model chart.  A filter cycle is

    predict -> update -> reset

where predict moves ref with the lifted dynamics and propagates cov through
the linearized error dynamics, update fuses a measurement in information
form producing a nonzero mu, and reset moves ref by exp(K mu) so mu returns
to zero, transporting cov along the correction.

All maps that depend on the concrete system come in through SystemModel.
Derivatives are taken from the model when analytic forms are supplied and
fall back to central finite differences otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, NamedTuple, Optional

import numpy as np


class ChartDomainError(ValueError):
    """Raised when a state or correction leaves the model chart's domain."""


@dataclass(frozen=True)
class SystemModel:
    """Bundle of system maps and structure matrices for one filter setup.

    group            group class; needs identity(), exp(v), elements with
                     *, inverse(), adjoint(), log()
    origin           fixed chart origin (a state)
    coords_dim       dimension m of the local coordinates
    algebra_dim      dimension of the group's algebra
    phi(X, xi)       right group action on states:
                     phi(Y, phi(X, xi)) = phi(X * Y, xi)
    psi(X, u)        matching action on inputs
    lift(xi, u)      group element whose action at xi reproduces one step
                     of the dynamics: phi(lift(xi, u), xi) = transition(xi, u)
    transition(xi, u)  one step of the discrete dynamics
    output(xi)       stacked measurement vector
    chart(eps)       local coordinates -> state (eps = 0 gives origin)
    chart_inv(xi)    state -> local coordinates
    coords_to_algebra    matrix K, local coordinates -> algebra vectors
    algebra_to_coords    left inverse of K projecting along the stabilizer
    state_to_vec / vec_to_state   flat embedding used by finite differences
    transition_diff(xi, u), action_diff(X, xi), output_diff(xi), chart_diff
                     optional analytic Jacobians (embedding coordinates);
                     chart_diff is the derivative of chart at eps = 0
    """

    group: type
    origin: Any
    coords_dim: int
    algebra_dim: int
    phi: Callable
    psi: Callable
    lift: Callable
    transition: Callable
    output: Callable
    chart: Callable
    chart_inv: Callable
    coords_to_algebra: np.ndarray
    algebra_to_coords: np.ndarray
    state_to_vec: Optional[Callable] = None
    vec_to_state: Optional[Callable] = None
    transition_diff: Optional[Callable] = None
    action_diff: Optional[Callable] = None
    output_diff: Optional[Callable] = None
    chart_diff: Optional[np.ndarray] = None


@dataclass(frozen=True)
class ConcentratedGaussian:
    """Belief (ref, mean, cov) with cov kept symmetric positive-definite."""

    ref: Any
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise ValueError("covariance shape does not match the mean")
        drift = np.linalg.norm(cov - cov.T)
        if drift > 1e-8 * (1.0 + np.linalg.norm(cov)):
            raise ValueError("covariance is not symmetric")
        cov = (cov + cov.T) / 2.0
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise ValueError("covariance is not positive-definite") from None
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)


class Linearization(NamedTuple):
    A: np.ndarray
    C: np.ndarray


def _fd_jacobian(f, x, step=1e-6):
    """Central-difference Jacobian of f at x."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        d = np.zeros(x.size)
        d[i] = step
        hi = np.asarray(f(x + d), dtype=float)
        lo = np.asarray(f(x - d), dtype=float)
        cols.append((hi - lo) / (2.0 * step))
    return np.column_stack(cols)


def _chart_diff(model):
    if model.chart_diff is not None:
        return model.chart_diff
    return _fd_jacobian(lambda e: model.state_to_vec(model.chart(e)),
                        np.zeros(model.coords_dim))

def _transition_diff(model, xi, u):
    if model.transition_diff is not None:
        return model.transition_diff(xi, u)
    x0 = model.state_to_vec(xi)
    return _fd_jacobian(
        lambda x: model.state_to_vec(model.transition(model.vec_to_state(x), u)), x0)

def _action_diff(model, X, xi):
    if model.action_diff is not None:
        return model.action_diff(X, xi)
    x0 = model.state_to_vec(xi)
    return _fd_jacobian(
        lambda x: model.state_to_vec(model.phi(X, model.vec_to_state(x))), x0)

def _output_diff(model, xi):
    if model.output_diff is not None:
        return model.output_diff(xi)
    x0 = model.state_to_vec(xi)
    return _fd_jacobian(lambda x: model.output(model.vec_to_state(x)), x0)

def _pull_to_coords(Mc, rows):
    # invert the chart derivative on the left: coords <- embedding
    if Mc.shape[0] == Mc.shape[1]:
        return np.linalg.solve(Mc, rows)
    return np.linalg.pinv(Mc) @ rows


def equivariant_error(model, ref, xi):
    """State error e = phi(ref^-1, xi); equals origin when xi matches ref."""
    return model.phi(ref.inverse(), xi)


def origin_input(model, ref, u):
    """Input seen from the chart origin: psi(ref^-1, u)."""
    return model.psi(ref.inverse(), u)


def error_dynamics_step(model, err, u_origin, delta):
    """Propagate a state error one step.

    err evolves with the group element lift(err, u0) * lift(origin, u0)^-1
    * exp(-delta); delta is the correction applied to the reference on the
    same step (zero between updates).
    """
    g = (model.lift(err, u_origin)
         * model.lift(model.origin, u_origin).inverse()
         * model.group.exp(-np.asarray(delta, dtype=float)))
    return model.phi(g, err)


def state_matrix(model, u_origin):
    """Linearization A of the error dynamics at the origin.

    The error map factors exactly as phi_{lift(origin,u0)^-1} o transition_{u0}
    through the lift condition, so A is the chart-conjugated product of the
    action and transition Jacobians.
    """
    lam = model.lift(model.origin, u_origin)
    xi_next = model.transition(model.origin, u_origin)
    DF = _transition_diff(model, model.origin, u_origin)
    Dphi = _action_diff(model, lam.inverse(), xi_next)
    Mc = _chart_diff(model)
    return _pull_to_coords(Mc, Dphi @ DF @ Mc)


def output_matrix(model, ref):
    """Linearization C of the output map in local coordinates at ref."""
    xi_hat = model.phi(ref, model.origin)
    Dh = _output_diff(model, xi_hat)
    Dphi = _action_diff(model, ref, model.origin)
    return Dh @ Dphi @ _chart_diff(model)


def linearize(model, ref, u):
    """A and C for the current reference and raw input."""
    return Linearization(state_matrix(model, origin_input(model, ref, u)),
                         output_matrix(model, ref))


def chart_sensitivity(model, ref):
    """Jacobian of local coordinates w.r.t. state perturbations at the estimate.

    Maps covariances expressed in the state embedding (e.g. physical noise)
    into the chart: cov_coords = J cov_state J^T.
    """
    xi_hat = model.phi(ref, model.origin)
    J = _action_diff(model, ref.inverse(), xi_hat)
    return _pull_to_coords(_chart_diff(model), J)


def _require_zero_mean(belief, op):
    if np.any(belief.mean != 0.0):
        raise ValueError(f"{op} expects a reset belief (mean zero)")


def predict(belief, model, u, P):
    """Propagate the belief one step with input u and process covariance P.

    P is a covariance in chart coordinates, or a callable mapping the
    propagated reference to one (noise models that depend on where the
    reference lands).
    """
    _require_zero_mean(belief, "predict")
    u0 = model.psi(belief.ref.inverse(), u)
    A = state_matrix(model, u0)
    xi_hat = model.phi(belief.ref, model.origin)
    ref_next = belief.ref * model.lift(xi_hat, u)
    if callable(P):
        P = P(ref_next)
    cov = A @ belief.cov @ A.T + np.asarray(P, dtype=float)
    return ConcentratedGaussian(ref_next, np.zeros(model.coords_dim), cov)


def fuse(cov, C, Q, residual):
    """Information-form Gaussian fusion; returns (posterior cov, mean)."""
    Q = np.asarray(Q, dtype=float)
    try:
        np.linalg.cholesky(Q)
    except np.linalg.LinAlgError:
        raise ValueError("measurement covariance must be positive-definite") from None
    Qinv = np.linalg.inv(Q)
    info = np.linalg.inv(cov) + C.T @ Qinv @ C
    post = np.linalg.inv(info)
    post = (post + post.T) / 2.0
    mean = post @ (C.T @ (Qinv @ np.asarray(residual, dtype=float)))
    return post, mean


def update(belief, model, y, Q, C=None):
    """Fuse a measurement y with covariance Q; the result carries mu != 0."""
    _require_zero_mean(belief, "update")
    xi_hat = model.phi(belief.ref, model.origin)
    residual = np.asarray(y, dtype=float) - model.output(xi_hat)
    if C is None:
        C = output_matrix(model, belief.ref)
    cov, mean = fuse(belief.cov, C, Q, residual)
    return ConcentratedGaussian(belief.ref, mean, cov)


def reset(belief, model, transport=True, max_step=1.0):
    """Move the correction mu into the reference and rezero the mean.

    The covariance is carried to the new reference by parallel transport
    along the reset curve exp(t delta) ref.  Perturbations enter the belief
    as exp(K eps) ref, so coordinate vectors are right-trivialized algebra
    vectors, and in that trivialization the torsion-free invariant
    connection transports by the adjoint of exp(+delta/2) (conjugated into
    chart coordinates through the model structure matrices).  This agrees
    to first order with the exact reparametrization Jacobian of the chart
    change, d exp(delta) = Ad_{exp(delta/2)} sinch(ad_{delta/2}).
    transport=False keeps the covariance entries unchanged (ablation).
    """
    mu = belief.mean
    if not mu.any():
        return belief
    if np.linalg.norm(mu) > max_step:
        raise ChartDomainError(
            "correction leaves the chart domain; run the filter with smaller "
            "steps or a higher update rate")
    delta = model.coords_to_algebra @ mu
    half = model.group.exp(delta / 2.0)
    # exp(delta) = exp(delta/2)^2, one exponential instead of two
    ref_next = (half * half) * belief.ref
    cov = belief.cov
    if transport:
        T = model.algebra_to_coords @ half.adjoint() @ model.coords_to_algebra
        cov = T @ cov @ T.T
    return ConcentratedGaussian(ref_next, np.zeros_like(mu), cov)


def filter_energy(eps, cov):
    """Normalized squared error (1/m) eps^T cov^-1 eps; 1 for a consistent filter."""
    eps = np.asarray(eps, dtype=float)
    return float(eps @ np.linalg.solve(cov, eps)) / eps.size


def verify_linearization(model, ref, u, step=1e-6):
    """Relative deviation of A and C from central differences of the exact maps.

    Returns (dev_A, dev_C); both should sit well below 1e-5 when the model's
    analytic Jacobians are consistent with its nonlinear maps.
    """
    u0 = origin_input(model, ref, u)
    A = state_matrix(model, u0)
    C = output_matrix(model, ref)
    zero = np.zeros(model.coords_dim)
    no_corr = np.zeros(model.algebra_dim)

    def err_map(e):
        return model.chart_inv(error_dynamics_step(model, model.chart(e), u0, no_corr))

    def out_map(e):
        return model.output(model.phi(ref, model.chart(e)))

    A_fd = _fd_jacobian(err_map, zero, step)
    C_fd = _fd_jacobian(out_map, zero, step)
    dev_a = np.linalg.norm(A - A_fd) / np.linalg.norm(A_fd)
    dev_c = np.linalg.norm(C - C_fd) / max(np.linalg.norm(C_fd), 1e-300)
    return dev_a, dev_c


class EquivariantFilter:
    """Stateful convenience wrapper running predict/update/reset cycles.

    transport=False skips the covariance transport in the reset (the
    reference still moves).  verify_jacobians=True cross-checks the analytic
    A and C against finite differences on every step and raises if they
    disagree by more than verify_rtol in relative Frobenius norm.
    """

    def __init__(self, model, belief, transport=True, max_step=1.0,
                 verify_jacobians=False, verify_rtol=1e-5):
        self.model = model
        self.belief = belief
        self.transport = transport
        self.max_step = max_step
        self.verify_jacobians = verify_jacobians
        self.verify_rtol = verify_rtol

    @property
    def estimate(self):
        return self.model.phi(self.belief.ref, self.model.origin)

    def predict(self, u, P):
        if self.verify_jacobians:
            dev_a, dev_c = verify_linearization(self.model, self.belief.ref, u)
            if dev_a > self.verify_rtol or dev_c > self.verify_rtol:
                raise RuntimeError(
                    f"linearization check failed: A dev {dev_a:.3e}, C dev {dev_c:.3e}")
        self.belief = predict(self.belief, self.model, u, P)

    def update(self, y, Q):
        self.belief = update(self.belief, self.model, y, Q)

    def reset(self):
        self.belief = reset(self.belief, self.model, transport=self.transport,
                            max_step=self.max_step)

    def step(self, u, y, P, Q):
        self.predict(u, P)
        self.update(y, Q)
        self.reset()

    def energy(self, true_state):
        eps = self.model.chart_inv(
            equivariant_error(self.model, self.belief.ref, true_state))
        return filter_energy(eps, self.belief.cov)
