"""Comparison filters.

A classical extended Kalman filter on R^6 = (p, v) with two interchangeable
update styles: linearizing the raw bearing/range output map at the predicted
state (ekf_update_bearing_range), or turning each bearing/range pair into a
reconstructed position measurement y2 * y1 with a first-order noise
covariance (ekf_update_position).  The linearized-output update pays for
large prior errors through its linearization point; the reconstructed one
does not, which makes it the stronger baseline in the transient.

Also here: a covariance-transport-free variant of the symmetry-based filter
(the reference still moves at reset, but the covariance entries are left
untouched).  All exist to quantify what the geometric treatment buys.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import filter as flt
from .groups import tangent_frame


@dataclass(frozen=True)
class EkfBelief:
    """Gaussian on flat state space: stacked (p, v) mean and 6x6 covariance.

    The covariance may be singular (e.g. a zero prior); it only has to be
    symmetric positive-semidefinite.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(6)
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (6, 6):
            raise ValueError("covariance must be 6x6")
        if np.linalg.norm(cov - cov.T) > 1e-8 * (1.0 + np.linalg.norm(cov)):
            raise ValueError("covariance is not symmetric")
        cov = (cov + cov.T) / 2.0
        if np.linalg.eigvalsh(cov).min() < -1e-10 * max(1.0, np.abs(cov).max()):
            raise ValueError("covariance is not positive-semidefinite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def p(self):
        return self.mean[:3]

    @property
    def v(self):
        return self.mean[3:]


def ekf_transition_matrix(dt):
    F = np.eye(6)
    F[0:3, 3:6] = dt * np.eye(3)
    return F


def ekf_predict(belief, accel, dt, P):
    """Propagate mean by the exact discrete dynamics and cov by F Sigma F^T + P."""
    accel = np.asarray(accel, dtype=float)
    p = belief.p + dt * belief.v + 0.5 * dt * dt * accel
    v = belief.v + dt * accel
    F = ekf_transition_matrix(dt)
    cov = F @ belief.cov @ F.T + np.asarray(P, dtype=float)
    return EkfBelief(np.concatenate([p, v]), cov)


def reconstructed_position(y1, y2):
    """Position measurement y2 * y1 recovered from bearing and range."""
    return float(y2) * np.asarray(y1, dtype=float)


def position_covariance(y1, y2, var_bearing, var_range):
    """First-order covariance of the reconstructed position.

    Bearing noise moves the point sideways (both tangent directions at y1,
    scaled by the range), range noise moves it radially.  The tangent frame
    completes y1 by Gram-Schmidt against the most orthogonal coordinate axis.
    """
    y1 = np.asarray(y1, dtype=float)
    t1, t2 = tangent_frame(y1)
    tangent = np.outer(t1, t1) + np.outer(t2, t2)
    return (y2 * y2) * var_bearing * tangent + var_range * np.outer(y1, y1)


def ekf_update_position(belief, y1, y2, var_bearing, var_range):
    """Kalman update with the reconstructed position; Joseph-form covariance."""
    z = reconstructed_position(y1, y2)
    Q = position_covariance(y1, y2, var_bearing, var_range)
    H = np.zeros((3, 6))
    H[:, :3] = np.eye(3)
    S = belief.cov[:3, :3] + Q
    try:
        np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise ValueError("singular innovation covariance") from None
    K = np.linalg.solve(S, belief.cov[:3, :]).T  # Sigma H^T S^-1
    mean = belief.mean + K @ (z - belief.p)
    IKH = np.eye(6) - K @ H
    cov = IKH @ belief.cov @ IKH.T + K @ Q @ K.T
    return EkfBelief(mean, cov)


def ekf_update_bearing_range(belief, y1, y2, var_bearing, var_range,
                             ridge=1e-9):
    """Kalman update that linearizes the output map p -> (p/|p|, |p|).

    The Jacobian and the bearing noise model are both evaluated at the
    predicted mean, so a large prior error bends the gain directions; this
    is the textbook EKF treatment of the raw outputs.  var_bearing is the
    per-tangent-axis variance of the unit bearing; the ridge keeps the
    radial slot of the bearing noise block invertible (the gain in that
    direction is exactly zero, so its value does not matter otherwise).
    Joseph-form covariance update.
    """
    p = belief.p
    r = float(np.linalg.norm(p))
    if r == 0.0:
        raise ValueError("predicted position at the sensor origin")
    yhat = p / r
    tangent = np.eye(3) - np.outer(yhat, yhat)
    H = np.zeros((4, 6))
    H[:3, :3] = tangent / r
    H[3, :3] = yhat
    R = np.zeros((4, 4))
    R[:3, :3] = var_bearing * tangent + ridge * np.outer(yhat, yhat)
    R[3, 3] = var_range
    resid = np.concatenate([np.asarray(y1, dtype=float) - yhat,
                            [float(y2) - r]])
    S = H @ belief.cov @ H.T + R
    try:
        np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise ValueError("singular innovation covariance") from None
    K = np.linalg.solve(S, H @ belief.cov).T  # Sigma H^T S^-1
    mean = belief.mean + K @ resid
    IKH = np.eye(6) - K @ H
    cov = IKH @ belief.cov @ IKH.T + K @ R @ K.T
    return EkfBelief(mean, cov)


def ekf_energy(belief, true_state):
    eps = belief.mean - true_state.as_vector()
    return flt.filter_energy(eps, belief.cov)


def eqf_no_reset_step(belief, model, u, y, P, Q, max_step=1.0):
    """One predict/update/reset cycle with the covariance transport disabled."""
    belief = flt.predict(belief, model, u, P)
    belief = flt.update(belief, model, y, Q)
    return flt.reset(belief, model, transport=False, max_step=max_step)


def eqf_step(belief, model, u, y, P, Q, max_step=1.0):
    """One full predict/update/reset cycle of the symmetry-based filter."""
    belief = flt.predict(belief, model, u, P)
    belief = flt.update(belief, model, y, Q)
    return flt.reset(belief, model, transport=True, max_step=max_step)
