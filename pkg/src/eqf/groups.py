"""Similarity-group primitives used as the symmetry group of the filter.

A group element is a triple (R, scale, trans) with R a rotation matrix,
scale a positive real and trans a 3-vector.  Composition is

    (R1, r1, t1) * (R2, r2, t2) = (R1 R2, r1 r2, t1 + r1 R1 t2)

which is the multiplication of the 4x4 matrices [[r R, t], [0, 1]].
Algebra vectors are 7-arrays ordered (omega, s, b): omega the rotation
part, s the scale part, b the translation part.  The exponential maps
(omega, s, b) to (so3_exp(omega), e^s, V(s, omega) @ b) where V is the
integral of e^(tau (s I + omega^)) over tau in [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """Raised when an operation is evaluated outside its domain."""


def _cross3(a, b):
    # np.cross has heavy per-call overhead for single 3-vectors
    return np.array([a[1] * b[2] - a[2] * b[1],
                     a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]])


def skew(w):
    """Return the 3x3 matrix W with W @ x = w x x for all x."""
    return np.array([
        [0.0, -w[2], w[1]],
        [w[2], 0.0, -w[0]],
        [-w[1], w[0], 0.0],
    ])


def unskew(W):
    """Inverse of skew for antisymmetric W."""
    return np.array([W[2, 1], W[0, 2], W[1, 0]])


def so3_exp(w):
    """Rotation matrix for a rotation vector (Rodrigues)."""
    w = np.asarray(w, dtype=float)
    theta2 = float(w @ w)
    theta = np.sqrt(theta2)
    W = skew(w)
    if theta < 1e-4:
        # series for sin(t)/t and (1-cos(t))/t^2, error O(theta^4)
        a = 1.0 - theta2 / 6.0
        b = 0.5 - theta2 / 24.0
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / theta2
    return np.eye(3) + a * W + b * (W @ W)


def so3_log(R):
    """Rotation vector of a rotation matrix.

    Raises DomainError when the rotation angle is numerically pi, where
    the rotation axis is not determined by R.
    """
    R = np.asarray(R, dtype=float)
    c = (np.trace(R) - 1.0) / 2.0
    c = min(1.0, max(-1.0, c))
    w = unskew(R - R.T) / 2.0  # equals sin(theta) * axis
    sn = float(np.linalg.norm(w))
    if c < 0.0 and sn < 1e-12:
        raise DomainError("rotation angle is numerically pi; axis undefined")
    theta = np.arctan2(sn, c)  # conditioned near pi, unlike arccos
    if theta < 1e-7:
        return w
    if theta < 3.0:
        return (theta / sn) * w
    # near pi: recover the axis from the symmetric part, sign from w
    axis2 = 1.0 + (np.diag(R) - 1.0) / (1.0 - c)
    axis2 = np.clip(axis2, 0.0, None)
    k = int(np.argmax(axis2))
    axis = np.sqrt(axis2)
    S = (R + R.T) / 2.0
    for i in range(3):
        if i != k and S[i, k] < 0.0:
            axis[i] = -axis[i]
    axis /= np.linalg.norm(axis)
    if axis @ w < 0.0:
        axis = -axis
    return theta * axis


def rotation_between(a, b):
    """Rotation matrix R with R @ a = b for unit vectors a, b.

    Among all such rotations this is the one whose axis is orthogonal to
    both a and b.  Parallel inputs give the identity; antiparallel inputs
    have no preferred axis and raise DomainError.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    k = _cross3(a, b)
    c = float(a @ b)
    if math.sqrt(float(k @ k)) < 1e-12:
        if c < 0.0:
            raise DomainError("cannot align antiparallel directions")
        return np.eye(3)
    if 1.0 + c <= 1e-12:
        raise DomainError("cannot align antiparallel directions")
    K = skew(k)
    return np.eye(3) + K + (K @ K) / (1.0 + c)


def tangent_frame(n):
    """Two unit vectors (t1, t2) completing unit n to a right-handed frame.

    Deterministic construction: Gram-Schmidt of the coordinate axis most
    orthogonal to n, then t2 = n x t1.
    """
    n = np.asarray(n, dtype=float)
    j = int(np.argmin(np.abs(n)))
    e = np.zeros(3)
    e[j] = 1.0
    t1 = e - n[j] * n
    t1 /= math.sqrt(float(t1 @ t1))
    t2 = _cross3(n, t1)
    return t1, t2


def wedge(v):
    """4x4 matrix form of an algebra 7-vector (omega, s, b)."""
    v = np.asarray(v, dtype=float)
    out = np.zeros((4, 4))
    out[:3, :3] = v[3] * np.eye(3) + skew(v[:3])
    out[:3, 3] = v[4:7]
    return out


def vee(W):
    """Algebra 7-vector of a 4x4 matrix in the image of wedge."""
    W = np.asarray(W, dtype=float)
    A = W[:3, :3]
    s = np.trace(A) / 3.0
    return np.concatenate([unskew((A - A.T) / 2.0), [s], W[:3, 3]])


def _triple_mul(p, q, theta2):
    # product in the commutative algebra span{I, W, W^2} with W^3 = -theta2 W
    a1, b1, c1 = p
    a2, b2, c2 = q
    return (a1 * a2,
            a1 * b2 + b1 * a2 - theta2 * (b1 * c2 + c1 * b2),
            a1 * c2 + c1 * a2 + b1 * b2 - theta2 * c1 * c2)


def _translation_factor(s, omega):
    """V(s, omega) = integral over [0,1] of e^(tau (s I + omega^)).

    Evaluated by a scaled power series with doubling, accurate to machine
    precision for any argument size; exp(A) = I + A V(A) gives b from the
    exponential and V^-1 recovers it in the logarithm.  Every power of
    A = s I + W lies in span{I, W, W^2} (W^3 = -theta^2 W), so the whole
    computation runs on scalar coefficient triples.
    """
    omega = np.asarray(omega, dtype=float)
    theta2 = float(omega @ omega)
    rho = abs(s) + math.sqrt(theta2)
    halvings = 0
    if rho > 0.25:
        halvings = int(math.ceil(math.log2(rho / 0.25)))
    h = 0.5 ** halvings
    B = (s * h, h, 0.0)
    term = (1.0, 0.0, 0.0)
    V = (1.0, 0.0, 0.0)
    for k in range(1, 14):
        t = _triple_mul(term, B, theta2)
        term = (t[0] / k, t[1] / k, t[2] / k)
        V = (V[0] + term[0] / (k + 1.0),
             V[1] + term[1] / (k + 1.0),
             V[2] + term[2] / (k + 1.0))
    for j in range(halvings):
        # exp of the current level, exact: e^(s h 2^j) R(h 2^j omega)
        hj = h * (2.0 ** j)
        x = hj * math.sqrt(theta2)
        if x < 1e-4:
            f1 = 1.0 - x * x / 6.0
            f2 = 0.5 - x * x / 24.0
        else:
            f1 = math.sin(x) / x
            f2 = (1.0 - math.cos(x)) / (x * x)
        es = math.exp(s * hj)
        E1 = (es + 1.0, es * hj * f1, es * hj * hj * f2)
        Vt = _triple_mul(E1, V, theta2)
        V = (0.5 * Vt[0], 0.5 * Vt[1], 0.5 * Vt[2])
    W = skew(omega)
    return V[0] * np.eye(3) + V[1] * W + (V[2] * (np.outer(omega, omega))
                                          - V[2] * theta2 * np.eye(3))


def _project_rotation(R):
    # nearest rotation in the Frobenius sense (polar factor)
    U, _, Vt = np.linalg.svd(R)
    P = U @ Vt
    if np.linalg.det(P) < 0.0:
        U[:, -1] = -U[:, -1]
        P = U @ Vt
    return P


@dataclass(frozen=True)
class Sim3:
    """Group element (R, scale, trans); see the module docstring.

    Stored factored rather than as a 4x4 matrix; matrix() provides the
    homogeneous form.  Composition re-orthonormalizes the rotation factor
    whenever accumulated drift exceeds 1e-9.
    """

    R: np.ndarray
    scale: float
    trans: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float)
        t = np.asarray(self.trans, dtype=float)
        if R.shape != (3, 3) or t.shape != (3,):
            raise ValueError("Sim3 needs a 3x3 rotation and a 3-vector")
        if not self.scale > 0.0:
            raise ValueError("Sim3 scale must be positive")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "trans", t)

    @classmethod
    def identity(cls):
        return cls(np.eye(3), 1.0, np.zeros(3))

    @classmethod
    def exp(cls, v):
        """Group exponential of an algebra 7-vector (omega, s, b)."""
        v = np.asarray(v, dtype=float)
        omega, s, b = v[0:3], float(v[3]), v[4:7]
        return cls(so3_exp(omega), float(np.exp(s)), _translation_factor(s, omega) @ b)

    @classmethod
    def from_matrix(cls, M):
        """Element from its 4x4 homogeneous form [[r R, t], [0, 1]]."""
        M = np.asarray(M, dtype=float)
        if M.shape != (4, 4) or not np.allclose(M[3], [0.0, 0.0, 0.0, 1.0], atol=1e-9):
            raise ValueError("not a homogeneous similarity matrix")
        r = float(np.linalg.det(M[:3, :3])) ** (1.0 / 3.0)
        return cls(M[:3, :3] / r, r, M[:3, 3].copy())

    def log(self):
        """Algebra 7-vector v with exp(v) equal to this element.

        Requires the rotation angle to be below pi (DomainError otherwise).
        """
        omega = so3_log(self.R)
        s = float(np.log(self.scale))
        b = np.linalg.solve(_translation_factor(s, omega), self.trans)
        return np.concatenate([omega, [s], b])

    def inverse(self):
        Rt = self.R.T
        return Sim3(Rt, 1.0 / self.scale, -(Rt @ self.trans) / self.scale)

    def __mul__(self, other):
        R = self.R @ other.R
        D = R.T @ R
        D[0, 0] -= 1.0
        D[1, 1] -= 1.0
        D[2, 2] -= 1.0
        if float((D * D).sum()) > 1e-18:
            R = _project_rotation(R)
        return Sim3(R, self.scale * other.scale,
                    self.trans + self.scale * (self.R @ other.trans))

    def adjoint(self):
        """7x7 matrix of v -> vee(X wedge(v) X^-1) in (omega, s, b) order."""
        out = np.zeros((7, 7))
        out[0:3, 0:3] = self.R
        out[3, 3] = 1.0
        out[4:7, 0:3] = skew(self.trans) @ self.R
        out[4:7, 3] = -self.trans
        out[4:7, 4:7] = self.scale * self.R
        return out

    def matrix(self):
        M = np.eye(4)
        M[:3, :3] = self.scale * self.R
        M[:3, 3] = self.trans
        return M

    def __repr__(self):
        return f"Sim3(scale={self.scale:.6g}, trans={np.array2string(self.trans, precision=6)})"


def inner_automorphism(X, Z):
    """Conjugation X Z X^-1."""
    return X * Z * X.inverse()


def conjugate_diffeo(action, X, F):
    """Conjugate a diffeomorphism F of the state space by the action of X.

    Returns the map xi -> action(X, F(action(X^-1, xi))).  Together with a
    right action this satisfies conj(Y, conj(X, F)) = conj(X * Y, F).
    """
    Xinv = X.inverse()

    def conjugated(xi):
        return action(X, F(action(Xinv, xi)))

    return conjugated
