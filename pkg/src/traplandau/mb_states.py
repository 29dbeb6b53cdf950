"""Time-periodic Maxwell-Boltzmann states of the trapped Landau equation.

A state is the Gaussian phase-space density

    M(t,x,v) = m sqrt(det Q)/(2 pi)^3
               exp{-1/2 [a|X-y|^2 + 2b(X-y).(V-z) + c|V-z|^2
                         + 2(X-y)^T R (V-z)]},

with (X,V) = (x cos t - v sin t, x sin t + v cos t) the backward harmonic
rotation, R skew-symmetric, and Q = (ac - b^2) I + R^2.  The admissible
parameter cone requires a, c > 0, ac - b^2 > 0 and tr|R| < 2 sqrt(ac - b^2),
equivalently Q positive definite.

Skew matrices are stored by their axis vector w (R z = w x z); this gives
closed forms for everything needed here:

    tr|R| = 2 |w|,     R^2 = w w^T - |w|^2 I,
    Q     = (ac - b^2 - |w|^2) I + w w^T,
    det Q = (ac - b^2) (ac - b^2 - |w|^2)^2,
    Q^{-1} R = R / (ac - b^2 - |w|^2).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .conserved import ConservedVector
from .errors import (IndefiniteQuadraticForm, NonPositiveMass,
                     RotationTooLarge, TruncationTooSevere)
from .grids import GridSpec, PhaseGrid

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class SkewMatrix3:
    """3x3 skew-symmetric matrix stored by its axis vector.

    The convention is R z = w x z, so the dense form is
    [[0, -w3, w2], [w3, 0, -w1], [-w2, w1, 0]].
    """

    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.shape != (3,):
            raise ValueError("axis vector must have shape (3,)")
        object.__setattr__(self, "w", w)

    @staticmethod
    def zero() -> "SkewMatrix3":
        return SkewMatrix3(np.zeros(3))

    @staticmethod
    def from_dense(mat) -> "SkewMatrix3":
        mat = np.asarray(mat, dtype=float)
        if not np.allclose(mat, -mat.T, atol=1e-12 * max(1.0, abs(mat).max())):
            raise ValueError("matrix is not skew-symmetric")
        return SkewMatrix3(np.array([mat[2, 1], mat[0, 2], mat[1, 0]]))

    @staticmethod
    def from_wedge_entries(e) -> "SkewMatrix3":
        """Build from the (12, 13, 23) entries of the dense form."""
        e = np.asarray(e, dtype=float)
        return SkewMatrix3(np.array([-e[2], e[1], -e[0]]))

    def wedge_entries(self) -> np.ndarray:
        """The (12, 13, 23) entries of the dense form."""
        w1, w2, w3 = self.w
        return np.array([-w3, w2, -w1])

    def dense(self) -> np.ndarray:
        w1, w2, w3 = self.w
        return np.array([[0.0, -w3, w2],
                         [w3, 0.0, -w1],
                         [-w2, w1, 0.0]])

    def squared(self) -> np.ndarray:
        """R^2 = w w^T - |w|^2 I, symmetric negative semidefinite."""
        w = self.w
        return np.outer(w, w) - (w @ w) * np.eye(3)

    @property
    def axis_norm(self) -> float:
        return float(np.linalg.norm(self.w))

    @property
    def tr_abs(self) -> float:
        """tr|R| with |R| = sqrt(R^T R); equals 2 |w|."""
        return 2.0 * self.axis_norm

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """R vec = w x vec, broadcasting over leading axes of vec (...,3)."""
        return np.cross(np.broadcast_to(self.w, np.shape(vec)), vec)

    def is_zero(self) -> bool:
        return self.axis_norm == 0.0


def wedge_entries_of(u, v) -> np.ndarray:
    """(12, 13, 23) entries of u ^ v = u v^T - v u^T for 3-vectors."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.array([u[0] * v[1] - u[1] * v[0],
                     u[0] * v[2] - u[2] * v[0],
                     u[1] * v[2] - u[2] * v[1]])


@dataclass(frozen=True, eq=False)
class MBParams:
    """Parameters (m, y, z, a, b, c, R) of a time-periodic state."""

    m: float
    y: np.ndarray
    z: np.ndarray
    a: float
    b: float
    c: float
    R: SkewMatrix3 = field(default_factory=SkewMatrix3.zero)

    def __post_init__(self):
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float).reshape(3))
        object.__setattr__(self, "z", np.asarray(self.z, dtype=float).reshape(3))
        for name in ("m", "a", "b", "c"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not isinstance(self.R, SkewMatrix3):
            object.__setattr__(self, "R", SkewMatrix3(np.asarray(self.R)))

    @property
    def d2(self) -> float:
        """ac - b^2."""
        return self.a * self.c - self.b * self.b

    @property
    def alpha(self) -> float:
        """ac - b^2 - |w|^2, the doubly degenerate eigenvalue of Q."""
        return self.d2 - self.R.axis_norm ** 2

    @cached_property
    def q_matrix(self) -> np.ndarray:
        """Q = (ac - b^2) I + R^2, symmetric positive definite when valid."""
        return self.d2 * np.eye(3) + self.R.squared()

    @property
    def det_q(self) -> float:
        return self.d2 * self.alpha ** 2

    @cached_property
    def q_inv(self) -> np.ndarray:
        w = self.R.w
        return (np.eye(3) - np.outer(w, w) / self.d2) / self.alpha

    @property
    def tr_q_inv(self) -> float:
        return 2.0 / self.alpha + 1.0 / self.d2

    def to_dict(self) -> dict:
        return {"m": self.m, "y": self.y.tolist(), "z": self.z.tolist(),
                "a": self.a, "b": self.b, "c": self.c,
                "w": self.R.w.tolist()}

    @staticmethod
    def from_dict(d: dict) -> "MBParams":
        return MBParams(m=float(d["m"]), y=np.array(d["y"], dtype=float),
                        z=np.array(d["z"], dtype=float), a=float(d["a"]),
                        b=float(d["b"]), c=float(d["c"]),
                        R=SkewMatrix3(np.array(d["w"], dtype=float)))

    def param_array(self) -> np.ndarray:
        """Flat 13-vector (m, y, z, a, b, c, w) for distances in tests."""
        return np.concatenate([[self.m], self.y, self.z,
                               [self.a, self.b, self.c], self.R.w])


#: The normalized static state: (2 pi)^-3 exp(-(|x|^2+|v|^2)/2).
STATIC_PARAMS = MBParams(m=1.0, y=np.zeros(3), z=np.zeros(3),
                         a=1.0, b=0.0, c=1.0, R=SkewMatrix3.zero())


@dataclass(frozen=True)
class PhasePoint:
    t: float
    x: np.ndarray
    v: np.ndarray


def validate_params(p: MBParams) -> None:
    """Raise unless p lies in the admissible cone; success caches Q, det Q.

    Admissibility is checked by the strict inequalities m > 0, a > 0, c > 0,
    ac - b^2 > 0 and tr|R| < 2 sqrt(ac - b^2).
    """
    if not (p.m > 0.0) or not math.isfinite(p.m):
        raise NonPositiveMass(f"m = {p.m} must be > 0")
    if not (p.a > 0.0 and p.c > 0.0 and p.d2 > 0.0):
        raise IndefiniteQuadraticForm(
            f"need a > 0, c > 0, ac - b^2 > 0; got a={p.a}, c={p.c}, "
            f"ac - b^2 = {p.d2}")
    tr_abs = p.R.tr_abs
    bound = 2.0 * math.sqrt(p.d2)
    if not (tr_abs < bound):
        raise RotationTooLarge(
            f"tr|R| = {tr_abs} must be < 2 sqrt(ac - b^2) = {bound}")
    # touch the caches so downstream users get them for free
    p.q_matrix
    p.q_inv


def reduce_angle(t):
    """Reduce an angle into [0, 2 pi); one fixed computation path."""
    return np.remainder(t, TWO_PI)


def rotate_phase(t, x, v):
    """Backward harmonic rotation (X, V) = (x cos t - v sin t, x sin t + v cos t).

    x and v may be arrays of any broadcast-compatible shape.
    """
    tr = reduce_angle(t)
    ct, st = np.cos(tr), np.sin(tr)
    return x * ct - v * st, x * st + v * ct


def _exponent_components(p: MBParams, t, x1, x2, x3, v1, v2, v3):
    """Quadratic form value on broadcastable coordinate components."""
    X1, V1 = rotate_phase(t, x1, v1)
    X2, V2 = rotate_phase(t, x2, v2)
    X3, V3 = rotate_phase(t, x3, v3)
    dx1, dx2, dx3 = X1 - p.y[0], X2 - p.y[1], X3 - p.y[2]
    dv1, dv2, dv3 = V1 - p.z[0], V2 - p.z[1], V3 - p.z[2]
    w1, w2, w3 = p.R.w
    # (dx)^T R (dv) = w . (dv x dx)
    cross = (w1 * (dv2 * dx3 - dv3 * dx2)
             + w2 * (dv3 * dx1 - dv1 * dx3)
             + w3 * (dv1 * dx2 - dv2 * dx1))
    quad = (p.a * (dx1 ** 2 + dx2 ** 2 + dx3 ** 2)
            + 2.0 * p.b * (dx1 * dv1 + dx2 * dv2 + dx3 * dv3)
            + p.c * (dv1 ** 2 + dv2 ** 2 + dv3 ** 2)
            + 2.0 * cross)
    return quad


def eval_mb(p: MBParams, t, x, v):
    """Density of the state at time t and phase points x, v of shape (..., 3)."""
    validate_params(p)
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    quad = _exponent_components(p, t, x[..., 0], x[..., 1], x[..., 2],
                                v[..., 0], v[..., 1], v[..., 2])
    norm = p.m * math.sqrt(p.det_q) / TWO_PI ** 3
    return norm * np.exp(-0.5 * quad)


def eval_mb_point(p: MBParams, pt: PhasePoint) -> float:
    return float(eval_mb(p, pt.t, np.asarray(pt.x), np.asarray(pt.v)))


def eval_mb_grid(p: MBParams, t: float, spec: GridSpec) -> np.ndarray:
    """Pointwise density on the tensor grid, without building (...,3) arrays."""
    validate_params(p)
    x1, x2, x3, v1, v2, v3 = spec.meshgrid()
    quad = _exponent_components(p, t, x1, x2, x3, v1, v2, v3)
    norm = p.m * math.sqrt(p.det_q) / TWO_PI ** 3
    return norm * np.exp(-0.5 * quad)


def boundary_peak_ratio(values: np.ndarray) -> float:
    """Max density on the six outermost index faces relative to the peak."""
    peak = float(values.max())
    if peak <= 0.0:
        return math.inf
    faces = []
    for ax in range(values.ndim):
        faces.append(values.take(0, axis=ax).max())
        faces.append(values.take(-1, axis=ax).max())
    return float(max(faces)) / peak


def sample_on_grid(p: MBParams, t: float, spec: GridSpec,
                   truncation_threshold: float = 1e-3) -> PhaseGrid:
    """Sample the state on a grid, guarding against severe truncation.

    The measured boundary-to-peak density ratio is always logged; a ratio
    above truncation_threshold raises TruncationTooSevere.
    """
    values = eval_mb_grid(p, t, spec)
    ratio = boundary_peak_ratio(values)
    log.info("sample_on_grid: boundary/peak density ratio %.3e", ratio)
    if ratio > truncation_threshold:
        raise TruncationTooSevere(
            f"boundary density is {ratio:.3e} of the peak, above the "
            f"threshold {truncation_threshold:.3e}; enlarge the box")
    return PhaseGrid(spec, values, t)


def mb_closed_moments(p: MBParams) -> ConservedVector:
    """Conserved moments of the state in closed form.

    Centered unit-mass case: (1, 0, 0, tr(Q^-1) c, -tr(Q^-1) b, tr(Q^-1) a,
    -2 Q^-1 R).  Shifts enter through the translation identities
    psi4 += m|y|^2, psi5 += m y.z, psi6 += m|z|^2, psi7 += m (y ^ z);
    the shifted formulas are validated against a Gauss-Hermite oracle in the
    test suite.
    """
    validate_params(p)
    tq = p.tr_q_inv
    # Q^{-1} R = R / alpha because w w^T R = 0 (R's range is normal to w)
    qinv_r_axis = p.R.w / p.alpha
    wedge = -2.0 * SkewMatrix3(qinv_r_axis).wedge_entries()
    m, y, z = p.m, p.y, p.z
    return ConservedVector(
        psi1=m,
        psi2=m * y,
        psi3=m * z,
        psi4=m * (tq * p.c + y @ y),
        psi5=m * (-tq * p.b + y @ z),
        psi6=m * (tq * p.a + z @ z),
        psi7=m * (wedge + wedge_entries_of(y, z)),
    )
