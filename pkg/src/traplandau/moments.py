"""Quadrature of conserved moments and entropy functionals on phase grids.

The thirteen conserved functionals of the trapped equation use the rotated
coordinates (X, V) = rotate_phase(t, x, v).  They are assembled here from
the plain (unrotated) moments of the grid, because the rotation acts on the
moment vector by explicit trigonometric recombination:

    int X F      = cos t int x F - sin t int v F,
    int |X|^2 F  = cos^2 t int |x|^2 F - 2 sin t cos t int x.v F
                   + sin^2 t int |v|^2 F,   etc.,

and the wedge int (X ^ V) F = int (x ^ v) F exactly (the pair rotation has
determinant one in each plane).  This avoids building rotated coordinate
arrays and keeps one deterministic reduction path.

The normalized-equation moments (psi_bar) use the weights
(1, v, S^-1 x, |v + R S^-1 x|^2, S^-1 x . v, |S^-1 x|^2,
 (v + R S^-1 x) ^ S^-1 x) with the canonical diagonal S and rotation block
R determined by the rotation number r in [0, 1).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import landau
from .conserved import ConservedVector
from .errors import AllNodesBelowFloor, InvalidRotationParameter
from .grids import GridSpec, PhaseGrid, VelocitySlice
from .mb_states import MBParams, eval_mb_grid, reduce_angle, validate_params

log = logging.getLogger(__name__)

#: Absolute positivity floor used when dividing by F in the dissipation.
DISSIPATION_FLOOR = 1e-30


@dataclass
class RawMoments:
    """Unrotated moment block: mass, first moments, full second moments."""

    mass: float
    mx: np.ndarray      # int x F
    mv: np.ndarray      # int v F
    sxx: np.ndarray     # int x x^T F
    sxv: np.ndarray     # int x v^T F
    svv: np.ndarray     # int v v^T F

    @staticmethod
    def zero() -> "RawMoments":
        return RawMoments(0.0, np.zeros(3), np.zeros(3), np.zeros((3, 3)),
                          np.zeros((3, 3)), np.zeros((3, 3)))

    def accumulate(self, other: "RawMoments") -> None:
        self.mass += other.mass
        self.mx += other.mx
        self.mv += other.mv
        self.sxx += other.sxx
        self.sxv += other.sxv
        self.svv += other.svv

    def scaled(self, factor: float) -> "RawMoments":
        return RawMoments(self.mass * factor, self.mx * factor,
                          self.mv * factor, self.sxx * factor,
                          self.sxv * factor, self.svv * factor)


def _pair_marginal(values, ax_i, ax_j):
    axes = tuple(k for k in range(6) if k not in (ax_i, ax_j))
    return values.sum(axis=axes)


def raw_moments_of_values(values: np.ndarray, xs1, xs2, xs3, vs) -> RawMoments:
    """Plain moment sums (no cell-volume factor) of a 6D value block.

    Per-axis node arrays are passed separately so streaming callers can feed
    single-node slabs along the first axis.
    """
    xnodes = [np.asarray(xs1, dtype=float), np.asarray(xs2, dtype=float),
              np.asarray(xs3, dtype=float)]
    vnodes = np.asarray(vs, dtype=float)

    mass = float(values.sum())
    rho_x = values.sum(axis=(3, 4, 5))
    rho_v = values.sum(axis=(0, 1, 2))

    mx = np.empty(3)
    sxx = np.empty((3, 3))
    for i in range(3):
        mi = rho_x.sum(axis=tuple(k for k in range(3) if k != i))
        mx[i] = mi @ xnodes[i]
        sxx[i, i] = mi @ xnodes[i] ** 2
    for i in range(3):
        for j in range(i + 1, 3):
            pm = rho_x.sum(axis=tuple(k for k in range(3) if k not in (i, j)))
            val = xnodes[i] @ pm @ xnodes[j]
            sxx[i, j] = sxx[j, i] = val

    mv = np.empty(3)
    svv = np.empty((3, 3))
    for i in range(3):
        mi = rho_v.sum(axis=tuple(k for k in range(3) if k != i))
        mv[i] = mi @ vnodes
        svv[i, i] = mi @ vnodes ** 2
    for i in range(3):
        for j in range(i + 1, 3):
            pm = rho_v.sum(axis=tuple(k for k in range(3) if k not in (i, j)))
            val = vnodes @ pm @ vnodes
            svv[i, j] = svv[j, i] = val

    sxv = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            pm = _pair_marginal(values, i, 3 + j)
            sxv[i, j] = xnodes[i] @ pm @ vnodes
    return RawMoments(mass, mx, mv, sxx, sxv, svv)


def raw_moments(F: PhaseGrid) -> RawMoments:
    xs = F.spec.x_nodes()
    vs = F.spec.v_nodes()
    raw = raw_moments_of_values(F.values, xs, xs, xs, vs)
    return raw.scaled(F.spec.cell_volume)


def _wedge_from_sxv(sxv: np.ndarray) -> np.ndarray:
    """(12, 13, 23) entries of int (x ^ v) F from the full cross block."""
    m = sxv - sxv.T
    return np.array([m[0, 1], m[0, 2], m[1, 2]])


def psi_from_raw(raw: RawMoments, t: float) -> ConservedVector:
    tr = reduce_angle(t)
    ct, st = math.cos(tr), math.sin(tr)
    sxx, sxv, svv = np.trace(raw.sxx), np.trace(raw.sxv), np.trace(raw.svv)
    return ConservedVector(
        psi1=raw.mass,
        psi2=ct * raw.mx - st * raw.mv,
        psi3=st * raw.mx + ct * raw.mv,
        psi4=ct * ct * sxx - 2.0 * st * ct * sxv + st * st * svv,
        psi5=st * ct * (sxx - svv) + (ct * ct - st * st) * sxv,
        psi6=st * st * sxx + 2.0 * st * ct * sxv + ct * ct * svv,
        psi7=_wedge_from_sxv(raw.sxv),
    )


def psi(F: PhaseGrid) -> ConservedVector:
    """Midpoint-rule quadrature of the thirteen conserved moments."""
    return psi_from_raw(raw_moments(F), F.t)


def canonical_rotation_matrices(r: float):
    """Canonical (S, R) of the normalized frame for rotation number r."""
    if not (0.0 <= r < 1.0):
        raise InvalidRotationParameter(f"r = {r} must lie in [0, 1)")
    s = math.sqrt(1.0 - r * r)
    S = np.diag([s, s, 1.0])
    R = np.array([[0.0, r, 0.0], [-r, 0.0, 0.0], [0.0, 0.0, 0.0]])
    return S, R


def psi_bar_from_raw(raw: RawMoments, r: float) -> ConservedVector:
    S, R = canonical_rotation_matrices(r)
    Sinv = np.diag(1.0 / np.diag(S))
    B = R @ Sinv
    cvx = raw.sxv.T
    wedge_mat = (cvx @ Sinv + B @ raw.sxx @ Sinv
                 - Sinv @ raw.sxv - Sinv @ raw.sxx @ B.T)
    return ConservedVector(
        psi1=raw.mass,
        psi2=raw.mv,
        psi3=Sinv @ raw.mx,
        psi4=(np.trace(raw.svv) + 2.0 * np.trace(B @ raw.sxv)
              + np.trace(B.T @ B @ raw.sxx)),
        psi5=np.trace(Sinv @ raw.sxv),
        psi6=np.trace(Sinv @ Sinv @ raw.sxx),
        psi7=np.array([wedge_mat[0, 1], wedge_mat[0, 2], wedge_mat[1, 2]]),
    )


def psi_bar(G: PhaseGrid, r: float) -> ConservedVector:
    """Conserved moments of the normalized equation at rotation number r."""
    return psi_bar_from_raw(raw_moments(G), r)


def psi_mb_quadrature(p: MBParams, t: float, spec: GridSpec) -> ConservedVector:
    """Quadrature psi of the analytic state, streamed over x1 slabs.

    Equivalent to psi(sample_on_grid(p, t, spec)) but never materializes the
    6D array, so refinement studies can reach 32^3 x 32^3 nodes.
    """
    validate_params(p)
    xs = spec.x_nodes()
    vs = spec.v_nodes()
    sub = GridSpec(nx=spec.nx, lx=spec.lx, nv=spec.nv, lv=spec.lv)
    acc = RawMoments.zero()
    x2, x3 = xs.reshape(1, -1, 1, 1, 1, 1), xs.reshape(1, 1, -1, 1, 1, 1)
    v1 = vs.reshape(1, 1, 1, -1, 1, 1)
    v2 = vs.reshape(1, 1, 1, 1, -1, 1)
    v3 = vs.reshape(1, 1, 1, 1, 1, -1)
    from .mb_states import TWO_PI, _exponent_components
    norm = p.m * math.sqrt(p.det_q) / TWO_PI ** 3
    for i, xi in enumerate(xs):
        x1 = np.full((1, 1, 1, 1, 1, 1), xi)
        quad = _exponent_components(p, t, x1, x2, x3, v1, v2, v3)
        slab = norm * np.exp(-0.5 * quad)
        acc.accumulate(raw_moments_of_values(slab, np.array([xi]), xs, xs, vs))
    return psi_from_raw(acc.scaled(sub.cell_volume), t)


def entropy(F: PhaseGrid) -> float:
    """Quadrature of F log F with 0 log 0 = 0; negatives are clipped.

    Clipping is for entropy evaluation only and the clipped mass is logged.
    """
    vals = F.values
    neg = vals < 0.0
    if neg.any():
        clipped = -float(vals[neg].sum()) * F.spec.cell_volume
        log.info("entropy: clipped %d negative nodes carrying mass %.3e",
                 int(neg.sum()), clipped)
        vals = np.where(neg, 0.0, vals)
    pos = vals > 0.0
    integrand = np.zeros_like(vals)
    integrand[pos] = vals[pos] * np.log(vals[pos])
    return float(integrand.sum()) * F.spec.cell_volume


def relative_entropy(F: PhaseGrid, p: MBParams) -> float:
    """Quadrature of F log(F/M) - F + M against the matched state M.

    The integrand is pointwise nonnegative by convexity, so the result is
    nonnegative up to quadrature error.
    """
    validate_params(p)
    M = eval_mb_grid(p, F.t, F.spec)
    vals = np.where(F.values > 0.0, F.values, 0.0)
    integrand = M - vals
    pos = vals > 0.0
    integrand[pos] += vals[pos] * np.log(vals[pos] / M[pos])
    return float(integrand.sum()) * F.spec.cell_volume


def entropy_dissipation(F: PhaseGrid, x_stride: int = 1) -> float:
    """Entropy-dissipation quadrature, optionally on a strided x subsample.

    The double velocity integral runs per x node through the collision
    kernel tables; nodes with F below the positivity floor are excluded
    (their count is logged).  The x sum uses every x_stride-th node per
    axis and rescales by x_stride^3, so the value is labeled an estimate
    when x_stride > 1.
    """
    spec = F.spec
    ws = landau.CollisionWorkspace(spec.v_axis)
    sub = F.values[::x_stride, ::x_stride, ::x_stride]
    n_slices = sub.shape[0] * sub.shape[1] * sub.shape[2]
    flat = sub.reshape(n_slices, spec.nv, spec.nv, spec.nv)
    total = 0.0
    excluded = 0
    any_valid = False
    for k in range(n_slices):
        slab = flat[k]
        mask = slab > DISSIPATION_FLOOR
        excluded += int((~mask).sum())
        if not mask.any():
            continue
        any_valid = True
        total += landau.dissipation_form_slice(slab, ws)
    if not any_valid:
        raise AllNodesBelowFloor("every subsampled node is below the floor")
    if excluded:
        log.info("entropy_dissipation: excluded %d nodes below floor", excluded)
    scale = spec.hx ** 3 * float(x_stride) ** 3
    return total * scale


def psi_norm(V: ConservedVector) -> float:
    """2-norm of a conserved vector, wedge entries counted twice."""
    return V.norm()
