"""Constructive bijection from conserved moments to the matching state.

Given an admissible thirteen-moment vector V, there is exactly one
time-periodic Maxwell-Boltzmann distribution with those moments.  The
construction is closed-form:

1. center: m = psi1, y = psi2/m, z = psi3/m and the centered per-unit-mass
   second moments (sa, sb, sc, Rw) with sa = psi4/m - |y|^2, etc.;
2. admissibility: sa, sc > 0, sa*sc - sb^2 > 0 and
   beta := tr|Rw|/2 < d := sqrt(sa*sc - sb^2);
3. scalar solve:  nu = (2 + sqrt(1 + 3 (beta/d)^2)) / (1 - (beta/d)^2),
   the unique root >= 3 of nu = 2 + sqrt(1 + (beta/d)^2 nu^2);
4. skew solve:    N = nu (d I + (d^2 I - nu^2 Rw^2)^{1/2})^{-1} Rw,
   with half-trace alpha = nu beta / (d + sqrt(d^2 + nu^2 beta^2)) < 1;
5. parameters:    c = nu sa/d^2, b = -nu sb/d^2, a = nu sc/d^2,
                  R = -(nu/d) N,
   re-attaching (m, y, z).

Everything is expressed through skew axis vectors: for axis u the matrix
square root in step 4 has eigenvalue d along u and sqrt(d^2 + nu^2 |u|^2)
on the orthogonal plane, and Rw's range is orthogonal to u, so N keeps
Rw's axis direction.

The defining identities tr((I + N^2)^{-1}) = nu and
Rw = 2 (d/nu) (I + N^2)^{-1} N hold to round-off and are exposed for
verification; the uniqueness argument is embodied by the round-trip
residual rather than re-derived.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conserved import ConservedVector
from .errors import InadmissibleMoments, RatioOutOfRange, ZeroMass
from .mb_states import (MBParams, SkewMatrix3, mb_closed_moments,
                        validate_params, wedge_entries_of)

#: refuse to extrapolate once 1 - (beta/d)^2 drops below this
DEGENERACY_GUARD = 1e-12


@dataclass(frozen=True, eq=False)
class CenteredMoments:
    """Centered, mass-normalized second-moment block (sa, sb, sc, R)."""

    sa: float
    sb: float
    sc: float
    R: SkewMatrix3

    @property
    def d(self) -> float:
        return math.sqrt(self.sa * self.sc - self.sb * self.sb)

    @property
    def beta(self) -> float:
        return 0.5 * self.R.tr_abs

    def validate(self) -> None:
        disc = self.sa * self.sc - self.sb * self.sb
        if not (self.sa > 0.0 and self.sc > 0.0 and disc > 0.0):
            raise InadmissibleMoments(
                f"need sa, sc > 0 and sa*sc - sb^2 > 0; got "
                f"({self.sa}, {self.sb}, {self.sc})")
        if not (self.beta < math.sqrt(disc)):
            raise InadmissibleMoments(
                f"tr|R|/2 = {self.beta} must be < sqrt(sa*sc - sb^2) "
                f"= {math.sqrt(disc)}")


def center_moments(V: ConservedVector):
    """Split V into (m, y, z) and admissible centered second moments."""
    if not (V.psi1 > 0.0):
        raise ZeroMass(f"psi1 = {V.psi1} must be > 0")
    m = V.psi1
    y = V.psi2 / m
    z = V.psi3 / m
    sa = V.psi4 / m - y @ y
    sb = V.psi5 / m - y @ z
    sc = V.psi6 / m - z @ z
    wedge = V.psi7 / m - wedge_entries_of(y, z)
    cm = CenteredMoments(sa, sb, sc, SkewMatrix3.from_wedge_entries(wedge))
    cm.validate()
    return m, y, z, cm


def solve_nu(beta: float, d: float) -> float:
    """Closed-form nu = (2 + sqrt(1 + 3 (beta/d)^2)) / (1 - (beta/d)^2).

    nu >= 3 with equality at beta = 0, strictly increasing in beta/d.
    """
    if not (d > 0.0) or beta < 0.0 or beta >= d:
        raise RatioOutOfRange(f"need 0 <= beta < d; got beta={beta}, d={d}")
    q = (beta / d) ** 2
    denom = 1.0 - q
    if denom < DEGENERACY_GUARD:
        raise RatioOutOfRange(
            f"1 - (beta/d)^2 = {denom} below guard {DEGENERACY_GUARD}; "
            "the matching state degenerates")
    return (2.0 + math.sqrt(1.0 + 3.0 * q)) / denom


def solve_N(nu: float, d: float, R: SkewMatrix3) -> SkewMatrix3:
    """Skew solve N = nu (d I + (d^2 I - nu^2 R^2)^{1/2})^{-1} R.

    The output shares R's axis; its half-trace is
    alpha = nu beta / (d + sqrt(d^2 + nu^2 beta^2)) < 1.
    """
    beta = 0.5 * R.tr_abs
    if not (d > 0.0) or beta >= d:
        raise RatioOutOfRange(f"need tr|R|/2 < d; got beta={beta}, d={d}")
    scale = nu / (d + math.sqrt(d * d + nu * nu * beta * beta))
    return SkewMatrix3(scale * R.w)


def match_params(cm: CenteredMoments):
    """Centered matching (a, b, c, R); output lies in the admissible cone."""
    cm.validate()
    d = cm.d
    nu = solve_nu(cm.beta, d)
    N = solve_N(nu, d, cm.R)
    a = nu * cm.sc / d ** 2
    b = -nu * cm.sb / d ** 2
    c = nu * cm.sa / d ** 2
    R = SkewMatrix3(-(nu / d) * N.w)
    return a, b, c, R


def matching_residuals(cm: CenteredMoments):
    """Residuals of the two defining identities of the scalar/skew solve.

    Returns |tr((I + N^2)^{-1}) - nu| and the Frobenius norm of
    R - 2 (d/nu) (I + N^2)^{-1} N, both expected below 1e-12.
    """
    d = cm.d
    nu = solve_nu(cm.beta, d)
    N = solve_N(nu, d, cm.R)
    Nd = N.dense()
    M = np.eye(3) + Nd @ Nd
    Minv = np.linalg.inv(M)
    res_trace = abs(float(np.trace(Minv)) - nu)
    res_skew = float(np.linalg.norm(cm.R.dense() - 2.0 * (d / nu) * Minv @ Nd))
    return res_trace, res_skew


def tilde_F(V: ConservedVector) -> MBParams:
    """The unique state with conserved moments V (moment-matching map)."""
    m, y, z, cm = center_moments(V)
    a, b, c, R = match_params(cm)
    p = MBParams(m=m, y=y, z=z, a=a, b=b, c=c, R=R)
    validate_params(p)
    return p


def round_trip_residual(V: ConservedVector) -> float:
    """Relative moment residual ||psi(tilde_F(V)) - V|| / max(1, ||V||)."""
    back = mb_closed_moments(tilde_F(V))
    return (back - V).norm() / max(1.0, V.norm())


def stability_probe(V1: ConservedVector, V2: ConservedVector) -> float:
    """Empirical local Lipschitz ratio of the matching map.

    ||params(V1) - params(V2)||_2 / ||V1 - V2||_2 with the parameter tuple
    flattened as (m, y, z, a, b, c, w).  Recorded, not asserted, beyond
    finiteness.
    """
    dv = (V1 - V2).norm()
    if dv == 0.0:
        raise ValueError("V1 and V2 must differ")
    p1 = tilde_F(V1).param_array()
    p2 = tilde_F(V2).param_array()
    return float(np.linalg.norm(p1 - p2)) / dv
