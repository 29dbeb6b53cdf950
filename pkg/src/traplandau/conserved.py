"""The thirteen conserved moments as a typed container.

Component layout follows the conservation functionals of the trapped
equation: mass, rotated center of mass, rotated momentum, three rotated
scalar second moments, and the angular-momentum wedge block.  The wedge is
antisymmetric, so only its (1,2), (1,3), (2,3) entries are stored, in that
order; norms count each off-diagonal pair twice to match the full-matrix
Frobenius convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class ConservedVector:
    psi1: float                 # mass
    psi2: np.ndarray            # center of mass, R^3
    psi3: np.ndarray            # momentum, R^3
    psi4: float                 # inertial moment |X|^2
    psi5: float                 # mixed moment X.V
    psi6: float                 # energy |V|^2
    psi7: np.ndarray            # wedge entries (12, 13, 23)

    def __post_init__(self):
        for name in ("psi2", "psi3", "psi7"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,):
                raise ValueError(f"{name} must have shape (3,)")
            object.__setattr__(self, name, v)
        for name in ("psi1", "psi4", "psi5", "psi6"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def as_array(self) -> np.ndarray:
        """Flat 13-vector: psi1, psi2(3), psi3(3), psi4, psi5, psi6, psi7(3)."""
        return np.concatenate([
            [self.psi1], self.psi2, self.psi3,
            [self.psi4, self.psi5, self.psi6], self.psi7,
        ])

    @staticmethod
    def from_array(a) -> "ConservedVector":
        a = np.asarray(a, dtype=float)
        if a.shape != (13,):
            raise ValueError("expected a flat 13-vector")
        return ConservedVector(a[0], a[1:4], a[4:7], a[7], a[8], a[9], a[10:13])

    def wedge_matrix(self) -> np.ndarray:
        """Reconstruct the full antisymmetric 3x3 wedge block."""
        e12, e13, e23 = self.psi7
        return np.array([[0.0, e12, e13],
                         [-e12, 0.0, e23],
                         [-e13, -e23, 0.0]])

    def __sub__(self, other: "ConservedVector") -> "ConservedVector":
        return ConservedVector.from_array(self.as_array() - other.as_array())

    def __add__(self, other: "ConservedVector") -> "ConservedVector":
        return ConservedVector.from_array(self.as_array() + other.as_array())

    def norm(self) -> float:
        """2-norm with wedge entries counted twice (full-matrix convention)."""
        s = (self.psi1 ** 2 + self.psi2 @ self.psi2 + self.psi3 @ self.psi3
             + self.psi4 ** 2 + self.psi5 ** 2 + self.psi6 ** 2
             + 2.0 * (self.psi7 @ self.psi7))
        return float(np.sqrt(s))

    def to_dict(self) -> dict:
        return {
            "psi1": self.psi1,
            "psi2": self.psi2.tolist(),
            "psi3": self.psi3.tolist(),
            "psi4": self.psi4,
            "psi5": self.psi5,
            "psi6": self.psi6,
            "psi7": self.psi7.tolist(),
        }

    @staticmethod
    def from_dict(d: dict) -> "ConservedVector":
        return ConservedVector(d["psi1"], np.array(d["psi2"]),
                               np.array(d["psi3"]), d["psi4"], d["psi5"],
                               d["psi6"], np.array(d["psi7"]))
