"""Phase-space grid containers.

All quadrature in the toolkit is the midpoint rule on cell-centered tensor
grids: the box [-L, L] is cut into N equal cells per axis and nodes sit at
cell centers, so the 1D weight is the spacing h = 2L/N.  Gaussian-type
integrands make this rule spectrally accurate once the box covers the
support (aliasing error ~ exp(-2 pi^2 / h^2) for unit-width Gaussians).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class AxisGrid:
    """Cell-centered uniform 1D grid on [-half_width, half_width]."""

    n: int
    half_width: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("node count must be >= 1")
        if self.half_width <= 0:
            raise ValueError("half width must be positive")

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def nodes(self) -> np.ndarray:
        return -self.half_width + (np.arange(self.n) + 0.5) * self.h


@dataclass(frozen=True)
class GridSpec:
    """Tensor grid over a truncated position box times velocity box."""

    nx: int
    lx: float
    nv: int
    lv: float

    @property
    def x_axis(self) -> AxisGrid:
        return AxisGrid(self.nx, self.lx)

    @property
    def v_axis(self) -> AxisGrid:
        return AxisGrid(self.nv, self.lv)

    @property
    def hx(self) -> float:
        return self.x_axis.h

    @property
    def hv(self) -> float:
        return self.v_axis.h

    @property
    def shape(self) -> tuple:
        return (self.nx,) * 3 + (self.nv,) * 3

    @property
    def cell_volume(self) -> float:
        return self.hx ** 3 * self.hv ** 3

    def x_nodes(self) -> np.ndarray:
        return self.x_axis.nodes

    def v_nodes(self) -> np.ndarray:
        return self.v_axis.nodes

    def meshgrid(self):
        """Six broadcastable coordinate arrays (x1,x2,x3,v1,v2,v3)."""
        xs = self.x_nodes()
        vs = self.v_nodes()
        axes = [xs, xs, xs, vs, vs, vs]
        out = []
        for k, a in enumerate(axes):
            shape = [1] * 6
            shape[k] = len(a)
            out.append(a.reshape(shape))
        return tuple(out)

    def to_dict(self) -> dict:
        return {"nx": self.nx, "lx": self.lx, "nv": self.nv, "lv": self.lv}

    @staticmethod
    def from_dict(d: dict) -> "GridSpec":
        return GridSpec(nx=int(d["nx"]), lx=float(d["lx"]),
                        nv=int(d["nv"]), lv=float(d["lv"]))


@dataclass
class PhaseGrid:
    """Density values on a GridSpec at one time stamp.

    values has shape (nx, nx, nx, nv, nv, nv); solver steps may produce
    small negatives which are clipped by the consumers that need
    nonnegativity (the clipped mass is logged there).
    """

    spec: GridSpec
    values: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if self.values.shape != self.spec.shape:
            raise ValueError(
                f"value array shape {self.values.shape} does not match "
                f"grid spec shape {self.spec.shape}")

    def copy(self) -> "PhaseGrid":
        return PhaseGrid(self.spec, self.values.copy(), self.t)

    def mass(self) -> float:
        return float(self.values.sum()) * self.spec.cell_volume


@dataclass
class VelocitySlice:
    """Density over one velocity box, at a fixed x (or homogeneous)."""

    grid: AxisGrid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.grid.n,) * 3:
            raise ValueError(
                f"value array shape {self.values.shape} does not match "
                f"velocity grid ({self.grid.n},)*3")

    @property
    def hv(self) -> float:
        return self.grid.h

    def copy(self) -> "VelocitySlice":
        return VelocitySlice(self.grid, self.values.copy())

    def mass(self) -> float:
        return float(self.values.sum()) * self.grid.h ** 3
