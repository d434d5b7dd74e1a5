"""Regions and Cartesian cell decompositions.

Cells are cubes of side ``h`` on a lattice aligned with an enclosing cube;
a cell belongs to a region when its center does.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DomainError

DEFAULT_POINT_CAP = 20000


@dataclass(frozen=True)
class Region:
    """Ball (``r_inner == 0``) or annulus ``r_inner <= |x - center| < r_outer``."""

    center: tuple
    r_outer: float
    r_inner: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.r_outer > self.r_inner or self.r_inner < 0:
            raise DomainError(
                f"empty region: r_inner={self.r_inner}, r_outer={self.r_outer}"
            )

    @classmethod
    def ball(cls, center, radius):
        return cls(center, float(radius), 0.0)

    @classmethod
    def annulus(cls, center, r_inner, r_outer):
        if r_inner <= 0:
            raise DomainError("annulus needs r_inner > 0")
        return cls(center, float(r_outer), float(r_inner))

    @property
    def kind(self):
        return "Ball" if self.r_inner == 0 else "Annulus"

    @property
    def d(self):
        return len(self.center)

    def contains(self, points):
        r = np.linalg.norm(np.asarray(points, float) - np.asarray(self.center), axis=-1)
        return (r >= self.r_inner) & (r < self.r_outer)

    def to_dict(self):
        return {
            "kind": self.kind,
            "center": list(self.center),
            "rInner": self.r_inner,
            "rOuter": self.r_outer,
        }


@dataclass(frozen=True)
class GridParams:
    n: int = 16
    point_cap: int = DEFAULT_POINT_CAP
    seed: int = 42

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"grid resolution must be >= 2, got {self.n}")
        if self.point_cap < 1:
            raise DomainError("point_cap must be >= 1")


@dataclass
class Lattice:
    """Cell centers of an ``n**d`` cube lattice with spacing ``h``."""

    lo: np.ndarray
    h: float
    n: int
    points: np.ndarray = field(repr=False)

    @property
    def cell_volume(self):
        return self.h ** self.points.shape[1]


def cube_lattice(center, half_width, n, d=None):
    """All cell centers of the cube ``center +- half_width`` split into ``n`` per axis."""
    center = np.asarray(center, float)
    d = center.size if d is None else d
    h = 2.0 * half_width / n
    lo = center - half_width
    axis = (np.arange(n) + 0.5) * h
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1) + lo
    return Lattice(lo=lo, h=h, n=n, points=pts)


def enclosing_lattice(regions, n):
    """Lattice on the smallest axis-aligned cube containing every region."""
    lo = np.min([np.asarray(r.center) - r.r_outer for r in regions], axis=0)
    hi = np.max([np.asarray(r.center) + r.r_outer for r in regions], axis=0)
    half = float(np.max(hi - lo)) / 2.0
    return cube_lattice((lo + hi) / 2.0, half, n)


def region_points(region, grid, lattice=None):
    """Cell centers inside ``region`` and the lattice they came from.

    Raises CapacityError when the count exceeds ``grid.point_cap`` and
    DomainError when no cell center falls inside the region.
    """
    if lattice is None:
        lattice = cube_lattice(region.center, region.r_outer, grid.n)
    mask = region.contains(lattice.points)
    count = int(mask.sum())
    if count > grid.point_cap:
        raise CapacityError(f"{count} points exceed point cap {grid.point_cap}")
    if count == 0:
        raise DomainError("no cell centers inside region")
    return lattice.points[mask], lattice
