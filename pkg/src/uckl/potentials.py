"""Potentials V on R^d and their sampling on cell grids.

Every potential is a small frozen dataclass that evaluates on arrays of
points with shape ``(..., d)``.  The optional ``floor`` argument implements
the singularity floor used when sampling at cell centers: Hardy potentials
see ``max(|x|, floor)`` and Stein potentials see ``max(||x| - 1|, floor)``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import DomainError
from .grid import GridParams, Region, region_points


@dataclass(frozen=True)
class Hardy:
    """``beta * ((d-2)/2)**2 * |x|**-2``."""

    beta: float
    d: int = 3

    def __post_init__(self):
        if self.beta < 0:
            raise DomainError("Hardy potential needs beta >= 0")
        _check_dim(self.d)

    @property
    def coefficient(self):
        return self.beta * ((self.d - 2) / 2.0) ** 2

    def __call__(self, x, floor=0.0):
        r = np.maximum(np.linalg.norm(x, axis=-1), floor)
        with np.errstate(divide="ignore"):
            return self.coefficient / r**2

    def singular(self, x):
        return np.linalg.norm(x, axis=-1) == 0


@dataclass(frozen=True)
class ConstantBall:
    """``c`` on the open ball ``|x| < radius``, zero elsewhere."""

    c: float
    radius: float
    d: int = 3

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("ConstantBall needs radius > 0")
        _check_dim(self.d)

    def __call__(self, x, floor=0.0):
        r = np.linalg.norm(x, axis=-1)
        return np.where(r < self.radius, float(self.c), 0.0)

    def singular(self, x):
        return np.zeros(np.shape(x)[:-1], bool)


@dataclass(frozen=True)
class Stein:
    """Annular potential with a sphere singularity at ``|x| = 1``.

    ``C / (s**(2/(d-1)) * (-ln s)**b)`` with ``s = ||x| - 1|`` on the open
    annulus ``1 - delta < |x| < 1 + delta``; zero elsewhere.
    """

    C: float
    b: float
    delta: float
    d: int = 3

    def __post_init__(self):
        _check_dim(self.d)
        if not self.C > 0:
            raise DomainError("Stein potential needs C > 0")
        if not self.b > 2.0 / (self.d - 1):
            raise DomainError(f"Stein potential needs b > 2/(d-1), got b={self.b}")
        if not 0 < self.delta < 1:
            raise DomainError("Stein potential needs 0 < delta < 1")

    def __call__(self, x, floor=0.0):
        r = np.linalg.norm(x, axis=-1)
        inside = (r > 1 - self.delta) & (r < 1 + self.delta)
        s = np.maximum(np.abs(r - 1.0), floor)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = self.C / (s ** (2.0 / (self.d - 1)) * (-np.log(s)) ** self.b)
        return np.where(inside, v, 0.0)

    def singular(self, x):
        return np.linalg.norm(x, axis=-1) == 1.0


@dataclass(frozen=True, eq=False)
class GridSampled:
    """Piecewise-constant potential read from samples on a cube lattice.

    Evaluation returns the value of the nearest sample when the query point
    lies in that sample's cell, and zero otherwise.
    """

    points: np.ndarray
    values: np.ndarray
    cell_volume: float

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, float))
        vals = np.asarray(self.values, float).ravel()
        if len(pts) != len(vals):
            raise DomainError("points and values must have equal length")
        if not self.cell_volume > 0:
            raise DomainError("cell_volume must be positive")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_tree", cKDTree(pts))

    @property
    def d(self):
        return self.points.shape[1]

    def __call__(self, x, floor=0.0):
        x = np.asarray(x, float)
        flat = x.reshape(-1, self.d)
        half = 0.5 * self.cell_volume ** (1.0 / self.d)
        dist, idx = self._tree.query(flat, p=np.inf)
        out = np.where(dist <= half * (1 + 1e-12), self.values[idx], 0.0)
        return out.reshape(x.shape[:-1])

    def singular(self, x):
        return np.zeros(np.shape(x)[:-1], bool)

    @classmethod
    def from_csv(cls, path, cell_volume=None):
        """Load ``x1..xd,value`` rows (one header row).

        Without ``cell_volume`` the cell side is taken as the smallest
        nonzero coordinate spacing.
        """
        with open(Path(path), newline="") as fh:
            rows = list(csv.reader(fh))
        data = np.array([[float(v) for v in row] for row in rows[1:] if row], float)
        pts, vals = data[:, :-1], data[:, -1]
        if cell_volume is None:
            steps = [np.diff(np.unique(pts[:, k])) for k in range(pts.shape[1])]
            steps = np.concatenate([s[s > 1e-12] for s in steps])
            if steps.size == 0:
                raise DomainError("cannot infer cell size from a single point")
            cell_volume = float(steps.min()) ** pts.shape[1]
        return cls(pts, vals, float(cell_volume))


@dataclass(frozen=True)
class Shifted:
    """``|base| + shift``; used for the comparison potential ``|V| + 1``."""

    base: object
    shift: float = 1.0

    @property
    def d(self):
        return self.base.d

    def __call__(self, x, floor=0.0):
        return np.abs(self.base(x, floor)) + self.shift

    def singular(self, x):
        return self.base.singular(x)


@dataclass(frozen=True)
class Zero:
    d: int = 3

    def __call__(self, x, floor=0.0):
        return np.zeros(np.shape(x)[:-1])

    def singular(self, x):
        return np.zeros(np.shape(x)[:-1], bool)


@dataclass(frozen=True)
class PotentialPower:
    """Multiplier ``|V|**power`` evaluated with the singularity floor."""

    potential: object
    power: float

    def __call__(self, x, floor=0.0):
        v = np.abs(self.potential(x, floor))
        if self.power == 1.0:
            return v
        return v**self.power


@dataclass
class SampledField:
    points: np.ndarray
    values: np.ndarray
    cell_volumes: np.ndarray

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, float))
        self.values = np.asarray(self.values, float).ravel()
        self.cell_volumes = np.broadcast_to(
            np.asarray(self.cell_volumes, float), self.values.shape
        ).copy()
        if not (len(self.points) == len(self.values) == len(self.cell_volumes)):
            raise DomainError("points, values and cell volumes must have equal length")
        if np.any(self.cell_volumes <= 0):
            raise DomainError("cell volumes must be positive")

    def __len__(self):
        return len(self.values)

    def scaled(self, c):
        return SampledField(self.points, c * self.values, self.cell_volumes)


def _check_dim(d):
    if int(d) != d or d < 3:
        raise DomainError(f"dimension must be an integer >= 3, got {d}")


def eval_potential(p, x):
    """Value of ``p`` at a single point; raises DomainError at a singular point."""
    x = np.asarray(x, float)
    if x.ndim != 1:
        raise DomainError("eval_potential takes a single point")
    if getattr(p, "d", x.size) != x.size:
        raise DomainError(f"point has dimension {x.size}, potential has {p.d}")
    if bool(p.singular(x)):
        raise DomainError(f"{type(p).__name__} is singular at {x.tolist()}")
    return float(p(x))


def sample_on_region(p, region, grid=GridParams()):
    """Sample ``p`` at cell centers inside ``region`` with the h/2 floor."""
    pts, lattice = region_points(region, grid)
    vals = p(pts, floor=lattice.h / 2.0)
    return SampledField(pts, vals, np.full(len(pts), lattice.cell_volume))


def parse_potential(text, d=3):
    """Parse the ``name:key=value,...`` mini-grammar.

    >>> parse_potential("hardy:beta=0.5")
    Hardy(beta=0.5, d=3)
    """
    name, _, rest = text.strip().partition(":")
    params = {}
    for item in filter(None, (s.strip() for s in rest.replace(":", ",").split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise DomainError(f"malformed potential parameter {item!r}")
        params[key.strip()] = value.strip()
    name = name.lower()

    def num(key, default=None):
        if key not in params:
            if default is None:
                raise DomainError(f"potential {name!r} needs parameter {key!r}")
            return default
        try:
            return float(params.pop(key))
        except ValueError:
            raise DomainError(f"parameter {key!r} is not a number") from None

    if name == "hardy":
        out = Hardy(num("beta"), d)
    elif name in ("const", "constant"):
        out = ConstantBall(num("c"), num("radius", math.inf), d)
    elif name == "stein":
        out = Stein(num("C"), num("b"), num("delta"), d)
    elif name == "zero":
        out = Zero(d)
    elif name == "grid":
        if "path" not in params:
            raise DomainError("grid potential needs path=<csv>")
        out = GridSampled.from_csv(params.pop("path"))
    else:
        raise DomainError(f"unknown potential {name!r}")
    if params:
        raise DomainError(f"unknown parameters for {name!r}: {sorted(params)}")
    return out


def describe(p):
    """Inverse of parse_potential for the closed-form potentials."""
    if isinstance(p, Hardy):
        return f"hardy:beta={p.beta:g}"
    if isinstance(p, ConstantBall):
        return f"const:c={p.c:g},radius={p.radius:g}"
    if isinstance(p, Stein):
        return f"stein:C={p.C:g},b={p.b:g},delta={p.delta:g}"
    if isinstance(p, Zero):
        return "zero"
    if isinstance(p, Shifted):
        return f"abs({describe(p.base)})+{p.shift:g}"
    return type(p).__name__
