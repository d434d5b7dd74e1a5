"""Potential-class functionals and small-ball scans.

``tau`` measures ``|V|^{(d-1)/4} (-Delta)^{-(d-1)/2} |V|^{(d-1)/4}`` on a
ball, ``tau_f3`` the same with ``(-Delta)^{-1}`` and square-root
multipliers, ``kato_norm`` the sup of the Newtonian potential of
``1_B |V|``.  Scans evaluate a functional over a lattice of centers and a
dyadic ladder of radii; the finest radius stands in for ``limsup``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .discretize import NormEstimate, assemble, half_operator, spectral_norm, sup_image_norm
from .errors import DomainError
from .grid import GridParams, Region, cube_lattice
from .kernels import KernelSpec, riesz_constant
from .potentials import PotentialPower, SampledField, Shifted, describe, sample_on_region

CLASSES = ("fd", "f3", "kato", "morrey", "lorentz")


def _dim(V, d):
    d = getattr(V, "d", 3) if d is None else d
    if int(d) != d or d < 3:
        raise DomainError(f"dimension must be an integer >= 3, got {d}")
    return int(d)


def _ball(x0, rho, d):
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")
    x0 = tuple(float(c) for c in np.atleast_1d(x0))
    if len(x0) != d:
        raise DomainError(f"center has dimension {len(x0)}, expected {d}")
    return Region.ball(x0, rho)


def tau_operator(V, x0, rho, d=None, grid=GridParams(), variant="fd"):
    """The discretized operator behind :func:`tau` (``"fd"``) or :func:`tau_f3`."""
    d = _dim(V, d)
    if variant == "fd":
        z, power = float(d - 1), (d - 1) / 4.0
    elif variant == "f3":
        z, power = 2.0, 0.5
    else:
        raise DomainError(f"unknown tau variant {variant!r}")
    B = _ball(x0, rho, d)
    mult = PotentialPower(V, power)
    return assemble(KernelSpec(d, z), B, B, mult, mult, grid)


def _sandwich_norm(V, x0, rho, d, variant, grid, tol, max_iter):
    op = tau_operator(V, x0, rho, d, grid, variant)
    return spectral_norm(op, tol=tol, max_iter=max_iter, seed=grid.seed)


def tau(V, x0, rho, d=None, grid=GridParams(), tol=1e-6, max_iter=10000):
    """2->2 norm of ``1_B |V|^{(d-1)/4} (-Delta)^{-(d-1)/2} |V|^{(d-1)/4} 1_B``."""
    d = _dim(V, d)
    return _sandwich_norm(V, x0, rho, d, "fd", grid, tol, max_iter)


def tau_f3(V, x0, rho, d=None, grid=GridParams(), tol=1e-6, max_iter=10000):
    """2->2 norm of ``1_B |V|^{1/2} (-Delta)^{-1} |V|^{1/2} 1_B``."""
    d = _dim(V, d)
    return _sandwich_norm(V, x0, rho, d, "f3", grid, tol, max_iter)


def tau_factorized(V, x0, rho, d=None, grid=GridParams(), box_factor=2.0, tol=1e-6,
                   max_iter=10000):
    """Square of the norm of ``1_B |V|^{(d-1)/4} (-Delta)^{-(d-1)/4}``.

    The right side lives on a cube of half-width ``box_factor * rho`` around
    ``x0``; comparing with :func:`tau` checks the discretization.
    """
    d = _dim(V, d)
    B = _ball(x0, rho, d)
    op = half_operator(KernelSpec(d, (d - 1) / 2.0), B, PotentialPower(V, (d - 1) / 4.0),
                       grid, box_factor)
    est = spectral_norm(op, tol=tol, max_iter=max_iter, seed=grid.seed)
    est.value = est.value**2
    return est


def kato_norm(V, x0, rho, d=None, grid=GridParams()):
    """``max_x (-Delta)^{-1}(1_B |V|)(x)`` over the ball lattice and its center."""
    d = _dim(V, d)
    B = _ball(x0, rho, d)
    density = sample_on_region(V, B, grid)
    density = SampledField(density.points, np.abs(density.values), density.cell_volumes)
    return sup_image_norm(KernelSpec(d, 2.0), density, B, grid)


def lp_local_norm(f, p):
    """``(sum m_j |v_j|^p)^{1/p}``."""
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    return float(np.sum(f.cell_volumes * np.abs(f.values) ** p) ** (1.0 / p))


def weak_lorentz_norm(f, p):
    """``sup_t t * |{|f| > t}|^{1/p}`` of the piecewise-constant field.

    Uses the decreasing rearrangement: ``max_k v_(k) (sum_{j<=k} m_j)^{1/p}``.
    """
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    v = np.abs(f.values)
    if not v.any():
        return 0.0
    order = np.argsort(-v, kind="stable")
    mass = np.cumsum(f.cell_volumes[order])
    return float(np.max(v[order] * mass ** (1.0 / p)))


def _ball_field(V, center, r, grid):
    return sample_on_region(V, Region.ball(tuple(center), r), grid)


def morrey_norm(V, p, region, radii, d=None, grid=GridParams(), centers=None):
    """``max_{x, r} r^{2-d/p} ||1_{B(x,r)} V||_p``.

    Centers default to the cell centers of ``region`` at resolution
    ``grid.n`` plus its center; each ball is sampled on its own lattice.
    """
    d = _dim(V, d)
    if not p > (d - 1) / 2.0:
        raise DomainError(f"Morrey index must exceed (d-1)/2, got {p}")
    radii = [float(r) for r in radii]
    if not radii or min(radii) <= 0:
        raise DomainError("radii must be positive")
    if centers is None:
        lat = cube_lattice(region.center, region.r_outer, grid.n)
        centers = np.vstack([lat.points[region.contains(lat.points)], [region.center]])
    best, points = 0.0, 0
    for x in np.atleast_2d(centers):
        for r in radii:
            f = _ball_field(V, x, r, grid)
            points += len(f)
            best = max(best, r ** (2.0 - d / p) * lp_local_norm(f, p))
    return NormEstimate(best, 0.0, 0, grid.n, "morrey", None, points)


def strichartz_constant(d):
    """``2 d^{-1} pi^{d/2} c_{1/2} / (Gamma(d/2) c_{d/2})``."""
    c_half = riesz_constant(0.5, d).real
    c_mid = riesz_constant(d / 2.0, d).real
    return 2.0 / d * math.pi ** (d / 2.0) * c_half / (math.gamma(d / 2.0) * c_mid)


def strichartz_rhs(V, x0, rho, d=None, grid=GridParams()):
    """Sharp-constant bound on ``||1_B |V|^{(d-1)/4} (-Delta)^{-(d-1)/4}||``."""
    d = _dim(V, d)
    f = sample_on_region(V, _ball(x0, rho, d), grid)
    return strichartz_constant(d) * weak_lorentz_norm(f, d / 2.0) ** ((d - 1) / 4.0)


@dataclass
class ClassScanReport:
    potential: str
    cls: str
    centers: np.ndarray
    radii: np.ndarray
    values: np.ndarray
    beta_hat: float
    trend: list = field(default_factory=list)
    p: float | None = None
    grid_n: int | None = None

    def to_dict(self):
        return {
            "potential": self.potential,
            "class": self.cls if self.p is None else f"{self.cls}({self.p:g})",
            "centers": np.asarray(self.centers).tolist(),
            "radii": np.asarray(self.radii).tolist(),
            "values": np.asarray(self.values).tolist(),
            "betaHat": self.beta_hat,
            "trend": self.trend,
            "gridN": self.grid_n,
        }

    def csv_rows(self):
        yield ["center"] + [f"{r:.17g}" for r in self.radii]
        for c, row in zip(self.centers, self.values):
            yield [" ".join(f"{v:.17g}" for v in c)] + [f"{v:.17g}" for v in row]


def _trend(row):
    diffs = np.diff(row)
    scale = max(float(np.max(np.abs(row))), 1e-300)
    if np.all(diffs <= 1e-9 * scale):
        kind = "nonincreasing"
    elif np.all(diffs >= -1e-9 * scale):
        kind = "nondecreasing"
    else:
        kind = "mixed"
    first = row[0]
    return {"kind": kind, "lastOverFirst": float(row[-1] / first) if first else None}


def scan_centers(region, per_axis):
    """Lattice of ball centers in ``region``; a single point means the center."""
    if per_axis < 1:
        raise DomainError("centers per axis must be >= 1")
    if per_axis == 1:
        return np.asarray([region.center], float)
    lat = cube_lattice(region.center, region.r_outer, per_axis)
    pts = lat.points[region.contains(lat.points)]
    if len(pts) == 0:
        pts = np.asarray([region.center], float)
    return pts


def class_value(cls, V, x0, rho, d, grid, p=None, ladder=()):
    """One scan cell: the class functional on ``B(x0, rho)``."""
    if cls == "fd":
        return tau(V, x0, rho, d, grid).value
    if cls == "f3":
        return tau_f3(V, x0, rho, d, grid).value
    if cls == "kato":
        return kato_norm(V, x0, rho, d, grid).value
    if cls == "morrey":
        radii = [r for r in ladder if r <= rho] or [rho]
        return morrey_norm(V, p, None, radii, d, grid, centers=[x0]).value
    if cls == "lorentz":
        return weak_lorentz_norm(sample_on_region(V, _ball(x0, rho, d), grid), p)
    raise DomainError(f"unknown class {cls!r}; expected one of {CLASSES}")


def class_scan(V, region, centers_per_axis, rho0, levels, cls, d=None, grid=GridParams(),
               p=None):
    """Class functional over a center lattice and radii ``rho0 * 2**-k``."""
    d = _dim(V, d)
    if levels < 2:
        raise DomainError("a scan needs at least two levels")
    if not rho0 > 0:
        raise DomainError("rho0 must be positive")
    if cls in ("morrey", "lorentz"):
        if p is None:
            p = d / 2.0 if cls == "lorentz" else float(d - 1)
    elif p is not None:
        raise DomainError(f"class {cls!r} takes no exponent")
    radii = rho0 * 2.0 ** -np.arange(levels)
    centers = scan_centers(region, centers_per_axis)
    values = np.zeros((len(centers), levels))
    for i, x0 in enumerate(centers):
        for k, r in enumerate(radii):
            values[i, k] = class_value(cls, V, x0, r, d, grid, p, radii)
    beta_hat = float(values[:, -1].max())
    return ClassScanReport(describe(V), cls, centers, radii, values, beta_hat,
                           [_trend(row) for row in values], p, grid.n)


def one_rel_check(V, x0, rhos, d=None, grid=GridParams()):
    """``(rho, tau(|V|+1), tau(V))`` for each radius."""
    d = _dim(V, d)
    out = []
    for rho in rhos:
        lhs = tau(Shifted(V, 1.0), x0, rho, d, grid).value
        rhs = tau(V, x0, rho, d, grid).value
        out.append((float(rho), lhs, rhs))
    return out
