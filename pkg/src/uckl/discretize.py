"""Nyström discretization of kernel operators and operator-norm estimates.

Matrices use the symmetric weighting ``sqrt(m_i) K(x_i, x_j) sqrt(m_j)`` so
that their spectral norm approximates the L2 -> L2 norm of the integral
operator.  Entries with ``x_i == x_j`` replace the singular self-interaction
by its average over the ball having the cell's volume.
"""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import CapacityError, DomainError, NonConvergenceError
from .grid import GridParams, Region, cube_lattice, enclosing_lattice
from .kernels import (
    KernelSpec,
    diagonal_values,
    plain_kernel_array,
    truncated_kernel_array,
)

__all__ = [
    "Region", "GridParams", "DiscreteOperator", "NormEstimate", "assemble",
    "assemble_kernel", "spectral_norm", "one_one_norm", "sup_image_norm",
    "p_to_two_lower", "dump_matrix", "kernel_function", "half_operator",
]

_BLOCK_PAIRS = 1 << 21


def thread_count():
    """Worker count from ``UCKL_THREADS`` (default: all cores, at most 8)."""
    env = os.environ.get("UCKL_THREADS")
    if env:
        return max(1, int(env))
    return max(1, min(8, os.cpu_count() or 1))


@dataclass
class NormEstimate:
    value: float
    residual: float
    iterations: int
    grid_n: int | None
    kind: str
    h: float | None = None
    points: int | None = None

    @property
    def lower_bound_only(self):
        return self.kind == "pToTwoLower"

    def to_dict(self):
        return {"value": self.value, "residual": self.residual,
                "iterations": self.iterations, "gridN": self.grid_n,
                "kind": self.kind, "h": self.h, "points": self.points}


@dataclass
class DiscreteOperator:
    """Weighted kernel matrix between row points and column points."""

    matrix: np.ndarray
    row_points: np.ndarray
    col_points: np.ndarray
    row_volumes: np.ndarray
    col_volumes: np.ndarray
    h: float | None = None
    n: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def points(self):
        return self.row_points

    @property
    def volumes(self):
        return self.row_volumes

    @classmethod
    def from_matrix(cls, matrix):
        """Wrap a plain matrix with unit volumes (useful for algebraic tests)."""
        matrix = np.atleast_2d(np.asarray(matrix))
        r, c = matrix.shape
        return cls(matrix, np.zeros((r, 1)), np.zeros((c, 1)), np.ones(r), np.ones(c))


def _as_operator(A):
    return A if isinstance(A, DiscreteOperator) else DiscreteOperator.from_matrix(A)


def kernel_function(spec):
    """Pairwise kernel evaluator ``f(X, Y)`` for a KernelSpec."""
    if spec.N == 0 and spec.w == 0.0:
        return lambda X, Y: plain_kernel_array(spec, X, Y)
    return lambda X, Y: truncated_kernel_array(spec, X, Y)


def assemble_kernel(kernel, diagonal, left, right=None, left_mult=None,
                    right_mult=None, grid=GridParams(), dtype=float, meta=None):
    """Nyström matrix for an arbitrary pairwise ``kernel(X, Y)``.

    ``diagonal(points, cell_volume)`` returns the kernel value to use where a
    row point coincides with a column point.  Multipliers are callables
    ``f(points, floor=...)`` or None for 1.
    """
    right = left if right is None else right
    lattice = enclosing_lattice([left, right], grid.n)
    lmask = left.contains(lattice.points)
    rmask = right.contains(lattice.points)
    total = int(np.count_nonzero(lmask | rmask))
    if total > grid.point_cap:
        raise CapacityError(f"{total} points exceed point cap {grid.point_cap}")
    if not lmask.any() or not rmask.any():
        raise DomainError("region contains no cell centers at this resolution")
    ridx = np.flatnonzero(lmask)
    cidx = np.flatnonzero(rmask)
    X = lattice.points[ridx]
    Y = lattice.points[cidx]
    m = lattice.cell_volume
    floor = lattice.h / 2.0
    lv = np.ones(len(X)) if left_mult is None else np.asarray(left_mult(X, floor=floor), float)
    rv = np.ones(len(Y)) if right_mult is None else np.asarray(right_mult(Y, floor=floor), float)

    mat = np.zeros((len(X), len(Y)), dtype)
    rows_per_block = max(1, _BLOCK_PAIRS // max(len(Y), 1))
    blocks = [slice(a, min(a + rows_per_block, len(X)))
              for a in range(0, len(X), rows_per_block)]
    active_cols = np.flatnonzero(rv != 0)

    def fill(block):
        rows = np.arange(len(X))[block]
        rows = rows[lv[rows] != 0]
        if rows.size == 0 or active_cols.size == 0:
            return
        with np.errstate(all="ignore"):
            K = kernel(X[rows][:, None, :], Y[active_cols][None, :, :])
        mat[np.ix_(rows, active_cols)] = (m * lv[rows][:, None]) * K * rv[active_cols][None, :]

    workers = thread_count()
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(fill, blocks))
    else:
        for b in blocks:
            fill(b)

    common, ri, ci = np.intersect1d(ridx, cidx, assume_unique=True, return_indices=True)
    if common.size:
        kd = np.asarray(diagonal(lattice.points[common], m))
        mat[ri, ci] = m * lv[ri] * kd * rv[ci]
    info = {"left": left.to_dict(), "right": right.to_dict()}
    info.update(meta or {})
    return DiscreteOperator(mat, X, Y, np.full(len(X), m), np.full(len(Y), m),
                            h=lattice.h, n=grid.n, meta=info)


def assemble(spec, left, right=None, left_mult=None, right_mult=None, grid=GridParams()):
    """Discretize ``1_left * left_mult * K * right_mult * 1_right``."""
    meta = {"kernel": spec.to_dict(),
            "leftMult": _describe_mult(left_mult),
            "rightMult": _describe_mult(right_mult)}
    return assemble_kernel(
        kernel_function(spec),
        lambda pts, m: diagonal_values(spec, pts, m),
        left, right, left_mult, right_mult, grid,
        dtype=float if spec.is_real else complex, meta=meta,
    )


def half_operator(spec, ball, left_mult, grid=GridParams(), box_factor=2.0):
    """Discretize ``1_ball left_mult K`` from a cube of half-width
    ``box_factor * r_outer`` around the ball's center into the ball.

    The cube lattice shares the ball lattice's spacing and alignment, so
    coincident points get the diagonal rule.
    """
    if int(box_factor * grid.n) != box_factor * grid.n or grid.n % 2:
        raise DomainError("box_factor * n and n must be integers with n even")
    nbox = int(box_factor * grid.n)
    box = cube_lattice(ball.center, box_factor * ball.r_outer, nbox)
    if len(box.points) > grid.point_cap:
        raise CapacityError(f"{len(box.points)} points exceed point cap {grid.point_cap}")
    rmask = ball.contains(box.points)
    X = box.points[rmask]
    Y = box.points
    m = box.cell_volume
    lv = np.asarray(left_mult(X, floor=box.h / 2.0), float)
    kern = kernel_function(spec)
    mat = np.zeros((len(X), len(Y)), float if spec.is_real else complex)
    rows_per_block = max(1, _BLOCK_PAIRS // len(Y))
    for a in range(0, len(X), rows_per_block):
        with np.errstate(all="ignore"):
            K = kern(X[a:a + rows_per_block][:, None, :], Y[None, :, :])
        mat[a:a + rows_per_block] = m * lv[a:a + rows_per_block][:, None] * K
    ri = np.arange(len(X))
    ci = np.flatnonzero(rmask)
    mat[ri, ci] = m * lv * diagonal_values(spec, X, m)
    return DiscreteOperator(mat, X, Y, np.full(len(X), m), np.full(len(Y), m),
                            h=box.h, n=grid.n,
                            meta={"kernel": spec.to_dict(), "left": ball.to_dict(),
                                  "boxFactor": box_factor})


def _describe_mult(mult):
    if mult is None:
        return None
    from .potentials import describe

    pot = getattr(mult, "potential", None)
    power = getattr(mult, "power", 1.0)
    return {"potential": describe(pot) if pot is not None else repr(mult), "power": power}


def spectral_norm(A, tol=1e-6, max_iter=10000, seed=42):
    """Largest singular value by power iteration on ``A^H A``.

    The estimate ``sqrt(|A^H A v|)`` is a lower bound that increases to the
    norm; iteration stops when its relative change drops below ``tol``.
    """
    op = _as_operator(A)
    M = op.matrix
    if tol <= 0:
        raise DomainError("tol must be positive")
    if not np.all(np.isfinite(M)):
        raise DomainError("matrix has non-finite entries")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(M.shape[1])
    v /= np.linalg.norm(v)
    MH = M.conj().T
    prev = 0.0
    sigma = 0.0
    change = np.inf
    for it in range(1, max_iter + 1):
        u = M @ v
        wv = MH @ u
        nw = float(np.linalg.norm(wv))
        if nw == 0.0:
            return NormEstimate(0.0, 0.0, it, op.n, "twoTwo", op.h, M.shape[1])
        sigma = float(np.sqrt(nw))
        v = wv / nw
        change = abs(sigma - prev) / sigma
        if it > 1 and change < tol:
            return NormEstimate(sigma, change, it, op.n, "twoTwo", op.h, M.shape[1])
        prev = sigma
    best = NormEstimate(sigma, change, max_iter, op.n, "twoTwo", op.h, M.shape[1])
    raise NonConvergenceError(f"power iteration did not converge in {max_iter} steps", best)


def one_one_norm(A):
    """``max_j sum_i m_i |K(x_i, x_j) mults|`` (exact for the discrete operator)."""
    op = _as_operator(A)
    scale = np.sqrt(op.row_volumes)[:, None] / np.sqrt(op.col_volumes)[None, :]
    sums = (np.abs(op.matrix) * scale).sum(axis=0)
    value = float(sums.max()) if sums.size else 0.0
    return NormEstimate(value, 0.0, 0, op.n, "oneOne", op.h, op.matrix.shape[1])


def sup_image_norm(spec, density, eval_region, grid=GridParams(), extra_points=None):
    """``max_x |sum_j K(x, y_j) rho_j m_j|`` over the lattice of ``eval_region``
    plus its center (and any ``extra_points``)."""
    if np.any(density.values < 0):
        raise DomainError("density must be nonnegative")
    lat = cube_lattice(eval_region.center, eval_region.r_outer, grid.n)
    pts = lat.points[eval_region.contains(lat.points)]
    extra = [np.asarray(eval_region.center, float)[None]]
    if extra_points is not None:
        extra.append(np.atleast_2d(np.asarray(extra_points, float)))
    pts = np.vstack([pts] + extra)
    if len(pts) > grid.point_cap + len(extra):
        raise CapacityError(f"{len(pts)} evaluation points exceed point cap {grid.point_cap}")
    active = density.values != 0
    if not active.any():
        return NormEstimate(0.0, 0.0, 0, grid.n, "supImage", lat.h, len(pts))
    Y = density.points[active]
    q = density.values[active] * density.cell_volumes[active]
    kern = kernel_function(spec)
    tree = cKDTree(Y)
    tol = 1e-9 * lat.h
    out = np.zeros(len(pts), float if spec.is_real else complex)
    rows_per_block = max(1, _BLOCK_PAIRS // len(Y))
    for a in range(0, len(pts), rows_per_block):
        P = pts[a:a + rows_per_block]
        with np.errstate(all="ignore"):
            K = kern(P[:, None, :], Y[None, :, :])
        dist, j = tree.query(P, distance_upper_bound=tol)
        hit = np.isfinite(dist)
        if hit.any():
            rows = np.flatnonzero(hit)
            cols = j[hit]
            vols = density.cell_volumes[active][cols]
            K[rows, cols] = [complex(diagonal_values(spec, Y[c][None], v)[0]).real
                             if spec.is_real else diagonal_values(spec, Y[c][None], v)[0]
                             for c, v in zip(cols, vols)]
        out[a:a + len(P)] = K @ q
    value = float(np.max(np.abs(out)))
    return NormEstimate(value, 0.0, 0, grid.n, "supImage", lat.h, len(pts))


def _lp_norm(x, p):
    return float(np.sum(np.abs(x) ** p) ** (1.0 / p))


def p_to_two_lower(A, p, iters=500, tol=1e-10, seed=42):
    """Certified lower bound on the L^p -> L^2 operator norm.

    Boyd's alternating dual-map iteration from four starts; every iterate
    ``x`` gives the valid bound ``|A x|_2 / |x|_p`` and the best one is
    returned.
    """
    if not 1 < p <= 2:
        raise DomainError(f"p must lie in (1, 2], got {p}")
    op = _as_operator(A)
    B = op.matrix * (op.col_volumes ** (0.5 - 1.0 / p))[None, :]
    q = p / (p - 1.0)
    rng = np.random.default_rng(seed)
    best, best_it, last_gain = 0.0, 0, np.inf
    # The iteration only finds local maxima; start from a random vector, the
    # flat vector, the heaviest column and the top right-singular direction.
    heavy = np.zeros(B.shape[1])
    heavy[int(np.argmax(np.linalg.norm(B, axis=0)))] = 1.0
    top = rng.standard_normal(B.shape[1])
    for _ in range(30):
        nxt = B.conj().T @ (B @ top)
        nn = np.linalg.norm(nxt)
        if nn == 0:
            break
        top = nxt / nn
    starts = [rng.standard_normal(B.shape[1]), np.ones(B.shape[1]), heavy, top]
    total = 0
    for x in starts:
        size = _lp_norm(x, p)
        if not (size > 0 and math.isfinite(size)):
            continue
        x = x / size
        prev = 0.0
        for it in range(1, iters + 1):
            total += 1
            y = B @ x
            val = float(np.linalg.norm(y))
            if val > best:
                best, best_it = val, total
            if val == 0.0:
                break
            g = B.conj().T @ (y / val)
            ag = np.abs(g)
            if not ag.any():
                break
            phase = np.where(ag > 0, g / np.where(ag > 0, ag, 1), 0)
            x = phase * ag ** (q - 1.0)
            x = x / _lp_norm(x, p)
            last_gain = (val - prev) / val
            if it > 1 and last_gain < tol:
                break
            prev = val
    return NormEstimate(best, max(float(last_gain), 0.0), best_it, op.n, "pToTwoLower",
                        op.h, B.shape[1])


def dump_matrix(op, path):
    """Write ``row, col, re, im`` CSV rows for every nonzero entry."""
    M = np.asarray(op.matrix)
    rows, cols = np.nonzero(M)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["row", "col", "re", "im"])
        for i, j in zip(rows, cols):
            v = complex(M[i, j])
            wr.writerow([int(i), int(j), repr(v.real), repr(v.imag)])
