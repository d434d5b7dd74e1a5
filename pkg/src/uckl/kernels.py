"""Riesz kernels, their Taylor-truncated versions and Carleman weights.

The truncated kernel of ``(-Delta)^{-z/2}`` subtracts from ``x -> |x-y|^{z-d}``
its Taylor polynomial of degree N-1 at ``x = 0``.  Dilation and rotation
reduce every pair (x, y) to ``t = |x|/|y|`` and the angle ``theta`` between
them, where the kernel becomes

    c_z |y|^{z-d} (|1 - t e^{i theta}|^{2s} - P_{N-1}(t, theta)),   s = (z-d)/2,

and ``|1-w|^{2s} = (1-w)^s (1-conj w)^s`` expands in the binomial
coefficients ``h_k`` of ``(1-w)^s``.

Two evaluation routes are used for the remainder (function minus
polynomial):

* subtraction, with the polynomial summed in compensated arithmetic,
  whenever ``t**N >= 1e-4`` (always for ``t >= 1``, where the series
  diverges);
* the convergent tail ``sum_{k+l >= N} h_k h_l w^k conj(w)^l`` when
  ``t**N`` is smaller, which avoids subtracting two nearly equal numbers.

The switch point ``tail_switch(N)`` is clamped to [0.25, 0.75] so the
tail never needs more than a couple of hundred terms.

Both routes return a rounding-error estimate used by the cancellation
sentinel of the lemma checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gamma

from .errors import DomainError, SingularityError, UnsupportedError

EPS = np.finfo(float).eps
TAIL_SWITCH_RANGE = (0.25, 0.75)
_CHUNK = 16384


@dataclass(frozen=True)
class KernelSpec:
    """Kernel parameters.

    ``w`` is the Carleman weight exponent (kernel multiplied by
    ``|x|^{-w} |y|^{w}``); ``delta`` is recorded when ``w`` came from
    :func:`weight_exponent`.
    """

    d: int
    z: complex
    N: int = 0
    w: float = 0.0
    delta: float | None = None

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 3:
            raise DomainError(f"d must be an integer >= 3, got {self.d}")
        if int(self.N) != self.N or self.N < 0:
            raise DomainError(f"N must be a nonnegative integer, got {self.N}")
        z = complex(self.z)
        object.__setattr__(self, "z", z)
        upper = self.d if (self.N == 0 and self.w == 0) else self.d - 1
        if not (0 < z.real < self.d) or z.real > upper:
            raise DomainError(f"Re(z)={z.real} outside the admissible range for d={self.d}")
        if self.delta is not None:
            expected = weight_exponent(self.N, self.d, self.delta)
            if not math.isclose(self.w, expected, rel_tol=0, abs_tol=1e-12):
                raise DomainError("w does not match weight_exponent(N, d, delta)")

    @classmethod
    def carleman(cls, d, z, N, delta):
        return cls(d, z, N, weight_exponent(N, d, delta), delta)

    @property
    def s(self):
        return (self.z - self.d) / 2.0

    @property
    def is_real(self):
        return self.z.imag == 0.0

    def to_dict(self):
        return {"d": self.d, "zRe": self.z.real, "zIm": self.z.imag,
                "N": self.N, "w": self.w, "delta": self.delta}


@dataclass(frozen=True)
class ReducedCoords:
    t: float
    theta: float

    def __post_init__(self):
        if not (0 <= self.t < math.inf):
            raise DomainError("t must be finite and nonnegative")
        if not (0 <= self.theta <= math.pi):
            raise DomainError("theta must lie in [0, pi]")


def riesz_constant(z, d):
    """``Gamma((d-z)/2) / (pi^{d/2} 2^z Gamma(z/2))``."""
    z = complex(z)
    if not 0 < z.real < d:
        raise DomainError(f"Re(z) must lie in (0, {d}), got {z.real}")
    c = gamma((d - z) / 2.0) / (math.pi ** (d / 2.0) * 2.0**z * gamma(z / 2.0))
    return complex(c)


def weight_exponent(N, d, delta):
    if not 0 < delta < 0.5:
        raise DomainError(f"delta must lie in (0, 1/2), got {delta}")
    return N + (d / 2.0 - delta) * (d - 3) / (d - 1)


def _cpow(base, expo):
    """``base**expo`` for positive real ``base`` via the modulus logarithm."""
    if expo.imag == 0.0:
        return np.power(base, expo.real)
    return np.exp(expo * np.log(base))


def riesz_kernel(spec, x, y):
    """``c_z |x-y|^{z-d}``."""
    # math.dist rescales, so tiny separations do not underflow to zero
    r = math.dist(np.asarray(x, float).ravel(), np.asarray(y, float).ravel())
    if r == 0.0:
        raise SingularityError("riesz_kernel is singular at x == y")
    c = riesz_constant(spec.z, spec.d)
    if spec.is_real:
        # real arithmetic keeps an overflow at tiny r a clean inf
        return complex(c.real * float(_cpow(r, spec.z - spec.d).real))
    return complex(c * _cpow(r, spec.z - spec.d))


@lru_cache(maxsize=256)
def _binom_cached(s, K):
    h = np.empty(K + 1, complex)
    h[0] = 1.0
    for k in range(1, K + 1):
        h[k] = h[k - 1] * ((k - 1 - s) / k)
    h.setflags(write=False)
    return h


def binom_coeff_seq(s, K):
    """Coefficients ``h_0..h_K`` of ``(1-w)^s``; ``h_k = h_{k-1}(k-1-s)/k``."""
    if K < 0:
        raise DomainError("K must be >= 0")
    return _binom_cached(complex(s), int(K))


def taylor_coeffs(s, theta, M):
    """``a_m(theta) = sum_{k+l=m} h_k h_l e^{i(k-l)theta}`` for m = 0..M."""
    h = binom_coeff_seq(s, M)
    k = np.arange(M + 1)
    fwd = h * np.exp(1j * k * theta)
    bwd = h * np.exp(-1j * k * theta)
    return np.convolve(fwd, bwd)[: M + 1]


def _fsum_complex(terms):
    terms = np.asarray(terms, complex)
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def taylor_poly_reduced(spec, rc):
    """``P_{N-1}(t, theta)``, the degree N-1 Taylor polynomial of
    ``t -> |1 - t e^{i theta}|^{z-d}`` at 0 (0 when N = 0)."""
    if spec.N == 0:
        return 0j
    a = taylor_coeffs(spec.s, rc.theta, spec.N - 1)
    return _fsum_complex(a * rc.t ** np.arange(spec.N))


# --- vectorized remainder -------------------------------------------------


def _two_sum(a, b):
    s = a + b
    bp = s - a
    return s, (a - (s - bp)) + (b - bp)


class _CompensatedSum:
    """Elementwise cascaded summation (TwoSum with running correction)."""

    def __init__(self, shape, dtype=complex):
        self.s = np.zeros(shape, dtype)
        self.c = np.zeros(shape, dtype)

    def add(self, x):
        self.s, e = _two_sum(self.s, x)
        self.c += e

    def value(self):
        return self.s + self.c


def _subtraction_route(s, N, t, theta, g):
    w = t * np.exp(1j * theta)
    wb = np.conj(w)
    h = binom_coeff_seq(s, N - 1)
    habs = np.abs(h)
    partial, partial_abs = [], []
    acc = _CompensatedSum(t.shape)
    acc_abs = np.zeros(t.shape)
    u = np.ones(t.shape, complex)
    tp = np.ones(t.shape)
    for l in range(N):
        acc.add(h[l] * u)
        acc_abs = acc_abs + habs[l] * tp
        partial.append(acc.value())
        partial_abs.append(acc_abs)
        u = u * wb
        tp = tp * t
    poly = _CompensatedSum(t.shape)
    bound = np.zeros(t.shape)
    v = np.ones(t.shape, complex)
    tp = np.ones(t.shape)
    for k in range(N):
        poly.add(h[k] * v * partial[N - 1 - k])
        bound += habs[k] * tp * partial_abs[N - 1 - k]
        v = v * w
        tp = tp * t
    rem = g - poly.value()
    # exp(s log m) turns the rounding of log m into a relative error of
    # about |s| |log m|; h_k carries ~2k rounding steps, the powers ~k more.
    mod2 = (1.0 - t) ** 2 + 4.0 * t * np.sin(theta / 2.0) ** 2
    with np.errstate(divide="ignore"):
        amp = 4.0 + abs(s) * (np.abs(np.log(mod2)) + 4.0)
    err = EPS * (amp * np.abs(g) + (3 * N + 4) * bound)
    return rem, err


def _tail_route(s, N, t, theta):
    tmax = float(np.max(t)) if t.size else 0.0
    extra = 10 if tmax <= 0 else int(math.ceil(45.0 / math.log(1.0 / tmax))) + 10
    M = N + extra
    h = binom_coeff_seq(s, M)
    habs = np.abs(h)
    w = t * np.exp(1j * theta)
    wb = np.conj(w)
    pw = np.ones((M + 1,) + t.shape, complex)
    for l in range(1, M + 1):
        pw[l] = pw[l - 1] * wb
    tpow = np.abs(pw)
    # T_j(u) = sum_{l=j}^{M} h_l u^l, accumulated from the small end.
    tails_b, tails_abs = {}, {}
    acc_b = _CompensatedSum(t.shape)
    acc_f = _CompensatedSum(t.shape)
    acc_abs = np.zeros(t.shape)
    conj_needed = s.imag != 0.0
    for l in range(M, 0, -1):
        acc_b.add(h[l] * pw[l])
        acc_abs = acc_abs + habs[l] * tpow[l]
        if conj_needed and l >= N:
            acc_f.add(h[l] * np.conj(pw[l]))
        if l <= N:
            tails_b[l] = acc_b.value()
            tails_abs[l] = acc_abs
    tail_f = acc_f.value() if conj_needed else np.conj(tails_b[N])
    log_b = np.log1p(-wb)
    full_b = np.exp(s * log_b)
    rem = _CompensatedSum(t.shape)
    bound = np.zeros(t.shape)
    v = np.ones(t.shape, complex)
    for k in range(N):
        rem.add(h[k] * v * tails_b[N - k])
        bound += habs[k] * tpow[k] * tails_abs[N - k]
        v = v * w
    rem.add(tail_f * full_b)
    bound += tails_abs[N] * np.abs(full_b) * (1.0 + abs(s) * np.abs(log_b))
    return rem.value(), EPS * (3 * M + 8) * bound


def tail_switch(N):
    lo, hi = TAIL_SWITCH_RANGE
    return min(hi, max(lo, 10.0 ** (-4.0 / max(N, 1))))


def reduced_remainder(s, N, t, theta, g=None, method="auto"):
    """``|1-w|^{2s} - P_{N-1}`` at ``w = t e^{i theta}``, with an error estimate.

    ``g`` may supply ``|1-w|^{2s}`` computed more accurately by the caller.
    ``method`` is ``"auto"``, ``"subtract"`` or ``"tail"``.
    Returns ``(remainder, error_estimate)`` as arrays.
    """
    s = complex(s)
    t = np.asarray(t, float)
    theta = np.broadcast_to(np.asarray(theta, float), t.shape)
    if g is None:
        mod2 = (1.0 - t) ** 2 + 4.0 * t * np.sin(theta / 2.0) ** 2
        with np.errstate(divide="ignore"):
            g = _cpow(mod2, s)
    g = np.broadcast_to(np.asarray(g, complex), t.shape)
    if N == 0:
        return g.copy(), EPS * 4.0 * np.abs(g)
    if method == "subtract":
        use_tail = np.zeros(t.shape, bool)
    elif method == "tail":
        if np.any(t >= 1):
            raise DomainError("tail series needs t < 1")
        use_tail = np.ones(t.shape, bool)
    else:
        use_tail = t < tail_switch(N)
    rem = np.empty(t.shape, complex)
    err = np.empty(t.shape)
    for mask, route in ((~use_tail, "subtract"), (use_tail, "tail")):
        idx = np.flatnonzero(mask.ravel())
        order = idx[np.argsort(t.ravel()[idx], kind="stable")] if route == "tail" else idx
        for start in range(0, order.size, _CHUNK):
            sel = order[start:start + _CHUNK]
            tt, th = t.ravel()[sel], theta.ravel()[sel]
            if route == "tail":
                r, e = _tail_route(s, N, tt, th)
            else:
                r, e = _subtraction_route(s, N, tt, th, g.ravel()[sel])
            rem.ravel()[sel] = r
            err.ravel()[sel] = e
    return rem, err


# --- kernels on point pairs -----------------------------------------------


def reduce_pairs(x, y):
    """``(|x|, |y|, |x-y|, t, theta)`` for broadcast arrays of points."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    nx = np.linalg.norm(x, axis=-1)
    ny = np.linalg.norm(y, axis=-1)
    r = np.linalg.norm(x - y, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        yhat = y / ny[..., None]
        par = np.sum(x * yhat, axis=-1)
        perp = np.linalg.norm(x - par[..., None] * yhat, axis=-1)
        t = nx / ny
    theta = np.arctan2(perp, par)
    return nx, ny, r, t, theta


def truncated_kernel_array(spec, x, y, return_error=False):
    """Weighted truncated kernel on broadcast arrays of pairs (no checks).

    Pairs with ``x == y`` or ``y == 0`` give non-finite values; callers
    handle the diagonal separately.
    """
    nx, ny, r, t, theta = reduce_pairs(x, y)
    zd = spec.z - spec.d
    with np.errstate(divide="ignore", invalid="ignore"):
        g = _cpow(r / ny, zd)
        rem, err = reduced_remainder(spec.s, spec.N, t, theta, g)
        pref = riesz_constant(spec.z, spec.d) * _cpow(ny, zd)
        out = pref * rem
        if spec.w != 0.0:
            weight = np.exp(spec.w * (np.log(ny) - np.log(nx)))
            out = out * weight
            err = err * weight
    if spec.is_real:
        out = out.real
    if return_error:
        return out, np.abs(pref) * err
    return out


def plain_kernel_array(spec, x, y):
    r = np.linalg.norm(np.asarray(x, float) - np.asarray(y, float), axis=-1)
    with np.errstate(divide="ignore"):
        out = riesz_constant(spec.z, spec.d) * _cpow(r, spec.z - spec.d)
    return out.real if spec.is_real else out


def _check_pair(x, y, need_y=True):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if x.shape != y.shape or x.ndim != 1:
        raise DomainError("x and y must be points of equal dimension")
    if need_y and not np.any(y):
        raise DomainError("truncated kernel needs y != 0")
    if np.array_equal(x, y):
        raise SingularityError("kernel is singular at x == y")
    return x, y


def truncated_kernel(spec, x, y):
    """``[(-Delta)^{-z/2}]_N(x, y)`` via the (t, theta) reduction."""
    x, y = _check_pair(x, y)
    plain = KernelSpec(spec.d, spec.z, spec.N, 0.0)
    return complex(truncated_kernel_array(plain, x[None], y[None])[0])


def weighted_truncated_kernel(spec, x, y):
    """``|x|^{-w} |y|^{w} [(-Delta)^{-z/2}]_N(x, y)``."""
    x, y = _check_pair(x, y)
    if spec.w != 0.0 and not np.any(x):
        raise DomainError("weighted kernel needs x != 0 when w != 0")
    return complex(truncated_kernel_array(spec, x[None], y[None])[0])


def direct_taylor_terms(spec, x, y, order=3):
    """Homogeneous Taylor terms ``(x . grad)^k / k!`` of ``|x-y|^{z-d}`` at
    ``x = 0`` for k = 0..order (order <= 3), from the analytic value,
    gradient, Hessian and third-derivative tensors."""
    a = spec.z - spec.d
    x = np.asarray(x, float)
    v = -np.asarray(y, float)
    r = float(np.linalg.norm(v))
    eye = np.eye(x.size)
    terms = [_cpow(r, a)]
    if order >= 1:
        grad = a * _cpow(r, a - 2) * v
        terms.append(grad @ x)
    if order >= 2:
        hess = a * _cpow(r, a - 2) * eye + a * (a - 2) * _cpow(r, a - 4) * np.outer(v, v)
        terms.append(x @ hess @ x / 2.0)
    if order >= 3:
        sym = (np.einsum("ij,k->ijk", eye, v) + np.einsum("ik,j->ijk", eye, v)
               + np.einsum("jk,i->ijk", eye, v))
        third = (a * (a - 2) * _cpow(r, a - 4) * sym
                 + a * (a - 2) * (a - 4) * _cpow(r, a - 6) * np.einsum("i,j,k->ijk", v, v, v))
        terms.append(np.einsum("ijk,i,j,k->", third, x, x, x) / 6.0)
    return [complex(t) for t in terms]


def truncated_kernel_direct(spec, x, y):
    """Oracle for N <= 3: plain kernel minus the multivariate Taylor
    polynomial built by :func:`direct_taylor_terms`."""
    if spec.N > 3:
        raise UnsupportedError("direct Taylor subtraction implemented for N <= 3")
    x, y = _check_pair(x, y)
    a = spec.z - spec.d
    poly = sum(direct_taylor_terms(spec, x, y, spec.N - 1)[: spec.N]) if spec.N else 0.0
    value = _cpow(float(np.linalg.norm(x - y)), a) - poly
    return complex(riesz_constant(spec.z, spec.d) * value)


# --- diagonal (singular cell) rule ----------------------------------------


def sphere_area(d):
    """Surface area of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def ball_volume(d):
    return sphere_area(d) / d


def singular_cell_average(spec, m):
    """Average of ``c_z |x-y|^{z-d}`` over a ball of volume ``m`` centered at y."""
    rc = (m / ball_volume(spec.d)) ** (1.0 / spec.d)
    c = riesz_constant(spec.z, spec.d)
    val = c * sphere_area(spec.d) * _cpow(np.asarray(rc), spec.z) / (spec.z * m)
    return val.real if spec.is_real else complex(val)


def diagonal_values(spec, y, m):
    """Kernel value used on the diagonal at points ``y`` with cell volume ``m``.

    The singular part is the cell average; the Taylor part and the weight
    are smooth at ``x = y`` (weight factor 1) and are evaluated there.
    """
    y = np.atleast_2d(np.asarray(y, float))
    avg = singular_cell_average(spec, m)
    if spec.N == 0:
        out = np.full(len(y), avg, dtype=float if spec.is_real else complex)
        return out
    ny = np.linalg.norm(y, axis=-1)
    p_at_one = complex(np.sum(taylor_coeffs(spec.s, 0.0, spec.N - 1)))
    smooth = riesz_constant(spec.z, spec.d) * _cpow(ny, spec.z - spec.d) * p_at_one
    out = avg - smooth
    return out.real if spec.is_real else out
