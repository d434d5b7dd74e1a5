"""Independent high-precision reference values used across the tests."""
import math

import mpmath as mp
import numpy as np

DPS = 40


def _dps(N, t):
    """Working digits: the remainder is ~t^N below the function value."""
    t = float(t)
    lost = N * max(0.0, -math.log10(t)) if 0 < t < 1 else 0.0
    return DPS + int(lost) + 5


def remainder_gegenbauer(s, N, t, theta):
    """``(1 - 2t cos(theta) + t^2)^s`` minus its degree N-1 Taylor polynomial
    in t, from the Gegenbauer generating function
    ``(1 - 2xt + t^2)^{-a} = sum_m C_m^{(a)}(x) t^m``."""
    with mp.workdps(_dps(N, t)):
        s = mp.mpc(s)
        t = mp.mpf(t)
        c = mp.cos(mp.mpf(theta))
        f = (1 - 2 * t * c + t * t) ** s
        poly = mp.fsum(mp.gegenbauer(m, -s, c) * t**m for m in range(N))
        return complex(f - poly)


def riesz_constant_mp(z, d):
    with mp.workdps(DPS):
        z = mp.mpc(z)
        return complex(mp.gamma((d - z) / 2) / (mp.pi ** (mp.mpf(d) / 2) * 2**z * mp.gamma(z / 2)))


def truncated_kernel_mp(d, z, N, x, y, w=0.0):
    """Reference value of the (weighted) truncated Riesz kernel."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    ratio = float(np.linalg.norm(x) / np.linalg.norm(y))
    with mp.workdps(_dps(N, ratio)):
        nx = mp.sqrt(mp.fsum(mp.mpf(v) ** 2 for v in x))
        ny = mp.sqrt(mp.fsum(mp.mpf(v) ** 2 for v in y))
        dot = mp.fsum(mp.mpf(a) * mp.mpf(b) for a, b in zip(x, y))
        t = nx / ny
        cos = dot / (nx * ny) if nx else mp.mpf(1)
        cos = max(min(cos, mp.mpf(1)), mp.mpf(-1))
        theta = mp.acos(cos)
        s = (mp.mpc(z) - d) / 2
        c = mp.cos(theta)
        f = (1 - 2 * t * c + t * t) ** s
        poly = mp.fsum(mp.gegenbauer(m, -s, c) * t**m for m in range(N))
        rem = f - poly
        val = mp.mpc(riesz_constant_mp(z, d)) * ny ** (mp.mpc(z) - d) * rem
        if w:
            val *= (ny / nx) ** w
        return complex(val)


def binom_bound_lhs(gamma, k):
    """``|h_k(gamma)|`` for ``(1-w)^{-(1+i gamma)/2}`` from its closed-form
    Pochhammer ratio ``(a)_k / k!`` with ``a = (1+i gamma)/2``."""
    with mp.workdps(DPS):
        a = mp.mpc(0.5, gamma / 2.0)
        return float(abs(mp.rf(a, k) / mp.factorial(k)))
