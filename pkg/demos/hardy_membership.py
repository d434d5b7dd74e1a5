"""
The Hardy potential across classes
==================================

beta/4 |x|^{-2} has a bounded sandwich norm tau on every ball, while its
Kato value grows by (1/4) ln 2 each time the grid is halved.
"""

import math

from uckl import GridParams, Hardy, kato_norm, tau_f3

V = Hardy(0.5)
for n in (12, 16, 24):
    t = tau_f3(V, (0, 0, 0), 0.25, 3, GridParams(n))
    print(f"n={n:2d}  tau_f3 = {t.value:.5f}  ({t.iterations} power steps)")

prev = None
for n in (8, 16, 32):
    k = kato_norm(Hardy(1.0), (0, 0, 0), 0.5, 3, GridParams(n, 40000)).value
    step = "" if prev is None else f"  step {k - prev:.4f}"
    print(f"n={n:2d}  Kato value {k:.4f}{step}")
    prev = k
print(f"(1/4) ln 2 = {0.25 * math.log(2):.4f}")
