"""
Uniformity in the truncation order
==================================

Weighted truncated operators on an annulus, normalized by tau^{1/2}, for
N = 1..10.  Their spread stays bounded on the default grid; at larger N
the weight varies sharply across a cell and finer grids move the numbers.
This takes about ten seconds.
"""

from uckl import GridParams, Hardy
from uckl.verify import check_prop_ourlem

rep = check_prop_ourlem(Hardy(0.5), 0.5, 0.1, grid=GridParams(16))
for N, r in enumerate(rep.fitted_growth["ratios"], start=1):
    print(f"N={N:2d}  ratio {r:.5f}")
print("max/min =", round(rep.fitted_growth["maxOverMin"], 3), " pass =", rep.passed)
