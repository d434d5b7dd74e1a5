"""
How large must the Gaussian factor be?
======================================

|h_k(gamma)|, the binomial coefficients of (1 - w)^{-(1 + i gamma)/2},
exceed the gamma = 0 values by at most exp(c gamma^2).  We measure the
smallest c that works on a grid and test a few candidates.
"""

import math

from uckl.verify import check_binom_bound

for name, c in [("pi^2/48", math.pi**2 / 48), ("pi^2/16", math.pi**2 / 16),
                ("pi^2/8", math.pi**2 / 8)]:
    rep = check_binom_bound(c=c)
    print(f"c = {name:8s} {c:.4f}  worst ratio {rep.empirical_constant:.4f}  pass={rep.passed}")

rep = check_binom_bound()
print("smallest c valid on |gamma| <= 10, k <= 200:",
      round(rep.fitted_growth["smallestValidC"], 5))
print("worst case:", rep.worst_case)
