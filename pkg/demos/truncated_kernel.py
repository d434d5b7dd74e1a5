"""
Truncated Riesz kernels
=======================

The Newtonian kernel with its Taylor polynomial at the origin removed
vanishes to order N at x = 0.  We evaluate it, compare with a direct
Taylor subtraction and watch the remainder shrink like t^N.
"""

import numpy as np

from uckl.kernels import KernelSpec, truncated_kernel, truncated_kernel_direct

y = np.array([1.0, 0.0, 0.0])

# plain kernel: 1/(4 pi |x - y|)
print("K_0(0, e1) =", truncated_kernel(KernelSpec(3, 2.0), np.zeros(3), y).real)

# the remainder against the direct subtraction, for a few orders
x = np.array([0.3, 0.2, 0.0])
for N in (1, 2, 3):
    spec = KernelSpec(3, 2.0, N)
    a = truncated_kernel(spec, x, y).real
    b = truncated_kernel_direct(spec, x, y).real
    print(f"N={N}  series {a:.15e}  direct {b:.15e}")

# scaling x by s multiplies the leading remainder by about s^N
for N in (2, 6, 12):
    spec = KernelSpec(3, 2.0, N)
    vals = [abs(truncated_kernel(spec, s * x, y)) for s in (1.0, 0.5)]
    print(f"N={N:2d}  halving |x| shrinks K_N by {vals[0] / vals[1]:.1f}  (2^N = {2**N})")

# complex order and a Carleman weight |y|^w / |x|^w
spec = KernelSpec(3, 2.0 + 1.0j, 4, 4.25)
print("weighted complex kernel:", truncated_kernel(spec, x, y))
