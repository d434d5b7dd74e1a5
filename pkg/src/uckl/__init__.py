"""Truncated Riesz kernels, Carleman-weighted operators and potential-class
functionals, with numerical checks of the kernel bounds they rely on."""
from .classes import (
    ClassScanReport,
    class_scan,
    kato_norm,
    lp_local_norm,
    morrey_norm,
    one_rel_check,
    strichartz_constant,
    strichartz_rhs,
    tau,
    tau_f3,
    weak_lorentz_norm,
)
from .discretize import (
    DiscreteOperator,
    NormEstimate,
    assemble,
    one_one_norm,
    p_to_two_lower,
    spectral_norm,
    sup_image_norm,
)
from .errors import (
    CapacityError,
    DomainError,
    NonConvergenceError,
    SingularityError,
    UcklError,
    UnsupportedError,
)
from .grid import GridParams, Region
from .kernels import (
    KernelSpec,
    riesz_constant,
    riesz_kernel,
    taylor_coeffs,
    truncated_kernel,
    truncated_kernel_direct,
    weight_exponent,
    weighted_truncated_kernel,
)
from .potentials import ConstantBall, GridSampled, Hardy, Stein, Zero, parse_potential

__version__ = "0.1.0"
