"""Optimal polynomial approximants to 1/f in weighted Hardy spaces and the
distribution of the zeros of ``1 - p_n f``."""
from __future__ import annotations

from .asymptotics import (
    a_decay_table,
    det_lower_bound_ratio,
    dn_correlation,
    g_determinant,
    g_nonvanishing_check,
    h_functional,
    monic_h,
    plan_subsequence,
)
from .errors import (
    ConfigError,
    ConsistencyError,
    DomainError,
    IllConditionedError,
    NumericalError,
    OpaError,
    RootFindingError,
    SubsequenceRequired,
    WeightRangeError,
)
from .kernels import KernelGram, PrecisionAdvisory, assemble_gram, kernel, tail_factor
from .opa import (
    OpaSolution,
    Route,
    evaluate_residual,
    opa_kernel_route,
    opa_normal_equations,
    residual_norm_sq,
    wiener_norm,
)
from .precision import working_precision
from .target import TargetPolynomial
from .weights import WeightModel, check_admissibility, partial_sum, weight_at
from .zeros import (
    EmpiricalMeasure,
    discrepancy,
    equidistribution,
    find_roots,
    radial_report,
    weyl_moments,
)

__version__ = "0.1.0"
