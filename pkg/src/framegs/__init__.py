"""Parseval frames via a generalized Gram-Schmidt pass, and the
fixed-point iteration that drives any frame toward a zero-extended
orthonormal basis."""

from .errors import (
    DimensionMismatchError,
    FrameError,
    JacobiConvergenceError,
    NonFiniteError,
    NotHermitianError,
    RankDeficientError,
)
from .frames import (
    DEP_TOL,
    ZERO_REL_TOL,
    FrameBounds,
    FrameSeq,
    ParsevalCheck,
    canonical_parseval,
    dependency_profile,
    frame_bounds,
    frame_operator,
    is_parseval,
    l2_distance,
    reconstruct,
    span_projection,
    zero_indices,
)
from .generate import (
    EXAMPLE_NAMES,
    example_frame,
    random_frame,
    random_frame_corpus,
    random_independent_frame,
    random_onb_frame,
)
from .ggs import (
    KIND_DEPENDENT,
    KIND_INDEPENDENT,
    KIND_ZERO,
    DependentUpdateRecord,
    StepTrace,
    dependent_update,
    ggs_pass,
    norm_drop,
)
from .iteration import (
    IterationTrace,
    LimitReport,
    RecurrenceReport,
    StabilizationCheck,
    check_stabilized_last,
    classify_limit,
    closed_form_last_dependent,
    is_fixed_point,
    iterate,
    trace_csv_rows,
    trace_to_dict,
    validate_recurrences,
)
from .linalg import hermitian_eigen, inner, inv_sqrt

__version__ = "0.1.0"

__all__ = [
    "DEP_TOL",
    "ZERO_REL_TOL",
    "EXAMPLE_NAMES",
    "KIND_DEPENDENT",
    "KIND_INDEPENDENT",
    "KIND_ZERO",
    "DependentUpdateRecord",
    "DimensionMismatchError",
    "FrameBounds",
    "FrameError",
    "FrameSeq",
    "IterationTrace",
    "JacobiConvergenceError",
    "LimitReport",
    "NonFiniteError",
    "NotHermitianError",
    "ParsevalCheck",
    "RankDeficientError",
    "RecurrenceReport",
    "StabilizationCheck",
    "StepTrace",
    "canonical_parseval",
    "check_stabilized_last",
    "classify_limit",
    "closed_form_last_dependent",
    "dependency_profile",
    "dependent_update",
    "example_frame",
    "frame_bounds",
    "frame_operator",
    "ggs_pass",
    "hermitian_eigen",
    "inner",
    "inv_sqrt",
    "is_fixed_point",
    "is_parseval",
    "iterate",
    "l2_distance",
    "norm_drop",
    "random_frame",
    "random_frame_corpus",
    "random_independent_frame",
    "random_onb_frame",
    "reconstruct",
    "span_projection",
    "trace_csv_rows",
    "trace_to_dict",
    "validate_recurrences",
    "zero_indices",
]
