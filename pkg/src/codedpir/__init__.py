"""Private information retrieval over systematically coded storage.

Library plus CLI workbench: exact GF(2^w) linear algebra, systematic code
modelling with erasure-correctability tests, the access-matrix width scan
that minimizes the download price of a private retrieval, and the protocol
itself with end-to-end recovery and privacy verification.
"""

from .algebra import (
    FieldElement,
    FieldMatrix,
    FieldMismatchError,
    FieldSpec,
    ReducibleModulusError,
    SingularSystemError,
    field_new,
    matrix_rank,
    nullspace,
    rref,
    solve,
)
from .codes import (
    DerivedCode,
    ErasurePattern,
    LinearCode,
    MinDistanceCapError,
    NotSystematicError,
    RateError,
    StorageSymbol,
    code_from_parity_check,
    derived_code,
    encode_file,
    is_ml_correctable,
    min_distance,
    zero_symbol,
)
from .optimizer import (
    EMatrix,
    OptimizationResult,
    OptimizerConfig,
    PatternList,
    ThetaBounds,
    assert_valid_e_matrix,
    compute_erasure_pattern_list,
    compute_matrix,
    cpop,
    e_matrix_violations,
    optimize_cpop,
    theta_bounds,
)
from .protocol import (
    PrivacyReport,
    ProtocolViolationError,
    QuerySet,
    ResponseSet,
    StorageArray,
    build_queries,
    build_storage,
    collect_responses,
    cpop_of_run,
    exact_privacy_check,
    node_response,
    random_file,
    recover_file,
    verify_privacy,
)

__version__ = "0.1.0"

__all__ = [
    "DerivedCode",
    "EMatrix",
    "ErasurePattern",
    "FieldElement",
    "FieldMatrix",
    "FieldMismatchError",
    "FieldSpec",
    "LinearCode",
    "MinDistanceCapError",
    "NotSystematicError",
    "OptimizationResult",
    "OptimizerConfig",
    "PatternList",
    "PrivacyReport",
    "ProtocolViolationError",
    "QuerySet",
    "RateError",
    "ReducibleModulusError",
    "ResponseSet",
    "SingularSystemError",
    "StorageArray",
    "StorageSymbol",
    "ThetaBounds",
    "assert_valid_e_matrix",
    "build_queries",
    "build_storage",
    "code_from_parity_check",
    "collect_responses",
    "compute_erasure_pattern_list",
    "compute_matrix",
    "cpop",
    "cpop_of_run",
    "derived_code",
    "e_matrix_violations",
    "encode_file",
    "exact_privacy_check",
    "field_new",
    "is_ml_correctable",
    "matrix_rank",
    "min_distance",
    "node_response",
    "nullspace",
    "optimize_cpop",
    "random_file",
    "recover_file",
    "rref",
    "solve",
    "theta_bounds",
    "verify_privacy",
    "zero_symbol",
]
