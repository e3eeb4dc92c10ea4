"""walsh-trunc: truncated Walsh-Hadamard matrices and their operator norms.

The package builds truncation patterns of Walsh-Hadamard matrices (the
standard nested family, two-branch variants, trimmed variants, and random
ones), computes their operator norms by several independent routes (dense
SVD, matrix-free power iteration, and exact low-dimensional level-matrix
reductions), analyzes branch/node structure, and exposes the linearized
partial-sum operators whose norms those matrix norms bound.

Submodules: ``walsh_core`` (Walsh functions, step functions, the dense
orthogonal matrix), ``truncation`` (truncation profiles, matrix families,
trie structure), ``spectral`` (norm routes, level-matrix reductions,
eigenvector machinery), ``critical`` (block objective and critical
points), ``partial_sum`` (linearized partial-sum rules), and ``cli``.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .critical import (
    CriticalReport,
    FParams,
    eval_F,
    extract_params,
    find_critical,
    k_sweep,
)
from .partial_sum import (
    LinearizedOperator,
    OperatorNormBound,
    localize_phi,
    operator_norm_bound,
)
from .spectral import (
    build_level_matrix,
    dense_norm,
    eigenvector_recursion,
    level_norm_curve,
    level_vector,
    power_norm,
    total_correlation,
    two_branch_level_matrix,
)
from .truncation import (
    TruncationMap,
    TWHMatrix,
    branch_decompose,
    node_reduce,
    random_dyadic,
    random_one_node,
    standard_truncation,
    trim,
    two_branch,
)
from .walsh_core import (
    DyadicPoint,
    StepFunction,
    WHMatrix,
    analyze,
    build_wh,
    synthesize,
    walsh_eval,
)

__all__ = [
    "__version__",
    "CriticalReport",
    "DyadicPoint",
    "FParams",
    "LinearizedOperator",
    "OperatorNormBound",
    "StepFunction",
    "TWHMatrix",
    "TruncationMap",
    "WHMatrix",
    "analyze",
    "branch_decompose",
    "build_level_matrix",
    "build_wh",
    "dense_norm",
    "eigenvector_recursion",
    "eval_F",
    "extract_params",
    "find_critical",
    "k_sweep",
    "level_norm_curve",
    "level_vector",
    "localize_phi",
    "node_reduce",
    "operator_norm_bound",
    "power_norm",
    "random_dyadic",
    "random_one_node",
    "standard_truncation",
    "synthesize",
    "total_correlation",
    "trim",
    "two_branch",
    "two_branch_level_matrix",
    "walsh_eval",
]
