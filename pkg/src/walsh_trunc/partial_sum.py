"""Linearized partial-sum operators on dyadic step functions.

A partial-sum rule assigns every dyadic sample point a summation depth:
at ``k / 2^N`` the Walsh expansion of the input function is summed over
the indices ``n < phi(k)``.  On level-``N`` step functions the rule is a
linear map whose matrix in the orthonormal scaled-indicator basis is the
truncated Walsh-Hadamard matrix applied to the analysis matrix, so its
operator norm is bounded by (and in exact arithmetic equals) the norm of
the truncated matrix alone.  This module refines coarse depth profiles to
finer grids, applies the rule by either the matrix product or independent
index-by-index summation, and reports the norm bound next to the exact
grid norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import dense_norm, power_norm
from .truncation import TruncationMap, TWHMatrix
from .walsh_core import DyadicPoint, StepFunction, analyze, build_wh, walsh_eval

__all__ = [
    "LinearizedOperator",
    "OperatorNormBound",
    "localize_phi",
    "apply",
    "operator_norm_bound",
    "export_manifest",
    "import_manifest",
]


@dataclass(frozen=True)
class LinearizedOperator:
    """A fixed-depth partial-sum rule at level ``N``.

    ``phi`` holds one summation depth per dyadic sample point, each within
    ``1 .. 2^N`` (enforced by :class:`TruncationMap`).
    """

    N: int
    phi: TruncationMap

    def __post_init__(self) -> None:
        if self.phi.N != self.N:
            raise ValueError(
                f"depth profile level {self.phi.N} does not match operator "
                f"level {self.N}"
            )

    def matrix(self) -> TWHMatrix:
        """The truncated Walsh-Hadamard matrix representing the rule."""
        return TWHMatrix(N=self.N, phi=self.phi)


def localize_phi(phi_coarse: TruncationMap, N: int) -> TruncationMap:
    """Refine a coarse depth profile to level ``N``.

    A profile constant on the coarse intervals keeps its constant value on
    each finer interval, so every coarse entry is replicated ``2^(N - M)``
    times; values are capped at ``2^N`` (a no-op for profiles bounded by
    their own grid size).  Raises ``ValueError`` when ``N`` is below the
    profile's level.
    """
    M = phi_coarse.N
    if M > N:
        raise ValueError(f"target level {N} is below the profile level {M}")
    repeated = np.repeat(phi_coarse.lengths, 1 << (N - M))
    return TruncationMap(N=N, lengths=np.minimum(repeated, 1 << N))


def apply(
    op: LinearizedOperator, f: StepFunction, method: str = "matrix"
) -> StepFunction:
    """Apply the partial-sum rule to a step function of the same level.

    ``method="matrix"`` computes the output coefficients as the
    representing matrix (transposed) applied to the Walsh coefficient
    vector.  ``method="direct"`` evaluates every sample by summing the
    expansion index by index straight from the Walsh function definition —
    slow, but sharing no code with the matrix route, so the two serve as
    cross-checks of each other.
    """
    if f.N != op.N:
        raise ValueError(
            f"function level {f.N} does not match operator level {op.N}"
        )
    if method == "matrix":
        coeffs = op.matrix().dense().T @ analyze(f)
        return StepFunction(N=op.N, coeffs=coeffs)
    if method == "direct":
        return _apply_direct(op, f)
    raise ValueError(f"unknown method {method!r}")


def _apply_direct(op: LinearizedOperator, f: StepFunction) -> StepFunction:
    size = 1 << op.N
    values = f.values()
    walsh_coeffs = np.empty(size)
    for n in range(size):
        acc = 0.0
        for j in range(size):
            acc += values[j] * walsh_eval(n, DyadicPoint(j, op.N))
        walsh_coeffs[n] = acc / size
    out_values = np.empty(size)
    for k in range(size):
        acc = 0.0
        for n in range(int(op.phi.lengths[k])):
            acc += walsh_coeffs[n] * walsh_eval(n, DyadicPoint(k, op.N))
        out_values[k] = acc
    return StepFunction(N=op.N, coeffs=out_values * 2.0 ** (-op.N / 2))


@dataclass(frozen=True)
class OperatorNormBound:
    """Norm bound of a partial-sum rule next to its exact grid norm.

    ``bound`` is the power-iteration norm of the representing truncated
    matrix; ``exact`` is the largest singular value of the full grid map
    (truncated matrix times the orthogonal analysis matrix).  The two are
    equal in exact arithmetic, so the pair doubles as a cross-check, and
    ``exact <= bound + 1e-9`` always holds.
    """

    bound: float
    exact: float


def operator_norm_bound(op: LinearizedOperator) -> OperatorNormBound:
    """Power-iteration norm bound of the rule plus its exact grid norm.

    The exact norm requires the dense grid map, so the level must be
    within the dense cap (1024 columns).  Raises ``RuntimeError`` if the
    exact norm exceeds the bound beyond tolerance — that would mean one of
    the two norm routes is broken.
    """
    matrix = op.matrix()
    grid_map = matrix.dense().T @ build_wh(op.N).entries.T
    exact = dense_norm(grid_map).norm
    bound = power_norm(matrix).norm
    if exact > bound + 1e-9:
        raise RuntimeError(
            f"exact grid norm {exact} exceeds the matrix bound {bound}"
        )
    return OperatorNormBound(bound=bound, exact=exact)


def export_manifest(op: LinearizedOperator) -> str:
    """Serialize the rule as the depth-profile CSV (`k,length` rows); the
    level is implied by the row count."""
    return op.phi.to_csv_text()


def import_manifest(text: str) -> LinearizedOperator:
    """Rebuild a rule from its depth-profile CSV."""
    phi = TruncationMap.from_csv_text(text)
    return LinearizedOperator(N=phi.N, phi=phi)
