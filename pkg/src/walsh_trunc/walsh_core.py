"""Walsh functions (Paley ordering) and Walsh-Hadamard matrices.

Conventions used throughout the package:

* Walsh functions are indexed in the Paley ordering: ``W_0 = 1`` and
  ``W_(2n)(t) = W_n(2t)``, ``W_(2n+1)(t) = r_1(t) * W_n(2t)`` where ``r_1``
  is the first Rademacher function (+1 on [0, 1/2), -1 on [1/2, 1)).
* The Walsh-Hadamard matrix of level ``N`` is ``2^N x 2^N`` with entry
  ``(n, k) = 2^(-N/2) * W_n(k / 2^N)``: **rows are Walsh indices, columns
  are sample positions**.  Truncating a column therefore always zeroes a
  trailing block of rows.
* A step function of level ``N`` is constant on the dyadic intervals
  ``[k/2^N, (k+1)/2^N)`` and is stored through coefficients ``c`` with
  value ``2^(N/2) * c_k`` on interval ``k``, so that ``|f|_L2 = |c|_2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DENSE_CAP_DEFAULT",
    "DENSE_CAP_MAX",
    "DyadicPoint",
    "WHMatrix",
    "StepFunction",
    "walsh_eval",
    "bit_reverse",
    "wh_sign_column",
    "wh_sign_block",
    "build_wh",
    "analyze",
    "synthesize",
]

# Dense materialization is refused above DENSE_CAP_DEFAULT unless the caller
# explicitly opts in, and never allowed above DENSE_CAP_MAX.
DENSE_CAP_DEFAULT = 12
DENSE_CAP_MAX = 14


def _check_dense_cap(N: int, allow_large: bool) -> None:
    if N > DENSE_CAP_MAX:
        raise ValueError(
            f"level N={N} exceeds the hard dense cap N <= {DENSE_CAP_MAX}"
        )
    if N > DENSE_CAP_DEFAULT and not allow_large:
        raise ValueError(
            f"level N={N} exceeds the default dense cap N <= {DENSE_CAP_DEFAULT}; "
            "pass allow_large=True to materialize anyway"
        )


@dataclass(frozen=True)
class DyadicPoint:
    """A dyadic rational t = numerator / 2^scale in [0, 1)."""

    numerator: int
    scale: int

    def __post_init__(self) -> None:
        if self.scale < 0:
            raise ValueError("scale must be nonnegative")
        if not 0 <= self.numerator < (1 << self.scale):
            raise ValueError(
                f"numerator must satisfy 0 <= numerator < 2^scale, "
                f"got {self.numerator} / 2^{self.scale}"
            )

    @property
    def value(self) -> float:
        return self.numerator / (1 << self.scale)


def bit_reverse(k: int, width: int) -> int:
    """Reverse the lowest ``width`` bits of ``k`` (k must fit in them)."""
    if k < 0 or k >= (1 << width):
        raise ValueError(f"{k} does not fit in {width} bits")
    out = 0
    for _ in range(width):
        out = (out << 1) | (k & 1)
        k >>= 1
    return out


def walsh_eval(n: int, t: DyadicPoint) -> int:
    """Evaluate the n-th Paley-ordered Walsh function at a dyadic point.

    Returns +1 or -1.  Uses the Rademacher product form: with binary digits
    ``n = sum n_j 2^j`` and ``t = 0.t_1 t_2 ...``, the value is
    ``(-1) ** sum(n_j * t_(j+1))``.
    """
    if n < 0:
        raise ValueError("Walsh index must be nonnegative")
    # Only the first `scale` binary digits of t are nonzero, so only the low
    # `scale` bits of n contribute; pairing digit t_(j+1) with bit n_j is the
    # bit-reversal of the numerator over `scale` bits.
    scale = t.scale
    masked = n & ((1 << scale) - 1) if scale else 0
    parity = (masked & bit_reverse(t.numerator, scale)).bit_count() & 1
    return -1 if parity else 1


def wh_sign_column(N: int, k: int) -> np.ndarray:
    """Signs of column ``k`` of the level-``N`` Walsh-Hadamard matrix.

    Entry ``n`` is ``W_n(k / 2^N) in {-1, +1}``, returned as an int8 array of
    length ``2^N`` without materializing the whole matrix.
    """
    if not 0 <= k < (1 << N):
        raise ValueError(f"column index {k} out of range for level {N}")
    rev = bit_reverse(k, N)
    rows = np.arange(1 << N, dtype=np.int64)
    parity = np.bitwise_count(rows & rev).astype(np.int8) & 1
    return (1 - 2 * parity).astype(np.int8)


def wh_sign_block(N: int, columns: np.ndarray) -> np.ndarray:
    """Sign matrix (2^N rows) for several columns at once, as int8."""
    columns = np.asarray(columns, dtype=np.int64)
    revs = np.array([bit_reverse(int(k), N) for k in columns], dtype=np.int64)
    rows = np.arange(1 << N, dtype=np.int64)
    parity = np.bitwise_count(rows[:, None] & revs[None, :]).astype(np.int8) & 1
    return (1 - 2 * parity).astype(np.int8)


@dataclass(frozen=True)
class WHMatrix:
    """The orthogonal level-``N`` Walsh-Hadamard matrix (rows = Walsh index)."""

    N: int
    entries: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return 1 << self.N

    @property
    def signs(self) -> np.ndarray:
        """Exact integer sign of every entry (entries are sign * 2^(-N/2))."""
        return np.rint(self.entries * 2.0 ** (self.N / 2)).astype(np.int64)


def build_wh(N: int, *, allow_large: bool = False) -> WHMatrix:
    """Build the level-``N`` Walsh-Hadamard matrix by recursive doubling.

    Rows ``0 .. 2^(N-1)-1`` equal the level ``N-1`` matrix with each column's
    entries repeated over position pairs (tensor with [1, 1]/sqrt(2)); the
    bottom half alternates signs (tensor with [1, -1]/sqrt(2)).
    """
    if N < 1:
        raise ValueError("level N must be >= 1")
    _check_dense_cap(N, allow_large)
    signs = np.array([[1]], dtype=np.int8)
    for _ in range(N):
        top = np.repeat(signs, 2, axis=1)
        bottom = top.copy()
        bottom[:, 1::2] *= -1
        signs = np.vstack([top, bottom])
    entries = signs.astype(np.float64) * 2.0 ** (-N / 2)
    return WHMatrix(N=N, entries=entries)


@dataclass(frozen=True)
class StepFunction:
    """A dyadic step function of level ``N`` stored via scaled coefficients."""

    N: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if coeffs.shape != (1 << self.N,):
            raise ValueError(
                f"coeffs must have length 2^{self.N}, got shape {coeffs.shape}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    def values(self) -> np.ndarray:
        """Pointwise values on the 2^N dyadic intervals (2^(N/2) * coeffs)."""
        return self.coeffs * 2.0 ** (self.N / 2)


def analyze(f: StepFunction) -> np.ndarray:
    """Walsh coefficient vector of a step function: ``WH_N^T @ coeffs``."""
    wh = build_wh(f.N, allow_large=True) if f.N <= DENSE_CAP_MAX else None
    if wh is None:
        raise ValueError(f"level N={f.N} exceeds the dense cap for analysis")
    return wh.entries.T @ f.coeffs


def synthesize(N: int, walsh_coeffs: np.ndarray) -> StepFunction:
    """Inverse of :func:`analyze`: rebuild the step function from
    Walsh coefficients."""
    walsh_coeffs = np.asarray(walsh_coeffs, dtype=np.float64)
    if walsh_coeffs.shape != (1 << N,):
        raise ValueError(f"expected 2^{N} Walsh coefficients")
    wh = build_wh(N, allow_large=True)
    return StepFunction(N=N, coeffs=wh.entries @ walsh_coeffs)
