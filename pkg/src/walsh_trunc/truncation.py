"""Truncation maps, truncated Walsh-Hadamard (TWH) matrices, and their
branch/node structure.

A truncation map of level ``N`` assigns every column ``k`` of the level-``N``
Walsh-Hadamard matrix a length ``1 <= phi(k) <= 2^N``; the TWH matrix keeps
the first ``phi(k)`` entries of each column and zeroes the rest.  A map is
*dyadic* when every length is a power of two.

For dyadic maps, two columns are either orthogonal or one is a scaled copy
of the other's leading block; which case occurs is governed by a binary
trie: column ``k`` of length ``2^mu`` is labeled by the top ``mu`` bits of
its underlying Walsh column id, and two columns are non-orthogonal exactly
when one label is a prefix of the other.  Branches are the maximal chains of
that trie; a *node* at level ``L`` is a trie vertex below which two
directions both contain columns longer than ``2^L``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .walsh_core import wh_sign_block, wh_sign_column

__all__ = [
    "TruncationMap",
    "TWHMatrix",
    "Node",
    "BranchDecomposition",
    "standard_lengths",
    "standard_truncation",
    "two_branch",
    "trim",
    "column_inner",
    "equivalence_transform",
    "branch_decompose",
    "node_reduce",
    "random_dyadic",
]

# Dense TWH materialization obeys the same caps as walsh_core.build_wh.
from .walsh_core import DENSE_CAP_DEFAULT, DENSE_CAP_MAX, _check_dense_cap


def _is_power_of_two(values: np.ndarray) -> bool:
    values = np.asarray(values)
    return bool(np.all((values > 0) & ((values & (values - 1)) == 0)))


@dataclass(frozen=True)
class TruncationMap:
    """Per-column truncation lengths for a level-``N`` TWH matrix."""

    N: int
    lengths: np.ndarray = field(repr=False)
    dyadic: bool = field(default=False, init=False)

    def __post_init__(self) -> None:
        lengths = np.ascontiguousarray(self.lengths, dtype=np.int64)
        if lengths.shape != (1 << self.N,):
            raise ValueError(
                f"lengths must have shape (2^{self.N},), got {lengths.shape}"
            )
        if lengths.min(initial=1 << self.N) < 1 or lengths.max(initial=1) > (
            1 << self.N
        ):
            raise ValueError("every length must satisfy 1 <= length <= 2^N")
        lengths.setflags(write=False)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "dyadic", _is_power_of_two(lengths))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TruncationMap):
            return NotImplemented
        return self.N == other.N and bool(np.all(self.lengths == other.lengths))

    def to_csv_text(self) -> str:
        """Serialize as one `k,length` line per column."""
        return "".join(f"{k},{l}\n" for k, l in enumerate(self.lengths))

    @classmethod
    def from_csv_text(cls, text: str) -> "TruncationMap":
        rows: dict[int, int] = {}
        parsed = 0
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            k_str, l_str = line.split(",")
            if parsed == 0 and not k_str.lstrip("+-").isdigit():
                continue  # optional header row
            rows[int(k_str)] = int(l_str)
            parsed += 1
        if parsed != len(rows):
            raise ValueError("duplicate column indices in truncation map")
        size = len(rows)
        if size == 0 or size & (size - 1):
            raise ValueError(f"expected a power-of-two number of rows, got {size}")
        N = size.bit_length() - 1
        if sorted(rows) != list(range(size)):
            raise ValueError("column indices must cover 0..2^N-1 exactly once")
        lengths = np.array([rows[k] for k in range(size)], dtype=np.int64)
        return cls(N=N, lengths=lengths)


@dataclass(frozen=True, eq=False)
class TWHMatrix:
    """A truncated Walsh-Hadamard matrix.

    ``col_map`` gives the underlying Walsh column id for each position
    (identity when omitted); equivalence transforms only permute these ids.
    ``trim_mask`` counts extra trailing entries zeroed beyond ``phi`` (the
    trimming operation); a matrix with a trim mask is no longer dyadic.
    """

    N: int
    phi: TruncationMap
    trim_mask: np.ndarray | None = field(default=None, repr=False)
    col_map: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.phi.N != self.N:
            raise ValueError("phi level does not match matrix level")
        if self.trim_mask is not None:
            mask = np.ascontiguousarray(self.trim_mask, dtype=np.int64)
            if mask.shape != self.phi.lengths.shape:
                raise ValueError("trim_mask must have one entry per column")
            if mask.min(initial=0) < 0 or np.any(mask >= self.phi.lengths):
                raise ValueError("trim_mask must leave every column nonempty")
            mask.setflags(write=False)
            object.__setattr__(self, "trim_mask", mask)
        if self.col_map is not None:
            cmap = np.ascontiguousarray(self.col_map, dtype=np.int64)
            if cmap.shape != (1 << self.N,):
                raise ValueError("col_map must assign an id to every column")
            if sorted(cmap.tolist()) != list(range(1 << self.N)):
                raise ValueError("col_map must be a permutation of 0..2^N-1")
            cmap.setflags(write=False)
            object.__setattr__(self, "col_map", cmap)

    # -- basic structure ---------------------------------------------------

    @property
    def size(self) -> int:
        return 1 << self.N

    @property
    def is_dyadic(self) -> bool:
        """True when all effective lengths are powers of two (no trimming)."""
        return self.phi.dyadic and self.trim_mask is None

    @property
    def effective_lengths(self) -> np.ndarray:
        if self.trim_mask is None:
            return self.phi.lengths
        return self.phi.lengths - self.trim_mask

    def underlying_id(self, k: int) -> int:
        return int(self.col_map[k]) if self.col_map is not None else k

    def underlying_ids(self) -> np.ndarray:
        if self.col_map is not None:
            return self.col_map
        return np.arange(self.size, dtype=np.int64)

    # -- materialization ---------------------------------------------------

    def column_signs(self, k: int) -> np.ndarray:
        """Integer column: +-1 on the kept prefix, 0 beyond, length 2^N."""
        signs = wh_sign_column(self.N, self.underlying_id(k)).copy()
        signs[self.effective_lengths[k] :] = 0
        return signs

    def column(self, k: int) -> np.ndarray:
        return self.column_signs(k) * 2.0 ** (-self.N / 2)

    def dense(self, *, allow_large: bool = False) -> np.ndarray:
        """The full 2^N x 2^N matrix as floats (rows = sample index)."""
        _check_dense_cap(self.N, allow_large)
        signs = wh_sign_block(self.N, self.underlying_ids()).astype(np.float64)
        rows = np.arange(self.size)[:, None]
        signs[rows >= self.effective_lengths[None, :]] = 0.0
        return signs * 2.0 ** (-self.N / 2)

    def gram(self, *, allow_large: bool = False) -> np.ndarray:
        dense = self.dense(allow_large=allow_large)
        return dense.T @ dense


# -- construction of the named families -------------------------------------


def standard_lengths(N: int) -> np.ndarray:
    """Length profile of the standard truncation: ``2^N, 2^(N-1), 2^(N-1)/2,
    ...`` with level ``K >= 1`` (columns ``2^(K-1) <= k < 2^K``) getting
    ``2^(N-K)``."""
    if N < 1:
        raise ValueError("level N must be >= 1")
    lengths = np.empty(1 << N, dtype=np.int64)
    lengths[0] = 1 << N
    for K in range(1, N + 1):
        lengths[1 << (K - 1) : 1 << K] = 1 << (N - K)
    return lengths


def standard_truncation(N: int) -> TWHMatrix:
    """The nested single-branch truncation that keeps, in every column, the
    rows above the column's first sign change (all kept entries positive)."""
    return TWHMatrix(N=N, phi=TruncationMap(N=N, lengths=standard_lengths(N)))


def two_branch(N: int, K: int | None = None) -> TWHMatrix:
    """The two-branch truncation of level ``N`` with secondary depth ``K``.

    * Columns ``0 .. 2^(N-1)-1`` (primary branch): the level ``N-1``
      standard profile with every length doubled.
    * Columns ``2^(N-1) .. 2^(N-1)+2^K-1`` (secondary branch): the level
      ``K`` standard profile with every length multiplied by ``2^(N-K)``;
      these columns look like level-``K`` standard columns whose entries are
      stretched into alternating-sign blocks.
    * The remaining ``2^(N-1)-2^K`` columns keep only their top entry.

    ``K=None`` requests no secondary branch and returns the standard
    truncation of level ``N``.
    """
    if K is None:
        return standard_truncation(N)
    if N < 1:
        raise ValueError("level N must be >= 1")
    if not 0 <= K <= N - 1:
        raise ValueError(f"secondary depth K={K} must satisfy 0 <= K <= N-1")
    lengths = np.ones(1 << N, dtype=np.int64)
    lengths[: 1 << (N - 1)] = 2 * standard_lengths(N - 1)
    secondary = (
        standard_lengths(K) * (1 << (N - K)) if K >= 1 else np.array([1 << N])
    )
    lengths[1 << (N - 1) : (1 << (N - 1)) + (1 << K)] = secondary
    return TWHMatrix(N=N, phi=TruncationMap(N=N, lengths=lengths))


def random_dyadic(N: int, rng: np.random.Generator) -> TWHMatrix:
    """A uniformly random dyadic truncation: each column independently gets
    length ``2^j`` with ``j`` uniform on ``0..N``."""
    exponents = rng.integers(0, N + 1, size=1 << N)
    return TWHMatrix(
        N=N, phi=TruncationMap(N=N, lengths=(1 << exponents).astype(np.int64))
    )


def random_one_node(N: int, rng: np.random.Generator) -> TWHMatrix:
    """A random dyadic truncation whose trie has exactly one branching
    vertex.

    Uniform column sampling almost never produces one-node instances
    beyond small levels (their fraction collapses towards zero), so the
    evidence harness samples them directly: place the node at a uniform
    vertex, grow a node-free chain from each of its two children down to a
    leaf long enough to keep the vertex branching, and cap every block
    hanging off the chains and off the path above the node at its vertex
    height (a block capped at ``2^v`` cannot branch at depth ``v`` or
    below, so no second node can appear).
    """
    if N < 1:
        raise ValueError("level N must be >= 1")
    level = int(rng.integers(0, N))
    prefix = int(rng.integers(0, 1 << level))
    lengths = np.zeros(1 << N, dtype=np.int64)

    def block_ids(block_prefix: int, depth: int) -> np.ndarray:
        width = N - depth
        base = block_prefix << width
        return np.arange(base, base + (1 << width))

    def fill_capped(ids: np.ndarray, max_exponent: int) -> None:
        lengths[ids] = 1 << rng.integers(0, max_exponent + 1, size=ids.size)

    def grow_chain(child_prefix: int) -> None:
        chain = child_prefix
        for depth in range(level + 1, N):
            direction = int(rng.integers(0, 2))
            chain = (chain << 1) | direction
            fill_capped(block_ids(chain ^ 1, depth + 1), depth)
        lengths[chain] = 1 << int(rng.integers(level + 1, N + 1))

    for depth in range(level):
        path_child = prefix >> (level - depth - 1)
        fill_capped(block_ids(path_child ^ 1, depth + 1), depth)
    grow_chain((prefix << 1) | 0)
    grow_chain((prefix << 1) | 1)
    return TWHMatrix(N=N, phi=TruncationMap(N=N, lengths=lengths))


# -- trimming ----------------------------------------------------------------


def trim(m: TWHMatrix) -> TWHMatrix:
    """Zero each column's maximal trailing run of negative entries, so every
    column ends in a positive entry.  Idempotent; never lengthens a column.

    The result is generally not dyadic and is marked as such.
    """
    lengths = m.effective_lengths
    new_lengths = np.empty_like(lengths)
    for k in range(m.size):
        signs = wh_sign_column(m.N, m.underlying_id(k))
        last = int(lengths[k]) - 1
        while signs[last] < 0:
            last -= 1  # row 0 is always +1, so this terminates above 0
        new_lengths[k] = last + 1
    mask = m.phi.lengths - new_lengths
    if not mask.any():
        return m
    return TWHMatrix(N=m.N, phi=m.phi, trim_mask=mask, col_map=m.col_map)


# -- inner products ----------------------------------------------------------


def column_inner(m: TWHMatrix, i: int, j: int) -> float:
    """Exact inner product of columns ``i`` and ``j``.

    Computed in integer arithmetic then scaled by ``2^-N``; for dyadic maps
    the value is ``0`` or ``+- min(len_i, len_j) * 2^-N``.
    """
    shared = int(min(m.effective_lengths[i], m.effective_lengths[j]))
    si = wh_sign_column(m.N, m.underlying_id(i))[:shared].astype(np.int64)
    sj = wh_sign_column(m.N, m.underlying_id(j))[:shared].astype(np.int64)
    return float(int(si @ sj)) * 2.0 ** (-m.N)


# -- equivalence transforms ---------------------------------------------------


def equivalence_transform(m: TWHMatrix, h: int) -> TWHMatrix:
    """Multiply every column entrywise by the +-1 sign vector of Walsh
    column ``h``.

    This sends the truncation of underlying column ``c`` to the truncation of
    column ``c XOR h`` with the same length, so the Gram matrix is preserved
    entrywise exactly.  Requires a dyadic (untrimmed) matrix.
    """
    if not 0 <= h < m.size:
        raise ValueError(f"transform index {h} out of range for level {m.N}")
    if not m.is_dyadic:
        raise ValueError("equivalence transforms require a dyadic matrix")
    new_map = np.bitwise_xor(m.underlying_ids(), h)
    return TWHMatrix(N=m.N, phi=m.phi, col_map=new_map)


# -- branch / node structure --------------------------------------------------


@dataclass(frozen=True, order=True)
class Node:
    """A branching vertex of the truncation trie.

    ``level`` is the depth ``L`` and ``prefix`` the ``L``-bit label of the
    vertex (top ``L`` bits of the underlying column ids below it); two
    columns longer than ``2^L`` agree above row ``2^L`` and differ at row
    ``2^L`` exactly when they sit in the two directions below such a vertex.
    """

    level: int
    prefix: int


@dataclass(frozen=True)
class BranchDecomposition:
    """Branches (maximal sets of mutually non-orthogonal columns), nodes,
    and a per-column classification against the deepest node."""

    branches: tuple[frozenset[int], ...]
    nodes: tuple[Node, ...]
    deepest_node_level: int | None
    # For each column: "at_or_below" when it is longer than 2^L and lies
    # under the deepest node's prefix, else "above"; None when no nodes.
    classification: tuple[str, ...] | None


def _column_labels(m: TWHMatrix) -> list[tuple[int, int]]:
    """(depth mu, top-mu-bit prefix) trie label for each column."""
    ids = m.underlying_ids()
    labels = []
    for k in range(m.size):
        length = int(m.effective_lengths[k])
        mu = length.bit_length() - 1
        labels.append((mu, int(ids[k]) >> (m.N - mu) if mu else 0))
    return labels


def _label_is_prefix(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return a[0] <= b[0] and (b[1] >> (b[0] - a[0])) == a[1]


def branch_decompose(m: TWHMatrix) -> BranchDecomposition:
    """Identify the branch/node structure of a dyadic TWH matrix."""
    if not m.is_dyadic:
        raise ValueError("branch decomposition requires a dyadic matrix")
    labels = _column_labels(m)
    distinct = sorted(set(labels))

    maximal = [
        a
        for a in distinct
        if not any(b != a and _label_is_prefix(a, b) for b in distinct)
    ]
    branches = tuple(
        frozenset(k for k in range(m.size) if _label_is_prefix(labels[k], top))
        for top in maximal
    )

    # A vertex (L, p) is a node when both directions below it contain a
    # column of depth > L.
    directions: dict[tuple[int, int], set[int]] = {}
    for mu, p in distinct:
        for L in range(mu):
            vertex = (L, p >> (mu - L))
            directions.setdefault(vertex, set()).add((p >> (mu - L - 1)) & 1)
    nodes = tuple(
        Node(level=L, prefix=p)
        for (L, p), dirs in sorted(directions.items())
        if len(dirs) == 2
    )

    deepest = max((n.level for n in nodes), default=None)
    classification: tuple[str, ...] | None = None
    if deepest is not None:
        deepest_nodes = [n for n in nodes if n.level == deepest]
        prefixes = {n.prefix for n in deepest_nodes}
        classification = tuple(
            "at_or_below"
            if labels[k][0] > deepest and (labels[k][1] >> (labels[k][0] - deepest)) in prefixes
            else "above"
            for k in range(m.size)
        )
    return BranchDecomposition(
        branches=branches,
        nodes=nodes,
        deepest_node_level=deepest,
        classification=classification,
    )


def node_reduce(m: TWHMatrix, node: Node) -> TWHMatrix:
    """Collapse one deepest-level node by re-truncating its block of
    ``2^(N-L)`` columns (those whose underlying ids share the node's prefix)
    with the standard single-branch pattern of that block.

    Columns outside the block are untouched; the chosen node disappears and
    no new nodes are created, so iterating from the deepest level terminates
    with a single-branch matrix after exactly the initial number of nodes.
    """
    if not m.is_dyadic:
        raise ValueError("node reduction requires a dyadic matrix")
    decomposition = branch_decompose(m)
    if node not in decomposition.nodes:
        raise ValueError(f"{node} is not a node of this matrix")
    if node.level != decomposition.deepest_node_level:
        raise ValueError(
            f"{node} is not at the deepest node level "
            f"{decomposition.deepest_node_level}"
        )
    L = node.level
    block_level = m.N - L
    pattern = standard_lengths(block_level) << L
    ids = m.underlying_ids()
    in_block = (ids >> block_level) == node.prefix
    new_lengths = m.phi.lengths.copy()
    new_lengths[in_block] = pattern[ids[in_block] & ((1 << block_level) - 1)]
    return TWHMatrix(
        N=m.N, phi=TruncationMap(N=m.N, lengths=new_lengths), col_map=m.col_map
    )
