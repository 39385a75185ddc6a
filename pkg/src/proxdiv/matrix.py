"""Proximity matrices, terminal-node partitions and the crisp matrices they induce.

All index arguments and reported coordinates are 0-based.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import (
    AsymmetryBeyondToleranceError,
    DiagonalNotUnitError,
    EntryOutOfRangeError,
    MatrixValidationError,
    NonSquareError,
    PermutationLengthMismatchError,
    WeightMissingError,
)

DEFAULT_TOLERANCE = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ProximityMatrix:
    """Symmetric co-occurrence matrix with unit diagonal and entries in [0, 1].

    The constructor checks the invariants exactly; use :func:`validate_matrix`
    to ingest data that is only symmetric up to rounding.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 2:
            raise NonSquareError(v.shape)
        _check_entries(v)
        asym = np.argwhere(v != v.T)
        if asym.size:
            i, j = asym[0]
            raise AsymmetryBeyondToleranceError(i, j, abs(v[i, j] - v[j, i]))
        diag = np.diagonal(v)
        bad = np.flatnonzero(diag != 1.0)
        if bad.size:
            raise DiagonalNotUnitError(bad[0], diag[bad[0]])
        object.__setattr__(self, "values", _readonly(v))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def n_pairs(self) -> int:
        """Number of unordered off-diagonal pairs, n(n-1)/2."""
        return self.n * (self.n - 1) // 2

    def upper(self) -> np.ndarray:
        """Strict upper triangle as a vector, row-major (i < j)."""
        iu, ju = np.triu_indices(self.n, 1)
        return self.values[iu, ju]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, ProximityMatrix):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(
            np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return f"ProximityMatrix(n={self.n})"


def _check_entries(v: np.ndarray) -> None:
    bad = np.argwhere(~((v >= 0.0) & (v <= 1.0)))  # also catches NaN
    if bad.size:
        i, j = bad[0]
        raise EntryOutOfRangeError(i, j, v[i, j])


def validate_matrix(raw, tolerance: float = DEFAULT_TOLERANCE) -> ProximityMatrix:
    """Build a :class:`ProximityMatrix` from a raw square grid.

    Off-diagonal pairs that differ by at most `tolerance` are replaced by
    their average; larger differences are rejected.  Diagonal entries must
    lie within `tolerance` of 1 and are then stored as exactly 1.
    """
    v = np.asarray(raw, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 2:
        raise NonSquareError(v.shape)
    _check_entries(v)
    delta = np.abs(v - v.T)
    over = np.argwhere(np.triu(delta > tolerance, 1))
    if over.size:
        i, j = over[0]
        raise AsymmetryBeyondToleranceError(i, j, delta[i, j])
    diag = np.diagonal(v)
    off = np.flatnonzero(np.abs(diag - 1.0) > tolerance)
    if off.size:
        raise DiagonalNotUnitError(off[0], diag[off[0]])
    sym = (v + v.T) / 2.0
    np.fill_diagonal(sym, 1.0)
    return ProximityMatrix(sym)


@dataclass(frozen=True, eq=False)
class Partition:
    """Assignment of observations to terminal nodes labelled 1..K."""

    labels: np.ndarray
    K: int = field(init=False)
    node_ids: tuple | None = None

    def __post_init__(self):
        lab = np.array(self.labels, copy=True)
        if lab.ndim != 1 or lab.size < 1:
            raise MatrixValidationError("labels must be a non-empty 1-d sequence")
        if not np.issubdtype(lab.dtype, np.integer):
            as_int = lab.astype(np.int64)
            if not np.array_equal(as_int, lab):
                raise MatrixValidationError("labels must be integers in 1..K")
            lab = as_int
        lab = lab.astype(np.int64)
        K = int(lab.max())
        if lab.min() < 1:
            raise MatrixValidationError(f"label {int(lab.min())} is outside 1..K")
        present = np.zeros(K + 1, dtype=bool)
        present[lab] = True
        missing = np.flatnonzero(~present[1:]) + 1
        if missing.size:
            raise MatrixValidationError(f"node label {int(missing[0])} has no observations")
        object.__setattr__(self, "labels", _readonly(lab))
        object.__setattr__(self, "K", K)

    @classmethod
    def from_labels(cls, labels) -> "Partition":
        """Relabel arbitrary node identifiers to 1..K, sorted by identifier.

        The original identifiers are kept in ``node_ids`` (node k has
        identifier ``node_ids[k - 1]``).
        """
        ids, codes = np.unique(np.asarray(labels), return_inverse=True)
        return cls(codes.ravel() + 1, node_ids=tuple(ids.tolist()))

    @property
    def n(self) -> int:
        return self.labels.size

    def node_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.K + 1)[1:]

    def same_node(self) -> np.ndarray:
        """Boolean n x n matrix, True where two observations share a node."""
        return self.labels[:, None] == self.labels[None, :]


@dataclass(frozen=True)
class NodeWeights:
    """Within-node fit values used as the surrogate's co-occurrence.

    Either one value per node (``per_node``) or a full pair matrix
    (``per_pair``); exactly one is set.
    """

    per_node: Mapping[int, float] | None = None
    per_pair: np.ndarray | None = None
    default: float | None = None

    def __post_init__(self):
        if self.per_pair is not None:
            w = np.array(self.per_pair, dtype=np.float64, copy=True)
            if w.ndim != 2 or w.shape[0] != w.shape[1]:
                raise NonSquareError(w.shape)
            _check_entries(w)
            object.__setattr__(self, "per_pair", _readonly(w))
        if self.per_node is not None:
            nodes = {int(k): float(v) for k, v in self.per_node.items()}
            for k, v in nodes.items():
                if not 0.0 <= v <= 1.0:
                    raise MatrixValidationError(f"weight {v!r} for node {k} is outside [0, 1]")
            object.__setattr__(self, "per_node", nodes)
        if self.default is not None and not 0.0 <= self.default <= 1.0:
            raise MatrixValidationError(f"weight {self.default!r} is outside [0, 1]")

    @classmethod
    def uniform(cls, value: float = 1.0) -> "NodeWeights":
        """Same weight for every node."""
        return cls(default=float(value))

    def node_weight(self, node: int) -> float:
        if self.per_node is not None and node in self.per_node:
            return self.per_node[node]
        if self.default is not None:
            return self.default
        raise WeightMissingError(node)


def crisp_from_partition(p: Partition, w: NodeWeights | None = None) -> ProximityMatrix:
    """Surrogate co-occurrence matrix induced by a partition.

    Pairs in the same node get that node's weight (or the pair weight),
    pairs in different nodes get 0, the diagonal is 1.
    """
    if w is None:
        w = NodeWeights.uniform(1.0)
    same = p.same_node()
    if w.per_pair is not None:
        if w.per_pair.shape[0] != p.n:
            raise PermutationLengthMismatchError(
                f"pair weights are {w.per_pair.shape[0]}x{w.per_pair.shape[0]}, partition has n={p.n}"
            )
        pw = w.per_pair
        asym = np.argwhere(same & (pw != pw.T))
        if asym.size:
            i, j = asym[0]
            raise AsymmetryBeyondToleranceError(i, j, abs(pw[i, j] - pw[j, i]))
        out = np.where(same, pw, 0.0)
    else:
        node_w = np.array([w.node_weight(t) for t in range(1, p.K + 1)])
        out = np.where(same, node_w[p.labels - 1][:, None], 0.0)
    np.fill_diagonal(out, 1.0)
    return ProximityMatrix(out)


def _check_permutation(pi, n: int) -> np.ndarray:
    perm = np.asarray(pi, dtype=np.intp)
    if perm.ndim != 1 or perm.size != n:
        raise PermutationLengthMismatchError(
            f"permutation has length {perm.size}, matrix has n={n}"
        )
    if not np.array_equal(np.sort(perm), np.arange(n)):
        raise PermutationLengthMismatchError("not a permutation of 0..n-1")
    return perm


def permute_rows_cols(m: ProximityMatrix, pi) -> ProximityMatrix:
    """Reorder rows and columns together: ``result[i, j] = m[pi[i], pi[j]]``."""
    perm = _check_permutation(pi, m.n)
    return ProximityMatrix(m.values[np.ix_(perm, perm)])


def pair_split(p: Partition) -> tuple[np.ndarray, np.ndarray]:
    """Split the i < j pairs into within-node and between-node sets.

    Returns two integer arrays of shape (k, 2) in row-major pair order.
    """
    iu, ju = np.triu_indices(p.n, 1)
    inside = p.labels[iu] == p.labels[ju]
    pairs = np.column_stack([iu, ju])
    return pairs[inside], pairs[~inside]


def within_mask(p: Partition) -> np.ndarray:
    """Boolean vector over the upper-triangle pairs, True for within-node pairs."""
    iu, ju = np.triu_indices(p.n, 1)
    return p.labels[iu] == p.labels[ju]
