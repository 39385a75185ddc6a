"""CSV readers and writers for matrices, partitions and node weights.

Matrix files hold n rows of n decimal values with an optional header row.
Partition files hold either ``index,label`` rows or one label per line.
"""
from __future__ import annotations

import csv
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .errors import MatrixValidationError
from .matrix import DEFAULT_TOLERANCE, NodeWeights, Partition, ProximityMatrix, validate_matrix


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def _raw_rows(path) -> list[list[str]]:
    with open(path, newline="") as fh:
        rows = [[c.strip() for c in row] for row in csv.reader(fh)]
    return [r for r in rows if r and any(r)]


def _read_rows(path) -> list[list[str]]:
    rows = _raw_rows(path)
    if rows and not all(_is_number(c) for c in rows[0]):
        rows = rows[1:]
    return rows


def read_matrix_csv(path, tolerance: float = DEFAULT_TOLERANCE) -> ProximityMatrix:
    rows = _read_rows(path)
    widths = {len(r) for r in rows}
    if len(widths) > 1:
        raise MatrixValidationError(f"{path}: rows have differing lengths {sorted(widths)}")
    try:
        grid = np.array([[float(c) for c in r] for r in rows], dtype=np.float64)
    except ValueError as exc:
        raise MatrixValidationError(f"{path}: non-numeric entry ({exc})") from None
    return validate_matrix(grid.reshape(len(rows), -1), tolerance)


@contextmanager
def atomic_write(path, mode: str = "w"):
    """Write to a temporary file beside `path`, then rename over it."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, newline="" if "b" not in mode else None) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_matrix_csv(m: ProximityMatrix, path) -> None:
    with atomic_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in np.asarray(m):
            w.writerow([repr(float(x)) for x in row])


def _node_id(x: str):
    try:
        v = float(x)
    except ValueError:
        return x
    return int(v) if v.is_integer() else v


def read_partition_csv(path) -> Partition:
    """Read node labels; arbitrary identifiers are relabelled to 1..K."""
    rows = _raw_rows(path)
    # Labels may be non-numeric, so a header is recognised by a non-numeric
    # index column, or by a lone non-numeric first row above numeric labels.
    if rows and not _is_number(rows[0][0]):
        if len(rows[0]) == 2 or all(_is_number(r[0]) for r in rows[1:]):
            rows = rows[1:]
    if not rows:
        raise MatrixValidationError(f"{path}: no labels found")
    width = {len(r) for r in rows}
    if width == {1}:
        labels = [r[0] for r in rows]
    elif width == {2}:
        try:
            idx = np.array([int(float(r[0])) for r in rows])
        except ValueError:
            raise MatrixValidationError(f"{path}: index column must be integer") from None
        order = np.argsort(idx, kind="stable")
        base = idx.min()
        if not np.array_equal(idx[order] - base, np.arange(len(rows))) or base not in (0, 1):
            raise MatrixValidationError(f"{path}: index column must enumerate 0..n-1 or 1..n")
        labels = [rows[k][1] for k in order]
    else:
        raise MatrixValidationError(f"{path}: expected 1 or 2 columns")
    ids = [_node_id(x) for x in labels]
    if len({type(x) is str for x in ids}) > 1:
        ids = [str(x) for x in ids]
    return Partition.from_labels(ids)


def write_partition_csv(labels, path) -> None:
    with atomic_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "label"])
        for i, lab in enumerate(np.asarray(labels)):
            w.writerow([i, int(lab)])


def read_weights_csv(path, partition: Partition) -> NodeWeights:
    """Read surrogate weights for `partition`.

    A file with a ``label,weight`` header, or any two-column file that is not
    n x n, gives one weight per node, keyed by the identifiers used in the
    partition file.  An n x n file gives per-pair weights.
    """
    with open(path, newline="") as fh:
        first = next(csv.reader(fh), [])
    rows = _read_rows(path)
    headed = bool(first) and not all(_is_number(c.strip()) for c in first)
    square = len(rows) == partition.n and all(len(r) == partition.n for r in rows)
    try:
        if square and not headed:
            grid = np.array([[float(c) for c in r] for r in rows], dtype=np.float64)
            return NodeWeights(per_pair=grid)
        if any(len(r) != 2 for r in rows):
            raise MatrixValidationError(f"{path}: expected label,weight rows or an n x n grid")
        ids = partition.node_ids or tuple(range(1, partition.K + 1))
        index = {str(x): k + 1 for k, x in enumerate(ids)}
        per_node = {}
        for r in rows:
            key = str(_node_id(r[0]))
            if key not in index:
                raise MatrixValidationError(f"{path}: node {r[0]!r} is not in the partition")
            per_node[index[key]] = float(r[1])
    except ValueError as exc:
        if isinstance(exc, MatrixValidationError):
            raise
        raise MatrixValidationError(f"{path}: weights must be numeric") from None
    return NodeWeights(per_node=per_node)
