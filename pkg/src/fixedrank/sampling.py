"""Sparse sampled matrices and their I/O.

A SampledMatrix holds the values of a matrix on a fixed set of observed
positions, stored in lexicographic (row, col) order.  The index structure
is immutable and shared between value-copies (every residual evaluated
during a solve reuses the same pattern), while products with thin dense
factors go through compressed-sparse wrappers built once per pattern.

The on-disk format is MatrixMarket coordinate real general, 1-based,
written with 17 significant digits so values round-trip exactly.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix

from . import opcount
from .errors import ConfigError


class _Pattern:
    """Shared index structure: CSR of the matrix and of its transpose."""

    __slots__ = ("d1", "d2", "rows", "cols", "indptr", "tperm", "trows", "tindptr")

    def __init__(self, d1: int, d2: int, rows: np.ndarray, cols: np.ndarray):
        self.d1, self.d2 = int(d1), int(d2)
        self.rows = rows
        self.cols = cols
        counts = np.bincount(rows, minlength=d1)
        self.indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int32)
        # Transpose ordering: stable sort by column, ties keep row order.
        self.tperm = np.argsort(cols, kind="stable")
        self.trows = rows[self.tperm]
        tcounts = np.bincount(cols, minlength=d2)
        self.tindptr = np.concatenate([[0], np.cumsum(tcounts)]).astype(np.int32)


class SampledMatrix:
    """Values of a d1 x d2 matrix observed on a fixed index set."""

    __slots__ = ("_pattern", "values")

    def __init__(self, pattern: _Pattern, values: np.ndarray):
        self._pattern = pattern
        self.values = np.asarray(values, dtype=float)
        if self.values.shape != pattern.rows.shape:
            raise ValueError("value count does not match the pattern")

    @classmethod
    def from_entries(
        cls,
        d1: int,
        d2: int,
        rows: np.ndarray,
        cols: np.ndarray,
        values: np.ndarray,
    ) -> "SampledMatrix":
        rows = np.asarray(rows)
        cols = np.asarray(cols)
        values = np.asarray(values, dtype=float)
        if not (rows.shape == cols.shape == values.shape) or rows.ndim != 1:
            raise ValueError("rows, cols, values must be equal-length vectors")
        if rows.size and (rows.min() < 0 or rows.max() >= d1):
            raise ValueError("row index out of range")
        if cols.size and (cols.min() < 0 or cols.max() >= d2):
            raise ValueError("column index out of range")
        lin = rows.astype(np.int64) * d2 + cols.astype(np.int64)
        order = np.argsort(lin, kind="stable")
        lin = lin[order]
        if lin.size > 1 and np.any(np.diff(lin) == 0):
            raise ValueError("duplicate sample positions")
        rows32 = (lin // d2).astype(np.int32)
        cols32 = (lin % d2).astype(np.int32)
        return cls(_Pattern(d1, d2, rows32, cols32), values[order])

    # -- basic views ---------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return self._pattern.d1, self._pattern.d2

    @property
    def nnz(self) -> int:
        return self._pattern.rows.size

    @property
    def rows(self) -> np.ndarray:
        return self._pattern.rows

    @property
    def cols(self) -> np.ndarray:
        return self._pattern.cols

    def with_values(self, values: np.ndarray) -> "SampledMatrix":
        """New SampledMatrix on the same pattern (index caches shared)."""
        return SampledMatrix(self._pattern, values)

    def to_scipy(self) -> csr_matrix:
        p = self._pattern
        return csr_matrix((self.values, p.cols, p.indptr), shape=(p.d1, p.d2))

    def to_dense(self) -> np.ndarray:
        opcount.note_dense(*self.shape)
        out = np.zeros(self.shape)
        out[self.rows, self.cols] = self.values
        return out

    # -- products with thin factors -------------------------------------------

    def mm(self, x: np.ndarray) -> np.ndarray:
        """Product with a dense d2 x k factor."""
        p = self._pattern
        opcount.add_flops(2 * self.nnz * x.shape[1])
        opcount.note_dense(p.d1, x.shape[1])
        s = csr_matrix((self.values, p.cols, p.indptr), shape=(p.d1, p.d2))
        return s @ x

    def tmm(self, x: np.ndarray) -> np.ndarray:
        """Transpose product with a dense d1 x k factor."""
        p = self._pattern
        opcount.add_flops(2 * self.nnz * x.shape[1])
        opcount.note_dense(p.d2, x.shape[1])
        st = csr_matrix(
            (self.values[p.tperm], p.trows, p.tindptr), shape=(p.d2, p.d1)
        )
        return st @ x


def pair_values(
    row_factor: np.ndarray,
    col_factor: np.ndarray,
    rows: np.ndarray,
    cols: np.ndarray,
) -> np.ndarray:
    """Entries of row_factor @ col_factor.T at the given positions.

    O(len(rows) * r); the two factors are gathered column by column to keep
    the temporaries small and the summation order fixed.
    """
    r = row_factor.shape[1]
    opcount.add_flops(2 * rows.size * r)
    rt = np.ascontiguousarray(row_factor.T)
    ct = np.ascontiguousarray(col_factor.T)
    acc = rt[0].take(rows) * ct[0].take(cols)
    for c in range(1, r):
        acc += rt[c].take(rows) * ct[c].take(cols)
    return acc


def sample_positions_floyd(
    rng: np.random.Generator, n: int, k: int
) -> np.ndarray:
    """k distinct integers from [0, n), uniformly, in sorted order.

    Robert Floyd's algorithm: O(k) memory regardless of n, so sampling a
    few million positions out of a billion-cell matrix stays cheap.
    """
    if not 0 <= k <= n:
        raise ConfigError(f"cannot sample {k} positions from {n}")
    if k == 0:
        return np.empty(0, dtype=np.int64)
    draws = rng.integers(0, np.arange(n - k, n, dtype=np.int64) + 1)
    chosen: set[int] = set()
    for top, t in zip(range(n - k, n), draws):
        t = int(t)
        chosen.add(top if t in chosen else t)
    out = np.fromiter(chosen, dtype=np.int64, count=k)
    out.sort()
    return out


# -- MatrixMarket I/O ----------------------------------------------------------

_MM_HEADER = "%%MatrixMarket matrix coordinate real general"


def write_matrix_market(path, sm: SampledMatrix) -> None:
    """Write a SampledMatrix in MatrixMarket coordinate format (1-based)."""
    d1, d2 = sm.shape
    with open(path, "w") as fh:
        fh.write(_MM_HEADER + "\n")
        fh.write(f"{d1} {d2} {sm.nnz}\n")
        for i, j, v in zip(sm.rows, sm.cols, sm.values):
            fh.write(f"{i + 1} {j + 1} {v:.17g}\n")


def read_matrix_market(path) -> SampledMatrix:
    """Read a coordinate real general MatrixMarket file."""
    with open(path) as fh:
        header = fh.readline().strip()
        fields = header.lower().split()
        if (
            len(fields) != 5
            or fields[0] != "%%matrixmarket"
            or fields[1:5] != ["matrix", "coordinate", "real", "general"]
        ):
            raise ValueError(f"unsupported MatrixMarket header: {header!r}")
        line = fh.readline()
        while line.startswith("%") or not line.strip():
            line = fh.readline()
        d1, d2, nnz = (int(t) for t in line.split())
        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        vals = np.empty(nnz, dtype=float)
        k = 0
        for line in fh:
            line = line.strip()
            if not line or line.startswith("%"):
                continue
            i, j, v = line.split()
            rows[k] = int(i) - 1
            cols[k] = int(j) - 1
            vals[k] = float(v)
            k += 1
        if k != nnz:
            raise ValueError(f"expected {nnz} entries, found {k}")
    return SampledMatrix.from_entries(d1, d2, rows, cols, vals)
