"""Sparse linear constraint systems over F_N whose kernels are function spaces."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .linalg import EchelonBasis


def _canonical_rows(cols: np.ndarray, coefs: np.ndarray):
    """Merge repeated columns inside each row, drop zero rows, dedupe."""
    n, w = cols.shape
    if n == 0:
        return np.zeros((0, w), dtype=np.int64), np.zeros((0, w), dtype=np.int64)
    order = np.argsort(cols, axis=1, kind="stable")
    cols = np.take_along_axis(cols, order, axis=1)
    coefs = np.take_along_axis(coefs, order, axis=1)
    # fold equal neighbouring columns into the leftmost slot
    for j in range(w - 1, 0, -1):
        same = cols[:, j] == cols[:, j - 1]
        coefs[same, j - 1] += coefs[same, j]
        coefs[same, j] = 0
    coefs = np.where(coefs == 0, 0, coefs)
    cols = np.where(coefs == 0, -1, cols)
    # push zero slots to the end so equal rows encode identically
    order = np.argsort(cols == -1, axis=1, kind="stable")
    cols = np.take_along_axis(cols, order, axis=1)
    coefs = np.take_along_axis(coefs, order, axis=1)
    live = (coefs != 0).any(axis=1)
    cols, coefs = cols[live], coefs[live]
    if not cols.shape[0]:
        return cols, coefs
    packed = np.concatenate([cols, coefs], axis=1)
    _, idx = np.unique(packed, axis=0, return_index=True)
    idx.sort()
    return cols[idx], coefs[idx]


@dataclass(frozen=True, eq=False)
class ConstraintSystem:
    """Rows of coefficients over F_N acting on functions indexed by ``column_labels``.

    Row k is stored as parallel arrays ``row_cols[k]`` / ``row_coefs[k]``
    (column positions, integer coefficients); unused slots hold column -1
    and coefficient 0.
    """

    N: int
    column_labels: tuple
    row_cols: np.ndarray = field(repr=False)
    row_coefs: np.ndarray = field(repr=False)

    @classmethod
    def from_arrays(cls, N, labels, cols, coefs) -> "ConstraintSystem":
        cols = np.asarray(cols, dtype=np.int64).copy()
        coefs = np.asarray(coefs, dtype=np.int64).copy()
        if cols.ndim == 1:
            cols = cols.reshape(-1, 1)
            coefs = coefs.reshape(-1, 1)
        cols, coefs = _canonical_rows(cols, coefs)
        # coefficients congruent to 0 mod N vanish in the field
        coefs = np.where(coefs % N == 0, 0, coefs)
        cols = np.where(coefs == 0, -1, cols)
        live = (coefs != 0).any(axis=1)
        return cls(int(N), tuple(labels), cols[live], coefs[live])

    @property
    def ncols(self) -> int:
        return len(self.column_labels)

    def __len__(self):
        return int(self.row_cols.shape[0])

    @cached_property
    def rows(self) -> tuple:
        """Sparse rows as tuples of (column label, coefficient)."""
        out = []
        for cs, ks in zip(self.row_cols.tolist(), self.row_coefs.tolist()):
            out.append(tuple((self.column_labels[c], k) for c, k in zip(cs, ks) if k))
        return tuple(out)

    def dense_chunks(self, size: int):
        n = len(self)
        for s in range(0, n, size):
            cols = self.row_cols[s:s + size]
            coefs = self.row_coefs[s:s + size]
            M = np.zeros((cols.shape[0], self.ncols), dtype=np.int64)
            r = np.repeat(np.arange(cols.shape[0]), cols.shape[1])
            c = cols.ravel()
            k = coefs.ravel()
            ok = c >= 0
            np.add.at(M, (r[ok], c[ok]), k[ok])
            yield M % self.N

    def dense(self) -> np.ndarray:
        chunks = list(self.dense_chunks(max(1, len(self))))
        return chunks[0] if chunks else np.zeros((0, self.ncols), dtype=np.int64)

    def echelon(self, stop_at: int | None = None) -> EchelonBasis:
        basis = EchelonBasis(self.ncols, self.N)
        for M in self.dense_chunks(max(64, 4 * self.ncols)):
            basis.add(M)
            if stop_at is not None and basis.rank >= stop_at:
                break
        return basis

    def rank(self, stop_at: int | None = None) -> int:
        return self.echelon(stop_at).rank

    def kernel(self) -> np.ndarray:
        return self.echelon().kernel()

    def violations(self, values) -> np.ndarray:
        """Indices of rows not satisfied by the column vector ``values``."""
        v = np.asarray(values, dtype=np.int64) % self.N
        if not len(self):
            return np.zeros(0, dtype=np.int64)
        vals = np.where(self.row_cols >= 0, v[np.maximum(self.row_cols, 0)], 0)
        return np.flatnonzero((vals * self.row_coefs).sum(axis=1) % self.N)
