"""Exact linear algebra over F_p on dense int64 arrays.

Entries are kept reduced in [0, p). Products are accumulated in int64, so
matrix products are split into blocks small enough that no partial sum can
overflow.
"""

from __future__ import annotations

import numpy as np

_INT64_MAX = (1 << 63) - 1


def _matmul_mod(X: np.ndarray, Y: np.ndarray, p: int) -> np.ndarray:
    k = X.shape[1]
    out = np.zeros((X.shape[0], Y.shape[1]), dtype=np.int64)
    if k == 0:
        return out
    block = max(1, _INT64_MAX // max(1, (p - 1) ** 2) - 1)
    for s in range(0, k, block):
        out += X[:, s:s + block] @ Y[s:s + block]
        out %= p
    return out


def rref_mod(M, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of M over F_p; zero rows are dropped."""
    M = np.array(M, dtype=np.int64, copy=True) % p
    if M.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    nrows, ncols = M.shape
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(M[r:, col])
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            M[[r, k]] = M[[k, r]]
        M[r] = (M[r] * pow(int(M[r, col]), -1, p)) % p
        f = M[:, col].copy()
        f[r] = 0
        hit = np.flatnonzero(f)
        if hit.size:
            M[hit] = (M[hit] - f[hit, None] * M[r]) % p
        pivots.append(col)
        r += 1
    return M[:r], pivots


class EchelonBasis:
    """Row space of a growing set of vectors, kept in reduced echelon form.

    Rows are streamed in with :meth:`add`; the basis never holds more than
    ``ncols`` rows, so arbitrarily long row streams use bounded memory.
    """

    def __init__(self, ncols: int, p: int):
        self.ncols = ncols
        self.p = p
        self.rows = np.zeros((0, ncols), dtype=np.int64)
        self.pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, chunk) -> np.ndarray:
        chunk = np.asarray(chunk, dtype=np.int64) % self.p
        if self.pivots and chunk.size:
            chunk = (chunk - _matmul_mod(chunk[:, self.pivots], self.rows, self.p)) % self.p
        return chunk

    def add(self, chunk) -> int:
        """Add rows; returns the number of new pivots."""
        chunk = self.reduce(np.atleast_2d(chunk))
        chunk = chunk[chunk.any(axis=1)]
        if not chunk.shape[0]:
            return 0
        new, new_piv = rref_mod(chunk, self.p)
        if not new_piv:
            return 0
        if self.pivots:
            self.rows = (self.rows - _matmul_mod(self.rows[:, new_piv], new, self.p)) % self.p
        rows = np.vstack([self.rows, new])
        piv = self.pivots + new_piv
        order = np.argsort(piv, kind="stable")
        self.rows = rows[order]
        self.pivots = [piv[i] for i in order]
        return len(new_piv)

    def contains(self, vec) -> bool:
        return not self.reduce(np.atleast_2d(vec)).any()

    def kernel(self) -> np.ndarray:
        """Basis of {x : R x = 0}, in reduced echelon form (one row per free column)."""
        free = [c for c in range(self.ncols) if c not in set(self.pivots)]
        K = np.zeros((len(free), self.ncols), dtype=np.int64)
        for i, f in enumerate(free):
            K[i, f] = 1
            for r, pc in enumerate(self.pivots):
                K[i, pc] = (-self.rows[r, f]) % self.p
        if not len(free):
            return K
        return rref_mod(K, self.p)[0]


def rank_mod(M, p: int, chunk_rows: int | None = None, stop_at: int | None = None) -> int:
    M = np.asarray(M, dtype=np.int64)
    if M.ndim != 2 or M.shape[0] == 0:
        return 0
    basis = EchelonBasis(M.shape[1], p)
    step = chunk_rows or max(64, 4 * M.shape[1])
    for s in range(0, M.shape[0], step):
        basis.add(M[s:s + step])
        if stop_at is not None and basis.rank >= stop_at:
            break
    return basis.rank


def nullspace_mod(M, ncols: int, p: int) -> np.ndarray:
    basis = EchelonBasis(ncols, p)
    M = np.asarray(M, dtype=np.int64).reshape(-1, ncols)
    step = max(64, 4 * ncols)
    for s in range(0, M.shape[0], step):
        basis.add(M[s:s + step])
    return basis.kernel()
