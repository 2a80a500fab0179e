"""Counting embeddings of subdivided triangles: the polynomials Lambda^i.

Lambda^0_{a,b,c} counts x with x+a, x+b, x+c in A, and

    Lambda^{i+1}_{a,b,c} = sum_z Lambda^i_{a,b,z} Lambda^i_{a,z,c} Lambda^i_{z,b,c}.

Every level is translation invariant, so a table indexed by the difference
pair (u, w) = (b - a, c - a) holds all N^3 values in N^2 entries.
"""

from __future__ import annotations

import csv
import io
import itertools
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import LevelCapExceeded, TooLarge
from .linalg import rref_mod
from .zn import SubsetOfZn, triple_counts

LEVEL_CAP = 3
TUPLE_BUDGET = 1 << 24
_MAGIC = b"FLT1"
_MODES = {"exact": 0, "positivity": 1}


def free_dimension(i: int) -> int:
    """d with 2d + 1 = 3^(i+1)."""
    return (3 ** (i + 1) - 1) // 2


def _check_level(i, cap=LEVEL_CAP):
    if i < 0:
        raise ValueError("level must be nonnegative")
    if i > cap:
        raise LevelCapExceeded(f"level {i} exceeds cap {cap}")


@dataclass(frozen=True, eq=False)
class LambdaTable:
    level: int
    N: int
    mode: str
    entries: np.ndarray

    def value(self, a, b, c):
        return self.entries[(b - a) % self.N, (c - a) % self.N]

    def distinct_mask(self) -> np.ndarray:
        """Entries whose triple (0, u, w) has three distinct points."""
        u = np.arange(self.N)
        return (u[:, None] != 0) & (u[None, :] != 0) & (u[:, None] != u[None, :])

    def positive(self) -> np.ndarray:
        return self.entries.astype(bool) if self.mode == "positivity" else self.entries > 0

    def to_bytes(self) -> bytes:
        """FLT1 dump: magic, then little-endian N (u32), level (u32), mode (u8).

        Positivity entries follow as one byte each. Exact entries follow a
        u32 byte width w, each entry then stored as a w-byte unsigned integer.
        All entries are row-major over (u, w).
        """
        head = _MAGIC + struct.pack("<IIB", self.N, self.level, _MODES[self.mode])
        flat = [int(v) for v in self.entries.ravel()]
        if self.mode == "positivity":
            return head + bytes(flat)
        width = max(1, (max(flat, default=0).bit_length() + 7) // 8)
        body = b"".join(v.to_bytes(width, "little") for v in flat)
        return head + struct.pack("<I", width) + body

    @classmethod
    def from_bytes(cls, blob: bytes) -> "LambdaTable":
        if blob[:4] != _MAGIC:
            raise ValueError("not an FLT1 table")
        N, level, mode_code = struct.unpack_from("<IIB", blob, 4)
        mode = {v: k for k, v in _MODES.items()}[mode_code]
        off = 4 + 9
        if mode == "positivity":
            ent = np.frombuffer(blob, dtype=np.uint8, count=N * N, offset=off).astype(bool)
        else:
            (width,) = struct.unpack_from("<I", blob, off)
            off += 4
            vals = [int.from_bytes(blob[off + k * width: off + (k + 1) * width], "little")
                    for k in range(N * N)]
            ent = _as_exact_array(vals, N)
        return cls(level, N, mode, ent.reshape(N, N))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["u", "w", "value"])
        for u in range(self.N):
            for v in range(self.N):
                w.writerow([u, v, int(self.entries[u, v])])
        return buf.getvalue()


def _as_exact_array(vals, N):
    if max(vals, default=0) < (1 << 62):
        return np.asarray(vals, dtype=np.int64)
    arr = np.empty(len(vals), dtype=object)
    arr[:] = vals
    return arr


def lambda0(A: SubsetOfZn, a: int, b: int, c: int) -> int:
    t = A.mask
    return int((np.roll(t, -a) & np.roll(t, -b) & np.roll(t, -c)).sum())


def _next_level(T: np.ndarray, positivity: bool) -> np.ndarray:
    N = T.shape[0]
    acc = np.zeros((N, N), dtype=T.dtype) if T.dtype != object else np.full((N, N), 0, dtype=object)
    for z in range(N):
        shifted = np.roll(T, (z, z), axis=(0, 1))  # shifted[u, w] = T[u - z, w - z]
        if positivity:
            acc |= T[:, z][:, None] & T[z, :][None, :] & shifted
        else:
            acc += T[:, z][:, None] * T[z, :][None, :] * shifted
    return acc


def lambda_tables(A: SubsetOfZn, i: int, mode: str = "positivity", cap: int = LEVEL_CAP) -> list[LambdaTable]:
    """Tables for levels 0..i, built bottom-up."""
    _check_level(i, cap)
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {sorted(_MODES)}")
    N = A.N
    positivity = mode == "positivity"
    T = triple_counts(A)
    T = T > 0 if positivity else T
    out = [LambdaTable(0, N, mode, T)]
    for level in range(1, i + 1):
        if not positivity and N ** free_dimension(level) >= (1 << 62):
            T = T.astype(object)
        T = _next_level(T, positivity)
        out.append(LambdaTable(level, N, mode, T))
    return out


def lambda_table(A: SubsetOfZn, i: int, mode: str = "positivity", cap: int = LEVEL_CAP) -> LambdaTable:
    return lambda_tables(A, i, mode, cap)[-1]


def all_triangles_positive(A: SubsetOfZn, i: int, cap: int = LEVEL_CAP) -> bool:
    return _all_positive(lambda_table(A, i, "positivity", cap))


def _all_positive(table: LambdaTable) -> bool:
    return bool(table.positive()[table.distinct_mask()].all())


def level_positivity(A: SubsetOfZn, i_max: int, cap: int = LEVEL_CAP) -> list[bool]:
    return [_all_positive(t) for t in lambda_tables(A, i_max, "positivity", cap)]


def min_level_all_positive(A: SubsetOfZn, i_max: int, cap: int = LEVEL_CAP):
    for level, ok in enumerate(level_positivity(A, i_max, cap)):
        if ok:
            return level
    return None


# -- the linear forms behind Lambda^i ---------------------------------------

SYMBOL_NAMES = ("a", "b", "c")


@dataclass(frozen=True)
class LinearFormSet:
    """The 2d+1 forms x_j + y_j whose t-product is the generic monomial of Lambda^i.

    Symbols are indexed 0, 1, 2 for a, b, c and 3 .. d+2 for the free
    variables v_1 .. v_d. ``forms[j] = (x_j, y_j)`` with y_j a free variable.
    """

    level: int
    d: int
    forms: tuple

    def __len__(self):
        return len(self.forms)

    def symbol(self, k: int) -> str:
        return SYMBOL_NAMES[k] if k < 3 else f"v{k - 2}"

    def describe(self) -> list[str]:
        return [f"{self.symbol(y)}+{self.symbol(x)}" for x, y in self.forms]

    def matrix(self) -> np.ndarray:
        """Integer coefficient matrix, one row per form, one column per symbol."""
        M = np.zeros((len(self.forms), self.d + 3), dtype=np.int64)
        for j, (x, y) in enumerate(self.forms):
            M[j, x] += 1
            M[j, y] += 1
        return M

    def evaluate(self, params, V) -> np.ndarray:
        """Form values mod N for each row of V (shape (n, d)); params = (a, b, c)."""
        return _evaluate(self, params, np.atleast_2d(V), None)


def _evaluate(forms: LinearFormSet, params, V, N):
    V = np.asarray(V, dtype=np.int64)
    S = np.concatenate([np.broadcast_to(np.asarray(params, dtype=np.int64), (V.shape[0], 3)), V], axis=1)
    X = np.array([x for x, _ in forms.forms])
    Y = np.array([y for _, y in forms.forms])
    out = S[:, X] + S[:, Y]
    return out if N is None else out % N


def _build_forms(i, pa, pb, pc, nxt):
    if i == 0:
        return [(pa, nxt), (pb, nxt), (pc, nxt)], nxt + 1
    z = nxt + 3 * free_dimension(i - 1)
    f1, nxt = _build_forms(i - 1, pa, pb, z, nxt)
    f2, nxt = _build_forms(i - 1, pa, z, pc, nxt)
    f3, nxt = _build_forms(i - 1, z, pb, pc, nxt)
    return f1 + f2 + f3, z + 1


@lru_cache(maxsize=None)
def psi_forms(i: int, cap: int = LEVEL_CAP) -> LinearFormSet:
    """Forms for level i; the free variables are ordered v1 (+) v2 (+) v3 (+) z recursively."""
    _check_level(i, cap)
    forms, nxt = _build_forms(i, 0, 1, 2, 3)
    d = free_dimension(i)
    assert nxt == d + 3
    return LinearFormSet(i, d, tuple(forms))


def substitution_is_injective(i: int, N: int) -> bool:
    """Whether (v, z) -> psi^i_{a,b,z}(v) is injective over F_N.

    The map is affine; it is injective iff its linear part (columns for the
    c-slot and the free variables) has full column rank d + 1.
    """
    M = psi_forms(i).matrix()
    lin = M[:, 2:]
    _, piv = rref_mod(lin, N)
    return len(piv) == lin.shape[1]


# -- degeneracy and the trimmed polynomial ----------------------------------

@lru_cache(maxsize=None)
def _short_combinations(n_symbols: int) -> np.ndarray:
    """All formal integer vectors of L1 norm <= 2 on n symbols."""
    vecs = [np.zeros(n_symbols, dtype=np.int64)]
    for k in range(n_symbols):
        for s in (1, -1):
            e = np.zeros(n_symbols, dtype=np.int64)
            e[k] = s
            vecs.append(e)
            vecs.append(2 * e)
    for k, l in itertools.combinations(range(n_symbols), 2):
        for s, t in itertools.product((1, -1), repeat=2):
            e = np.zeros(n_symbols, dtype=np.int64)
            e[k], e[l] = s, t
            vecs.append(e)
    return np.array(vecs)


def _rows_have_repeat(values: np.ndarray) -> np.ndarray:
    s = np.sort(values, axis=1)
    return (s[:, 1:] == s[:, :-1]).any(axis=1)


def degenerate_mask(V, params, i: int, N: int, kind: str = "relation") -> np.ndarray:
    """Vectorised degeneracy test for the rows of V (free-variable tuples).

    ``kind="relation"``: the tuple together with (a, b, c) satisfies some
    nonzero integer relation sum eps_j y_j = 0 with at most four terms
    eps_j = +-1 (repeats allowed). Any such relation is the difference of
    two distinct formal combinations of L1 norm <= 2, so the test is whether
    those combinations take a repeated value mod N.

    ``kind="collision"``: two of the 2d + 1 forms take the same value, so
    the monomial has fewer than 2d + 1 distinct variables.
    """
    V = np.atleast_2d(np.asarray(V, dtype=np.int64))
    forms = psi_forms(i)
    if V.shape[1] != forms.d:
        raise ValueError(f"level {i} tuples have {forms.d} entries")
    if kind == "collision":
        return _rows_have_repeat(_evaluate(forms, params, V, N))
    if kind != "relation":
        raise ValueError("kind must be 'relation' or 'collision'")
    S = np.concatenate([np.broadcast_to(np.asarray(params, dtype=np.int64), (V.shape[0], 3)), V], axis=1)
    combos = _short_combinations(forms.d + 3)
    return _rows_have_repeat((S @ combos.T) % N)


def is_degenerate_tuple(v, params, i: int, N: int, kind: str = "relation") -> bool:
    return bool(degenerate_mask(np.asarray(v)[None, :], params, i, N, kind)[0])


def parameter_relation(params, N: int) -> bool:
    """Whether a, b, c alone satisfy a nonzero relation of length <= 4."""
    combos = _short_combinations(3)
    vals = (combos @ np.asarray(params, dtype=np.int64)) % N
    return bool(np.unique(vals).size < vals.size)


def _tuple_chunks(N, d, budget, chunk=1 << 16):
    total = N ** d
    if total > budget:
        raise TooLarge(f"{N}^{d} tuples exceed the enumeration budget {budget}")
    radix = N ** np.arange(d - 1, -1, -1, dtype=np.int64)
    for s in range(0, total, chunk):
        idx = np.arange(s, min(s + chunk, total), dtype=np.int64)
        yield (idx[:, None] // radix[None, :]) % N


@dataclass(frozen=True)
class TupleCensus:
    total: int
    nondegenerate: int
    lambda_tilde: int
    degenerate_contribution: int

    @property
    def degenerate(self) -> int:
        return self.total - self.nondegenerate

    @property
    def lambda_full(self) -> int:
        return self.lambda_tilde + self.degenerate_contribution


def tuple_census(A: SubsetOfZn, i: int, a: int, b: int, c: int, kind: str = "collision",
                 budget: int = TUPLE_BUDGET) -> TupleCensus:
    """Split the monomials of Lambda^i_{a,b,c} into nondegenerate and degenerate tuples."""
    if len({a % A.N, b % A.N, c % A.N}) < 3:
        raise ValueError("a, b, c must be distinct")
    forms = psi_forms(i)
    N = A.N
    t = A.mask
    total = nondeg = good = bad = 0
    for V in _tuple_chunks(N, forms.d, budget):
        vals = _evaluate(forms, (a, b, c), V, N)
        deg = degenerate_mask(V, (a, b, c), i, N, kind) if kind != "collision" else _rows_have_repeat(vals)
        hit = t[vals].all(axis=1)
        total += V.shape[0]
        nondeg += int((~deg).sum())
        good += int((hit & ~deg).sum())
        bad += int((hit & deg).sum())
    return TupleCensus(total, nondeg, good, bad)


def lambda_tilde(A: SubsetOfZn, i: int, a: int, b: int, c: int, kind: str = "collision",
                 budget: int = TUPLE_BUDGET) -> int:
    return tuple_census(A, i, a, b, c, kind, budget).lambda_tilde


def degenerate_count(N: int, i: int, a: int, b: int, c: int, kind: str = "collision",
                     budget: int = TUPLE_BUDGET) -> int:
    return tuple_census(SubsetOfZn.full(N), i, a, b, c, kind, budget).degenerate
