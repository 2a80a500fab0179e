"""Additive pairs, induced difference functions and the 2-cell constraint module.

The cell complex built from A (vertices Z_N, every directed edge, a 2-cell
for each witnessed triangle) is never materialised. Only its 2-cell
boundaries are kept, as constraint rows on functions phi: Z_N -> Z_N with
phi(0) = 0, indexed by the labels 1..N-1. Its first homology is trivial
exactly when those rows reach rank N - 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constraints import ConstraintSystem
from .errors import DegenerateSet, DifferenceSetIncomplete, NotAFreimanHom, NotWellDefined
from .homspace import FreimanHom, is_freiman_hom
from .zn import SubsetOfZn, has_full_difference_set, triple_counts


@dataclass(frozen=True)
class AdditivePair:
    d1: int
    d2: int


@dataclass(frozen=True)
class InducedFunction:
    """phi(d) for d in Z_N, with ``values[0] == 0``."""

    N: int
    values: tuple

    def __call__(self, d):
        return self.values[int(d) % self.N]

    def kernel_vector(self) -> np.ndarray:
        return np.asarray(self.values[1:], dtype=np.int64)


def is_additive_pair(A: SubsetOfZn, d1: int, d2: int) -> bool:
    """Some x has x, x + d1, x + d1 + d2 all in A (repeats allowed)."""
    t = A.mask
    return bool((t & np.roll(t, -int(d1)) & np.roll(t, -int(d1 + d2))).any())


def additive_pair_matrix(A: SubsetOfZn) -> np.ndarray:
    """Boolean N x N table, entry [d1, d2] true iff (d1, d2) is additive."""
    N = A.N
    M = triple_counts(A) > 0  # M[u, w]: x, x+u, x+w in A
    d = np.arange(N)
    return M[d[:, None], (d[:, None] + d[None, :]) % N]


def additive_pairs(A: SubsetOfZn) -> list[AdditivePair]:
    d1, d2 = np.nonzero(additive_pair_matrix(A))
    return [AdditivePair(int(x), int(y)) for x, y in zip(d1, d2)]


def _labels(N):
    return tuple(range(1, N))


def build_pair_constraints(A: SubsetOfZn) -> ConstraintSystem:
    """Rows phi(d1) + phi(d2) - phi(d1 + d2) = 0 for additive pairs with d1, d2 != 0."""
    A.group.require_prime()
    N = A.N
    d1, d2 = np.nonzero(additive_pair_matrix(A))
    keep = (d1 != 0) & (d2 != 0) & (d1 <= d2)  # the row is symmetric in d1, d2
    d1, d2 = d1[keep], d2[keep]
    s = (d1 + d2) % N
    cols = np.stack([d1 - 1, d2 - 1, np.where(s == 0, -1, s - 1)], axis=1)
    coefs = np.stack([np.ones_like(d1), np.ones_like(d1), np.where(s == 0, 0, -1)], axis=1)
    return ConstraintSystem.from_arrays(N, _labels(N), cols, coefs)


def _require_full_differences(A: SubsetOfZn):
    A.group.require_prime()
    if not has_full_difference_set(A):
        raise DifferenceSetIncomplete("A - A does not cover Z_N")


def induced_space_dimension(A: SubsetOfZn) -> int:
    _require_full_differences(A)
    system = build_pair_constraints(A)
    return (A.N - 1) - system.rank(stop_at=A.N - 2)


def pair_kernel(A: SubsetOfZn) -> np.ndarray:
    """Basis (rows over labels 1..N-1) of the functions respecting every additive pair."""
    _require_full_differences(A)
    return build_pair_constraints(A).kernel()


def is_linear_via_pairs(A: SubsetOfZn) -> bool:
    if len(A) < 3:
        raise DegenerateSet(f"|A| = {len(A)}; linearity is vacuous below three points")
    return induced_space_dimension(A) == 1


def build_triangle_constraints(A: SubsetOfZn) -> ConstraintSystem:
    """2-cell boundaries e_d1 + e_d2 + e_d3 plus the reversal rows e_d + e_{-d}.

    A 2-cell needs three distinct vertices x, x + d1, x + d1 + d2 in A, i.e.
    d1, d2 and d3 = -(d1 + d2) all nonzero. The labels themselves may repeat
    (three-term progressions give 2 e_d + e_{-2d}).
    """
    A.group.require_prime()
    N = A.N
    d1, d2 = np.nonzero(additive_pair_matrix(A))
    d3 = (-(d1 + d2)) % N
    keep = (d1 != 0) & (d2 != 0) & (d3 != 0)
    d1, d2, d3 = d1[keep], d2[keep], d3[keep]
    cells = np.stack([d1, d2, d3], axis=1) - 1
    rev = np.arange(1, N)
    rev = rev[rev <= N - rev]
    reversal = np.stack([rev - 1, N - rev - 1, np.full_like(rev, -1)], axis=1)
    cols = np.vstack([cells, reversal])
    coefs = np.ones_like(cols)
    coefs[cols < 0] = 0
    return ConstraintSystem.from_arrays(N, _labels(N), cols, coefs)


def triangle_generator_rank(A: SubsetOfZn) -> int:
    _require_full_differences(A)
    return build_triangle_constraints(A).rank()


def induced_function(A: SubsetOfZn, f) -> InducedFunction:
    """phi_f(d) = f(x + d) - f(x) for any x with x, x + d in A."""
    _require_full_differences(A)
    N = A.N
    values = f.values if isinstance(f, FreimanHom) else tuple(f)
    e = A.elements
    table = np.zeros(N, dtype=np.int64)
    table[e] = np.asarray(values, dtype=np.int64) % N
    x, y = (v.ravel() for v in np.meshgrid(e, e, indexing="ij"))
    d = (y - x) % N
    diff = (table[y] - table[x]) % N
    lo = np.full(N, N, dtype=np.int64)
    hi = np.full(N, -1, dtype=np.int64)
    np.minimum.at(lo, d, diff)
    np.maximum.at(hi, d, diff)
    bad = np.flatnonzero(lo != hi)
    if bad.size:
        raise NotWellDefined(f"witnesses disagree on phi({int(bad[0])})")
    return InducedFunction(N, tuple(int(v) for v in lo))


def extend_pair_solution_to_hom(A: SubsetOfZn, phi) -> FreimanHom:
    """Turn a solution of the pair system into a Freiman homomorphism on A.

    ``phi`` is an InducedFunction, or its values on the labels 1..N-1.
    A is shifted so that it contains 0 and phi is read off on the shifted set.
    """
    _require_full_differences(A)
    N = A.N
    if isinstance(phi, InducedFunction):
        full = np.asarray(phi.values, dtype=np.int64) % N
    else:
        vec = np.asarray(phi, dtype=np.int64) % N
        if vec.shape != (N - 1,):
            raise ValueError("expected one value per label 1..N-1")
        full = np.concatenate([[0], vec])
    shift = 0 if 0 in A else int(A.elements[0])
    vals = tuple(int(full[(int(a) - shift) % N]) for a in A.elements)
    if not is_freiman_hom(A, vals):
        raise NotAFreimanHom("phi does not solve the additive-pair system")
    f = FreimanHom(A, vals)
    if not np.array_equal(np.asarray(induced_function(A, f).values), full):
        raise NotAFreimanHom("induced function of the extension differs from phi")
    return f
