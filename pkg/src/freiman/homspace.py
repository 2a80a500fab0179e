"""Freiman homomorphisms A -> Z_N and the Freiman rank, by exact elimination over F_N."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .constraints import ConstraintSystem
from .errors import DegenerateSet, NotAFreimanHom, NotIsolated, TooLarge
from .zn import SubsetOfZn, _quadruple_arrays

BRUTE_FORCE_LIMIT = 10 ** 7


@dataclass(frozen=True, eq=False)
class FreimanHom:
    """A function on A, stored as a value per element of ``domain.elements``."""

    domain: SubsetOfZn
    values: tuple = field()

    def __post_init__(self):
        vals = tuple(int(v) % self.domain.N for v in self.values)
        if len(vals) != len(self.domain):
            raise ValueError("one value per element of the domain is required")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_mapping(cls, A: SubsetOfZn, mapping) -> "FreimanHom":
        return cls(A, tuple(mapping[int(a)] for a in A.elements))

    def as_dict(self) -> dict[int, int]:
        return {int(a): v for a, v in zip(self.domain.elements, self.values)}

    def __call__(self, x) -> int:
        return self.as_dict()[int(x) % self.domain.N]

    def __eq__(self, other):
        return (isinstance(other, FreimanHom) and self.domain == other.domain
                and self.values == other.values)

    def __hash__(self):
        return hash((self.domain, self.values))

    def is_valid(self) -> bool:
        return is_freiman_hom(self.domain, self.values)

    def is_linear(self) -> bool:
        return is_restriction_of_linear(self.domain, self.values)


@dataclass(frozen=True)
class HomSpaceResult:
    dimension: int
    basis: tuple

    @property
    def rank(self) -> int:
        return self.dimension - 1

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "rank": self.rank,
            "basis": [{str(k): v for k, v in f.as_dict().items()} for f in self.basis],
        }


def build_hom_constraints(A: SubsetOfZn) -> ConstraintSystem:
    """One row f(a) - f(b) - f(c) + f(d) = 0 per class of nontrivial quadruples."""
    A.group.require_prime()
    if len(A) < 1:
        raise DegenerateSet("the constraint system needs a nonempty set")
    e = A.elements
    n = len(e)
    a, b, c, d = _quadruple_arrays(A, include_trivial=False)
    pos = np.full(A.N, -1, dtype=np.int64)
    pos[e] = np.arange(n)
    a, b, c, d = pos[a], pos[b], pos[c], pos[d]
    # a + d = b + c: the row only depends on the pair of multisets {a,d}, {b,c};
    # swapping the two multisets negates the row, which leaves the kernel alone
    p1, p2 = np.minimum(a, d), np.maximum(a, d)
    q1, q2 = np.minimum(b, c), np.maximum(b, c)
    swap = (p1 > q1) | ((p1 == q1) & (p2 > q2))
    p1, q1 = np.where(swap, q1, p1), np.where(swap, p1, q1)
    p2, q2 = np.where(swap, q2, p2), np.where(swap, p2, q2)
    key = ((p1 * n + p2) * n + q1) * n + q2
    _, first = np.unique(key, return_index=True)
    cols = np.stack([p1[first], p2[first], q1[first], q2[first]], axis=1)
    coefs = np.tile(np.array([1, 1, -1, -1], dtype=np.int64), (cols.shape[0], 1))
    return ConstraintSystem.from_arrays(A.N, tuple(int(x) for x in e), cols, coefs)


def solve_hom_space(A: SubsetOfZn) -> HomSpaceResult:
    A.group.require_prime()
    if len(A) < 2:
        raise DegenerateSet(f"|A| = {len(A)}; the Freiman rank needs at least two points")
    system = build_hom_constraints(A)
    # constants and the identity always survive, so rank |A| - 2 is the ceiling
    basis = system.echelon(stop_at=len(A) - 2)
    kernel = basis.kernel()
    homs = tuple(FreimanHom(A, tuple(int(v) for v in row)) for row in kernel)
    return HomSpaceResult(dimension=len(A) - basis.rank, basis=homs)


def freiman_rank(A: SubsetOfZn) -> int:
    return solve_hom_space(A).rank


def is_linear(A: SubsetOfZn) -> bool:
    if len(A) < 3:
        raise DegenerateSet(f"|A| = {len(A)}; linearity is vacuous below three points")
    return solve_hom_space(A).rank == 1


def is_freiman_hom(A: SubsetOfZn, values) -> bool:
    """Re-check the defining condition on every nontrivial additive quadruple."""
    vals = np.asarray(values, dtype=np.int64) % A.N
    if vals.shape != (len(A),):
        return False
    f = np.zeros(A.N, dtype=np.int64)
    f[A.elements] = vals
    a, b, c, d = _quadruple_arrays(A, include_trivial=False)
    return not bool(((f[a] - f[b] - f[c] + f[d]) % A.N).any())


def is_restriction_of_linear(A: SubsetOfZn, values) -> bool:
    """Whether values agree with x -> s*x + t on A for some s, t in F_N.

    The candidate (s, t) is forced by the first two points of A; it is then
    checked on the remaining points.
    """
    A.group.require_prime()
    N = A.N
    e = A.elements
    vals = np.asarray(values, dtype=np.int64) % N
    if len(e) <= 2:
        return True
    a0, a1 = int(e[0]), int(e[1])
    s = (int(vals[1]) - int(vals[0])) * pow(a1 - a0, -1, N) % N
    t = (int(vals[0]) - s * a0) % N
    return bool(np.array_equal((s * e + t) % N, vals))


def linear_hom(A: SubsetOfZn, slope: int, intercept: int) -> FreimanHom:
    return FreimanHom(A, tuple((slope * int(a) + intercept) % A.N for a in A.elements))


def brute_force_hom_count(A: SubsetOfZn, limit: int = BRUTE_FORCE_LIMIT) -> int:
    """Count all f: A -> Z_N preserving every additive quadruple, exhaustively."""
    N = A.N
    elems = [int(x) for x in A.elements]
    k = len(elems)
    if N ** k > limit:
        raise TooLarge(f"{N}^{k} functions exceed the enumeration limit {limit}")
    if k == 0:
        return 1
    quads = [(ia, ib, ic, id_)
             for (ia, a), (ib, b), (ic, c), (id_, d) in itertools.product(enumerate(elems), repeat=4)
             if (a - b - c + d) % N == 0]
    # functions enumerated as the digits of 0 .. N^k - 1, a block at a time
    total = 0
    block = max(1, min(N ** k, 1 << 18))
    weights = N ** np.arange(k - 1, -1, -1, dtype=np.int64)
    for start in range(0, N ** k, block):
        idx = np.arange(start, min(start + block, N ** k), dtype=np.int64)
        F = (idx[:, None] // weights[None, :]) % N
        ok = np.ones(idx.size, dtype=bool)
        for ia, ib, ic, id_ in quads:
            ok &= (F[:, ia] - F[:, ib] - F[:, ic] + F[:, id_]) % N == 0
        total += int(ok.sum())
    return total


def _isolation_witnesses(A: SubsetOfZn, x0: int) -> int:
    e = A.elements
    x, y = (v.ravel() for v in np.meshgrid(e, e, indexing="ij"))
    z = (x + y - x0) % A.N
    hit = A.mask[z]
    trivial = ((x == z) & (y == x0)) | ((x == x0) & (y == z))
    return int((hit & ~trivial).sum())


def is_isolated(A: SubsetOfZn, x0: int) -> bool:
    """No (x, y, z) in A^3 with x + y = z + x0 other than {x, y} = {z, x0}."""
    return int(x0) in A and _isolation_witnesses(A, int(x0)) == 0


def find_isolated_element(A: SubsetOfZn):
    """The largest isolated element of A, or None."""
    if len(A) < 3:
        raise DegenerateSet("the isolated-element construction needs |A| >= 3")
    for x0 in A.elements[::-1]:
        if _isolation_witnesses(A, int(x0)) == 0:
            return int(x0)
    return None


def indicator_hom_from_isolated(A: SubsetOfZn, x0: int) -> FreimanHom:
    if len(A) < 3:
        raise DegenerateSet("the isolated-element construction needs |A| >= 3")
    if not is_isolated(A, x0):
        raise NotIsolated(f"{x0} takes part in a nontrivial relation x + y = z + {x0}")
    f = FreimanHom(A, tuple(1 if int(a) == int(x0) else 0 for a in A.elements))
    if not f.is_valid() or f.is_linear():
        raise NotAFreimanHom("indicator construction failed verification")
    return f
