"""Arithmetic in Z_N, subsets of Z_N, seeded sampling and additive quadruples."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np

from .errors import NonPrimeModulus

MAX_MODULUS = 1 << 20


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class CyclicGroup:
    N: int

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 3:
            raise ValueError(f"modulus must be an integer >= 3, got {self.N!r}")
        if self.N > MAX_MODULUS:
            raise ValueError(f"modulus {self.N} exceeds cap {MAX_MODULUS}")
        object.__setattr__(self, "N", int(self.N))

    @cached_property
    def prime(self) -> bool:
        return is_prime(self.N)

    def require_prime(self):
        if not self.prime:
            raise NonPrimeModulus(f"N={self.N} is not prime; field structure required")

    def __repr__(self):
        return f"Z_{self.N}"


@dataclass(frozen=True, eq=False)
class SubsetOfZn:
    """A subset A of Z_N.

    ``mask`` is the indicator vector t_x = 1_A(x), kept read-only so the
    object can be shared between workers.
    """

    group: CyclicGroup
    mask: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        if m.shape != (self.group.N,):
            raise ValueError("mask length must equal N")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "mask", m)

    @classmethod
    def from_members(cls, N: int | CyclicGroup, members: Iterable[int]) -> "SubsetOfZn":
        group = N if isinstance(N, CyclicGroup) else CyclicGroup(N)
        mask = np.zeros(group.N, dtype=bool)
        for m in members:
            m = int(m)
            if not 0 <= m < group.N:
                raise ValueError(f"member {m} outside [0, {group.N})")
            mask[m] = True
        return cls(group, mask)

    @classmethod
    def full(cls, N: int) -> "SubsetOfZn":
        return cls(CyclicGroup(N), np.ones(N, dtype=bool))

    @property
    def N(self) -> int:
        return self.group.N

    @cached_property
    def elements(self) -> np.ndarray:
        """Members in ascending order."""
        e = np.flatnonzero(self.mask)
        e.flags.writeable = False
        return e

    def __len__(self):
        return int(self.elements.size)

    def __contains__(self, x):
        return bool(self.mask[int(x) % self.N])

    def __iter__(self) -> Iterator[int]:
        return iter(int(x) for x in self.elements)

    def __eq__(self, other):
        if not isinstance(other, SubsetOfZn):
            return NotImplemented
        return self.N == other.N and bool(np.array_equal(self.mask, other.mask))

    def __hash__(self):
        return hash((self.N, self.mask.tobytes()))

    def __repr__(self):
        return f"SubsetOfZn(N={self.N}, {sorted(self)})"

    def affine_image(self, t: int, s: int) -> "SubsetOfZn":
        """The set t*A + s."""
        return SubsetOfZn.from_members(self.group, (self.elements * t + s) % self.N)

    def translate(self, s: int) -> "SubsetOfZn":
        return self.affine_image(1, s)


@dataclass(frozen=True)
class RandomModel:
    p: float
    master_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= float(self.p) <= 1.0:
            raise ValueError(f"density must lie in [0, 1], got {self.p}")
        if not 0 <= int(self.master_seed) < 1 << 64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    # SeedSequence hashes (seed, spawn_key) into an independent stream; the
    # result does not depend on which other trials were drawn or in what order.
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(trial_index),))
    return np.random.default_rng(ss)


def sample_subset(group: CyclicGroup, model: RandomModel, trial_index: int) -> SubsetOfZn:
    rng = trial_rng(model.master_seed, trial_index)
    return SubsetOfZn(group, rng.random(group.N) < model.p)


def difference_set(A: SubsetOfZn) -> SubsetOfZn:
    e = A.elements
    mask = np.zeros(A.N, dtype=bool)
    if e.size:
        mask[(e[:, None] - e[None, :]) % A.N] = True
    return SubsetOfZn(A.group, mask)


def has_full_difference_set(A: SubsetOfZn) -> bool:
    return bool(difference_set(A).mask.all())


def representation_counts(A: SubsetOfZn) -> np.ndarray:
    """r(e) = #{(a, b) in A^2 : a - b = e} for every e in Z_N."""
    e = A.elements
    if not e.size:
        return np.zeros(A.N, dtype=np.int64)
    diffs = (e[:, None] - e[None, :]) % A.N
    return np.bincount(diffs.ravel(), minlength=A.N).astype(np.int64)


def _quadruple_arrays(A: SubsetOfZn, include_trivial: bool):
    e = A.elements
    N = A.N
    if not e.size:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty, empty
    a, b, c = (x.ravel() for x in np.meshgrid(e, e, e, indexing="ij"))
    d = (c - a + b) % N
    keep = A.mask[d]
    if not include_trivial:
        # {a, d} == {c, b} as multisets: a = c and d = b, or a = b and d = c
        trivial = ((a == c) & (d == b)) | ((a == b) & (d == c))
        keep &= ~trivial
    return a[keep], b[keep], c[keep], d[keep]


def enumerate_additive_quadruples(A: SubsetOfZn, include_trivial: bool = True) -> list[tuple[int, int, int, int]]:
    """All ordered (a, b, c, d) in A^4 with a - b = c - d (mod N)."""
    a, b, c, d = _quadruple_arrays(A, include_trivial)
    return [tuple(int(x) for x in q) for q in zip(a, b, c, d)]


def count_additive_quadruples(A: SubsetOfZn) -> int:
    r = representation_counts(A)
    return int(np.dot(r, r))


def is_sidon(A: SubsetOfZn) -> bool:
    return _quadruple_arrays(A, include_trivial=False)[0].size == 0


def triple_counts(A: SubsetOfZn) -> np.ndarray:
    """M[u, w] = #{x : x, x+u, x+w all in A}, for all u, w in Z_N."""
    N = A.N
    t = A.mask.astype(np.float64)
    idx = (np.arange(N)[:, None] + np.arange(N)[None, :]) % N  # idx[x, u] = x + u
    shifted = t[idx]
    pair = t[:, None] * shifted
    # float64 is exact here: every entry is an integer <= N < 2^53
    return np.rint(pair.T @ shifted).astype(np.int64)
