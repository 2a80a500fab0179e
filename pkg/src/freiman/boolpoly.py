"""Positive reduced Boolean polynomials and the inputs to Vu's concentration bound.

A polynomial is stored by term size: for each size l an (n_l, l) array of
sorted variable indices (one row per monomial t_B) and a weight array.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .embedding import _rows_have_repeat, degenerate_mask, psi_forms, _evaluate, _tuple_chunks
from .errors import ScheduleInvalid, TooLarge

CANDIDATE_BUDGET = 60_000_000
MAX_SUBSET_DEGREE = 9


def _aggregate(idx: np.ndarray, w: np.ndarray):
    if idx.shape[0] == 0:
        return idx, w
    if idx.shape[1] == 0:
        return idx[:1], np.array([w.sum()], dtype=w.dtype)
    uniq, inv = np.unique(idx, axis=0, return_inverse=True)
    tot = np.zeros(uniq.shape[0], dtype=w.dtype)
    np.add.at(tot, inv.ravel(), w)
    return uniq, tot


class ReducedBooleanPolynomial:
    def __init__(self, nvars: int, groups: dict):
        self.nvars = int(nvars)
        clean = {}
        for l, (idx, w) in groups.items():
            w = np.asarray(w)
            idx = np.asarray(idx, dtype=np.int64).reshape(w.shape[0], l)
            if w.dtype != object:
                w = w.astype(np.int64)
            if (w < 0).any():
                raise ValueError("weights must be nonnegative")
            keep = w != 0
            if keep.any():
                clean[l] = (idx[keep], w[keep])
        self.groups = dict(sorted(clean.items()))

    # -- construction --------------------------------------------------------

    @classmethod
    def from_arrays(cls, nvars: int, rows, weights=None) -> "ReducedBooleanPolynomial":
        """Monomials given as rows of variable indices; repeats inside a row collapse (t^2 = t)."""
        rows = np.asarray(rows, dtype=np.int64)
        if rows.ndim != 2:
            raise ValueError("rows must be 2-d")
        w = np.ones(rows.shape[0], dtype=np.int64) if weights is None else np.asarray(weights, dtype=np.int64)
        if rows.size and (rows.min() < 0 or rows.max() >= nvars):
            raise ValueError("variable index out of range")
        s = np.sort(rows, axis=1)
        fresh = np.ones_like(s, dtype=bool)
        fresh[:, 1:] = s[:, 1:] != s[:, :-1]
        sizes = fresh.sum(axis=1)
        groups = {}
        for l in np.unique(sizes):
            sel = sizes == l
            idx = s[sel][fresh[sel]].reshape(int(sel.sum()), int(l))
            groups[int(l)] = _aggregate(idx, w[sel])
        return cls(nvars, groups)

    @classmethod
    def from_terms(cls, nvars: int, terms: Iterable) -> "ReducedBooleanPolynomial":
        by_size: dict[int, dict[tuple, int]] = {}
        for vars_, w in terms:
            key = tuple(sorted(set(int(v) for v in vars_)))
            if key and (key[0] < 0 or key[-1] >= nvars):
                raise ValueError("variable index out of range")
            if w < 0:
                raise ValueError("weights must be nonnegative")
            bucket = by_size.setdefault(len(key), {})
            bucket[key] = bucket.get(key, 0) + int(w)
        groups = {}
        for l, bucket in by_size.items():
            keys = sorted(bucket)
            groups[l] = (np.array(keys, dtype=np.int64).reshape(len(keys), l),
                         np.array([bucket[k] for k in keys], dtype=np.int64))
        return cls(nvars, groups)

    @classmethod
    def from_masks(cls, nvars: int, masks: np.ndarray, weights: np.ndarray) -> "ReducedBooleanPolynomial":
        """Monomials as uint64 bitmasks (nvars <= 64)."""
        if nvars > 64:
            raise ValueError("bitmask form needs at most 64 variables")
        masks = np.asarray(masks, dtype=np.uint64)
        bits = ((masks[:, None] >> np.arange(nvars, dtype=np.uint64)[None, :]) & np.uint64(1)).astype(bool)
        sizes = bits.sum(axis=1)
        groups = {}
        for l in np.unique(sizes):
            sel = sizes == l
            idx = np.nonzero(bits[sel])[1].reshape(int(sel.sum()), int(l))
            groups[int(l)] = (idx, np.asarray(weights)[sel])
        return cls(nvars, groups)

    # -- basic queries ---------------------------------------------------------

    @property
    def degree(self) -> int:
        return max(self.groups, default=0)

    def __len__(self):
        return sum(idx.shape[0] for idx, _ in self.groups.values())

    def terms(self):
        for l, (idx, w) in self.groups.items():
            for row, wt in zip(idx.tolist(), w.tolist()):
                yield tuple(row), int(wt)

    def total_weight(self) -> int:
        return sum(int(w.sum()) for _, w in self.groups.values())

    def __eq__(self, other):
        if not isinstance(other, ReducedBooleanPolynomial):
            return NotImplemented
        return self.nvars == other.nvars and dict(self.terms()) == dict(other.terms())

    def __repr__(self):
        return f"ReducedBooleanPolynomial(nvars={self.nvars}, terms={len(self)}, degree={self.degree})"

    def evaluate(self, t) -> int:
        t = np.asarray(t, dtype=bool)
        total = 0
        for l, (idx, w) in self.groups.items():
            total += int(w[t[idx].all(axis=1)].sum())
        return total

    def evaluate_many(self, T: np.ndarray) -> np.ndarray:
        T = np.asarray(T, dtype=bool)
        out = np.zeros(T.shape[0], dtype=np.int64)
        for l, (idx, w) in self.groups.items():
            step = max(1, 20_000_000 // max(1, idx.size))
            for s in range(0, T.shape[0], step):
                hit = T[s:s + step][:, idx].all(axis=2)
                out[s:s + step] += hit.astype(np.int64) @ w.astype(np.int64)
        return out

    # -- serialisation --------------------------------------------------------

    def to_jsonl(self) -> str:
        return "".join(json.dumps({"vars": list(v), "w": w}) + "\n" for v, w in self.terms())

    @classmethod
    def from_jsonl(cls, text: str, nvars: int | None = None) -> "ReducedBooleanPolynomial":
        terms = [(rec["vars"], rec["w"]) for rec in map(json.loads, filter(None, text.splitlines()))]
        if nvars is None:
            nvars = 1 + max((max(v) for v, _ in terms if v), default=-1)
        return cls.from_terms(nvars, terms)


# -- builders -------------------------------------------------------------------

def edge_variable(n: int, i: int, j: int) -> int:
    """Index of edge {i, j} (0 <= i < j < n) in lexicographic order."""
    i, j = np.minimum(i, j), np.maximum(i, j)
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def from_triangle_count(n: int) -> ReducedBooleanPolynomial:
    if n < 3:
        raise ValueError("need at least three vertices")
    tri = np.array(list(itertools.combinations(range(n), 3)), dtype=np.int64)
    i, j, k = tri.T
    rows = np.stack([edge_variable(n, i, j), edge_variable(n, j, k), edge_variable(n, i, k)], axis=1)
    return ReducedBooleanPolynomial.from_arrays(n * (n - 1) // 2, rows)


def linear_polynomial(n: int) -> ReducedBooleanPolynomial:
    return ReducedBooleanPolynomial.from_arrays(n, np.arange(n).reshape(-1, 1))


def from_lambda1(a: int, b: int, c: int, N: int, filtered: bool = False, kind: str = "collision",
                 budget: int = 64 ** 4) -> ReducedBooleanPolynomial:
    """Lambda^1_{a,b,c} expanded over the variables t_0 .. t_{N-1}.

    With ``filtered`` only nondegenerate tuples (x1, x2, x3, z) contribute,
    giving the trimmed polynomial; otherwise collapsed monomials are reduced
    and their weights merged.
    """
    if N > 64:
        raise TooLarge("explicit expansion is limited to N <= 64")
    if len({a % N, b % N, c % N}) < 3:
        raise ValueError("a, b, c must be distinct")
    forms = psi_forms(1)
    bit = np.left_shift(np.uint64(1), np.arange(N, dtype=np.uint64))
    masks = []
    for V in _tuple_chunks(N, forms.d, budget):
        vals = _evaluate(forms, (a, b, c), V, N)
        if filtered:
            deg = _rows_have_repeat(vals) if kind == "collision" else degenerate_mask(V, (a, b, c), 1, N, kind)
            vals = vals[~deg]
        masks.append(np.bitwise_or.reduce(bit[vals], axis=1))
    allm = np.concatenate(masks) if masks else np.zeros(0, dtype=np.uint64)
    uniq, counts = np.unique(allm, return_counts=True)
    return ReducedBooleanPolynomial.from_masks(N, uniq, counts)


# -- counting functionals ----------------------------------------------------

def _as_key(C) -> np.ndarray:
    return np.array(sorted(set(int(c) for c in C)), dtype=np.int64)


def _containing(idx: np.ndarray, C: np.ndarray) -> np.ndarray:
    hit = np.ones(idx.shape[0], dtype=bool)
    for c in C:
        hit &= (idx == c).any(axis=1)
    return hit


def m(P: ReducedBooleanPolynomial, C=(), l: int | None = None) -> int:
    """Weighted number of terms of size l (any size if l is None) containing t_C."""
    C = _as_key(C)
    total = 0
    for size, (idx, w) in P.groups.items():
        if (l is not None and size != l) or size < C.size:
            continue
        total += int(w[_containing(idx, C)].sum())
    return total


def partial_derivative(P: ReducedBooleanPolynomial, C) -> ReducedBooleanPolynomial:
    C = _as_key(C)
    groups = {}
    for size, (idx, w) in P.groups.items():
        if size < C.size:
            continue
        hit = _containing(idx, C)
        if not hit.any():
            continue
        rows = idx[hit]
        keep = ~np.isin(rows, C)
        groups[size - C.size] = (rows[keep].reshape(rows.shape[0], size - C.size), w[hit])
    return ReducedBooleanPolynomial(P.nvars, groups)


def expectation(P: ReducedBooleanPolynomial, p):
    """E[P] under independent Bernoulli(p) variables; exact when p is a Fraction."""
    if isinstance(p, Fraction):
        return sum((Fraction(int(w.sum())) * p ** l for l, (_, w) in P.groups.items()), Fraction(0))
    return float(sum(float(w.sum()) * float(p) ** l for l, (_, w) in P.groups.items()))


def _encode(rows: np.ndarray, nvars: int):
    s = rows.shape[1]
    if s == 0:
        return np.zeros(rows.shape[0], dtype=np.int64)
    if nvars ** s < (1 << 62):
        radix = nvars ** np.arange(s - 1, -1, -1, dtype=np.int64)
        return rows @ radix
    return None


def subset_masses(P: ReducedBooleanPolynomial, s: int, budget: int = CANDIDATE_BUDGET):
    """For every size-s set C inside some term: m(C, l; P) for each term size l.

    Returns (candidates, {l: counts}) with candidates an (K, s) array of
    sorted variable sets and counts aligned with it.
    """
    need = sum(idx.shape[0] * math.comb(l, s) for l, (idx, _) in P.groups.items() if l >= s)
    if need > budget:
        raise TooLarge(f"{need} candidate subsets exceed budget {budget}")
    if any(l > MAX_SUBSET_DEGREE and l >= s for l in P.groups) and s > 0:
        raise TooLarge(f"subset enumeration is capped at degree {MAX_SUBSET_DEGREE}")
    rows, sizes, weights = [], [], []
    for l, (idx, w) in P.groups.items():
        if l < s:
            continue
        for combo in itertools.combinations(range(l), s):
            rows.append(idx[:, list(combo)])
            sizes.append(np.full(idx.shape[0], l, dtype=np.int64))
            weights.append(w)
    if not rows:
        return np.zeros((0, s), dtype=np.int64), {}
    R = np.concatenate(rows)
    L = np.concatenate(sizes)
    W = np.concatenate(weights)
    key = _encode(R, P.nvars)
    if key is None:
        uniq_rows, inv = np.unique(R, axis=0, return_inverse=True)
    else:
        uniq_key, first, inv = np.unique(key, return_index=True, return_inverse=True)
        uniq_rows = R[first]
    inv = inv.ravel()
    out = {}
    for l in np.unique(L):
        sel = L == l
        cnt = np.zeros(uniq_rows.shape[0], dtype=W.dtype if W.dtype == object else np.int64)
        np.add.at(cnt, inv[sel], W[sel])
        out[int(l)] = cnt
    return uniq_rows, out


def _derivative_expectations(P, s, p, budget):
    cands, counts = subset_masses(P, s, budget)
    if isinstance(p, Fraction):
        vals = np.full(cands.shape[0], Fraction(0), dtype=object)
        for l, cnt in counts.items():
            vals = vals + cnt.astype(object) * (p ** (l - s))
    else:
        vals = np.zeros(cands.shape[0])
        for l, cnt in counts.items():
            vals = vals + cnt.astype(np.float64) * float(p) ** (l - s)
    return cands, vals


def derivative_expectation(P: ReducedBooleanPolynomial, C, p):
    """E[d_C P] = sum_l m(C, l; P) p^(l - |C|)."""
    C = _as_key(C)
    exact = isinstance(p, Fraction)
    total = Fraction(0) if exact else 0.0
    for l, (idx, w) in P.groups.items():
        if l < C.size:
            continue
        cnt = int(w[_containing(idx, C)].sum())
        total += (Fraction(cnt) * p ** (l - C.size)) if exact else cnt * float(p) ** (l - C.size)
    return total


def ej_profile(P: ReducedBooleanPolynomial, p, budget: int = CANDIDATE_BUDGET) -> list:
    """[E_0, ..., E_k]: E_j is the largest E[d_C P] over |C| >= j."""
    zero = Fraction(0) if isinstance(p, Fraction) else 0.0
    per_size = []
    for s in range(P.degree + 1):
        _, vals = _derivative_expectations(P, s, p, budget)
        per_size.append(max(vals.tolist(), default=zero))
    out = []
    best = zero
    for v in reversed(per_size):
        best = max(best, v)
        out.append(best)
    return out[::-1]


def ej(P: ReducedBooleanPolynomial, j: int, p, budget: int = CANDIDATE_BUDGET):
    if j > P.degree:
        return Fraction(0) if isinstance(p, Fraction) else 0.0
    return ej_profile(P, p, budget)[j]


def max_mass(P: ReducedBooleanPolynomial, s: int, budget: int = CANDIDATE_BUDGET) -> int:
    """max over |C| = s of m(C; P)."""
    _, counts = subset_masses(P, s, budget)
    if not counts:
        return 0
    return int(sum(counts.values()).max())


def pb_ratio(P: ReducedBooleanPolynomial, B) -> float:
    """Share of the total weight carried by monomials containing t_B."""
    if not len(_as_key(B)):
        raise ValueError("B must be nonempty")
    total = P.total_weight()
    return m(P, B) / total if total else 0.0


# -- concentration bounds --------------------------------------------------------

def chernoff_bound(N: int, p: float, lam: float) -> float:
    """Bound on P{|Y - EY| > sqrt(lam N)} for a sum of N Bernoulli(p) variables."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    return 2.0 * math.exp(-lam / 4.0)


def chernoff_deviation(N: int, lam: float) -> float:
    return math.sqrt(lam * N)


def azuma_bound(sum_sq_d: float, lam: float) -> float:
    if lam <= 0 or sum_sq_d <= 0:
        raise ValueError("lambda and the variance proxy must be positive")
    return 2.0 * math.exp(-lam * lam / (2.0 * sum_sq_d))


def last_martingale_difference(P: ReducedBooleanPolynomial, var: int, p: float) -> float:
    """Largest value of the martingale increment when ``var`` is revealed last.

    The increment is (t_var - p) * d_var P evaluated on the other variables;
    with nonnegative weights its maximum is (1 - p) * d_var P(1, ..., 1).
    """
    return (1.0 - p) * partial_derivative(P, [var]).total_weight()


@dataclass(frozen=True)
class VuSchedule:
    F: tuple
    lam: float
    c_k: float = 1.0
    d_k: float = 1.0


def check_schedule(schedule: VuSchedule, e_values, n_log: float):
    """Raise ScheduleInvalid unless F_j >= E_j and F_j / F_{j+1} >= lam + 4 j log n.

    Only indices present in ``schedule.F`` are checked.
    """
    F = [float(f) for f in schedule.F]
    if len(F) < 2:
        raise ScheduleInvalid("a schedule needs at least F_0 and F_1", 0, "length")
    if schedule.lam <= 0:
        raise ScheduleInvalid("lambda must be positive", None, "lambda")
    for j, f in enumerate(F):
        if f <= 0:
            raise ScheduleInvalid(f"F_{j} = {f} is not positive", j, "positive")
        if j < len(e_values) and f < float(e_values[j]):
            raise ScheduleInvalid(f"F_{j} = {f:.6g} < E_{j} = {float(e_values[j]):.6g}", j, "dominates")
    for j in range(len(F) - 1):
        need = schedule.lam + 4 * j * math.log(n_log)
        if not F[j] > F[j + 1] or F[j] / F[j + 1] < need:
            raise ScheduleInvalid(
                f"F_{j} / F_{j + 1} = {F[j] / F[j + 1]:.6g} < {need:.6g}", j, "ratio")


def vu_bound_from_values(schedule: VuSchedule, e_values, n_log: float) -> tuple[float, float]:
    check_schedule(schedule, e_values, n_log)
    F0, F1 = float(schedule.F[0]), float(schedule.F[1])
    return schedule.c_k * math.sqrt(schedule.lam * F0 * F1), schedule.d_k * math.exp(-schedule.lam / 4.0)


def vu_bound(P: ReducedBooleanPolynomial, schedule: VuSchedule, p, n_log: float | None = None):
    """(deviation, probability bound); c_k and d_k are whatever the schedule carries."""
    return vu_bound_from_values(schedule, ej_profile(P, p), n_log or P.nvars)


def triangle_schedule(n: int, C: float, a: float) -> VuSchedule:
    return VuSchedule((C * n, math.sqrt(C * n), 1.0), a * math.sqrt(n))


def base_case_schedule(N: float, p: float, C: float, c: float, k: int = 9) -> VuSchedule:
    F0 = C * N ** 4 * p ** 9
    return VuSchedule(tuple(F0 * N ** (-j / 18) for j in range(k + 1)), c * N ** (1 / 18))


def main_case_schedule(N: float, eps: float, k: int, C_k: float) -> VuSchedule:
    return VuSchedule(tuple(C_k * N ** ((k - j) * eps / k) for j in range(k + 1)), N ** (eps / (2 * k)))


def dist2_shape(N: float, p: float, d: int, C: float) -> list[float]:
    """Upper-bound shape C (N p^2)^(-ceil(j/2)) N^d p^(2d+1) for j <= 2d, then C."""
    head = [C * (N * p * p) ** (-math.ceil(j / 2)) * N ** d * p ** (2 * d + 1) for j in range(2 * d + 1)]
    return head + [C]


# -- simulation --------------------------------------------------------------------

@dataclass(frozen=True)
class ConcentrationSummary:
    trials: int
    mean: float
    variance: float
    min: float
    max: float
    quantiles: dict

    @property
    def std_error(self) -> float:
        return math.sqrt(self.variance / self.trials)


def empirical_concentration(P: ReducedBooleanPolynomial, p: float, trials: int, seed: int,
                            chunk: int = 256) -> ConcentrationSummary:
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(seed)
    vals = []
    for s in range(0, trials, chunk):
        T = rng.random((min(chunk, trials - s), P.nvars)) < p
        vals.append(P.evaluate_many(T))
    x = np.concatenate(vals).astype(np.float64)
    qs = (0.05, 0.25, 0.5, 0.75, 0.95)
    return ConcentrationSummary(
        trials=trials,
        mean=float(x.mean()),
        variance=float(x.var(ddof=1)) if trials > 1 else 0.0,
        min=float(x.min()),
        max=float(x.max()),
        quantiles={q: float(v) for q, v in zip(qs, np.quantile(x, qs))},
    )
