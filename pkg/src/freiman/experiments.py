"""Seeded Monte Carlo sweeps over random subsets of Z_N, with CSV/JSONL output."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from functools import partial

import numpy as np

from .boolpoly import dist2_shape, ej_profile, from_lambda1, max_mass
from .embedding import degenerate_count, level_positivity
from .errors import InvalidConfig
from .homspace import find_isolated_element, freiman_rank, indicator_hom_from_isolated
from .pairs import additive_pair_matrix, is_linear_via_pairs
from .zn import (CyclicGroup, RandomModel, SubsetOfZn, _quadruple_arrays, has_full_difference_set,
                 is_prime, sample_subset)


@dataclass(frozen=True)
class ExperimentConfig:
    N_list: tuple
    alpha_list: tuple = ()
    p_list: tuple = ()
    trials: int = 100
    master_seed: int = 0
    level: int = 1
    workers: int = 1
    abc: tuple = (0, 1, 3)

    def __post_init__(self):
        for name in ("N_list", "alpha_list", "p_list", "abc"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not self.N_list:
            raise InvalidConfig("N_list is empty")
        for N in self.N_list:
            if not isinstance(N, int) or N < 3 or not is_prime(N):
                raise InvalidConfig(f"N={N!r} is not a prime >= 3")
        if not self.alpha_list and not self.p_list:
            raise InvalidConfig("give alpha_list or p_list")
        for a in self.alpha_list:
            if not 0 < a < 1:
                raise InvalidConfig(f"alpha={a} outside (0, 1)")
        for p in self.p_list:
            if not 0 <= p <= 1:
                raise InvalidConfig(f"p={p} outside [0, 1]")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise InvalidConfig("trials must be a positive integer")
        if not isinstance(self.master_seed, int) or not 0 <= self.master_seed < 1 << 64:
            raise InvalidConfig("master_seed must be a 64-bit unsigned integer")
        # levels above the cap are a budget matter, reported when the sweep runs
        if not isinstance(self.level, int) or self.level < 0:
            raise InvalidConfig("level must be a nonnegative integer")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise InvalidConfig("workers must be >= 1")
        if len(self.abc) != 3:
            raise InvalidConfig("abc needs three entries")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise InvalidConfig(f"unknown config keys: {sorted(extra)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise InvalidConfig(str(exc)) from exc

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"config is not valid JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise InvalidConfig("config must be a JSON object")
        return cls.from_dict(d)

    def cells(self):
        """(N, alpha, p) per cell; alpha is None for explicit densities."""
        for N in self.N_list:
            for a in self.alpha_list:
                yield N, a, float(N) ** (-a)
            for p in self.p_list:
                yield N, None, float(p)


@dataclass
class TrialRecord:
    N: int
    p: float
    trial_index: int
    size: int
    diff_set_full: bool
    rank: int | None = None
    linear: bool | None = None
    pairs_linear: bool | None = None
    isolated_found: bool = False
    isolated_verified: bool = False
    quadruple_count: int | None = None
    lambda_levels: list = field(default_factory=list)
    all_pairs_additive: bool | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def nontrivial_quadruple_count(A: SubsetOfZn) -> int:
    return int(_quadruple_arrays(A, include_trivial=False)[0].size)


def exact_quadruple_expectation(N: int, p: float) -> float:
    """E[X] for X = #nontrivial ordered additive quadruples in a p-random subset of Z_N.

    Translation invariance fixes a = 0, so only (b, c) are summed (d = b + c).
    """
    b, c = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    d = (b + c) % N
    zero = np.zeros_like(b)
    trivial = ((c == 0) & (d == b)) | ((b == 0) & (d == c))
    s = np.sort(np.stack([zero, b, c, d], axis=-1), axis=-1)
    distinct = 1 + (s[..., 1:] != s[..., :-1]).sum(axis=-1)
    pattern = np.bincount(distinct[~trivial], minlength=5)
    return float(N * sum(int(pattern[k]) * p ** k for k in range(1, 5)))


def run_trial(N: int, p: float, master_seed: int, trial_index: int, *, isolated: bool = False,
              quadruples: bool = False, level: int | None = None) -> TrialRecord:
    A = sample_subset(CyclicGroup(N), RandomModel(p, master_seed), trial_index)
    rec = TrialRecord(N, p, trial_index, len(A), has_full_difference_set(A))
    if len(A) >= 3:
        rec.rank = freiman_rank(A)
        rec.linear = rec.rank == 1
        if rec.diff_set_full:
            rec.pairs_linear = is_linear_via_pairs(A)
        if isolated:
            x0 = find_isolated_element(A)
            if x0 is not None:
                rec.isolated_found = True
                indicator_hom_from_isolated(A, x0)  # raises unless it verifies
                rec.isolated_verified = True
    if quadruples:
        rec.quadruple_count = nontrivial_quadruple_count(A)
    if level is not None:
        rec.lambda_levels = level_positivity(A, level)
        M = additive_pair_matrix(A)
        d1, d2 = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
        cell = (d1 != 0) & (d2 != 0) & ((d1 + d2) % N != 0)
        rec.all_pairs_additive = bool(M[cell].all())
    return rec


def run_cell(N: int, p: float, config: ExperimentConfig, **kwargs) -> list[TrialRecord]:
    job = partial(run_trial, N, p, config.master_seed, **kwargs)
    idx = range(config.trials)
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            # map() yields in submission order, so the fold below is order-independent
            return list(pool.map(job, idx, chunksize=max(1, config.trials // (4 * config.workers))))
    return [job(i) for i in idx]


# -- output -------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float) and math.isnan(v):
        return ""
    v = float(v)
    # astronomically large schedule values stay readable in scientific form
    return f"{v:.6e}" if abs(v) >= 1e15 else f"{v:.6f}"


def write_csv(columns, rows, deterministic: bool = True) -> str:
    buf = io.StringIO()
    if not deterministic:
        buf.write(f"# generated {datetime.now(timezone.utc).isoformat()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def _mean(xs):
    return sum(xs) / len(xs) if xs else None


def _frac(flags):
    return sum(bool(f) for f in flags) / len(flags) if flags else None


# -- sweeps ---------------------------------------------------------------------

SWEEP_COLUMNS = ("N", "alpha", "p", "trials", "n_eligible", "n_small", "mean_size", "frac_diff_full",
                 "frac_linear", "mean_rank", "frac_isolated", "pair_disagreements")


def sweep_linearity(config: ExperimentConfig):
    """One summary row per (N, p) cell and the per-trial records."""
    rows, records = [], []
    for N, alpha, p in config.cells():
        recs = run_cell(N, p, config, isolated=True)
        records.extend(recs)
        elig = [r for r in recs if r.rank is not None]
        rows.append({
            "N": N, "alpha": alpha, "p": p, "trials": len(recs),
            "n_eligible": len(elig),
            "n_small": len(recs) - len(elig),
            "mean_size": _mean([r.size for r in recs]),
            "frac_diff_full": _frac([r.diff_set_full for r in recs]),
            "frac_linear": _frac([r.linear for r in elig]),
            "mean_rank": _mean([r.rank for r in elig]),
            "frac_isolated": _frac([r.isolated_found for r in elig]),
            "pair_disagreements": sum(r.pairs_linear is not None and r.pairs_linear != r.linear for r in elig),
        })
    return rows, records


LOWER_COLUMNS = ("N", "alpha", "p", "trials", "n_empty", "n_eligible", "frac_isolated", "n_verified",
                 "mean_size", "mean_X", "se_X", "exact_EX", "bound_N3p4")


def lower_bound_experiment(config: ExperimentConfig):
    rows, records = [], []
    for N, alpha, p in config.cells():
        recs = run_cell(N, p, config, isolated=True, quadruples=True)
        records.extend(recs)
        elig = [r for r in recs if r.rank is not None]
        X = np.array([r.quadruple_count for r in recs], dtype=np.float64)
        rows.append({
            "N": N, "alpha": alpha, "p": p, "trials": len(recs),
            "n_empty": sum(r.size == 0 for r in recs),
            "n_eligible": len(elig),
            "frac_isolated": _frac([r.isolated_found for r in elig]),
            "n_verified": sum(r.isolated_verified for r in recs),
            "mean_size": _mean([r.size for r in recs]),
            "mean_X": float(X.mean()),
            "se_X": float(X.std(ddof=1) / math.sqrt(len(X))) if len(X) > 1 else 0.0,
            "exact_EX": exact_quadruple_expectation(N, p),
            "bound_N3p4": N ** 3 * p ** 4,
        })
    return rows, records


LAMBDA_COLUMNS = ("N", "alpha", "p", "level", "trials", "frac_positive", "frac_linear",
                  "frac_pairs_additive", "positive_not_linear")


def lambda_threshold_experiment(config: ExperimentConfig):
    """Per (N, p, level): share of trials with every Lambda^level_{a,b,c} positive.

    Both fractions use all trials as denominator; sets with |A| < 3 count as not linear.
    """
    rows, records = [], []
    for N, alpha, p in config.cells():
        recs = run_cell(N, p, config, level=config.level)
        records.extend(recs)
        for lv in range(config.level + 1):
            pos = [r.lambda_levels[lv] for r in recs]
            rows.append({
                "N": N, "alpha": alpha, "p": p, "level": lv, "trials": len(recs),
                "frac_positive": _frac(pos),
                "frac_linear": _frac([r.linear for r in recs]),
                "frac_pairs_additive": _frac([r.all_pairs_additive for r in recs]),
                "positive_not_linear": sum(ok and not r.linear for ok, r in zip(pos, recs)),
            })
    return rows, records


DIST_COLUMNS = ("N", "quantity", "j", "value")


def dist_bound_report(N_list, p: float | None = None, abc=(0, 1, 3), budget: int = 60_000_000):
    """Measured constants for the trimmed Lambda^1 polynomial.

    quantity = "C_bucket": max_B m(B)/m(empty) * N^ceil(|B|/2) (N^4 for |B| = 9);
    "ej_ratio": E_j / ((N p^2)^-ceil(j/2) N^4 p^9); "degenerate_fraction": share of
    the N^4 parameter tuples that are degenerate. p defaults to N^(-4/9 + 0.05).
    """
    rows = []
    for N in N_list:
        P = from_lambda1(*abc, N, filtered=True)
        total = P.total_weight()
        for s in (1, 2, 3, 4, 9):
            scale = N ** (4 if s == 9 else math.ceil(s / 2))
            rows.append({"N": N, "quantity": "C_bucket", "j": s,
                         "value": max_mass(P, s, budget) / total * scale})
        q = p if p is not None else N ** (-4 / 9 + 0.05)
        E = ej_profile(P, q, budget)
        shape = dist2_shape(N, q, 4, 1.0)
        for j, (e, sh) in enumerate(zip(E, shape)):
            rows.append({"N": N, "quantity": "ej_ratio", "j": j, "value": e / sh})
        rows.append({"N": N, "quantity": "degenerate_fraction", "j": None,
                     "value": degenerate_count(N, 1, *abc) / N ** 4})
    return rows


def records_to_jsonl(records) -> str:
    return "".join(r.to_json() + "\n" for r in records)
