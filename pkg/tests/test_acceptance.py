"""The ten acceptance criteria, each at its stated tolerance.

Every test prints one pass/fail line; the terminal summary repeats them.
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

import oracles
from acceptance_log import record
from freiman.boolpoly import ej, from_lambda1, from_triangle_count, max_mass
from freiman.embedding import lambda_table, psi_forms
from freiman.experiments import (ExperimentConfig, exact_quadruple_expectation, lower_bound_experiment,
                                 sweep_linearity)
from freiman.homspace import brute_force_hom_count, freiman_rank, is_linear, solve_hom_space
from freiman.pairs import induced_space_dimension, triangle_generator_rank
from freiman.zn import CyclicGroup, SubsetOfZn, has_full_difference_set, is_sidon, trial_rng


def test_criterion_1_oracle_equivalence():
    t0 = time.perf_counter()
    N = 7
    bad = []
    n_sets = 0
    for k in range(2, 6):
        for members in itertools.combinations(range(N), k):
            A = SubsetOfZn.from_members(N, members)
            n_sets += 1
            if N ** solve_hom_space(A).dimension != brute_force_hom_count(A):
                bad.append(members)
    dt = time.perf_counter() - t0
    ok = n_sets == 112 and not bad and dt < 10
    record(1, ok, f"{n_sets} sets, {len(bad)} mismatches, {dt:.1f}s")
    assert ok


def test_criterion_2_ap_and_sidon():
    t0 = time.perf_counter()
    N = 101
    ap_bad = []
    for length in range(3, 11):
        for start, step in [(0, 1), (5, 3), (17, 50), (90, 100)]:
            A = SubsetOfZn.from_members(N, [(start + j * step) % N for j in range(length)])
            if freiman_rank(A) != 1:
                ap_bad.append((length, start, step))
    S = SubsetOfZn.from_members(N, [1, 2, 4, 8, 16, 32])
    sidon_ok = is_sidon(S) and freiman_rank(S) == 5
    dt = time.perf_counter() - t0
    ok = not ap_bad and sidon_ok and dt < 5
    record(2, ok, f"AP failures {len(ap_bad)}, Sidon rank {freiman_rank(S)}, {dt:.1f}s")
    assert ok


def _full_difference_sets(N, count, seed):
    rng = trial_rng(seed, 0)
    out = []
    while len(out) < count:
        k = int(rng.integers(3, N + 1))
        members = rng.choice(N, size=k, replace=False)
        A = SubsetOfZn.from_members(N, members)
        if has_full_difference_set(A):
            out.append(A)
    return out


def test_criterion_3_three_way_linearity():
    t0 = time.perf_counter()
    N = 13
    sets = _full_difference_sets(N, 1000, seed=3)
    disagreements = 0
    n_linear = 0
    for A in sets:
        a = is_linear(A)
        b = induced_space_dimension(A) == 1
        c = triangle_generator_rank(A) == N - 2
        disagreements += not (a == b == c)
        n_linear += a
    dt = time.perf_counter() - t0
    ok = disagreements == 0 and dt < 60
    record(3, ok, f"{len(sets)} sets ({n_linear} linear), {disagreements} disagreements, {dt:.1f}s")
    assert ok


def _lambda1_all_triples(mask, N):
    """Nine-form product for every (a, b, c) at once, independent of the library's forms."""
    V = np.array(list(itertools.product(range(N), repeat=4)))
    x1, x2, x3, z = V.T
    out = {}
    for a, b, c in itertools.permutations(range(N), 3):
        tup = np.stack([x1 + a, x1 + b, x1 + z, x2 + a, x2 + z, x2 + c, x3 + z, x3 + b, x3 + c], axis=1) % N
        out[(a, b, c)] = int(mask[tup].all(axis=1).sum())
    return out


def test_criterion_4_lambda_recursion():
    t0 = time.perf_counter()
    N = 11
    exact_bad = pos_bad = 0
    for trial in range(20):
        rng = trial_rng(4, trial)
        A = SubsetOfZn(CyclicGroup(N), rng.random(N) < rng.uniform(0.3, 0.9))
        exact = lambda_table(A, 1, "exact")
        pos = lambda_table(A, 1, "positivity")
        for (a, b, c), want in _lambda1_all_triples(A.mask, N).items():
            exact_bad += int(exact.value(a, b, c)) != want
            pos_bad += bool(pos.value(a, b, c)) != (want > 0)
    dt = time.perf_counter() - t0
    ok = exact_bad == 0 and pos_bad == 0 and dt < 120
    record(4, ok, f"exact mismatches {exact_bad}, positivity mismatches {pos_bad}, {dt:.1f}s")
    assert ok


def test_criterion_5_triangle_ej():
    t0 = time.perf_counter()
    Y = from_triangle_count(10)
    p = Fraction(1, 2)
    got = [ej(Y, j, p) for j in range(3)]
    dt = time.perf_counter() - t0
    ok = got == [15, 2, 1] and dt < 5
    record(5, ok, f"E_0..E_2 = {[str(g) for g in got]}, {dt:.2f}s")
    assert ok


def test_criterion_6_psi_structure():
    t0 = time.perf_counter()
    sizes_ok = True
    for i, n in [(0, 3), (1, 9), (2, 27)]:
        F = psi_forms(i)
        M = F.matrix()
        shape_ok = all(x != y and y >= 3 for x, y in F.forms) and (M.sum(axis=1) == 2).all()
        distinct = len({tuple(r) for r in M}) == n
        sizes_ok &= len(F) == n and shape_ok and distinct
    tuple_ok = psi_forms(1).describe() == [
        "v1+a", "v1+b", "v1+v4", "v2+a", "v2+v4", "v2+c", "v3+v4", "v3+b", "v3+c"]
    dt = time.perf_counter() - t0
    ok = sizes_ok and tuple_ok and dt < 1
    record(6, ok, f"sizes/distinctness {sizes_ok}, level-1 order {tuple_ok}, {dt:.2f}s")
    assert ok


@pytest.mark.slow
def test_criterion_7_threshold_trend():
    t0 = time.perf_counter()
    cfg = ExperimentConfig(N_list=(101, 199), alpha_list=(0.4, 0.8), trials=200, master_seed=1)
    rows, records = sweep_linearity(cfg)
    by = {(r["N"], r["alpha"]): r for r in rows}
    gaps = {N: by[(N, 0.4)]["frac_linear"] - by[(N, 0.8)]["frac_linear"] for N in (101, 199)}
    iso = {N: by[(N, 0.8)]["frac_isolated"] for N in (101, 199)}
    all_verified = all(r.isolated_verified for r in records if r.isolated_found)
    dt = time.perf_counter() - t0
    ok = all(g >= 0.5 for g in gaps.values()) and all(f >= 0.9 for f in iso.values()) and all_verified and dt < 600
    detail = ", ".join(f"N={N}: gap {gaps[N]:.3f}, isolated {iso[N]:.3f} of {by[(N, 0.8)]['n_eligible']} eligible"
                       for N in (101, 199))
    record(7, ok, f"{detail}, all homs verified {all_verified}, {dt:.1f}s")
    assert ok


def test_criterion_8_quadruple_expectation():
    t0 = time.perf_counter()
    N, p = 31, 0.1
    cfg = ExperimentConfig(N_list=(N,), p_list=(p,), trials=2000, master_seed=8)
    (row,), _ = lower_bound_experiment(cfg)
    exact = exact_quadruple_expectation(N, p)
    oracle = float(oracles.expected_nontrivial_quadruples(N, Fraction(1, 10)))
    z = abs(row["mean_X"] - exact) / row["se_X"]
    stat_ok = math.isclose(exact, oracle, rel_tol=1e-12) and z <= 3
    bound = N ** 3 * p ** 4 * (1 + 10 / N)
    bound_ok = exact <= bound
    dt = time.perf_counter() - t0
    record(8, stat_ok and dt < 60, f"mean X {row['mean_X']:.3f} vs exact {exact:.3f}, {z:.2f} standard errors")
    record(8, bound_ok, f"exact E[X] {exact:.3f} vs N^3 p^4 (1 + 10/N) = {bound:.3f}, {dt:.1f}s")
    assert stat_ok
    assert bound_ok, "the nontrivial quadruple expectation exceeds the stated bound at N=31, p=0.1"


@pytest.mark.slow
def test_criterion_9_dist4_stability():
    t0 = time.perf_counter()
    abc = (0, 1, 3)
    C = {}
    for N in (13, 17):
        P = from_lambda1(*abc, N, filtered=True)
        total = P.total_weight()
        C[N] = {s: max_mass(P, s) / total * N ** (4 if s == 9 else math.ceil(s / 2)) for s in (1, 2, 3, 4, 9)}
    ok_buckets = {s: C[17][s] <= 2 * C[13][s] for s in C[13]}
    dt = time.perf_counter() - t0
    ok = all(ok_buckets.values()) and dt < 600
    detail = ", ".join(f"|B|={s}: {C[13][s]:.2f} -> {C[17][s]:.2f}" for s in C[13])
    record(9, ok, f"{detail}, {dt:.1f}s")
    assert ok


def test_criterion_10_reproducibility(tmp_path):
    from freiman.cli import main

    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"N_list": [31, 53], "alpha_list": [0.4, 0.8], "trials": 40, "master_seed": 10}')
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}.csv"
        assert main(["lowerbound", "--config", str(cfg), "--deterministic", "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    ok = outs[0] == outs[1] and not outs[0].startswith(b"#")
    record(10, ok, f"two deterministic runs byte-identical: {outs[0] == outs[1]} ({len(outs[0])} bytes)")
    assert ok
