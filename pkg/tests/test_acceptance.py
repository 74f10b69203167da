"""End-to-end acceptance criteria.

Each test records one PASS/FAIL line, printed in the terminal summary.
Tolerances are fixed here and are not tuned after the fact.
"""

import time
from collections import defaultdict
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, random_instance
from mmauction import (
    AuctionConfig,
    brute_force_optimum,
    build_instance,
    check_epsilon_cs,
    dual_objective,
    generate_scenario,
    min_cost_flow_optimum,
    solve,
)
from mmauction.auction import default_max_iterations
from mmauction.experiments import Point, run_experiment

pytestmark = pytest.mark.acceptance

N_RANDOM = 500
N_STEPPED = 100
SEEDS = list(range(20))


def report(number, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
    return ok


def _random_instances(count, seed):
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        m = int(rng.choice([2, 3, 4]))
        n = int(rng.integers(m, 10))
        # alternate complete and sparse adjacency
        out.append(random_instance(rng, m, n, density=1.0 if k % 2 == 0 else 0.6, high=100))
    return out


@pytest.fixture(scope="module")
def random_runs():
    instances = _random_instances(N_RANDOM, seed=2024)
    t0 = time.perf_counter()
    runs = []
    for inst in instances:
        s, prices, rec = solve(inst, AuctionConfig(epsilon=Fraction(1, inst.m + 1)))
        runs.append((inst, s, prices, rec))
    auction_s = time.perf_counter() - t0
    t0 = time.perf_counter()
    optima = [brute_force_optimum(inst)[1] for inst in instances]
    brute_s = time.perf_counter() - t0
    return runs, optima, auction_s + brute_s


def test_c1_optimality(random_runs):
    runs, optima, elapsed = random_runs
    bad = [k for k, ((_, _, _, rec), opt) in enumerate(zip(runs, optima)) if rec.total_benefit_scaled != opt]
    uncertified = [k for k, (_, _, _, rec) in enumerate(runs) if not rec.certified]
    ok = not bad and not uncertified and elapsed < 30.0
    report(1, ok, f"auction == brute force on {len(runs)} instances, {len(bad)} mismatches, "
                  f"{len(uncertified)} uncertified, {elapsed:.1f}s (< 30s)")
    assert not bad and not uncertified
    assert elapsed < 30.0


def test_c2_oracle_cross_check(random_runs):
    runs, optima, _ = random_runs
    bad = [k for k, ((inst, *_), opt) in enumerate(zip(runs, optima)) if min_cost_flow_optimum(inst)[1] != opt]
    report(2, not bad, f"min-cost flow == brute force on {len(runs)} instances, {len(bad)} mismatches")
    assert not bad


def test_c3_stepwise_epsilon_cs():
    violations = 0
    steps = 0
    final_c = 0
    for inst in _random_instances(N_STEPPED, seed=77):
        eps = Fraction(1, inst.m + 1)

        def observe(ev, s, prices):
            nonlocal violations, steps
            steps += 1
            rep = check_epsilon_cs(inst, s, prices, eps)
            violations += (not rep.cs_a) + (not rep.cs_b)

        s, prices, _ = solve(inst, AuctionConfig(epsilon=eps), on_step=observe)
        final_c += not check_epsilon_cs(inst, s, prices, eps).cs_c
    ok = violations == 0 and final_c == 0
    report(3, ok, f"{steps} iterations checked on {N_STEPPED} instances, "
                  f"{violations} (a)/(b) violations, {final_c} terminal (c) violations")
    assert ok


def test_c4_termination(random_runs):
    runs, _, _ = random_runs
    over_budget = 0
    weak_bids = 0
    count_mismatch = 0
    for inst, _, _, rec in runs:
        eps = rec.epsilon
        budget = default_max_iterations(inst, eps)
        over_budget += rec.iterations_fwd > budget or rec.iterations_rev > budget or rec.bids_total > 2 * budget
        count_mismatch += sum(rec.bids_fwd_per_ap) != rec.iterations_fwd
        count_mismatch += sum(rec.bids_rev_per_ap) != rec.iterations_rev

        def observe(ev, s, prices):
            nonlocal weak_bids
            if ev.phase == "reverse" and not (ev.delta >= eps or prices.pi[ev.target] == prices.lambda_price):
                weak_bids += 1

        solve(inst, AuctionConfig(epsilon=eps), on_step=observe)
    ok = over_budget == 0 and weak_bids == 0 and count_mismatch == 0
    report(4, ok, f"{over_budget} runs over the iteration bound, {weak_bids} reverse bids below epsilon "
                  f"and under the cap, {count_mismatch} per-AP bid count mismatches")
    assert ok


def _means(rows, key_index):
    sums = defaultdict(list)
    for r in rows:
        sums[(r[key_index], r[3])].append(float(r[6]))
    return {k: float(np.mean(v)) for k, v in sums.items()}


def test_c5_benefit_vs_clients_shape():
    t0 = time.perf_counter()
    points = [Point(10, n) for n in range(10, 101, 10)]
    rows = run_experiment("benefit_vs_clients", points, ("auction", "rssi", "random"), SEEDS)
    elapsed = time.perf_counter() - t0
    mean = _means(rows, 2)
    ns = [p.n for p in points]
    order_fail = [n for n in ns if not mean[(n, "auction")] >= mean[(n, "rssi")] >= mean[(n, "random")]]
    ratio = [mean[(n, "auction")] / mean[(n, "rssi")] for n in ns]
    trend_fail = [ns[k + 1] for k in range(len(ns) - 1) if ratio[k + 1] < ratio[k]]
    infeasible_rssi = sum(1 for r in rows if r[3] == "rssi" and r[8] is False)
    ok = not order_fail and not trend_fail and elapsed < 120
    detail = ", ".join(f"n={n}: {mean[(n, 'auction')]:.0f}/{mean[(n, 'rssi')]:.0f}/{mean[(n, 'random')]:.0f}" for n in ns)
    report(5, ok, f"auction/rssi/random means {detail}; ordering fails at n={order_fail}, "
                  f"ratio decreases at n={trend_fail}, {infeasible_rssi} infeasible RSSI runs, {elapsed:.1f}s")
    assert elapsed < 120
    assert not order_fail, f"mean auction >= mean RSSI >= mean random fails at n={order_fail}"
    assert not trend_fail, f"auction/RSSI ratio decreases at n={trend_fail}"


def test_c6_benefit_vs_aps_shape():
    points = [Point(m, 100) for m in range(2, 11)]
    rows = run_experiment("benefit_vs_aps", points, ("auction", "rssi", "random"), SEEDS)
    mean = _means(rows, 1)
    ms = [p.m for p in points]
    order_fail = [m for m in ms if not mean[(m, "auction")] >= mean[(m, "rssi")] >= mean[(m, "random")]]
    detail = ", ".join(f"m={m}: {mean[(m, 'auction')]:.0f}/{mean[(m, 'rssi')]:.0f}/{mean[(m, 'random')]:.0f}" for m in ms)
    report(6, not order_fail, f"auction/rssi/random means {detail}; ordering fails at m={order_fail}")
    assert not order_fail


def test_c7_runtime_linear_in_n():
    rows = run_experiment("runtime_vs_size", [
        Point(m, 10 * m, eps)
        for m in (2, 4, 6, 8, 10)
        for eps in (Fraction(1, m + 1), Fraction(1, 2 * m), Fraction(1, 4 * m))
    ], ("auction",), SEEDS)
    by_n = defaultdict(list)
    for r in rows:
        by_n[r[2]].append(float(r[7]))
    ns = np.array(sorted(by_n), dtype=float)
    t = np.array([np.mean(by_n[int(n)]) for n in ns])
    slope, intercept = np.polyfit(ns, t, 1)
    resid = t - (slope * ns + intercept)
    r2 = 1.0 - float(resid @ resid) / float(((t - t.mean()) ** 2).sum())
    uncertified = sum(1 for r in rows if r[-1] is not True)
    ok = r2 >= 0.8 and uncertified == 0
    report(7, ok, f"mean wall time (ms) {dict(zip(ns.astype(int).tolist(), np.round(t, 3).tolist()))}, "
                  f"linear R^2 = {r2:.3f} (>= 0.8), {uncertified} uncertified rows")
    assert uncertified == 0
    assert r2 >= 0.8


def test_c8_duality_sandwich(random_runs):
    runs, _, _ = random_runs
    extra = []
    for seed in range(20):
        m = 2 + seed % 9
        inst = build_instance(generate_scenario(m, 10 * m, seed))
        extra.append((inst, *solve(inst)))
    bad = 0
    checked = 0
    for inst, _, prices, rec in runs + extra:
        if not rec.certified:
            continue
        checked += 1
        dual = dual_objective(inst, prices)
        primal = rec.total_benefit_scaled
        bad += not (dual - inst.n * rec.epsilon <= primal <= dual)
    report(8, bad == 0 and checked == len(runs) + len(extra),
           f"dual - n*eps <= primal <= dual on {checked} certified runs, {bad} violations")
    assert bad == 0 and checked == len(runs) + len(extra)


def test_c9_rounding_sensitivity():
    gaps = []
    for seed in range(100):
        m = 2 + seed % 9
        sc = generate_scenario(m, 10 * m, seed)
        coarse = solve(build_instance(sc, 1))[2].total_benefit
        fine = solve(build_instance(sc, 1000))[2].total_benefit
        gaps.append(abs(float(coarse - fine)) / float(fine))
    worst = max(gaps)
    report(9, worst < 0.02, f"max relative gap K=1 vs K=1000 over 100 instances = {worst:.2e} (< 2%)")
    assert worst < 0.02
