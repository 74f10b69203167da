"""Method dispatch and the benefit/runtime sweeps, with CSV output."""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from mmauction.auction import AuctionConfig, PriceState, as_fraction, solve
from mmauction.baselines import random_association, rssi_association
from mmauction.mmwave import RadioParams, Scenario, build_instance, generate_scenario
from mmauction.oracle import brute_force_optimum, min_cost_flow_optimum
from mmauction.problem import Assignment, ConfigurationError, Instance, RunRecord, total_benefit

METHODS = ("auction", "bruteforce", "flow", "rssi", "random")
EXPERIMENTS = ("benefit_vs_clients", "benefit_vs_aps", "runtime_vs_size")
CSV_HEADER = [
    "experiment",
    "point_m",
    "point_n",
    "method",
    "seed",
    "epsilon",
    "total_benefit",
    "wall_time_ms",
    "feasible",
    "certified",
]


def run_method(
    method: str,
    instance: Instance,
    scenario: Scenario | None = None,
    *,
    seed: int | None = None,
    epsilon=None,
    certify: bool = True,
) -> tuple[Assignment, RunRecord, PriceState | None]:
    """Run one association method and wrap the outcome in a :class:`RunRecord`."""
    if method == "auction":
        assignment, prices, record = solve(instance, AuctionConfig(epsilon=epsilon), certify=certify)
        record.seed = seed
        return assignment, record, prices

    t0 = time.perf_counter()
    if method == "bruteforce":
        assignment, _ = brute_force_optimum(instance)
    elif method == "flow":
        assignment, _ = min_cost_flow_optimum(instance)
    elif method == "rssi":
        if scenario is None:
            raise ConfigurationError("rssi association needs scenario geometry")
        assignment = rssi_association(scenario, instance)
    elif method == "random":
        assignment = random_association(instance, 0 if seed is None else seed)
    else:
        raise ConfigurationError(f"unknown method {method!r}")
    wall_ms = (time.perf_counter() - t0) * 1e3
    record = RunRecord(
        method=method,
        m=instance.m,
        n=instance.n,
        total_benefit_scaled=total_benefit(instance, assignment),
        scale_k=instance.scale_k,
        seed=seed,
        wall_time_ms=wall_ms,
        feasible=assignment.is_feasible,
    )
    return assignment, record, None


@dataclass(frozen=True)
class Point:
    m: int
    n: int
    epsilon: Fraction | None = None


def default_points(name: str, m_values=None, n_values=None) -> list[Point]:
    if name == "benefit_vs_clients":
        ms = list(m_values or [10])
        ns = list(n_values or range(10, 101, 10))
        return [Point(m, n) for m in ms for n in ns if n >= m]
    if name == "benefit_vs_aps":
        ms = list(m_values or range(2, 11))
        ns = list(n_values or [100])
        return [Point(m, n) for n in ns for m in ms if n >= m]
    if name == "runtime_vs_size":
        ms = list(m_values or [2, 4, 6, 8, 10])
        ns = list(n_values) if n_values else [10 * m for m in ms]
        if len(ns) != len(ms):
            raise ConfigurationError("runtime_vs_size pairs m and n values one to one")
        return [
            Point(m, n, eps)
            for m, n in zip(ms, ns)
            for eps in (Fraction(1, m + 1), Fraction(1, 2 * m), Fraction(1, 4 * m))
        ]
    raise ConfigurationError(f"unknown experiment {name!r}")


def default_methods(name: str) -> tuple[str, ...]:
    return ("auction",) if name == "runtime_vs_size" else ("auction", "rssi", "random")


def _format_float(x: float) -> str:
    return repr(float(x))


def _cell(task) -> list[list]:
    name, point, methods, seed, scale_k, params, layout = task
    scenario = generate_scenario(point.m, point.n, seed, params, layout=layout)
    instance = build_instance(scenario, scale_k)
    rows = []
    for method in methods:
        _, record, _ = run_method(method, instance, scenario, seed=seed, epsilon=point.epsilon)
        eps = "" if record.epsilon is None else _format_float(record.epsilon)
        rows.append(
            [
                name,
                point.m,
                point.n,
                method,
                seed,
                eps,
                _format_float(record.total_benefit),
                _format_float(record.wall_time_ms),
                record.feasible,
                record.certified,
            ]
        )
    return rows


def run_experiment(
    name: str,
    points: Sequence[Point],
    methods: Sequence[str],
    seeds: Iterable[int],
    *,
    scale_k: int = 1,
    params: RadioParams | None = None,
    layout: str = "line",
    epsilon=None,
    jobs: int = 1,
) -> list[list]:
    """Evaluate every (point, seed) cell; rows come back ordered by point, method, seed."""
    seeds = list(seeds)
    for method in methods:
        if method not in METHODS:
            raise ConfigurationError(f"unknown method {method!r}")
    if epsilon is not None:
        points = [Point(p.m, p.n, as_fraction(epsilon)) for p in points]
    if "auction" in methods:
        for p in points:
            eps = p.epsilon if p.epsilon is not None else Fraction(1, p.m + 1)
            if not eps < Fraction(1, p.m):
                raise ConfigurationError(f"epsilon={eps} is not below 1/m at m={p.m}")
    params = params or RadioParams()
    tasks = [(name, p, tuple(methods), s, scale_k, params, layout) for p in points for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_cell, tasks))
    else:
        results = [_cell(t) for t in tasks]

    rows: list[list] = []
    k = 0
    for _ in points:
        block = results[k : k + len(seeds)]
        k += len(seeds)
        for mi in range(len(methods)):
            rows.extend(cell[mi] for cell in block)
    return rows


def write_csv(rows: Sequence[Sequence], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(rows)


def rows_to_csv(rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()
