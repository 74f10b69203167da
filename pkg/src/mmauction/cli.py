"""Command line interface: ``mmauction generate|solve|verify|experiment``.

Exit codes: 0 success, 1 usage or configuration error, 2 failed auction
certificate, 3 infeasible instance (including the brute-force size guard).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from mmauction.auction import PriceState, TraceEvent, as_fraction, check_epsilon_cs
from mmauction.experiments import (
    EXPERIMENTS,
    METHODS,
    default_methods,
    default_points,
    run_experiment,
    write_csv,
)
from mmauction.mmwave import RadioParams, Scenario, build_instance, generate_scenario
from mmauction.problem import (
    Assignment,
    ConfigurationError,
    InfeasibleInstanceError,
    Instance,
    RunRecord,
)

EXIT_OK, EXIT_USAGE, EXIT_CERT, EXIT_INFEASIBLE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_int_list(text: str) -> list[int]:
    """``"10,20,30"`` or inclusive ``"START:STOP[:STEP]"``."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            bits = [int(x) for x in part.split(":")]
            start, stop = bits[0], bits[1]
            step = bits[2] if len(bits) > 2 else 1
            out.extend(range(start, stop + 1, step))
        elif part:
            out.append(int(part))
    return out


def parse_seeds(text: str) -> list[int]:
    """A bare integer N means seeds ``0..N-1``; otherwise as :func:`parse_int_list`."""
    text = text.strip()
    if text.isdigit():
        return list(range(int(text)))
    return parse_int_list(text)


def _radio(args) -> RadioParams:
    params = RadioParams()
    if getattr(args, "radio_config", None):
        params = RadioParams.from_config(json.loads(Path(args.radio_config).read_text(encoding="utf-8")))
    if getattr(args, "eta", None) is not None:
        params = replace(params, eta=args.eta)
    return params


def _load_problem(path: str, scale_k: int | None) -> tuple[Instance, Scenario | None]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if "benefit" in data:
        inst = Instance.from_json_dict(data)
        return inst, None
    scenario = Scenario.from_json_dict(data)
    return build_instance(scenario, scale_k or 1), scenario


def _write(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def cmd_generate(args) -> int:
    scenario = generate_scenario(args.m, args.n, args.seed, _radio(args), layout=args.layout)
    _write(scenario.to_json(), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    from mmauction.experiments import run_method

    instance, scenario = _load_problem(args.scenario, args.scale_k)
    epsilon = None if args.epsilon is None else as_fraction(args.epsilon)
    seed = args.seed if args.seed is not None else (scenario.seed if scenario else None)

    trace_fh = open(args.trace, "w", encoding="utf-8") if args.trace else None
    try:
        if args.method == "auction" and trace_fh is not None:
            from mmauction.auction import AuctionConfig, solve

            def emit(ev: TraceEvent, _a, _p):
                trace_fh.write(ev.line() + "\n")

            assignment, prices, record = solve(
                instance, AuctionConfig(epsilon=epsilon), certify=False, on_step=emit
            )
            record.seed = seed
        else:
            assignment, record, prices = run_method(
                args.method, instance, scenario, seed=seed, epsilon=epsilon, certify=False
            )
    finally:
        if trace_fh is not None:
            trace_fh.close()

    out = record.to_json_dict()
    out["assignment"] = list(assignment.client_of)
    out["prices"] = None if prices is None else prices.to_json_dict()
    _write(json.dumps(out, indent=2) + "\n", args.out)
    if record.method == "auction" and not record.certified:
        print("auction certificate failed", file=sys.stderr)
        return EXIT_CERT
    return EXIT_OK


def cmd_verify(args) -> int:
    run = json.loads(Path(args.run).read_text(encoding="utf-8"))
    record = RunRecord.from_json_dict(run)
    if run.get("prices") is None or record.epsilon is None:
        print("run carries no prices to verify (not an auction run)", file=sys.stderr)
        return EXIT_USAGE
    instance, _ = _load_problem(args.scenario, record.scale_k)
    assignment = Assignment(tuple(run["assignment"]), instance.m)
    prices = PriceState.from_json_dict(run["prices"])
    report = check_epsilon_cs(instance, assignment, prices, record.epsilon)
    ok_eps = record.epsilon < Fraction(1, instance.m)
    summary = {
        "cs_a": report.cs_a,
        "cs_b": report.cs_b,
        "cs_c": report.cs_c,
        "feasible": assignment.is_feasible,
        "epsilon_below_1_over_m": ok_eps,
        "violations_a": report.violations_a,
        "violations_b": report.violations_b,
        "violations_c": report.violations_c,
    }
    print(json.dumps(summary, indent=2))
    if not assignment.is_feasible:
        return EXIT_INFEASIBLE
    return EXIT_OK if report.passed and ok_eps else EXIT_CERT


def cmd_experiment(args) -> int:
    m_values = parse_int_list(args.m) if args.m else None
    n_values = parse_int_list(args.n) if args.n else None
    points = default_points(args.name, m_values, n_values)
    methods = tuple(args.method.split(",")) if args.method else default_methods(args.name)
    rows = run_experiment(
        args.name,
        points,
        methods,
        parse_seeds(args.seeds),
        scale_k=args.scale_k,
        params=_radio(args),
        layout=args.layout,
        epsilon=None if args.epsilon is None else as_fraction(args.epsilon),
        jobs=args.jobs,
    )
    if args.out in (None, "-"):
        write_csv(rows, sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mmauction", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a random scenario file")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--radio-config", help="JSON file of radio parameters")
    g.add_argument("--eta", type=float, help="path-loss exponent")
    g.add_argument("--layout", choices=["line", "grid"], default="line")
    g.add_argument("--out", help="output path (default stdout)")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve a scenario or instance file")
    s.add_argument("scenario")
    s.add_argument("--method", choices=METHODS, default="auction")
    s.add_argument("--epsilon", help="e.g. 1/11 or 0.05 (default 1/(m+1))")
    s.add_argument("--scale-k", type=int, default=1)
    s.add_argument("--seed", type=int, help="seed for the random policy")
    s.add_argument("--trace", help="write one line per auction iteration to this path")
    s.add_argument("--out", help="output path (default stdout)")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="re-check the epsilon-CS certificate of a saved run")
    v.add_argument("scenario")
    v.add_argument("run")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("experiment", help="run a parameter sweep to CSV")
    e.add_argument("name", choices=EXPERIMENTS)
    e.add_argument("--m", help="AP counts, e.g. 2:10 or 2,4,6")
    e.add_argument("--n", help="client counts, e.g. 10:100:10")
    e.add_argument("--seeds", default="20", help="count N (seeds 0..N-1) or a list/range")
    e.add_argument("--epsilon", help="fixed epsilon for every point")
    e.add_argument("--method", help="comma-separated methods")
    e.add_argument("--scale-k", type=int, default=1)
    e.add_argument("--eta", type=float)
    e.add_argument("--radio-config")
    e.add_argument("--layout", choices=["line", "grid"], default="line")
    e.add_argument("--jobs", type=int, default=1)
    e.add_argument("--out", help="CSV path (default stdout)")
    e.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleInstanceError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigurationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
