"""Command-line interface: validate, solve, simulate, and run the bundled
experiments; all tabular output is CSV with deterministic bytes per seed."""
from __future__ import annotations

import argparse
import csv
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .experiments import charging_experiment, qsafe_experiment
from .mdp import MdpBuildError, build_mdp, describe_action, describe_state, parse_action, parse_state, reachable_subset
from .model import (
    NetworkFormatError,
    NetworkValidationError,
    Violation,
    load_network,
    network_from_document,
    parse_document,
    regrid_network,
    validate,
)
from .rollout import estimate, simulate_episode
from .safety import find_safe_route, is_safe_route, safety_report
from .solver import (
    Policy,
    PolicyCoverageError,
    SolverConfig,
    extract_policy,
    policy_iteration,
    value_iteration,
)

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_COVERAGE = 3

EXPERIMENT_NAMES = ("route-compare", "q-safe", "charging")


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    qmax_range: tuple[int, ...] = ()
    charge_time_range: tuple[int, ...] = ()
    out: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.name not in EXPERIMENT_NAMES:
            raise ValueError(f"unknown experiment {self.name!r}; pick one of {EXPERIMENT_NAMES}")
        if self.name == "q-safe" and not self.qmax_range:
            raise ValueError("q-safe experiment needs a nonempty queue-length range")
        if self.name == "charging" and not self.charge_time_range:
            raise ValueError("charging experiment needs a nonempty charge-time range")


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _parse_range(text: str) -> tuple[int, ...]:
    """Accept '0..4', '6..36:6', or a comma list '6,12,18'."""
    text = text.strip()
    if ".." in text:
        bounds, _, step_part = text.partition(":")
        lo_part, _, hi_part = bounds.partition("..")
        lo, hi = int(lo_part), int(hi_part)
        step = int(step_part) if step_part else 1
        if step <= 0 or hi < lo:
            raise ValueError(f"bad range {text!r}")
        return tuple(range(lo, hi + 1, step))
    return tuple(int(part) for part in text.split(",") if part.strip())


def _load(path: str, delta_t: int | None = None):
    network = load_network(path)
    if delta_t is not None:
        network = regrid_network(network, delta_t)
    return network


def _require_demand(network):
    if network.demand is None:
        raise NetworkValidationError(
            [Violation("error", "demand", "document carries no demand")]
        )
    return network.demand


def cmd_validate(args) -> int:
    doc = parse_document(Path(args.network).read_text(encoding="utf-8"))
    network = network_from_document(doc, strict=False)
    violations = validate(network)
    for v in violations:
        print(f"{v.severity}: {v.location}: {v.message}")
    errors = [v for v in violations if v.severity == "error"]
    if errors:
        print(f"{len(errors)} error(s), {len(violations) - len(errors)} warning(s)")
        return EXIT_VALIDATION
    print(f"ok ({len(violations)} warning(s))")
    return EXIT_OK


def cmd_solve(args) -> int:
    network = _load(args.network, args.delta_t)
    demand = _require_demand(network)
    config = SolverConfig(gamma=args.gamma, tol=args.tol, max_iter=args.max_iter)
    full = build_mdp(network, demand)
    model = reachable_subset(full)
    print(f"{model.n_states} states ({full.n_states} enumerated)")
    start = time.perf_counter()
    if args.method == "pi":
        policy, result = policy_iteration(model, config)
    else:
        result = value_iteration(model, config)
        policy = extract_policy(model, result.values, config.gamma)
    wall = time.perf_counter() - start
    print(
        f"{'policy' if args.method == 'pi' else 'value'} iteration: "
        f"{result.iterations} iterations, residual {result.residual:.3g}, {wall:.2f} s"
        + ("" if result.converged else " (NOT converged)")
    )
    print(f"V(start) = {result.values[model.initial]:.6f}")
    if args.out:
        rows = []
        for idx, state in enumerate(model.states):
            rows.append(
                [
                    idx,
                    describe_state(state),
                    describe_action(policy.mapping[state]),
                    _fmt(float(result.values[idx])),
                ]
            )
        _write_csv(args.out, ["state_idx", "state", "action", "value"], rows)
        print(f"policy written to {args.out}")
    return EXIT_OK


def _read_policy(path: str) -> Policy:
    mapping = {}
    values = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or "state" not in header or "action" not in header:
            raise NetworkFormatError(f"{path}: not a policy CSV (missing state/action columns)")
        state_col = header.index("state")
        action_col = header.index("action")
        value_col = header.index("value") if "value" in header else None
        for row in reader:
            if not row:
                continue
            state = parse_state(row[state_col])
            mapping[state] = parse_action(row[action_col])
            if value_col is not None and row[value_col]:
                values[state] = float(row[value_col])
    if not mapping:
        raise NetworkFormatError(f"{path}: policy CSV has no rows")
    return Policy(mapping=mapping, values=values)


def cmd_simulate(args) -> int:
    network = _load(args.network)
    demand = _require_demand(network)
    policy = _read_policy(args.policy)
    stats = estimate(
        network,
        demand,
        policy,
        episodes=args.episodes,
        seed=args.seed,
        gamma=args.gamma,
        max_steps=args.max_steps,
    )
    print(
        f"{stats.episodes} episodes: mean return {stats.mean_discounted_return:.4f} "
        f"(se {stats.return_std_error:.4f}), arrived {stats.n_arrived}, "
        f"exhaustion rate {stats.exhaustion_rate:.6f}"
    )
    if args.out:
        _write_csv(
            args.out,
            [
                "episodes",
                "mean_discounted_return",
                "return_std_error",
                "mean_total_time",
                "time_std_error",
                "exhaustion_rate",
                "n_arrived",
                "n_truncated",
            ],
            [
                [
                    stats.episodes,
                    _fmt(stats.mean_discounted_return),
                    _fmt(stats.return_std_error),
                    _fmt(stats.mean_total_time),
                    _fmt(stats.time_std_error),
                    _fmt(stats.exhaustion_rate),
                    stats.n_arrived,
                    stats.n_truncated,
                ]
            ],
        )
        # one fully recorded sample episode, reproducing the first seed
        child = np.random.SeedSequence(args.seed).spawn(1)[0]
        sample = simulate_episode(
            network,
            demand,
            policy,
            np.random.default_rng(child),
            gamma=args.gamma,
            max_steps=args.max_steps,
            record_steps=True,
        )
        trajectory_path = str(Path(args.out).with_suffix("")) + ".trajectory.csv"
        rows = []
        for i, (state, action, reward, elapsed) in enumerate(sample.steps):
            rows.append(
                [
                    i,
                    describe_state(state),
                    describe_action(action) if action is not None else "",
                    _fmt(reward),
                    _fmt(elapsed),
                ]
            )
        _write_csv(
            trajectory_path, ["step", "state", "action", "reward", "elapsed_min"], rows
        )
        print(f"stats written to {args.out}, sample trajectory to {trajectory_path}")
    return EXIT_OK


def cmd_safe_route(args) -> int:
    network = _load(args.network)
    demand = _require_demand(network)
    route = find_safe_route(network, demand)
    if route is None:
        print("none found")
        report = safety_report(network)
    else:
        report = is_safe_route(route, network)
        print(" -> ".join(route.nodes(network)))
        for row in report.links:
            print(
                f"  {row.link_id}: worst travel {row.x_upper} min + worst wait "
                f"{_fmt(row.worst_wait)} min = {_fmt(row.lhs)} <= {report.battery_capacity}"
            )
    if args.out:
        rows = [
            [row.link_id, _fmt(row.lhs), report.battery_capacity, str(row.safe).lower()]
            for row in report.links
        ]
        _write_csv(args.out, ["link_id", "lhs_minutes", "B_minutes", "safe"], rows)
        print(f"report written to {args.out}")
    return EXIT_OK


def cmd_experiment_qsafe(args) -> int:
    network = _load(args.network)
    demand = _require_demand(network)
    config = ExperimentConfig(name="q-safe", qmax_range=_parse_range(args.qmax_range), out=args.out)
    solver = SolverConfig(gamma=args.gamma, tol=args.tol)
    rows = qsafe_experiment(network, demand.destination, list(config.qmax_range), solver)
    for row in rows:
        print(
            f"{row.case} qmax={row.qmax}: {row.n_safe}/{row.n_total} safe "
            f"(r_safe={row.r_safe:.4f})"
        )
    if config.out:
        _write_csv(
            config.out,
            ["case", "qmax", "n_safe", "n_total", "r_safe"],
            [[r.case, r.qmax, r.n_safe, r.n_total, _fmt(r.r_safe)] for r in rows],
        )
        print(f"results written to {config.out}")
    return EXIT_OK


def cmd_experiment_charging(args) -> int:
    network = _load(args.network)
    demand = _require_demand(network)
    if args.tb_range:
        times = _parse_range(args.tb_range)
    else:
        base = network.battery.full_charge_time
        times = tuple(base * k for k in range(1, 7))
    config = ExperimentConfig(name="charging", charge_time_range=times, out=args.out)
    origins = [part.strip() for part in args.origins.split(",") if part.strip()]
    missing = [o for o in origins if not network.has_node(o)]
    if missing:
        raise NetworkFormatError(f"unknown origin node(s): {', '.join(missing)}")
    solver = SolverConfig(gamma=args.gamma, tol=args.tol)
    rows = charging_experiment(
        network, demand.destination, origins, list(config.charge_time_range), solver
    )
    for row in rows:
        print(
            f"{row.origin} full-charge {row.full_charge_time} min: optimal "
            f"{_fmt(row.t_optimal)} / naive {_fmt(row.t_naive)} = {row.r_charging:.4f}"
        )
    if config.out:
        _write_csv(
            config.out,
            ["origin", "full_charge_time", "t_optimal", "t_naive", "r_charging"],
            [
                [r.origin, r.full_charge_time, _fmt(r.t_optimal), _fmt(r.t_naive), _fmt(r.r_charging)]
                for r in rows
            ],
        )
        print(f"results written to {config.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uamr",
        description="Battery-aware routing over stochastic air mobility networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("network", help="network document (JSON)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--gamma", type=float, default=0.99)
        p.add_argument("--tol", type=float, default=1e-8)

    p = sub.add_parser("validate", help="check a network document")
    p.add_argument("network")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="build and solve the routing model")
    add_common(p)
    p.add_argument("--method", choices=["vi", "pi"], default="vi")
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--delta-t", type=int, default=None, help="re-derive link times on this tick length")
    p.add_argument("--out", default=None, help="policy/value CSV path")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", help="Monte Carlo evaluation of a policy CSV")
    add_common(p)
    p.add_argument("policy", help="policy CSV from solve")
    p.add_argument("--episodes", type=int, default=10_000)
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--out", default=None, help="stats CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("safe-route", help="find a worst-case-safe route")
    p.add_argument("network")
    p.add_argument("--out", default=None, help="safety report CSV path")
    p.set_defaults(func=cmd_safe_route)

    p = sub.add_parser("experiment-qsafe", help="safe-scenario ratio sweep")
    add_common(p)
    p.add_argument("--qmax-range", default="0..4")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_experiment_qsafe)

    p = sub.add_parser("experiment-charging", help="optimal vs full-recharge timing sweep")
    add_common(p)
    p.add_argument("--origins", default="dallas,cameron")
    p.add_argument("--tb-range", default=None, help="full-charge times, e.g. 6..36:6")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_experiment_charging)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NetworkFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NetworkValidationError as exc:
        for v in exc.violations:
            print(f"error: {v.location}: {v.message}", file=sys.stderr)
        return EXIT_VALIDATION
    except MdpBuildError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except PolicyCoverageError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_COVERAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
