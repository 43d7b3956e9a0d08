"""Case-study experiment procedures: safe-combination ratios and the
optimal-versus-naive charging comparison.

Both experiments hinge on the worst-case committed route of the optimal
zero-queue policy: the state space and transitions do not depend on the
origin, so one solve of the zero-queue network yields the optimal policy for
every origin at once, and a deterministic worst-realization episode per
origin extracts its route.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .mdp import MdpModel, build_mdp
from .model import (
    BatteryModel,
    Demand,
    Network,
    NetworkValidationError,
    Node,
    Route,
    validate,
)
from .rollout import worst_case_trajectory
from .safety import conservative_policy, worst_queue_wait
from .solver import Policy, SolverConfig, extract_policy, value_iteration


@dataclass(frozen=True)
class QsafeRow:
    case: str  # "route" or "link"
    qmax: int
    n_safe: int
    n_total: int
    r_safe: float


@dataclass(frozen=True)
class ChargingRow:
    origin: str
    full_charge_time: int
    t_optimal: float
    t_naive: float
    r_charging: float


def zero_queue_variant(network: Network) -> Network:
    """Same network with every landing queue pinned to length zero."""
    nodes = tuple(
        dataclasses.replace(n, queue_min=0, queue_max=0, queue_pmf={0: 1.0})
        for n in network.nodes
    )
    return dataclasses.replace(network, nodes=nodes)


def optimal_zero_queue_policy(
    network: Network,
    destination: str,
    config: SolverConfig = SolverConfig(),
) -> tuple[Network, MdpModel, Policy]:
    """Solve the zero-queue network once; the policy covers every origin."""
    zq = zero_queue_variant(network)
    candidates = sorted(n.id for n in zq.nodes if n.id != destination)
    if not candidates:
        raise ValueError("network has no possible origin")
    model = build_mdp(zq, Demand(origin=candidates[0], destination=destination))
    result = value_iteration(model, config)
    policy = extract_policy(model, result.values, config.gamma)
    return zq, model, policy


def worst_case_routes(
    network: Network,
    destination: str,
    config: SolverConfig = SolverConfig(),
    origins: list[str] | None = None,
) -> dict[str, Route]:
    """Route each origin commits to under the zero-queue optimal policy when
    every draw comes out worst."""
    zq, _, policy = optimal_zero_queue_policy(network, destination, config)
    if origins is None:
        origins = sorted(n.id for n in network.nodes if n.id != destination)
    routes: dict[str, Route] = {}
    for origin in origins:
        trajectory = worst_case_trajectory(
            zq, Demand(origin=origin, destination=destination), policy, gamma=config.gamma
        )
        if not trajectory.arrived:
            raise RuntimeError(
                f"zero-queue optimal policy fails from {origin} under worst-case "
                f"realizations (outcome: {trajectory.outcome})"
            )
        routes[origin] = trajectory.route()
    return routes


def _node_queue_threshold(node: Node, x_upper: int, battery: BatteryModel) -> int:
    """Largest queue bound at this head that keeps its inbound link safe.

    -1 when no queue bound works (zero capacity or the link alone is too
    long).
    """
    if node.capacity == 0:
        return -1
    slack = battery.capacity - x_upper
    if slack < 0:
        return -1
    floor_bound = slack // battery.full_charge_time
    return node.capacity * (floor_bound + 1) - 1


def _safe_combinations_up_to(thresholds: list[int], m: int) -> int:
    """Number of queue-bound assignments with every entry <= m keeping all
    route links safe: independent per-node counts multiply."""
    if m < 0:
        return 0
    count = 1
    for theta in thresholds:
        count *= min(m, theta) + 1
    return count


def qsafe_route_counts(
    network: Network, route: Route, qmax: int
) -> tuple[int, int]:
    """(safe, total) assignments of per-node queue bounds whose maximum is
    exactly qmax, over the route's non-origin nodes.

    Closed form: safety decomposes per node because each link's condition
    involves only its own head's queue bound.
    """
    battery = network.battery
    thresholds = []
    for link_id in route.links:
        link = network.link(link_id)
        thresholds.append(_node_queue_threshold(network.node(link.head), link.x_upper, battery))
    n = len(thresholds)
    total = (qmax + 1) ** n - qmax**n
    safe = _safe_combinations_up_to(thresholds, qmax) - _safe_combinations_up_to(
        thresholds, qmax - 1
    )
    return safe, total


def qsafe_experiment(
    network: Network,
    destination: str,
    qmax_range: list[int],
    config: SolverConfig = SolverConfig(),
) -> list[QsafeRow]:
    """Fraction of queue-bound scenarios that keep routes (resp. links) safe.

    Route case: per origin, the worst-case optimal route is fixed under zero
    queues; scenarios assign each of its non-origin nodes a queue bound, and
    a scenario counts toward bucket qmax when its largest bound is qmax.
    Link case: all heads share one bound; count links still safe.
    """
    routes = worst_case_routes(network, destination, config)
    rows: list[QsafeRow] = []
    for qmax in qmax_range:
        n_safe = 0
        n_total = 0
        for origin in sorted(routes):
            safe, total = qsafe_route_counts(network, routes[origin], qmax)
            n_safe += safe
            n_total += total
        rows.append(
            QsafeRow(
                case="route",
                qmax=qmax,
                n_safe=n_safe,
                n_total=n_total,
                r_safe=n_safe / n_total if n_total else 1.0,
            )
        )
    battery = network.battery
    for qmax in qmax_range:
        n_total = len(network.links)
        n_safe = 0
        for link in network.links:
            head = network.node(link.head)
            bounded = dataclasses.replace(head, queue_min=qmax, queue_max=qmax, queue_pmf={qmax: 1.0})
            if link.x_upper + worst_queue_wait(bounded, battery) <= battery.capacity:
                n_safe += 1
        rows.append(
            QsafeRow(
                case="link",
                qmax=qmax,
                n_safe=n_safe,
                n_total=n_total,
                r_safe=n_safe / n_total if n_total else 1.0,
            )
        )
    return rows


def scaled_battery(battery: BatteryModel, full_charge_time: int) -> BatteryModel:
    """Battery whose full charge takes the given time, same capacity layout."""
    k_c = battery.k_c_max
    if full_charge_time <= 0 or full_charge_time % k_c != 0:
        raise ValueError(
            f"full charge time {full_charge_time} is not a positive multiple of "
            f"the {k_c} charge stage(s)"
        )
    return dataclasses.replace(battery, charge_step_time=full_charge_time // k_c)


def worst_case_route_network(
    network: Network, route: Route, battery: BatteryModel | None = None
) -> Network:
    """Deterministic restriction to the route: only its nodes and links,
    point-mass travel at each link's worst time, zero queues."""
    node_ids = route.nodes(network)
    if len(set(node_ids)) != len(node_ids):
        raise ValueError("route revisits a node; cannot restrict the network to it")
    nodes = tuple(
        dataclasses.replace(
            network.node(v), queue_min=0, queue_max=0, queue_pmf={0: 1.0}
        )
        for v in node_ids
    )
    links = []
    for link_id in route.links:
        e = network.link(link_id)
        links.append(
            dataclasses.replace(
                e,
                x_lower=e.x_upper,
                x_upper=e.x_upper,
                travel_pmf={e.x_upper: 1.0},
            )
        )
    return dataclasses.replace(
        network,
        nodes=nodes,
        links=tuple(links),
        battery=battery if battery is not None else network.battery,
        demand=Demand(origin=node_ids[0], destination=node_ids[-1]),
    )


def charging_comparison(
    network: Network,
    route: Route,
    full_charge_time: int,
    config: SolverConfig = SolverConfig(),
) -> tuple[float, float]:
    """(t_optimal, t_naive) minutes through the fixed route, worst case.

    t_naive fully recharges at every stop; t_optimal re-solves the decision
    process restricted to the route so only the charging levels are free.
    """
    battery = scaled_battery(network.battery, full_charge_time)
    restricted = worst_case_route_network(network, route, battery)
    errors = [v for v in validate(restricted) if v.severity == "error"]
    if errors:
        raise NetworkValidationError(errors)
    demand = restricted.demand
    model = build_mdp(restricted, demand)
    result = value_iteration(model, config)
    policy = extract_policy(model, result.values, config.gamma)
    optimal = worst_case_trajectory(restricted, demand, policy, gamma=config.gamma)
    if not optimal.arrived:
        raise RuntimeError(
            f"optimal charging policy fails on the fixed route (outcome: {optimal.outcome})"
        )
    naive_policy = conservative_policy(route, restricted, model)
    naive = worst_case_trajectory(restricted, demand, naive_policy, gamma=config.gamma)
    if not naive.arrived:
        raise RuntimeError(
            f"full-recharge policy fails on the fixed route (outcome: {naive.outcome})"
        )
    return optimal.total_time, naive.total_time


def charging_experiment(
    network: Network,
    destination: str,
    origins: list[str],
    full_charge_times: list[int],
    config: SolverConfig = SolverConfig(),
) -> list[ChargingRow]:
    """Optimal-to-naive travel-time ratio along each origin's committed
    route, as recharging gets slower."""
    routes = worst_case_routes(network, destination, config, origins=origins)
    rows: list[ChargingRow] = []
    for origin in origins:
        for t_full in full_charge_times:
            t_optimal, t_naive = charging_comparison(network, routes[origin], t_full, config)
            rows.append(
                ChargingRow(
                    origin=origin,
                    full_charge_time=t_full,
                    t_optimal=t_optimal,
                    t_naive=t_naive,
                    r_charging=t_optimal / t_naive,
                )
            )
    return rows
