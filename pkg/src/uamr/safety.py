"""Worst-case battery safety screening and the conservative baseline policy.

A link is safe when its longest possible travel time plus the longest
possible landing-queue wait at its head still fits in a full battery.  A
route of safe links flown with full recharges at every stop can always be
completed, so safe-route existence is the go/no-go check for a demand.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .mdp import CHARGE, DEFAULT, MdpModel, build_mdp, link_action
from .model import BatteryModel, Demand, Link, Network, Node, Route
from .solver import Policy


@dataclass(frozen=True)
class LinkSafety:
    link_id: str
    tail: str
    head: str
    x_upper: int
    worst_wait: float  # minutes, math.inf when the head can never host a landing
    lhs: float  # x_upper + worst_wait, compared against the battery capacity
    safe: bool


@dataclass(frozen=True)
class SafetyReport:
    links: tuple[LinkSafety, ...]
    battery_capacity: int
    route_safe: bool | None = None  # None for a whole-network report

    def by_link(self) -> dict[str, LinkSafety]:
        return {row.link_id: row for row in self.links}


def worst_queue_wait(node: Node, battery: BatteryModel) -> float:
    """Longest wait before a spot frees, in minutes; inf without any spot."""
    if node.capacity == 0:
        return math.inf
    return battery.full_charge_time * (node.queue_max // node.capacity)


def _link_row(link: Link, network: Network) -> LinkSafety:
    worst = worst_queue_wait(network.node(link.head), network.battery)
    lhs = link.x_upper + worst
    return LinkSafety(
        link_id=link.id,
        tail=link.tail,
        head=link.head,
        x_upper=link.x_upper,
        worst_wait=worst,
        lhs=lhs,
        safe=lhs <= network.battery.capacity,
    )


def is_safe_link(link: Link, network: Network) -> bool:
    return _link_row(link, network).safe


def safety_report(network: Network) -> SafetyReport:
    rows = tuple(_link_row(e, network) for e in sorted(network.links, key=lambda e: e.id))
    return SafetyReport(links=rows, battery_capacity=network.battery.capacity)


def is_safe_route(route: Route, network: Network) -> SafetyReport:
    """Per-link verdicts in route order; the route is safe iff all links are."""
    route.nodes(network)  # raises on a disconnected link sequence
    rows = tuple(_link_row(network.link(e), network) for e in route.links)
    return SafetyReport(
        links=rows,
        battery_capacity=network.battery.capacity,
        route_safe=all(row.safe for row in rows),
    )


def find_safe_route(network: Network, demand: Demand) -> Route | None:
    """Shortest worst-case-time route over safe links, or None.

    Among routes minimizing the summed worst-case link cost the returned one
    is lexicographically smallest in link ids, which pins the result down
    when several routes tie.  A returned route certifies that a policy with
    zero exhaustion probability exists; absence proves nothing.
    """
    safe_links = [e for e in network.links if is_safe_link(e, network)]
    weight = {
        e.id: e.x_upper + worst_queue_wait(network.node(e.head), network.battery)
        for e in safe_links
    }
    by_tail: dict[str, list[Link]] = {}
    by_head: dict[str, list[Link]] = {}
    for e in safe_links:
        by_tail.setdefault(e.tail, []).append(e)
        by_head.setdefault(e.head, []).append(e)

    # distance-to-destination by a backward sweep over reversed safe links
    dist: dict[str, float] = {demand.destination: 0.0}
    heap: list[tuple[float, str]] = [(0.0, demand.destination)]
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist.get(v, math.inf):
            continue
        for e in by_head.get(v, []):
            nd = d + weight[e.id]
            if nd < dist.get(e.tail, math.inf):
                dist[e.tail] = nd
                heapq.heappush(heap, (nd, e.tail))

    if demand.origin not in dist:
        return None

    links: list[str] = []
    v = demand.origin
    while v != demand.destination:
        best_id = None
        best_cost = math.inf
        for e in sorted(by_tail.get(v, []), key=lambda e: e.id):
            cost = weight[e.id] + dist.get(e.head, math.inf)
            if cost < best_cost - 1e-12:
                best_cost = cost
                best_id = e.id
        if best_id is None or len(links) > len(network.links):
            raise RuntimeError(f"route reconstruction stalled at {v}")
        links.append(best_id)
        v = network.link(best_id).head
    return Route(links=tuple(links))


def conservative_policy(
    route: Route, network: Network, model: MdpModel | None = None
) -> Policy:
    """Follow the route, landing and charging to full at every stop.

    States off the route get their first available action so the policy
    covers the whole model; those states are never visited when the aircraft
    starts at the route's first node with a full battery.  The route must be
    safe, and must end at the model's demand destination.
    """
    report = is_safe_route(route, network)
    if not report.route_safe:
        bad = [row.link_id for row in report.links if not row.safe]
        raise ValueError(f"route is not safe; failing links: {', '.join(bad)}")
    nodes = route.nodes(network)
    if model is None:
        if network.demand is None:
            raise ValueError("network document carries no demand; pass a model")
        model = build_mdp(network, network.demand)
    if nodes[-1] != model.demand.destination:
        raise ValueError(
            f"route ends at {nodes[-1]}, not the demand destination "
            f"{model.demand.destination}"
        )

    next_link = {tail: e for tail, e in zip(nodes[:-1], route.links)}
    k_b_max = network.k_b_max

    mapping = {}
    for s_idx, state in enumerate(model.states):
        acts = model.actions[s_idx]
        choice = acts[0]
        if state[0] == "b" and state[1] in next_link and state[2] == k_b_max:
            choice = link_action(next_link[state[1]])
        elif state[0] == "b" and state[1] == model.demand.destination:
            choice = DEFAULT
        elif state[0] == "d":
            choice = CHARGE  # always land at the head and join the queue
        if choice not in acts:
            raise ValueError(f"route action unavailable: {choice} in state {state}")
        mapping[state] = choice
    return Policy(mapping=mapping)
