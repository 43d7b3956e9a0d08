"""Domain model for stochastic urban-air-mobility routing networks.

A network is a directed graph of vertistop nodes and flight corridors with
discretized stochastic travel times, bounded stochastic landing queues, and a
shared battery/charging discretization.  All durations are integer minutes on
the ``delta_t`` grid.  Types are immutable; :func:`validate` reports every
violation instead of stopping at the first so callers get a full report.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

PROB_TOL = 1e-9

DEFAULT_R_D = -1000.0
DEFAULT_R_A = 1000.0


class NetworkFormatError(ValueError):
    """Document cannot be parsed into the network schema."""


class NetworkValidationError(ValueError):
    """Parsed network violates model invariants."""

    def __init__(self, violations: list["Violation"]):
        self.violations = list(violations)
        detail = "; ".join(f"{v.location}: {v.message}" for v in self.violations)
        super().__init__(f"invalid network: {detail}")


class DegenerateLinkError(ValueError):
    """Distance rounds to a zero minimum travel time on this grid."""


@dataclass(frozen=True)
class Violation:
    """One validation finding with a dotted document location."""

    severity: str  # "error" or "warning"
    location: str
    message: str


@dataclass(frozen=True)
class Node:
    """Vertistop with landing-spot capacity and a bounded queue distribution.

    queue_pmf maps queue length q in [queue_min, queue_max] to probability.
    """

    id: str
    capacity: int
    queue_min: int
    queue_max: int
    queue_pmf: dict[int, float]


@dataclass(frozen=True)
class Link:
    """Directed corridor with travel-time pmf on {x_lower, .., x_upper} step delta_t."""

    id: str
    tail: str
    head: str
    x_lower: int  # minutes
    x_upper: int  # minutes
    travel_pmf: dict[int, float]
    distance_miles: float | None = None

    def k_hat(self, delta_t: int) -> int:
        return (self.x_upper - self.x_lower) // delta_t

    def grid(self, delta_t: int) -> list[int]:
        return list(range(self.x_lower, self.x_upper + 1, delta_t))


@dataclass(frozen=True)
class BatteryModel:
    """Battery capacity and charge-stop discretization, in minutes.

    capacity is the full battery B (minutes of flight), charge_step is the
    designated stop increment Delta_B, charge_step_time is the wall-clock
    minutes Delta_T_c one Delta_B step takes.
    """

    capacity: int
    charge_step: int
    charge_step_time: int

    @property
    def k_c_max(self) -> int:
        return self.capacity // self.charge_step

    @property
    def full_charge_time(self) -> int:
        # T_B_hat: wall-clock minutes for an empty-to-full charge
        return self.k_c_max * self.charge_step_time

    def k_b_max(self, delta_t: int) -> int:
        return self.capacity // delta_t

    def k_delta_b(self, delta_t: int) -> int:
        return self.charge_step // delta_t


@dataclass(frozen=True)
class ChargeDurationDist:
    """Distribution of other aircraft's charge durations in charge-step units.

    pmf maps k in {1..k_c_max} to the probability that an aircraft ahead in
    the queue occupies its spot for k*charge_step_time minutes.
    """

    pmf: dict[int, float]


@dataclass(frozen=True)
class RewardParams:
    r_t: float  # per-travel-tick reward, negative
    r_d: float  # battery exhaustion reward, negative
    r_a: float  # arrival reward, positive


@dataclass(frozen=True)
class Demand:
    origin: str
    destination: str


@dataclass(frozen=True)
class Route:
    """Ordered link ids forming a directed path."""

    links: tuple[str, ...]

    def nodes(self, network: "Network") -> list[str]:
        if not self.links:
            return []
        seq = [network.link(self.links[0]).tail]
        for link_id in self.links:
            seq.append(network.link(link_id).head)
        return seq


@dataclass(frozen=True)
class Network:
    """Immutable network with cached id lookups and derived index bounds."""

    delta_t: int
    v_max: float | None
    battery: BatteryModel
    charge_dist: ChargeDurationDist
    rewards: RewardParams
    nodes: tuple[Node, ...]
    links: tuple[Link, ...]
    demand: Demand | None = None
    _node_by_id: dict = field(init=False, repr=False, compare=False)
    _link_by_id: dict = field(init=False, repr=False, compare=False)
    _out: dict = field(init=False, repr=False, compare=False)
    _in: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_node_by_id", {n.id: n for n in self.nodes})
        object.__setattr__(self, "_link_by_id", {e.id: e for e in self.links})
        out: dict[str, list[Link]] = {n.id: [] for n in self.nodes}
        inc: dict[str, list[Link]] = {n.id: [] for n in self.nodes}
        for e in self.links:
            if e.tail in out:
                out[e.tail].append(e)
            if e.head in inc:
                inc[e.head].append(e)
        object.__setattr__(
            self, "_out", {v: tuple(sorted(es, key=lambda e: e.id)) for v, es in out.items()}
        )
        object.__setattr__(
            self, "_in", {v: tuple(sorted(es, key=lambda e: e.id)) for v, es in inc.items()}
        )

    def node(self, node_id: str) -> Node:
        return self._node_by_id[node_id]

    def link(self, link_id: str) -> Link:
        return self._link_by_id[link_id]

    def has_node(self, node_id: str) -> bool:
        return node_id in self._node_by_id

    def out_links(self, node_id: str) -> tuple[Link, ...]:
        return self._out.get(node_id, ())

    def in_links(self, node_id: str) -> tuple[Link, ...]:
        return self._in.get(node_id, ())

    @property
    def sources(self) -> frozenset[str]:
        """Nodes heading no link (pure departure nodes)."""
        return frozenset(n.id for n in self.nodes if not self._in.get(n.id, ()))

    @property
    def sinks(self) -> frozenset[str]:
        """Nodes tailing no link (pure arrival nodes)."""
        return frozenset(n.id for n in self.nodes if not self._out.get(n.id, ()))

    @property
    def k_b_max(self) -> int:
        return self.battery.k_b_max(self.delta_t)

    @property
    def k_delta_b(self) -> int:
        return self.battery.k_delta_b(self.delta_t)

    @property
    def charge_stop_ticks(self) -> frozenset[int]:
        """Battery indices k_b whose level k_b*delta_t is a designated stop level."""
        step = self.battery.k_delta_b(self.delta_t)
        if step <= 0:
            return frozenset()
        return frozenset(range(0, self.k_b_max + 1, step))

    @property
    def r_b(self) -> float:
        # per-battery-index charging reward, derived, never stored
        return self.rewards.r_t * self.battery.full_charge_time / self.battery.capacity


def round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def case_study_link_times(distance_miles: float, v_max_mph: float, delta_t: int) -> tuple[int, int]:
    """Derive (x_lower, x_upper) minutes from a corridor distance.

    x_lower is the cruise time rounded to the delta_t grid; x_upper extends it
    by 20 percent, floored to the grid, plus one tick.  Exact integer
    arithmetic for the 20 percent step avoids float boundary drift.
    """
    if distance_miles <= 0 or v_max_mph <= 0 or delta_t <= 0:
        raise ValueError("distance, speed and delta_t must be positive")
    minutes = 60.0 * distance_miles / v_max_mph
    x_lower = round_half_away(minutes / delta_t) * delta_t
    if x_lower == 0:
        raise DegenerateLinkError(
            f"distance {distance_miles} mi rounds to zero travel time on a {delta_t}-minute grid"
        )
    x_upper = (6 * x_lower) // (5 * delta_t) * delta_t + delta_t
    return x_lower, x_upper


def uniform_travel_pmf(x_lower: int, x_upper: int, delta_t: int) -> dict[int, float]:
    grid = list(range(x_lower, x_upper + 1, delta_t))
    p = 1.0 / len(grid)
    return {x: p for x in grid}


def _parse_pmf(raw, location: str) -> dict[int, float]:
    if not isinstance(raw, dict):
        raise NetworkFormatError(f"{location}: pmf must be an object")
    out: dict[int, float] = {}
    for key, value in raw.items():
        try:
            k = int(key)
        except (TypeError, ValueError):
            raise NetworkFormatError(f"{location}: pmf key {key!r} is not an integer")
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise NetworkFormatError(f"{location}: pmf value for {key!r} is not a number")
        out[k] = float(value)
    return out


def _require_int(raw, location: str) -> int:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise NetworkFormatError(f"{location}: expected an integer, got {raw!r}")
    if isinstance(raw, float) and not raw.is_integer():
        raise NetworkFormatError(f"{location}: expected an integer, got {raw!r}")
    return int(raw)


def _require_number(raw, location: str) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise NetworkFormatError(f"{location}: expected a number, got {raw!r}")
    return float(raw)


def _require_str(raw, location: str) -> str:
    if not isinstance(raw, str) or not raw:
        raise NetworkFormatError(f"{location}: expected a non-empty string")
    return raw


def network_from_document(doc: dict, *, strict: bool = True) -> Network:
    """Build a Network from a parsed document.

    With strict=True (the default) validation errors raise
    NetworkValidationError; with strict=False the possibly-invalid network is
    returned so :func:`validate` can report on it.
    """
    if not isinstance(doc, dict):
        raise NetworkFormatError("document root must be an object")
    for key in ("delta_t", "battery", "nodes", "links"):
        if key not in doc:
            raise NetworkFormatError(f"missing required key {key!r}")

    delta_t = _require_int(doc["delta_t"], "delta_t")
    v_max = None
    if doc.get("v_max") is not None:
        v_max = _require_number(doc["v_max"], "v_max")

    braw = doc["battery"]
    if not isinstance(braw, dict):
        raise NetworkFormatError("battery: expected an object")
    battery = BatteryModel(
        capacity=_require_int(braw.get("capacity"), "battery.capacity"),
        charge_step=_require_int(braw.get("charge_step"), "battery.charge_step"),
        charge_step_time=_require_int(braw.get("charge_step_time"), "battery.charge_step_time"),
    )

    if doc.get("charge_dist") is not None:
        craw = doc["charge_dist"]
        if not isinstance(craw, dict) or "pmf" not in craw:
            raise NetworkFormatError("charge_dist: expected an object with a pmf")
        charge_dist = ChargeDurationDist(pmf=_parse_pmf(craw["pmf"], "charge_dist.pmf"))
    else:
        # default: uniform over {1..k_c_max}
        k_c = battery.k_c_max if battery.charge_step > 0 else 0
        if k_c <= 0:
            charge_dist = ChargeDurationDist(pmf={})
        else:
            charge_dist = ChargeDurationDist(pmf={k: 1.0 / k_c for k in range(1, k_c + 1)})

    rraw = doc.get("rewards") or {}
    if not isinstance(rraw, dict):
        raise NetworkFormatError("rewards: expected an object")
    rewards = RewardParams(
        r_t=_require_number(rraw.get("r_t", -float(delta_t) if delta_t > 0 else -1.0), "rewards.r_t"),
        r_d=_require_number(rraw.get("r_d", DEFAULT_R_D), "rewards.r_d"),
        r_a=_require_number(rraw.get("r_a", DEFAULT_R_A), "rewards.r_a"),
    )

    if not isinstance(doc["nodes"], list):
        raise NetworkFormatError("nodes: expected a list")
    nodes = []
    for i, nraw in enumerate(doc["nodes"]):
        loc = f"nodes[{i}]"
        if not isinstance(nraw, dict):
            raise NetworkFormatError(f"{loc}: expected an object")
        node_id = _require_str(nraw.get("id"), f"{loc}.id")
        queue_min = _require_int(nraw.get("queue_min", 0), f"{loc}.queue_min")
        queue_max = _require_int(nraw.get("queue_max", 0), f"{loc}.queue_max")
        if nraw.get("queue_pmf") is not None:
            queue_pmf = _parse_pmf(nraw["queue_pmf"], f"{loc}.queue_pmf")
        else:
            queue_pmf = {queue_max: 1.0}
        nodes.append(
            Node(
                id=node_id,
                capacity=_require_int(nraw.get("capacity"), f"{loc}.capacity"),
                queue_min=queue_min,
                queue_max=queue_max,
                queue_pmf=queue_pmf,
            )
        )

    if not isinstance(doc["links"], list):
        raise NetworkFormatError("links: expected a list")
    links = []
    for i, lraw in enumerate(doc["links"]):
        loc = f"links[{i}]"
        if not isinstance(lraw, dict):
            raise NetworkFormatError(f"{loc}: expected an object")
        link_id = _require_str(lraw.get("id"), f"{loc}.id")
        tail = _require_str(lraw.get("tail"), f"{loc}.tail")
        head = _require_str(lraw.get("head"), f"{loc}.head")
        distance = None
        if lraw.get("distance_miles") is not None:
            distance = _require_number(lraw["distance_miles"], f"{loc}.distance_miles")
            if "x_lower" in lraw or "x_upper" in lraw:
                raise NetworkFormatError(
                    f"{loc}: give either distance_miles or explicit x_lower/x_upper, not both"
                )
            if v_max is None:
                raise NetworkFormatError(f"{loc}: distance_miles requires a top-level v_max")
            try:
                x_lower, x_upper = case_study_link_times(distance, v_max, delta_t)
            except DegenerateLinkError:
                x_lower, x_upper = 0, delta_t  # flagged by validate()
        else:
            x_lower = _require_int(lraw.get("x_lower"), f"{loc}.x_lower")
            x_upper = _require_int(lraw.get("x_upper"), f"{loc}.x_upper")
        if lraw.get("travel_pmf") is not None:
            travel_pmf = _parse_pmf(lraw["travel_pmf"], f"{loc}.travel_pmf")
            if delta_t > 0 and x_upper >= x_lower and (x_upper - x_lower) % delta_t == 0:
                grid = range(x_lower, x_upper + 1, delta_t)
                for x in grid:
                    travel_pmf.setdefault(x, 0.0)
        elif delta_t > 0 and x_upper >= x_lower and (x_upper - x_lower) % delta_t == 0 and x_lower >= 0:
            travel_pmf = uniform_travel_pmf(x_lower, x_upper, delta_t)
        else:
            travel_pmf = {}
        links.append(
            Link(
                id=link_id,
                tail=tail,
                head=head,
                x_lower=x_lower,
                x_upper=x_upper,
                travel_pmf=travel_pmf,
                distance_miles=distance,
            )
        )

    demand = None
    if doc.get("demand") is not None:
        draw = doc["demand"]
        if not isinstance(draw, dict):
            raise NetworkFormatError("demand: expected an object")
        demand = Demand(
            origin=_require_str(draw.get("origin"), "demand.origin"),
            destination=_require_str(draw.get("destination"), "demand.destination"),
        )

    network = Network(
        delta_t=delta_t,
        v_max=v_max,
        battery=battery,
        charge_dist=charge_dist,
        rewards=rewards,
        nodes=tuple(nodes),
        links=tuple(links),
        demand=demand,
    )
    if strict:
        problems = [v for v in validate(network) if v.severity == "error"]
        if problems:
            raise NetworkValidationError(problems)
    return network


def parse_document(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise NetworkFormatError("document root must be an object")
    return doc


def load_network(path: str | Path) -> Network:
    """Read, parse and validate a network document from a JSON file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise NetworkFormatError(f"cannot read {path}: {exc}") from exc
    return network_from_document(parse_document(text))


def network_to_document(network: Network) -> dict:
    """Serialize back to the document schema (round-trips with loading)."""
    doc: dict = {
        "delta_t": network.delta_t,
        "battery": {
            "capacity": network.battery.capacity,
            "charge_step": network.battery.charge_step,
            "charge_step_time": network.battery.charge_step_time,
        },
        "charge_dist": {"pmf": {str(k): p for k, p in sorted(network.charge_dist.pmf.items())}},
        "rewards": {
            "r_t": network.rewards.r_t,
            "r_d": network.rewards.r_d,
            "r_a": network.rewards.r_a,
        },
        "nodes": [
            {
                "id": n.id,
                "capacity": n.capacity,
                "queue_min": n.queue_min,
                "queue_max": n.queue_max,
                "queue_pmf": {str(q): p for q, p in sorted(n.queue_pmf.items())},
            }
            for n in network.nodes
        ],
        "links": [
            {
                "id": e.id,
                "tail": e.tail,
                "head": e.head,
                "x_lower": e.x_lower,
                "x_upper": e.x_upper,
                "travel_pmf": {str(x): p for x, p in sorted(e.travel_pmf.items())},
            }
            for e in network.links
        ],
    }
    if network.v_max is not None:
        doc["v_max"] = network.v_max
    if network.demand is not None:
        doc["demand"] = {
            "origin": network.demand.origin,
            "destination": network.demand.destination,
        }
    return doc


def _check_pmf(pmf: dict[int, float], location: str, out: list[Violation]) -> None:
    total = 0.0
    for k, p in pmf.items():
        if p < 0:
            out.append(Violation("error", location, f"negative probability {p} at {k}"))
        total += p
    if abs(total - 1.0) > PROB_TOL:
        out.append(Violation("error", location, f"probabilities sum to {total!r}, not 1"))


def validate(network: Network) -> list[Violation]:
    """Check every model invariant; returns all findings, errors and warnings."""
    out: list[Violation] = []
    dt = network.delta_t
    if dt <= 0:
        out.append(Violation("error", "delta_t", "delta_t must be a positive number of minutes"))
        return out  # grid-relative checks are meaningless without it

    b = network.battery
    if b.capacity <= 0:
        out.append(Violation("error", "battery.capacity", "capacity must be positive"))
    if b.charge_step <= 0:
        out.append(Violation("error", "battery.charge_step", "charge_step must be positive"))
    if b.charge_step_time <= 0:
        out.append(Violation("error", "battery.charge_step_time", "charge_step_time must be positive"))
    if b.capacity > 0 and b.charge_step > 0 and b.charge_step_time > 0:
        if b.capacity % dt != 0:
            out.append(Violation("error", "battery.capacity", f"capacity {b.capacity} is not a multiple of delta_t={dt}"))
        if b.charge_step % dt != 0:
            out.append(Violation("error", "battery.charge_step", f"charge_step {b.charge_step} is not a multiple of delta_t={dt}"))
        if b.capacity % b.charge_step != 0:
            out.append(Violation("error", "battery.charge_step", f"capacity {b.capacity} is not a multiple of charge_step {b.charge_step}"))
        if b.charge_step_time % dt != 0:
            out.append(Violation("error", "battery.charge_step_time", f"charge_step_time {b.charge_step_time} is not a multiple of delta_t={dt}"))
        if b.charge_step_time > b.capacity:
            out.append(Violation("error", "battery.charge_step_time", f"charge_step_time {b.charge_step_time} exceeds capacity {b.capacity} minutes"))

    k_c = b.k_c_max if b.charge_step > 0 else 0
    cd = network.charge_dist.pmf
    if not cd:
        out.append(Violation("error", "charge_dist.pmf", "empty charge duration distribution"))
    else:
        for k in cd:
            if k < 1 or k > k_c:
                out.append(Violation("error", "charge_dist.pmf", f"duration index {k} outside {{1..{k_c}}}"))
        _check_pmf(cd, "charge_dist.pmf", out)

    r = network.rewards
    if r.r_t >= 0:
        out.append(Violation("error", "rewards.r_t", f"r_t must be negative, got {r.r_t}"))
    if r.r_d >= 0:
        out.append(Violation("error", "rewards.r_d", f"r_d must be negative, got {r.r_d}"))
    if r.r_a <= 0:
        out.append(Violation("error", "rewards.r_a", f"r_a must be positive, got {r.r_a}"))

    seen_nodes: set[str] = set()
    for n in network.nodes:
        loc = f"nodes[{n.id}]"
        if n.id in seen_nodes:
            out.append(Violation("error", loc, "duplicate node id"))
            continue
        seen_nodes.add(n.id)
        if n.capacity < 0:
            out.append(Violation("error", loc, f"negative capacity {n.capacity}"))
        if n.queue_min < 0 or n.queue_max < n.queue_min:
            out.append(Violation("error", loc, f"queue bounds [{n.queue_min}, {n.queue_max}] are not ordered nonnegative"))
        else:
            for q in n.queue_pmf:
                if q < n.queue_min or q > n.queue_max:
                    out.append(Violation("error", f"{loc}.queue_pmf", f"queue length {q} outside [{n.queue_min}, {n.queue_max}]"))
            _check_pmf(n.queue_pmf, f"{loc}.queue_pmf", out)

    seen_links: set[str] = set()
    for e in network.links:
        loc = f"links[{e.id}]"
        if e.id in seen_links:
            out.append(Violation("error", loc, "duplicate link id"))
            continue
        seen_links.add(e.id)
        if e.tail not in seen_nodes and not network.has_node(e.tail):
            out.append(Violation("error", loc, f"unknown tail node {e.tail!r}"))
        if e.head not in seen_nodes and not network.has_node(e.head):
            out.append(Violation("error", loc, f"unknown head node {e.head!r}"))
        if e.tail == e.head:
            out.append(Violation("error", loc, "self-loop link"))
        if e.x_lower <= 0 or e.x_lower % dt != 0:
            out.append(Violation("error", loc, f"x_lower {e.x_lower} is not a positive multiple of delta_t={dt}"))
        if e.x_upper < e.x_lower or (e.x_upper - e.x_lower) % dt != 0:
            out.append(Violation("error", loc, f"x_upper {e.x_upper} is not x_lower plus a whole number of delta_t steps"))
        else:
            grid = set(range(e.x_lower, e.x_upper + 1, dt)) if e.x_lower > 0 else None
            if grid is not None:
                extra = set(e.travel_pmf) - grid
                missing = grid - set(e.travel_pmf)
                if extra:
                    out.append(Violation("error", f"{loc}.travel_pmf", f"support points {sorted(extra)} off the grid"))
                if missing:
                    out.append(Violation("error", f"{loc}.travel_pmf", f"grid points {sorted(missing)} absent from the pmf"))
            _check_pmf(e.travel_pmf, f"{loc}.travel_pmf", out)

    overlap = network.sources & network.sinks
    for v in sorted(overlap):
        out.append(Violation("error", f"nodes[{v}]", "node is both a pure source and a pure sink (isolated)"))

    for n in network.nodes:
        if n.capacity == 0 and network.in_links(n.id):
            out.append(Violation("warning", f"nodes[{n.id}]", "zero landing capacity: every inbound link is unsafe"))

    if network.demand is not None:
        d = network.demand
        if not network.has_node(d.origin):
            out.append(Violation("error", "demand.origin", f"unknown node {d.origin!r}"))
        if not network.has_node(d.destination):
            out.append(Violation("error", "demand.destination", f"unknown node {d.destination!r}"))
        if d.origin == d.destination:
            out.append(Violation("error", "demand", "origin equals destination"))
        if network.has_node(d.origin) and d.origin not in network.sources:
            out.append(Violation("warning", "demand.origin", f"{d.origin} has inbound links; treating it as a departure node anyway"))
        if network.has_node(d.destination) and d.destination not in network.sinks:
            out.append(Violation("error", "demand.destination", f"{d.destination} has outbound links, not a terminal node"))

    return out


def regrid_network(network: Network, delta_t: int) -> Network:
    """Rebuild the network on a different tick length.

    Every link must carry distance_miles so its time bounds can be re-derived;
    queue and charge distributions are tick-independent and carry over.
    """
    if delta_t == network.delta_t:
        return network
    if network.v_max is None:
        raise NetworkValidationError(
            [Violation("error", "v_max", "cannot regrid without a cruise speed")]
        )
    links = []
    for e in network.links:
        if e.distance_miles is None:
            raise NetworkValidationError(
                [Violation("error", f"links[{e.id}]", "cannot regrid a link without distance_miles")]
            )
        x_lower, x_upper = case_study_link_times(e.distance_miles, network.v_max, delta_t)
        links.append(
            Link(
                id=e.id,
                tail=e.tail,
                head=e.head,
                x_lower=x_lower,
                x_upper=x_upper,
                travel_pmf=uniform_travel_pmf(x_lower, x_upper, delta_t),
                distance_miles=e.distance_miles,
            )
        )
    regridded = Network(
        delta_t=delta_t,
        v_max=network.v_max,
        battery=network.battery,
        charge_dist=network.charge_dist,
        rewards=network.rewards,
        nodes=network.nodes,
        links=tuple(links),
        demand=network.demand,
    )
    errors = [v for v in validate(regridded) if v.severity == "error"]
    if errors:
        raise NetworkValidationError(errors)
    return regridded
