"""Discretized link-travel hazards and landing-queue waiting times.

The queue wait distribution enumerates the charge durations of aircraft ahead
in the queue and assigns them greedily to landing spots; a dynamic-programming
variant over the multiset of spot busy-until times computes the identical
distribution without enumerating vectors.
"""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .model import BatteryModel, ChargeDurationDist, Link, Node

DEFAULT_ENUMERATION_CAP = 10**6


class EnumerationCapExceeded(RuntimeError):
    """Charge-vector enumeration would exceed the configured cap."""


@dataclass(frozen=True)
class HazardVector:
    """Conditional arrival probabilities per elapsed tick on one link.

    p[k] is the probability of arriving exactly at x_lower + k*delta_t given
    no earlier arrival.  p[k_hat] is always 1.
    """

    link_id: str
    x_lower: int
    delta_t: int
    p: dict[int, float]


@dataclass(frozen=True)
class WaitDistribution:
    """Queue wait pmf up to a battery bound, plus the overflow mass.

    pmf maps wait minutes (multiples of delta_t) to probability for waits
    strictly below max_wait_ticks; overflow collects every wait of
    max_wait_ticks ticks or more, which exhausts the battery.
    """

    node_id: str
    max_wait_ticks: int
    delta_t: int
    pmf: dict[int, float]
    overflow: float


def hazard_probabilities(link: Link, delta_t: int) -> HazardVector:
    """Convert a travel-time pmf to per-tick conditional arrival probabilities.

    A zero denominator (no mass left beyond the previous tick) yields a
    conditional probability of 1 for that tick.
    """
    grid = link.grid(delta_t)
    f = [link.travel_pmf.get(x, 0.0) for x in grid]
    p: dict[int, float] = {0: f[0]}
    cum = f[0]
    for k in range(1, len(grid)):
        rem = 1.0 - cum  # mass not yet arrived before tick k
        p[k] = 1.0 if rem <= 0.0 else min(1.0, f[k] / rem)
        cum += f[k]
    if len(grid) > 1:
        p[len(grid) - 1] = 1.0
    return HazardVector(link_id=link.id, x_lower=link.x_lower, delta_t=delta_t, p=p)


def reconstruct_pmf(hazard: HazardVector) -> dict[int, float]:
    """Invert :func:`hazard_probabilities` back to the travel-time pmf."""
    out: dict[int, float] = {}
    survive = 1.0
    for k in sorted(hazard.p):
        x = hazard.x_lower + k * hazard.delta_t
        out[x] = hazard.p[k] * survive
        survive *= 1.0 - hazard.p[k]
    return out


def charge_vector_probability(vector: tuple[int, ...], charge_dist: ChargeDurationDist) -> float:
    """Probability that the queued aircraft draw exactly these durations."""
    prob = 1.0
    for k in vector:
        prob *= charge_dist.pmf.get(k, 0.0)
    return prob


def greedy_spot_wait(vector: tuple[int, ...], capacity: int, charge_step_time: int) -> int:
    """Wait minutes for the querying aircraft after greedy spot assignment.

    Each queued aircraft in order joins the spot that frees earliest (lowest
    index on ties) and occupies it for k*charge_step_time minutes; the
    querying aircraft then waits for the earliest-freeing spot.
    """
    busy = [0] * capacity
    for k in vector:
        i = busy.index(min(busy))
        busy[i] += k * charge_step_time
    return min(busy)


def _vector_count(n_choices: int, length: int) -> int:
    return n_choices**length if length > 0 else 1


def _wait_pmf_single_queue(
    q: int, node: Node, battery: BatteryModel, charge_dist: ChargeDurationDist, cap: int
) -> dict[int, float]:
    """Wait pmf conditional on exactly q aircraft being ahead (enumeration)."""
    if q < node.capacity:
        return {0: 1.0}
    if node.capacity == 0:
        return {}  # no spot ever frees; all mass is overflow
    choices = sorted(charge_dist.pmf)
    if _vector_count(len(choices), q) > cap:
        raise EnumerationCapExceeded(
            f"{len(choices)}^{q} charge vectors at node {node.id} exceed the cap of {cap}; "
            "use the dynamic-programming variant"
        )
    out: dict[int, float] = defaultdict(float)
    for vector in itertools.product(choices, repeat=q):
        prob = charge_vector_probability(vector, charge_dist)
        if prob <= 0.0:
            continue
        out[greedy_spot_wait(vector, node.capacity, battery.charge_step_time)] += prob
    return dict(out)


def _wait_pmf_single_queue_dp(
    q: int, node: Node, battery: BatteryModel, charge_dist: ChargeDurationDist
) -> dict[int, float]:
    """Same distribution as the enumeration, via DP over spot busy-until multisets.

    Spots are exchangeable, so the state is the sorted tuple of busy-until
    minutes; each queued aircraft extends the earliest-freeing spot.
    """
    if q < node.capacity:
        return {0: 1.0}
    if node.capacity == 0:
        return {}
    durations = sorted(charge_dist.pmf.items())
    states: dict[tuple[int, ...], float] = {(0,) * node.capacity: 1.0}
    for _ in range(q):
        nxt: dict[tuple[int, ...], float] = defaultdict(float)
        for busy, prob in states.items():
            for k, pk in durations:
                if pk <= 0.0:
                    continue
                extended = (busy[0] + k * battery.charge_step_time,) + busy[1:]
                nxt[tuple(sorted(extended))] += prob * pk
        states = dict(nxt)
    out: dict[int, float] = defaultdict(float)
    for busy, prob in states.items():
        out[busy[0]] += prob
    return dict(out)


def _assemble(
    node: Node,
    delta_t: int,
    max_wait_ticks: int,
    per_queue: dict[int, dict[int, float]],
) -> WaitDistribution:
    pmf: dict[int, float] = defaultdict(float)
    for q in range(node.queue_min, node.queue_max + 1):
        pq = node.queue_pmf.get(q, 0.0)
        if pq <= 0.0:
            continue
        for wait, p in per_queue[q].items():
            pmf[wait] += pq * p
    kept = {w: p for w, p in sorted(pmf.items()) if w // delta_t < max_wait_ticks and p > 0.0}
    overflow = 1.0 - sum(kept.values())
    if overflow < 0.0:
        overflow = 0.0
    return WaitDistribution(
        node_id=node.id,
        max_wait_ticks=max_wait_ticks,
        delta_t=delta_t,
        pmf=kept,
        overflow=overflow,
    )


def queue_wait_distribution(
    node: Node,
    battery: BatteryModel,
    charge_dist: ChargeDurationDist,
    max_wait_ticks: int,
    delta_t: int,
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP,
) -> WaitDistribution:
    """Wait distribution for an arriving aircraft, by charge-vector enumeration."""
    per_queue = {
        q: _wait_pmf_single_queue(q, node, battery, charge_dist, enumeration_cap)
        for q in range(node.queue_min, node.queue_max + 1)
    }
    return _assemble(node, delta_t, max_wait_ticks, per_queue)


def queue_wait_distribution_dp(
    node: Node,
    battery: BatteryModel,
    charge_dist: ChargeDurationDist,
    max_wait_ticks: int,
    delta_t: int,
) -> WaitDistribution:
    """Identical contract to :func:`queue_wait_distribution`, no enumeration."""
    per_queue = {
        q: _wait_pmf_single_queue_dp(q, node, battery, charge_dist)
        for q in range(node.queue_min, node.queue_max + 1)
    }
    return _assemble(node, delta_t, max_wait_ticks, per_queue)


def raw_wait_pmf(
    node: Node, battery: BatteryModel, charge_dist: ChargeDurationDist
) -> dict[int, float]:
    """Full wait pmf in minutes with no battery bound applied (DP path)."""
    out: dict[int, float] = defaultdict(float)
    for q in range(node.queue_min, node.queue_max + 1):
        pq = node.queue_pmf.get(q, 0.0)
        if pq <= 0.0:
            continue
        for wait, p in _wait_pmf_single_queue_dp(q, node, battery, charge_dist).items():
            out[wait] += pq * p
    return dict(sorted(out.items()))


def split_wait_pmf(
    node_id: str, raw: dict[int, float], max_wait_ticks: int, delta_t: int
) -> WaitDistribution:
    """Apply a battery bound to a precomputed raw wait pmf."""
    kept = {w: p for w, p in raw.items() if w // delta_t < max_wait_ticks and p > 0.0}
    overflow = 1.0 - sum(kept.values())
    return WaitDistribution(
        node_id=node_id,
        max_wait_ticks=max_wait_ticks,
        delta_t=delta_t,
        pmf=kept,
        overflow=overflow if overflow > 0.0 else 0.0,
    )


def _draw(support: list, cdf: np.ndarray, rng: np.random.Generator):
    u = rng.random()
    return support[int(np.searchsorted(cdf, u, side="right"))]


def _inverse_cdf(pmf: dict[int, float]) -> tuple[list[int], np.ndarray]:
    support = sorted(k for k, p in pmf.items() if p > 0.0)
    cdf = np.cumsum([pmf[k] for k in support])
    cdf[-1] = 1.0  # guard float shortfall at the top
    return support, cdf


def sample_travel_time(link: Link, rng: np.random.Generator) -> int:
    """Draw one realized travel time in minutes."""
    support, cdf = _inverse_cdf(link.travel_pmf)
    return _draw(support, cdf, rng)


def sample_queue_length(node: Node, rng: np.random.Generator) -> int:
    support, cdf = _inverse_cdf(node.queue_pmf)
    return _draw(support, cdf, rng)


def sample_charge_duration(charge_dist: ChargeDurationDist, rng: np.random.Generator) -> int:
    """Draw one queued aircraft's charge duration in charge-step units."""
    support, cdf = _inverse_cdf(charge_dist.pmf)
    return _draw(support, cdf, rng)


def sample_queue_wait(
    node: Node,
    battery: BatteryModel,
    charge_dist: ChargeDurationDist,
    rng: np.random.Generator,
) -> int:
    """Draw one wait in minutes via the same greedy spot assignment."""
    q = sample_queue_length(node, rng)
    if q < node.capacity:
        return 0
    if node.capacity == 0:
        return battery.capacity  # never frees; exhausts any battery bound
    vector = tuple(sample_charge_duration(charge_dist, rng) for _ in range(q))
    return greedy_spot_wait(vector, node.capacity, battery.charge_step_time)
