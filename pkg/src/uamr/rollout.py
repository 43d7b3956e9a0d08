"""Monte Carlo episode simulation against the live network.

Episodes are driven by the network's distributions directly, not by the
assembled transition arrays, so agreement between simulated returns and
solved values is a genuine cross-check of the model construction.  A policy
is consulted state by state; it only needs to cover the states the episode
actually visits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mdp import CHARGE, DEFAULT, State, available_actions, describe_action, describe_state
from .model import Demand, Network, Route
from .solver import Policy, PolicyCoverageError
from .stochastics import hazard_probabilities, sample_queue_wait, sample_travel_time

# step: (state, action or None for the final absorbing collapse, reward,
# elapsed minutes)
Step = tuple


@dataclass
class Trajectory:
    steps: list[Step]
    outcome: str  # "arrived" | "exhausted" | "truncated"
    total_time: float  # minutes elapsed until absorption or cutoff
    discounted_return: float
    links_taken: list[str] = field(default_factory=list)

    @property
    def arrived(self) -> bool:
        return self.outcome == "arrived"

    @property
    def exhausted(self) -> bool:
        return self.outcome == "exhausted"

    def route(self) -> Route:
        return Route(links=tuple(self.links_taken))


@dataclass(frozen=True)
class Landing:
    node: str
    entry_k_b: int  # battery index on reaching the landing spot
    departure_k_b: int  # battery index when leaving the spot (charge target)


@dataclass
class RolloutStats:
    episodes: int
    mean_discounted_return: float
    return_std_error: float
    mean_total_time: float  # over arrived episodes; nan if none arrived
    time_std_error: float
    exhaustion_rate: float
    n_arrived: int
    n_truncated: int
    returns: np.ndarray = field(repr=False, default=None)


def _coverage_error(action, state: State) -> PolicyCoverageError:
    return PolicyCoverageError(
        f"policy action {describe_action(action)} unavailable in {describe_state(state)}"
    )


def simulate_episode(
    network: Network,
    demand: Demand,
    policy: Policy,
    rng,
    *,
    gamma: float = 0.99,
    max_steps: int = 10_000,
    worst_case: bool = False,
    per_tick_links: bool = False,
    record_steps: bool = False,
) -> Trajectory:
    """Run one episode from a full battery at the origin.

    Link travel is realized by a single draw from the link pmf and unrolled
    tick by tick; ``per_tick_links=True`` instead flips the conditional
    arrival probability at every tick, which induces the same distribution.
    ``worst_case=True`` replaces every random draw by its worst realization
    (longest travel, fullest queue, full recharges ahead), making the episode
    deterministic; the rng argument is then ignored.

    When the battery empties the absorbing penalty stream is folded into the
    return in closed form and recorded as one final step.
    """
    dt = network.delta_t
    battery = network.battery
    r = network.rewards
    r_b = network.r_b
    k_b_max = network.k_b_max
    charge_minutes = battery.charge_step_time / network.k_delta_b
    hazard_cache: dict = {}

    state: State = ("b", demand.origin, k_b_max)
    discounted = 0.0
    time = 0.0
    step = 0
    arrival_tick = 0  # realized arrival tick of the link in flight
    links_taken: list[str] = []
    steps: list[Step] = []
    outcome = None

    def pay(action, reward: float, elapsed: float):
        nonlocal discounted, step, time
        discounted += (gamma**step) * reward
        step += 1
        time += elapsed
        if record_steps:
            steps.append((state, action, reward, elapsed))

    def exhaust(action, elapsed: float):
        # the depleted state repeats its penalty forever; sum it in closed
        # form as a single terminal step
        nonlocal outcome
        pay(action, r.r_d / (1.0 - gamma), elapsed)
        outcome = "exhausted"

    def queue_wait(node_id: str) -> float:
        node = network.node(node_id)
        if worst_case:
            if node.capacity == 0:
                return math.inf
            return battery.full_charge_time * (node.queue_max // node.capacity)
        return sample_queue_wait(node, battery, network.charge_dist, rng)

    def depart(link_id: str, k_b: int) -> State:
        nonlocal arrival_tick
        link = network.link(link_id)
        if per_tick_links and not worst_case:
            arrival_tick = -1  # resolved tick by tick from the hazards
        else:
            x = link.x_upper if worst_case else sample_travel_time(link, rng)
            arrival_tick = (x - link.x_lower) // dt
        delta_k = min(k_b, link.x_lower // dt)
        links_taken.append(link_id)
        pay(("link", link_id), delta_k * r.r_t, delta_k * dt)
        return ("l", link_id, 0, k_b - delta_k)

    def arrives(link_id: str, k_e: int) -> bool:
        if arrival_tick >= 0:
            return k_e == arrival_tick
        if link_id not in hazard_cache:
            hazard_cache[link_id] = hazard_probabilities(network.link(link_id), dt)
        return rng.random() < hazard_cache[link_id].p[k_e]

    while step < max_steps:
        tag = state[0]

        if tag == "t":
            break

        action = policy.action(state)

        if tag == "b":
            v, k_b = state[1], state[2]
            if action not in available_actions(state, network, demand):
                raise _coverage_error(action, state)
            if action == DEFAULT:
                pay(action, r.r_a, 0.0)
                state = ("t",)
                outcome = "arrived"
                continue
            if action == CHARGE:
                pay(action, r_b, charge_minutes)
                state = ("b", v, k_b + 1)
                continue
            state = depart(action[1], k_b)
            continue

        if tag == "l":
            if action != DEFAULT:
                raise _coverage_error(action, state)
            e, k_e, k_b = state[1], state[2], state[3]
            if k_b == 0:
                exhaust(action, 0.0)
                break
            if arrives(e, k_e):
                pay(action, 0.0, 0.0)
                state = ("d", e, k_b)
            else:
                pay(action, r.r_t, dt)
                state = ("l", e, k_e + 1, k_b - 1)
            continue

        if tag == "d":
            e, k_b = state[1], state[2]
            if action not in available_actions(state, network, demand):
                raise _coverage_error(action, state)
            head = network.link(e).head
            if action == CHARGE:
                if k_b == k_b_max:
                    # queue entry and the wait resolve as one composed step
                    w = queue_wait(head)
                    if not math.isfinite(w) or w // dt >= k_b:
                        exhaust(action, k_b * dt)
                        break
                    ticks = int(w // dt)
                    pay(action, ticks * r.r_t, ticks * dt)
                    state = ("b", head, k_b - ticks)
                else:
                    pay(action, 0.0, 0.0)
                    state = ("q", head, k_b)
                continue
            state = depart(action[1], k_b)
            continue

        if tag == "q":
            if action != CHARGE:
                raise _coverage_error(action, state)
            v, k_b = state[1], state[2]
            if k_b == 0:
                exhaust(action, 0.0)
                break
            w = queue_wait(v)
            if not math.isfinite(w) or w // dt >= k_b:
                exhaust(action, k_b * dt)
                break
            ticks = int(w // dt)
            pay(action, ticks * r.r_t, ticks * dt)
            state = ("b", v, k_b - ticks)
            continue

        raise RuntimeError(f"unhandled state {state!r}")

    if outcome is None:
        outcome = "arrived" if state == ("t",) else "truncated"

    return Trajectory(
        steps=steps,
        outcome=outcome,
        total_time=time,
        discounted_return=discounted,
        links_taken=links_taken,
    )


def estimate(
    network: Network,
    demand: Demand,
    policy: Policy,
    *,
    episodes: int,
    seed: int = 0,
    gamma: float = 0.99,
    max_steps: int = 10_000,
) -> RolloutStats:
    """Independent seeded episodes; per-episode generators come from one root
    seed so any episode can be reproduced in isolation.

    Time statistics cover arrived episodes only; an exhausted episode has no
    meaningful completion time.
    """
    children = np.random.SeedSequence(seed).spawn(episodes)
    returns = np.empty(episodes, dtype=np.float64)
    times: list[float] = []
    n_arrived = n_exhausted = n_truncated = 0
    for i, child in enumerate(children):
        result = simulate_episode(
            network,
            demand,
            policy,
            np.random.default_rng(child),
            gamma=gamma,
            max_steps=max_steps,
        )
        returns[i] = result.discounted_return
        if result.outcome == "arrived":
            n_arrived += 1
            times.append(result.total_time)
        elif result.outcome == "exhausted":
            n_exhausted += 1
        else:
            n_truncated += 1
    mean = float(np.mean(returns))
    stderr = float(np.std(returns, ddof=1) / math.sqrt(episodes)) if episodes > 1 else 0.0
    if times:
        mean_time = float(np.mean(times))
        time_se = float(np.std(times, ddof=1) / math.sqrt(len(times))) if len(times) > 1 else 0.0
    else:
        mean_time, time_se = math.nan, math.nan
    return RolloutStats(
        episodes=episodes,
        mean_discounted_return=mean,
        return_std_error=stderr,
        mean_total_time=mean_time,
        time_std_error=time_se,
        exhaustion_rate=n_exhausted / episodes,
        n_arrived=n_arrived,
        n_truncated=n_truncated,
        returns=returns,
    )


def worst_case_trajectory(
    network: Network, demand: Demand, policy: Policy, *, gamma: float = 0.99
) -> Trajectory:
    """Deterministic episode under worst realizations; its link sequence is
    the route the policy commits to when everything goes as badly as allowed."""
    return simulate_episode(
        network, demand, policy, None, gamma=gamma, worst_case=True, record_steps=True
    )


def trace_route(trajectory: Trajectory) -> tuple[Route, list[Landing]]:
    """Route plus landing/charging annotations of an arrived trajectory.

    The opening stay on the origin spot is not a landing and is not listed;
    the final landing at the destination is.
    """
    if not trajectory.arrived:
        raise ValueError(f"trajectory did not arrive (outcome: {trajectory.outcome})")
    if not trajectory.steps:
        raise ValueError("trajectory has no recorded steps")

    landings: list[Landing] = []
    run_start = None  # (node, entry battery, index of the run's first step)
    for idx, (state, action, _, _) in enumerate(trajectory.steps):
        if state[0] != "b":
            run_start = None
            continue
        node, k_b = state[1], state[2]
        if run_start is None:
            run_start = (node, k_b, idx)
        if action != CHARGE:  # departing the spot or landing at the destination
            if run_start[2] != 0:
                landings.append(
                    Landing(node=node, entry_k_b=run_start[1], departure_k_b=k_b)
                )
            run_start = None
    return trajectory.route(), landings
