"""Single-aircraft routing MDP over a stochastic network.

States are plain tuples tagged by family:

* ``("q", v, k_b)``  waiting in the landing queue at node v with battery index k_b
* ``("b", v, k_b)``  on a landing spot at v, able to charge or depart
* ``("l", e, k_e, k_b)``  in flight on link e, k_e ticks past its minimum time
* ``("d", e, k_b)``  just arrived at the head of link e, deciding what next
* ``("t",)``  absorbing target, reached by landing at the destination

Battery index k_b counts delta_t minutes of remaining flight time.  The model
stores transitions in flat arrays grouped per (state, action) pair so the
solver can sweep them with vectorized segment reductions.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .model import Demand, Network
from .stochastics import (
    HazardVector,
    WaitDistribution,
    hazard_probabilities,
    raw_wait_pmf,
    split_wait_pmf,
)

State = tuple
Action = tuple

CHARGE: Action = ("charge",)
DEFAULT: Action = ("default",)

ROW_SUM_TOL = 1e-9

_FAMILY_ORDER = {"q": 0, "b": 1, "l": 2, "d": 3, "t": 4}


class MdpBuildError(ValueError):
    """Network cannot be turned into a well-formed decision process."""


def link_action(link_id: str) -> Action:
    return ("link", link_id)


def action_sort_key(action: Action):
    if action == CHARGE:
        return (0, "")
    if action[0] == "link":
        return (1, action[1])
    return (2, "")


def state_sort_key(state: State):
    fam = _FAMILY_ORDER[state[0]]
    return (fam,) + state[1:] if fam != 4 else (4,)


def describe_state(state: State) -> str:
    tag = state[0]
    if tag == "q":
        return f"queue({state[1]},kb={state[2]})"
    if tag == "b":
        return f"charging({state[1]},kb={state[2]})"
    if tag == "l":
        return f"travel({state[1]},ke={state[2]},kb={state[3]})"
    if tag == "d":
        return f"decide({state[1]},kb={state[2]})"
    return "target"


def describe_action(action: Action) -> str:
    if action == CHARGE:
        return "charge"
    if action[0] == "link":
        return f"link({action[1]})"
    return "default"


def parse_state(text: str) -> State:
    text = text.strip()
    if text == "target":
        return ("t",)
    tag, _, body = text.partition("(")
    if not body.endswith(")"):
        raise ValueError(f"malformed state {text!r}")
    parts = body[:-1].split(",")
    fields = {}
    for part in parts[1:]:
        key, _, val = part.partition("=")
        fields[key] = int(val)
    if tag == "queue":
        return ("q", parts[0], fields["kb"])
    if tag == "charging":
        return ("b", parts[0], fields["kb"])
    if tag == "travel":
        return ("l", parts[0], fields["ke"], fields["kb"])
    if tag == "decide":
        return ("d", parts[0], fields["kb"])
    raise ValueError(f"unknown state family in {text!r}")


def parse_action(text: str) -> Action:
    text = text.strip()
    if text == "charge":
        return CHARGE
    if text == "default":
        return DEFAULT
    if text.startswith("link(") and text.endswith(")"):
        return ("link", text[5:-1])
    raise ValueError(f"unknown action {text!r}")


def enumerate_states(network: Network, demand: Demand) -> list[State]:
    """All states in the deterministic family/id/index order."""
    if not network.has_node(demand.origin) or not network.has_node(demand.destination):
        raise MdpBuildError("demand references unknown nodes")
    k_b_max = network.k_b_max
    sources = network.sources
    node_ids = sorted(n.id for n in network.nodes)
    link_ids = sorted(e.id for e in network.links)

    states: list[State] = []
    for v in node_ids:
        if v in sources:
            continue
        states.extend(("q", v, k_b) for k_b in range(k_b_max))
    for v in node_ids:
        if v in sources:
            states.append(("b", v, k_b_max))
        else:
            states.extend(("b", v, k_b) for k_b in range(k_b_max + 1))
    for e in link_ids:
        k_hat = network.link(e).k_hat(network.delta_t)
        states.extend(
            ("l", e, k_e, k_b) for k_e in range(k_hat + 1) for k_b in range(k_b_max + 1)
        )
    for e in link_ids:
        states.extend(("d", e, k_b) for k_b in range(k_b_max + 1))
    states.append(("t",))
    return states


def available_actions(state: State, network: Network, demand: Demand) -> list[Action]:
    """Actions in canonical order: charge, then links by id, then default."""
    tag = state[0]
    if tag == "q":
        return [CHARGE]
    if tag == "b":
        v, k_b = state[1], state[2]
        if v == demand.destination:
            return [DEFAULT]
        links = [link_action(e.id) for e in network.out_links(v)]
        if k_b == network.k_b_max:
            return links  # full battery: depart only (may be empty: dead end)
        if k_b in network.charge_stop_ticks:
            return [CHARGE] + links
        return [CHARGE]  # between designated stop levels: keep charging
    if tag == "l":
        return [DEFAULT]
    if tag == "d":
        head = network.link(state[1]).head
        return [CHARGE] + [link_action(e.id) for e in network.out_links(head)]
    return [DEFAULT]


def _depart(network: Network, link_id: str, k_b: int) -> tuple[State, float]:
    # battery pays the minimum traversal time up front, floored at empty
    delta_k = min(k_b, network.link(link_id).x_lower // network.delta_t)
    succ = ("l", link_id, 0, k_b - delta_k)
    return succ, delta_k * network.rewards.r_t


def _wait_rows(
    network: Network, node_id: str, k_b: int, wd: WaitDistribution
) -> list[tuple[State, float, float]]:
    rows: list[tuple[State, float, float]] = []
    dt = network.delta_t
    for wait, p in wd.pmf.items():
        k = wait // dt
        rows.append((("b", node_id, k_b - k), p, k * network.rewards.r_t))
    if wd.overflow > 0.0:
        rows.append((("q", node_id, 0), wd.overflow, network.rewards.r_d))
    return rows


def transitions(
    state: State,
    action: Action,
    network: Network,
    demand: Demand,
    wait_dists: dict[tuple[str, int], WaitDistribution],
    hazards: dict[str, HazardVector],
) -> list[tuple[State, float, float]]:
    """Successor rows (state, probability, reward); zero-probability rows dropped."""
    tag = state[0]
    r = network.rewards

    if tag == "q":
        v, k_b = state[1], state[2]
        if k_b == 0:
            return [(state, 1.0, r.r_d)]  # exhausted in the queue, absorbing
        return _wait_rows(network, v, k_b, wait_dists[(v, k_b)])

    if tag == "b":
        v, k_b = state[1], state[2]
        if action == CHARGE:
            return [(("b", v, k_b + 1), 1.0, network.r_b)]
        if action == DEFAULT:
            return [(("t",), 1.0, r.r_a)]  # landing spot at the destination
        succ, reward = _depart(network, action[1], k_b)
        return [(succ, 1.0, reward)]

    if tag == "l":
        e, k_e, k_b = state[1], state[2], state[3]
        if k_b == 0:
            return [(state, 1.0, r.r_d)]  # exhausted in flight, absorbing
        p_arrive = hazards[e].p[k_e]
        rows: list[tuple[State, float, float]] = []
        if p_arrive > 0.0:
            rows.append((("d", e, k_b), p_arrive, 0.0))
        if k_e < network.link(e).k_hat(network.delta_t) and p_arrive < 1.0:
            rows.append((("l", e, k_e + 1, k_b - 1), 1.0 - p_arrive, r.r_t))
        return rows

    if tag == "d":
        e, k_b = state[1], state[2]
        head = network.link(e).head
        if action == CHARGE:
            if k_b == network.k_b_max:
                # the queue family has no full-battery states; enter the queue
                # and resolve the wait in one composed step
                return _wait_rows(network, head, k_b, wait_dists[(head, k_b)])
            return [(("q", head, k_b), 1.0, 0.0)]
        succ, reward = _depart(network, action[1], k_b)
        return [(succ, 1.0, reward)]

    return [(state, 1.0, 0.0)]  # target self-loop


@dataclass
class MdpModel:
    """Flattened MDP: per-(state, action) transition rows in canonical order."""

    network: Network
    demand: Demand
    states: list[State]
    index: dict[State, int]
    actions: list[list[Action]]
    initial: int
    pair_state: np.ndarray  # (n_pairs,) owning state per pair
    pair_action: list[Action]  # (n_pairs,)
    pair_offsets: np.ndarray  # (n_pairs + 1,) into transition rows
    state_pair_offsets: np.ndarray  # (n_states + 1,) into pairs
    succ: np.ndarray  # (n_rows,)
    prob: np.ndarray  # (n_rows,)
    reward: np.ndarray  # (n_rows,)
    wait_dists: dict = field(repr=False, default_factory=dict)
    hazards: dict = field(repr=False, default_factory=dict)

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_pairs(self) -> int:
        return len(self.pair_action)

    def pairs_of(self, s_idx: int) -> range:
        return range(int(self.state_pair_offsets[s_idx]), int(self.state_pair_offsets[s_idx + 1]))

    def pair_index(self, s_idx: int, action: Action) -> int:
        for p in self.pairs_of(s_idx):
            if self.pair_action[p] == action:
                return p
        raise KeyError(f"action {describe_action(action)} unavailable in {describe_state(self.states[s_idx])}")

    def rows_of(self, pair: int) -> list[tuple[int, float, float]]:
        lo, hi = int(self.pair_offsets[pair]), int(self.pair_offsets[pair + 1])
        return [(int(self.succ[i]), float(self.prob[i]), float(self.reward[i])) for i in range(lo, hi)]

    def transitions_of(self, s_idx: int, action: Action) -> list[tuple[int, float, float]]:
        return self.rows_of(self.pair_index(s_idx, action))


def build_mdp(network: Network, demand: Demand) -> MdpModel:
    """Assemble the full MDP; validates stochasticity and model soundness."""
    if demand.origin == demand.destination:
        raise MdpBuildError("demand origin equals destination")

    for n in network.nodes:
        if n.id != demand.destination and not network.out_links(n.id):
            raise MdpBuildError(
                f"dead end: {describe_state(('b', n.id, network.k_b_max))} has no departure "
                "and the node is not the destination"
            )

    hazards: dict[str, HazardVector] = {}
    for e in network.links:
        hv = hazard_probabilities(e, network.delta_t)
        k_hat = e.k_hat(network.delta_t)
        if abs(hv.p[k_hat] - 1.0) > ROW_SUM_TOL:
            raise MdpBuildError(f"link {e.id}: arrival not certain at the last tick")
        hazards[e.id] = hv

    k_b_max = network.k_b_max
    wait_dists: dict[tuple[str, int], WaitDistribution] = {}
    sources = network.sources
    for n in network.nodes:
        if n.id in sources:
            continue
        raw = raw_wait_pmf(n, network.battery, network.charge_dist)
        for k_b in range(1, k_b_max + 1):
            wait_dists[(n.id, k_b)] = split_wait_pmf(n.id, raw, k_b, network.delta_t)

    states = enumerate_states(network, demand)
    index = {s: i for i, s in enumerate(states)}
    initial_state = ("b", demand.origin, k_b_max)
    if initial_state not in index:
        raise MdpBuildError(f"initial state {describe_state(initial_state)} not in the state set")

    actions: list[list[Action]] = []
    pair_state: list[int] = []
    pair_action: list[Action] = []
    pair_offsets: list[int] = [0]
    state_pair_offsets: list[int] = [0]
    succ: list[int] = []
    prob: list[float] = []
    reward: list[float] = []

    for s_idx, state in enumerate(states):
        acts = available_actions(state, network, demand)
        if not acts:
            raise MdpBuildError(f"no actions available in {describe_state(state)}")
        actions.append(acts)
        for action in acts:
            rows = transitions(state, action, network, demand, wait_dists, hazards)
            total = 0.0
            for succ_state, p, rew in rows:
                succ.append(index[succ_state])
                prob.append(p)
                reward.append(rew)
                total += p
            if abs(total - 1.0) > ROW_SUM_TOL:
                raise MdpBuildError(
                    f"transitions from {describe_state(state)} via {describe_action(action)} "
                    f"sum to {total!r}"
                )
            pair_state.append(s_idx)
            pair_action.append(action)
            pair_offsets.append(len(succ))
        state_pair_offsets.append(len(pair_action))

    return MdpModel(
        network=network,
        demand=demand,
        states=states,
        index=index,
        actions=actions,
        initial=index[initial_state],
        pair_state=np.asarray(pair_state, dtype=np.int64),
        pair_action=pair_action,
        pair_offsets=np.asarray(pair_offsets, dtype=np.int64),
        state_pair_offsets=np.asarray(state_pair_offsets, dtype=np.int64),
        succ=np.asarray(succ, dtype=np.int64),
        prob=np.asarray(prob, dtype=np.float64),
        reward=np.asarray(reward, dtype=np.float64),
        wait_dists=wait_dists,
        hazards=hazards,
    )


def reachable_subset(model: MdpModel, start: int | None = None) -> MdpModel:
    """Restrict to states reachable from the start under any action sequence.

    Kept states preserve the full model's enumeration order, so the result is
    independent of traversal order.
    """
    start_idx = model.initial if start is None else start
    seen = {start_idx}
    frontier = deque([start_idx])
    while frontier:
        s = frontier.popleft()
        lo, hi = model.state_pair_offsets[s], model.state_pair_offsets[s + 1]
        row_lo, row_hi = model.pair_offsets[lo], model.pair_offsets[hi]
        for succ in model.succ[row_lo:row_hi]:
            t = int(succ)
            if t not in seen:
                seen.add(t)
                frontier.append(t)

    kept = sorted(seen)
    old2new = np.full(model.n_states, -1, dtype=np.int64)
    for new, old in enumerate(kept):
        old2new[old] = new

    states = [model.states[i] for i in kept]
    actions = [model.actions[i] for i in kept]
    pair_state: list[int] = []
    pair_action: list[Action] = []
    pair_offsets: list[int] = [0]
    state_pair_offsets: list[int] = [0]
    succ_parts: list[np.ndarray] = []
    prob_parts: list[np.ndarray] = []
    reward_parts: list[np.ndarray] = []
    rows = 0
    for new, old in enumerate(kept):
        lo, hi = int(model.state_pair_offsets[old]), int(model.state_pair_offsets[old + 1])
        for pair in range(lo, hi):
            r_lo, r_hi = int(model.pair_offsets[pair]), int(model.pair_offsets[pair + 1])
            succ_parts.append(model.succ[r_lo:r_hi])
            prob_parts.append(model.prob[r_lo:r_hi])
            reward_parts.append(model.reward[r_lo:r_hi])
            rows += r_hi - r_lo
            pair_state.append(new)
            pair_action.append(model.pair_action[pair])
            pair_offsets.append(rows)
        state_pair_offsets.append(len(pair_action))

    succ = old2new[np.concatenate(succ_parts)] if succ_parts else np.zeros(0, dtype=np.int64)
    return MdpModel(
        network=model.network,
        demand=model.demand,
        states=states,
        index={s: i for i, s in enumerate(states)},
        actions=actions,
        initial=int(old2new[start_idx]),
        pair_state=np.asarray(pair_state, dtype=np.int64),
        pair_action=pair_action,
        pair_offsets=np.asarray(pair_offsets, dtype=np.int64),
        state_pair_offsets=np.asarray(state_pair_offsets, dtype=np.int64),
        succ=succ,
        prob=np.concatenate(prob_parts) if prob_parts else np.zeros(0),
        reward=np.concatenate(reward_parts) if reward_parts else np.zeros(0),
        wait_dists=model.wait_dists,
        hazards=model.hazards,
    )
