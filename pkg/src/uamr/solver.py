"""Discounted-return solvers and policy utilities for the routing MDP."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .mdp import Action, MdpModel, State, describe_action, describe_state


class PolicyCoverageError(KeyError):
    """A policy was asked for an action in a state it does not cover."""


@dataclass(frozen=True)
class SolverConfig:
    gamma: float = 0.99
    tol: float = 1e-8
    max_iter: int = 100_000
    method: str = "jacobi"  # "jacobi" (synchronous) or "gauss_seidel" (in-place)
    record_residuals: bool = False


@dataclass
class SolveResult:
    values: np.ndarray
    iterations: int
    residual: float
    converged: bool
    residuals: list[float] = field(default_factory=list)


@dataclass
class Policy:
    """Deterministic stationary policy keyed by state tuple.

    Carrying the full state makes the policy usable without the model that
    produced it: simulation only needs the network and this mapping.
    """

    mapping: dict[State, Action]
    values: dict[State, float] = field(default_factory=dict)

    def action(self, state: State) -> Action:
        try:
            return self.mapping[state]
        except KeyError:
            raise PolicyCoverageError(
                f"policy does not cover state {describe_state(state)}"
            ) from None

    def __eq__(self, other) -> bool:
        if not isinstance(other, Policy):
            return NotImplemented
        return self.mapping == other.mapping


def _pair_values(model: MdpModel, values: np.ndarray, gamma: float) -> np.ndarray:
    contrib = model.prob * (model.reward + gamma * values[model.succ])
    return np.add.reduceat(contrib, model.pair_offsets[:-1])


def value_iteration(model: MdpModel, config: SolverConfig = SolverConfig()) -> SolveResult:
    """Fixed-point iteration on the optimality equations.

    The jacobi method is a synchronous sweep over flat transition arrays and
    is deterministic for a given model.  gauss_seidel updates states in place
    in enumeration order; it usually needs fewer sweeps but runs in Python.
    """
    if config.method == "jacobi":
        return _value_iteration_jacobi(model, config)
    if config.method == "gauss_seidel":
        return _value_iteration_gauss_seidel(model, config)
    raise ValueError(f"unknown method {config.method!r}")


def _value_iteration_jacobi(model: MdpModel, config: SolverConfig) -> SolveResult:
    values = np.zeros(model.n_states, dtype=np.float64)
    residuals: list[float] = []
    residual = np.inf
    iterations = 0
    for iterations in range(1, config.max_iter + 1):
        q = _pair_values(model, values, config.gamma)
        new_values = np.maximum.reduceat(q, model.state_pair_offsets[:-1])
        residual = float(np.max(np.abs(new_values - values)))
        values = new_values
        if config.record_residuals:
            residuals.append(residual)
        if residual <= config.tol:
            return SolveResult(values, iterations, residual, True, residuals)
    return SolveResult(values, iterations, residual, False, residuals)


def _value_iteration_gauss_seidel(model: MdpModel, config: SolverConfig) -> SolveResult:
    values = np.zeros(model.n_states, dtype=np.float64)
    gamma = config.gamma
    pair_offsets = model.pair_offsets
    state_pair_offsets = model.state_pair_offsets
    succ, prob, reward = model.succ, model.prob, model.reward
    residuals: list[float] = []
    residual = np.inf
    iterations = 0
    for iterations in range(1, config.max_iter + 1):
        residual = 0.0
        for s in range(model.n_states):
            best = -np.inf
            for pair in range(state_pair_offsets[s], state_pair_offsets[s + 1]):
                lo, hi = pair_offsets[pair], pair_offsets[pair + 1]
                q = float(np.sum(prob[lo:hi] * (reward[lo:hi] + gamma * values[succ[lo:hi]])))
                if q > best:
                    best = q
            delta = abs(best - values[s])
            if delta > residual:
                residual = delta
            values[s] = best
        if config.record_residuals:
            residuals.append(residual)
        if residual <= config.tol:
            return SolveResult(values, iterations, residual, True, residuals)
    return SolveResult(values, iterations, residual, False, residuals)


def extract_policy(model: MdpModel, values: np.ndarray, gamma: float = 0.99) -> Policy:
    """Greedy policy; ties resolve to the first action in canonical order."""
    q = _pair_values(model, values, gamma)
    mapping: dict[State, Action] = {}
    value_map: dict[State, float] = {}
    for s in range(model.n_states):
        lo, hi = int(model.state_pair_offsets[s]), int(model.state_pair_offsets[s + 1])
        best = int(np.argmax(q[lo:hi]))  # first occurrence wins ties
        mapping[model.states[s]] = model.pair_action[lo + best]
        value_map[model.states[s]] = float(values[s])
    return Policy(mapping=mapping, values=value_map)


def min_q_gap(model: MdpModel, values: np.ndarray, gamma: float = 0.99) -> float:
    """Smallest best-vs-runner-up action value gap over multi-action states."""
    q = _pair_values(model, values, gamma)
    gap = np.inf
    for s in range(model.n_states):
        lo, hi = int(model.state_pair_offsets[s]), int(model.state_pair_offsets[s + 1])
        if hi - lo < 2:
            continue
        qs = np.sort(q[lo:hi])
        gap = min(gap, float(qs[-1] - qs[-2]))
    return gap


def _chosen_pairs(model: MdpModel, policy: Policy) -> np.ndarray:
    pairs = np.empty(model.n_states, dtype=np.int64)
    for s, state in enumerate(model.states):
        action = policy.action(state)
        lo, hi = int(model.state_pair_offsets[s]), int(model.state_pair_offsets[s + 1])
        for pair in range(lo, hi):
            if model.pair_action[pair] == action:
                pairs[s] = pair
                break
        else:
            raise PolicyCoverageError(
                f"policy action {describe_action(action)} unavailable in "
                f"{describe_state(state)}"
            )
    return pairs


def _gather_chosen(model: MdpModel, pairs: np.ndarray):
    succ_parts, prob_parts, reward_parts, offsets = [], [], [], [0]
    rows = 0
    for pair in pairs:
        lo, hi = int(model.pair_offsets[pair]), int(model.pair_offsets[pair + 1])
        succ_parts.append(model.succ[lo:hi])
        prob_parts.append(model.prob[lo:hi])
        reward_parts.append(model.reward[lo:hi])
        rows += hi - lo
        offsets.append(rows)
    return (
        np.concatenate(succ_parts),
        np.concatenate(prob_parts),
        np.concatenate(reward_parts),
        np.asarray(offsets, dtype=np.int64),
    )


def policy_evaluation(
    model: MdpModel, policy: Policy, config: SolverConfig = SolverConfig()
) -> np.ndarray:
    """Value of following the policy, by linear fixed-point iteration."""
    succ, prob, reward, offsets = _gather_chosen(model, _chosen_pairs(model, policy))
    values = np.zeros(model.n_states, dtype=np.float64)
    for _ in range(config.max_iter):
        new_values = np.add.reduceat(prob * (reward + config.gamma * values[succ]), offsets[:-1])
        residual = float(np.max(np.abs(new_values - values)))
        values = new_values
        if residual <= config.tol:
            break
    return values


def policy_iteration(
    model: MdpModel, config: SolverConfig = SolverConfig()
) -> tuple[Policy, SolveResult]:
    """Alternate evaluation and greedy improvement until the policy is stable."""
    policy = extract_policy(model, np.zeros(model.n_states), config.gamma)
    values = np.zeros(model.n_states, dtype=np.float64)
    for sweep in range(1, 1000):
        values = policy_evaluation(model, policy, config)
        improved = extract_policy(model, values, config.gamma)
        if improved.mapping == policy.mapping:
            return improved, SolveResult(values, sweep, 0.0, True)
        policy = improved
    return policy, SolveResult(values, sweep, np.inf, False)


def exhaustion_states(model: MdpModel) -> list[int]:
    """Indices of states where the battery has run out."""
    out = []
    for i, s in enumerate(model.states):
        if (s[0] == "q" and s[2] == 0) or (s[0] == "l" and s[3] == 0):
            out.append(i)
    return out


def exhaustion_probability(
    model: MdpModel,
    policy: Policy,
    start: int | None = None,
    tol: float = 1e-10,
    max_iter: int = 1_000_000,
) -> float:
    """Probability of ever depleting the battery when following the policy.

    If no depleted state is reachable under the policy the answer is exactly
    0.0 with no numerics involved; otherwise the hitting probability is found
    by iterating the one-step equations from below.
    """
    start_idx = model.initial if start is None else start
    pairs = _chosen_pairs(model, policy)

    seen = {start_idx}
    frontier = deque([start_idx])
    while frontier:
        s = frontier.popleft()
        lo, hi = int(model.pair_offsets[pairs[s]]), int(model.pair_offsets[pairs[s] + 1])
        for i in range(lo, hi):
            if model.prob[i] <= 0.0:
                continue
            t = int(model.succ[i])
            if t not in seen:
                seen.add(t)
                frontier.append(t)

    exhausted = set(exhaustion_states(model))
    if not (seen & exhausted):
        return 0.0

    transient = sorted(s for s in seen if s not in exhausted and model.states[s] != ("t",))
    h = np.zeros(model.n_states, dtype=np.float64)
    for s in exhausted:
        h[s] = 1.0
    if not transient:
        return float(h[start_idx])
    succ, prob, _, offsets = _gather_chosen(
        model, np.asarray([pairs[s] for s in transient], dtype=np.int64)
    )
    transient_idx = np.asarray(transient, dtype=np.int64)
    for _ in range(max_iter):
        new_vals = np.add.reduceat(prob * h[succ], offsets[:-1])
        residual = float(np.max(np.abs(new_vals - h[transient_idx])))
        h[transient_idx] = new_vals
        if residual <= tol:
            break
    return float(h[start_idx])
