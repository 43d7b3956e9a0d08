"""Battery-aware routing for stochastic urban air mobility networks.

Model a directed network of landing sites and travel corridors with random
travel times, landing queues, and shared charging spots; build the induced
decision process for a single battery-limited aircraft; solve it for a
minimal-expected-travel-time policy that avoids battery exhaustion; and
evaluate policies by Monte Carlo simulation.
"""
from .model import (
    BatteryModel,
    ChargeDurationDist,
    DegenerateLinkError,
    Demand,
    Link,
    Network,
    NetworkFormatError,
    NetworkValidationError,
    Node,
    RewardParams,
    Route,
    Violation,
    case_study_link_times,
    load_network,
    network_from_document,
    network_to_document,
    parse_document,
    regrid_network,
    uniform_travel_pmf,
    validate,
)
from .stochastics import (
    HazardVector,
    WaitDistribution,
    hazard_probabilities,
    queue_wait_distribution,
    queue_wait_distribution_dp,
    reconstruct_pmf,
)
from .mdp import (
    MdpBuildError,
    MdpModel,
    available_actions,
    build_mdp,
    enumerate_states,
    reachable_subset,
    transitions,
)
from .solver import (
    Policy,
    PolicyCoverageError,
    SolverConfig,
    SolveResult,
    exhaustion_probability,
    extract_policy,
    policy_evaluation,
    policy_iteration,
    value_iteration,
)
from .safety import (
    SafetyReport,
    conservative_policy,
    find_safe_route,
    is_safe_link,
    is_safe_route,
    safety_report,
)
from .rollout import (
    RolloutStats,
    Trajectory,
    estimate,
    simulate_episode,
    trace_route,
    worst_case_trajectory,
)

__version__ = "0.1.0"

__all__ = [
    "BatteryModel",
    "ChargeDurationDist",
    "DegenerateLinkError",
    "Demand",
    "HazardVector",
    "Link",
    "MdpBuildError",
    "MdpModel",
    "Network",
    "NetworkFormatError",
    "NetworkValidationError",
    "Node",
    "Policy",
    "PolicyCoverageError",
    "RewardParams",
    "RolloutStats",
    "Route",
    "SafetyReport",
    "SolveResult",
    "SolverConfig",
    "Trajectory",
    "Violation",
    "WaitDistribution",
    "available_actions",
    "build_mdp",
    "case_study_link_times",
    "conservative_policy",
    "enumerate_states",
    "estimate",
    "exhaustion_probability",
    "extract_policy",
    "find_safe_route",
    "hazard_probabilities",
    "is_safe_link",
    "is_safe_route",
    "load_network",
    "network_from_document",
    "network_to_document",
    "parse_document",
    "policy_evaluation",
    "policy_iteration",
    "queue_wait_distribution",
    "queue_wait_distribution_dp",
    "reachable_subset",
    "reconstruct_pmf",
    "regrid_network",
    "safety_report",
    "simulate_episode",
    "trace_route",
    "transitions",
    "uniform_travel_pmf",
    "validate",
    "value_iteration",
    "worst_case_trajectory",
]
