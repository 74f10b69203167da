"""Auction-based AP/client multi-assignment for 60 GHz access networks."""

from mmauction.problem import (
    Assignment,
    ConfigurationError,
    InfeasibleInstanceError,
    Instance,
    NonTerminationError,
    RunRecord,
    SizeGuardError,
    UncoverableClientError,
    total_benefit,
)
from mmauction.mmwave import (
    RadioParams,
    Scenario,
    achievable_rate,
    build_instance,
    generate_scenario,
    snr_at_distance,
    solve_cell_radius,
)
from mmauction.auction import (
    AuctionConfig,
    CSReport,
    PriceState,
    TraceEvent,
    check_epsilon_cs,
    dual_objective,
    forward_auction,
    reverse_auction,
    solve,
)
from mmauction.oracle import brute_force_optimum, min_cost_flow_optimum
from mmauction.baselines import random_association, rssi_association

__all__ = [
    "Assignment",
    "AuctionConfig",
    "CSReport",
    "ConfigurationError",
    "InfeasibleInstanceError",
    "Instance",
    "NonTerminationError",
    "PriceState",
    "RadioParams",
    "RunRecord",
    "Scenario",
    "SizeGuardError",
    "TraceEvent",
    "UncoverableClientError",
    "achievable_rate",
    "brute_force_optimum",
    "build_instance",
    "check_epsilon_cs",
    "dual_objective",
    "forward_auction",
    "generate_scenario",
    "min_cost_flow_optimum",
    "random_association",
    "reverse_auction",
    "rssi_association",
    "snr_at_distance",
    "solve",
    "solve_cell_radius",
    "total_benefit",
]
