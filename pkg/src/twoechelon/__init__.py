"""Online learning of base-stock levels in a two-echelon inventory chain.

Submodules
----------
demand
    Bounded demand laws, samplers and the empirical CDF.
costs
    Expected costs of base-stock pairs and the optimal levels (the oracle).
dynamics
    Exact round-by-round chain state machine and per-round losses.
oco
    Projected gradient, Online Newton Step and its lazy variant.
centralized, decentralized
    The two learning protocols.
harness
    Seeded multi-trial experiments, regret bookkeeping and CSV output.
"""
from .costs import CostParams, OptimalLevels, optimal_levels
from .demand import DemandModel, EmpiricalCdf, parse_demand
from .trace import RunConfig, Trace

__all__ = [
    "CostParams",
    "DemandModel",
    "EmpiricalCdf",
    "OptimalLevels",
    "RunConfig",
    "Trace",
    "optimal_levels",
    "parse_demand",
]
__version__ = "0.1.0"
