"""Dimensioning toolkit for single- and multi-connectivity URLLC links.

Closed-form outage with HARQ and Chase combining, finite-blocklength
resource sizing, BLER-target solving, and a Monte Carlo event simulator
that validates the closed forms.
"""

from .errors import (
    DomainError,
    ParseError,
    SolverError,
    UrllcMcError,
    ValidationError,
)
from .fbl import (
    FblContext,
    achieved_bler,
    channel_dispersion,
    channel_use,
    db_to_linear,
    linear_to_db,
    q_func,
    q_inv,
    shannon_capacity,
)
from .outage import (
    ChaseCombiningSpec,
    ChaseModel,
    LinkBlerProfile,
    OutageBreakdown,
    chase_bler,
    mc_outage,
    sc_outage,
    succ_first,
    succ_retx_nack,
    succ_retx_timeout,
    succ_retx_total,
)
from .resources import (
    UsageDistribution,
    UsageReport,
    normalized_usage,
    usage_at_reliability,
    usage_distribution_mc,
    usage_mc,
    usage_sc,
)
from .solver import (
    BlerPolicy,
    PolicyKind,
    SolveResult,
    build_profile,
    solve_bler,
)
from .sim import (
    Metric,
    MonteCarloEstimate,
    Numerology,
    SimAggregate,
    TrialOutcome,
    estimate,
    estimate_from_aggregate,
    latency_budget_check,
    simulate_mc_trial,
    simulate_run,
    simulate_sc_trial,
    tti_duration_ms,
)
from .config import ScenarioConfig, SweepScale, SweepSpec, SweepVariable, parse_scenario

__version__ = "0.1.0"

__all__ = [
    "BlerPolicy",
    "ChaseCombiningSpec",
    "ChaseModel",
    "DomainError",
    "FblContext",
    "LinkBlerProfile",
    "Metric",
    "MonteCarloEstimate",
    "Numerology",
    "OutageBreakdown",
    "ParseError",
    "PolicyKind",
    "ScenarioConfig",
    "SimAggregate",
    "SolveResult",
    "SolverError",
    "SweepScale",
    "SweepSpec",
    "SweepVariable",
    "TrialOutcome",
    "UrllcMcError",
    "UsageDistribution",
    "UsageReport",
    "ValidationError",
    "achieved_bler",
    "build_profile",
    "chase_bler",
    "channel_dispersion",
    "channel_use",
    "db_to_linear",
    "estimate",
    "estimate_from_aggregate",
    "latency_budget_check",
    "linear_to_db",
    "mc_outage",
    "normalized_usage",
    "parse_scenario",
    "q_func",
    "q_inv",
    "sc_outage",
    "shannon_capacity",
    "simulate_mc_trial",
    "simulate_run",
    "simulate_sc_trial",
    "solve_bler",
    "succ_first",
    "succ_retx_nack",
    "succ_retx_timeout",
    "succ_retx_total",
    "tti_duration_ms",
    "usage_at_reliability",
    "usage_distribution_mc",
    "usage_mc",
    "usage_sc",
]
