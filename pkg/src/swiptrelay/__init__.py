"""Outage simulation and analysis for energy-harvesting decode-and-forward relaying."""

from .analytic import (
    AnalyticResult,
    QuadratureError,
    approx_outage_random,
    asymptotic_outage_closest,
    beamforming_outage_upper_bound,
    exact_outage_random,
)
from .channel import ScenarioParams
from .coalition import (
    MultiSourceScenario,
    Partition,
    PayoffKind,
    form_coalitions,
    four_source_layout,
    is_nash_stable,
)
from .geometry import Disc, PPPConfig
from .montecarlo import (
    AT_LEAST_ONE,
    UNCONDITIONAL,
    Conditioning,
    OutageEstimate,
    estimate_multi_source_outage,
    estimate_outage,
    fixed_count,
    sweep_outage,
)
from .strategies import RelayRealization, StrategyKind

__all__ = [
    "AnalyticResult",
    "QuadratureError",
    "approx_outage_random",
    "asymptotic_outage_closest",
    "beamforming_outage_upper_bound",
    "exact_outage_random",
    "ScenarioParams",
    "MultiSourceScenario",
    "Partition",
    "PayoffKind",
    "form_coalitions",
    "four_source_layout",
    "is_nash_stable",
    "Disc",
    "PPPConfig",
    "AT_LEAST_ONE",
    "UNCONDITIONAL",
    "Conditioning",
    "OutageEstimate",
    "estimate_multi_source_outage",
    "estimate_outage",
    "fixed_count",
    "sweep_outage",
    "RelayRealization",
    "StrategyKind",
]
