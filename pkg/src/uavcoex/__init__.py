"""Uplink Monte-Carlo simulator for UAV and terrestrial-user spectrum
sharing in urban mmWave cellular networks."""

__version__ = "0.1.0"

from .config import PRESETS, ScenarioConfig
from .sim import (
    CampaignResult,
    CdfSeries,
    DropResult,
    quantile,
    run_campaign,
    run_drop,
)

__all__ = [
    "PRESETS",
    "ScenarioConfig",
    "CampaignResult",
    "CdfSeries",
    "DropResult",
    "quantile",
    "run_campaign",
    "run_drop",
    "__version__",
]
