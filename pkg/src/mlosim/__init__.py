"""Flow-level Monte-Carlo simulator for IEEE 802.11be multi-link operation."""

__version__ = "0.1.0"

from .config import PhyParams, SimConfig, load_config  # noqa: E402
from .engine import run, run_batch  # noqa: E402
from .metrics import (  # noqa: E402
    MetricsReport,
    allocation_efficiency,
    drop_ratio_cdf,
    satisfaction_probability,
)
from .policy import PolicyKind, allocate  # noqa: E402
from .scenario import Scenario, ScenarioSpec  # noqa: E402
from .traffic import TrafficSpec  # noqa: E402

__all__ = [
    "MetricsReport", "PhyParams", "PolicyKind", "Scenario", "ScenarioSpec", "SimConfig", "TrafficSpec",
    "allocate", "allocation_efficiency", "drop_ratio_cdf", "load_config", "run", "run_batch",
    "satisfaction_probability",
]
