"""On/off Markovian downlink CBR traffic."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .exceptions import UnservableSubflowError


@dataclass
class TrafficSpec:
    mean_on: float = 1.0  # s
    mean_off: float = 3.0  # s
    # fixed Mbps, or (low, high) for a uniform draw per flow
    bandwidth: Union[float, tuple] = 5.0

    def sample_bandwidth(self, rng: np.random.Generator) -> float:
        if isinstance(self.bandwidth, (tuple, list)):
            lo, hi = self.bandwidth
            return float(rng.uniform(lo, hi))
        return float(self.bandwidth)


@dataclass
class SubFlow:
    interface: int
    bandwidth: float  # Mbps
    airtime: float  # required airtime fraction


@dataclass
class Flow:
    station_id: int
    bandwidth: float
    start_time: float
    duration: float
    sub_flows: list = field(default_factory=list)


def next_on_off_cycle(spec: TrafficSpec, rng: np.random.Generator) -> tuple:
    """Draw ``(off_wait, on_duration, bandwidth)`` for one off->on cycle."""
    off_wait = float(rng.exponential(spec.mean_off))
    on_duration = float(rng.exponential(spec.mean_on))
    return off_wait, on_duration, spec.sample_bandwidth(rng)


def required_airtime(bandwidth: float, rate: float, per: float = 0.1) -> float:
    """Airtime share needed to carry ``bandwidth`` Mbps over a ``rate`` Mbps link.

    Not capped at 1; overload is resolved by the medium solver.
    """
    if rate <= 0:
        raise UnservableSubflowError(f"link rate must be positive, got {rate}")
    if not 0 <= per < 1:
        raise ValueError(f"packet error rate must be in [0, 1), got {per}")
    return bandwidth / (rate * (1.0 - per))
