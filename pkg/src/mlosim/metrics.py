"""Per-run report and cross-run statistics (satisfaction, efficiency, drop ratio)."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

CSV_SCHEMA_VERSION = 1
SUMMARY_COLUMNS = ("schema", "point", "run", "seed", "policy", "load_mbps", "n_aps",
                   "satisfaction", "efficiency", "drop_ratio", "n_flows", "nonconverged")
AP_COLUMNS = ("schema", "point", "run", "seed", "ap", "satisfaction", "throughput_mbps", "drop_ratio",
              "occupancy_2g4", "occupancy_5g", "occupancy_6g")


@dataclass
class MetricsReport:
    seed: int
    policy: str
    duration: float
    ap_satisfaction: np.ndarray  # (n_aps,)
    ap_throughput: np.ndarray  # (n_aps,) time-averaged Mbps
    ap_required_mbit: np.ndarray  # (n_aps,)
    ap_achieved_mbit: np.ndarray  # (n_aps,)
    occupancy: np.ndarray  # (n_aps, 3) time-averaged
    flow_efficiency: np.ndarray  # achieved / required throughput per flow
    flow_satisfaction: np.ndarray
    required_mbit: float
    achieved_mbit: float
    node_achieved_mbit: float  # same total, integrated per interface rather than per flow
    n_arrivals: int = 0
    n_departures: int = 0
    n_active_end: int = 0
    unservable_stations: int = 0
    n_solves: int = 0
    nonconverged_solves: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def n_aps(self) -> int:
        return len(self.ap_satisfaction)

    @property
    def satisfaction(self) -> float:
        """Network average satisfaction: mean of the per-AP values."""
        return float(np.mean(self.ap_satisfaction)) if self.n_aps else 1.0

    @property
    def efficiency(self) -> float:
        return float(np.mean(self.flow_efficiency)) if self.flow_efficiency.size else 1.0

    @property
    def drop_ratio(self) -> float:
        return drop_ratio(self.achieved_mbit, self.required_mbit)

    @property
    def ap_drop_ratio(self) -> np.ndarray:
        return np.array([drop_ratio(a, r) for a, r in zip(self.ap_achieved_mbit, self.ap_required_mbit)])


def flow_satisfaction(allocated, required) -> float:
    """Served over required airtime, capped at 1; sequences are summed over sub-flows."""
    alloc = float(np.sum(allocated))
    req = float(np.sum(required))
    if req < 0:
        raise ValueError("required airtime must be non-negative")
    if req == 0:
        return 1.0
    return min(1.0, alloc / req)


def drop_ratio(achieved: float, required: float) -> float:
    if required <= 0:
        return 0.0
    return float(min(1.0, max(0.0, 1.0 - achieved / required)))


def satisfaction_probability(reports: Sequence[MetricsReport], threshold: float = 0.95) -> float:
    if not reports:
        raise ValueError("need at least one report")
    return float(np.mean([r.satisfaction >= threshold for r in reports]))


def allocation_efficiency(reports: Iterable[MetricsReport]) -> float:
    """Mean over every flow of all runs of achieved / required throughput."""
    effs = [r.flow_efficiency for r in reports]
    flat = np.concatenate(effs) if effs else np.empty(0)
    if flat.size == 0:
        return 1.0
    return float(np.mean(np.clip(flat, 0.0, 1.0)))


class EmpiricalCDF:
    """Right-continuous step CDF over a finite sample."""

    def __init__(self, samples):
        self.samples = np.sort(np.asarray(samples, dtype=float))
        if self.samples.size == 0:
            raise ValueError("empty sample")

    def __call__(self, x):
        return np.searchsorted(self.samples, x, side="right") / self.samples.size

    def percentile(self, q: float) -> float:
        """Smallest sample value ``v`` with ``F(v) >= q / 100``."""
        if not 0 <= q <= 100:
            raise ValueError("percentile must be in [0, 100]")
        k = max(int(np.ceil(q / 100 * self.samples.size)) - 1, 0)
        return float(self.samples[k])

    def steps(self) -> tuple:
        xs, counts = np.unique(self.samples, return_counts=True)
        return xs, np.cumsum(counts) / self.samples.size


def drop_ratio_cdf(reports: Sequence[MetricsReport], per_ap: bool = False) -> EmpiricalCDF:
    if per_ap:
        return EmpiricalCDF(np.concatenate([r.ap_drop_ratio for r in reports]))
    return EmpiricalCDF([r.drop_ratio for r in reports])


def summary_row(report: MetricsReport, point: int, run: int) -> dict:
    m = report.meta
    return {
        "schema": CSV_SCHEMA_VERSION,
        "point": point,
        "run": run,
        "seed": report.seed,
        "policy": report.policy,
        "load_mbps": m.get("load", ""),
        "n_aps": report.n_aps,
        "satisfaction": f"{report.satisfaction:.10g}",
        "efficiency": f"{report.efficiency:.10g}",
        "drop_ratio": f"{report.drop_ratio:.10g}",
        "n_flows": int(report.flow_efficiency.size),
        "nonconverged": report.nonconverged_solves,
    }


def ap_rows(report: MetricsReport, point: int, run: int) -> list:
    drops = report.ap_drop_ratio
    rows = []
    for a in range(report.n_aps):
        occ = report.occupancy[a]
        rows.append({
            "schema": CSV_SCHEMA_VERSION, "point": point, "run": run, "seed": report.seed, "ap": a,
            "satisfaction": f"{report.ap_satisfaction[a]:.10g}",
            "throughput_mbps": f"{report.ap_throughput[a]:.10g}",
            "drop_ratio": f"{drops[a]:.10g}",
            "occupancy_2g4": f"{occ[0]:.10g}", "occupancy_5g": f"{occ[1]:.10g}", "occupancy_6g": f"{occ[2]:.10g}",
        })
    return rows


def write_csv(path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
