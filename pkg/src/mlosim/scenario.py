"""Deployment generation: AP placement, station placement, enabled links and rates."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .exceptions import GenerationError, InvalidStationError
from .spectrum import (
    BANDS,
    Channel,
    LinkBudgetParams,
    McsEntry,
    McsTable,
    PhyRate,
    band_channels,
    link_phy_rate,
    path_loss,
    rx_power,
)

MAX_REDRAWS = 100_000
STATION_DISTANCE = (1.0, 8.0)


@dataclass
class AccessPoint:
    id: int
    x: float
    y: float
    channels: tuple  # one Channel per band, ordered as BANDS
    tx_power: float = 20.0

    @property
    def position(self) -> tuple:
        return (self.x, self.y)


@dataclass
class Station:
    id: int
    ap_id: int
    x: float
    y: float
    links: dict = field(default_factory=dict)  # interface index -> PhyRate
    attachment: Optional[int] = None  # interface index when single-link

    @property
    def enabled(self) -> list:
        return sorted(self.links)


@dataclass
class Scenario:
    aps: list
    stations: list

    def stations_of(self, ap_id: int) -> list:
        return [s for s in self.stations if s.ap_id == ap_id]

    def to_dict(self) -> dict:
        return {
            "aps": [
                {
                    "id": ap.id,
                    "x": ap.x,
                    "y": ap.y,
                    "tx_power": ap.tx_power,
                    "channels": [{"band": c.band, "number": c.number} for c in ap.channels],
                }
                for ap in self.aps
            ],
            "stations": [
                {
                    "id": s.id,
                    "ap_id": s.ap_id,
                    "x": s.x,
                    "y": s.y,
                    "attachment": s.attachment,
                    "links": [
                        {
                            "interface": k,
                            "mcs": {"index": r.mcs.index, "bits": r.mcs.bits, "rate": r.mcs.rate,
                                    "min_snr": r.mcs.min_snr},
                            "width_mhz": r.width_mhz,
                            "n_ss": r.n_ss,
                            "gi_us": r.gi_us,
                            "rate": r.rate,
                        }
                        for k, r in sorted(s.links.items())
                    ],
                }
                for s in self.stations
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        aps = [
            AccessPoint(
                int(a["id"]), float(a["x"]), float(a["y"]),
                tuple(Channel.from_number(c["band"], c["number"]) for c in a["channels"]),
                float(a.get("tx_power", 20.0)),
            )
            for a in data["aps"]
        ]
        stations = []
        for s in data["stations"]:
            links = {}
            for link in s["links"]:
                m = link["mcs"]
                entry = McsEntry(int(m["index"]), int(m["bits"]), float(m["rate"]), float(m["min_snr"]))
                links[int(link["interface"])] = PhyRate(
                    entry, int(link["width_mhz"]), int(link["n_ss"]), float(link["gi_us"]), float(link["rate"])
                )
            att = s.get("attachment")
            stations.append(Station(int(s["id"]), int(s["ap_id"]), float(s["x"]), float(s["y"]), links,
                                    None if att is None else int(att)))
        return cls(aps, stations)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path) -> "Scenario":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class ScenarioSpec:
    area: tuple = (45.0, 45.0)
    n_aps: int = 10
    # fixed count or inclusive uniform range
    stations_per_ap: Union[int, tuple] = (15, 25)
    topology: str = "random"  # "random" | "inline-3"
    min_ap_distance: float = 5.0
    spacing: float = 15.0  # inline-3 only
    inline_channels: tuple = (1, 38, 55)  # inline-3 only, one channel number per band


def enabled_links(station_xy: Sequence[float], ap: AccessPoint, params: LinkBudgetParams) -> list:
    """Interfaces of ``ap`` whose downlink power at the station meets the CCA threshold."""
    d = math.dist(station_xy, ap.position)
    out = []
    for k, ch in enumerate(ap.channels):
        rx = rx_power(ap.tx_power, path_loss(ch.fc_ghz, d, params), 2 * params.antenna_gain)
        if rx >= params.cca_threshold:
            out.append(k)
    return out


def station_links(station_xy, ap: AccessPoint, params: LinkBudgetParams, table: McsTable,
                  n_ss: int = 2, gi_us: float = 3.2) -> dict:
    d = math.dist(station_xy, ap.position)
    links = {}
    for k in enabled_links(station_xy, ap, params):
        rate = link_phy_rate(ap.channels[k], d, ap.tx_power, params, table, n_ss, gi_us)
        if rate is not None:
            links[k] = rate
    return links


def attach_single_link(station: Station, rng: np.random.Generator) -> int:
    enabled = station.enabled
    if not enabled:
        raise InvalidStationError(f"station {station.id} has no enabled interface")
    k = enabled[int(rng.integers(len(enabled)))]
    station.attachment = k
    return k


def _station_count(spec_count, rng) -> int:
    if isinstance(spec_count, (tuple, list)):
        lo, hi = spec_count
        return int(rng.integers(int(lo), int(hi) + 1))
    return int(spec_count)


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def spend(self, what: str) -> None:
        self.used += 1
        if self.used > self.limit:
            raise GenerationError(f"rejection budget of {self.limit} redraws exceeded while placing {what}")


def _place_stations(aps, counts, params, table, rng, budget, n_ss, gi_us) -> list:
    stations = []
    for ap, count in zip(aps, counts):
        for _ in range(count):
            while True:
                d = rng.uniform(*STATION_DISTANCE)
                theta = rng.uniform(0.0, 2 * math.pi)
                xy = (ap.x + d * math.cos(theta), ap.y + d * math.sin(theta))
                links = station_links(xy, ap, params, table, n_ss, gi_us)
                if links:
                    break
                budget.spend(f"station of AP {ap.id}")
            stations.append(Station(len(stations), ap.id, xy[0], xy[1], links))
    return stations


def generate_random(spec: ScenarioSpec, params: LinkBudgetParams, table: McsTable,
                    rng: np.random.Generator, n_ss: int = 2, gi_us: float = 3.2,
                    max_redraws: int = MAX_REDRAWS) -> Scenario:
    """Uniform AP placement with a minimum inter-AP distance, stations on a ring of 1-8 m.

    An AP that lands closer than ``spec.min_ap_distance`` to an already placed AP
    is redrawn on its own; a station with no usable link is redrawn too. Both
    count against ``max_redraws``.
    """
    if spec.topology != "random":
        raise ValueError(f"generate_random needs topology 'random', got {spec.topology!r}")
    w, h = spec.area
    if w <= 0 or h <= 0:
        raise ValueError("area must be positive")
    budget = _Budget(max_redraws)

    pos = np.empty((spec.n_aps, 2))
    for i in range(spec.n_aps):
        while True:
            p = rng.uniform((0.0, 0.0), (w, h))
            if i == 0 or np.min(np.hypot(*(pos[:i] - p).T)) >= spec.min_ap_distance:
                break
            budget.spend(f"AP {i}")
        pos[i] = p

    sets = [band_channels(b) for b in BANDS]
    aps = []
    for i in range(spec.n_aps):
        chans = tuple(s[int(rng.integers(len(s)))] for s in sets)
        aps.append(AccessPoint(i, float(pos[i, 0]), float(pos[i, 1]), chans, params.tx_power_ap))

    counts = [_station_count(spec.stations_per_ap, rng) for _ in aps]
    stations = _place_stations(aps, counts, params, table, rng, budget, n_ss, gi_us)
    return Scenario(aps, stations)


def generate_inline3(spacing: float, stations_per_ap, channels: Sequence[Channel],
                     params: LinkBudgetParams, table: McsTable, rng: np.random.Generator,
                     n_ss: int = 2, gi_us: float = 3.2) -> Scenario:
    """Three collinear APs (A, B, C) sharing the same channel in every band."""
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    chans = tuple(channels)
    aps = [AccessPoint(i, i * spacing, 0.0, chans, params.tx_power_ap) for i in range(3)]
    counts = [_station_count(stations_per_ap, rng) for _ in aps]
    stations = _place_stations(aps, counts, params, table, rng, _Budget(MAX_REDRAWS), n_ss, gi_us)
    return Scenario(aps, stations)


def build_scenario(spec: ScenarioSpec, params: LinkBudgetParams, table: McsTable,
                   rng: np.random.Generator, n_ss: int = 2, gi_us: float = 3.2) -> Scenario:
    if spec.topology == "random":
        return generate_random(spec, params, table, rng, n_ss, gi_us)
    if spec.topology == "inline-3":
        chans = [Channel.from_number(b, n) for b, n in zip(BANDS, spec.inline_channels)]
        return generate_inline3(spec.spacing, spec.stations_per_ap, chans, params, table, rng, n_ss, gi_us)
    raise ValueError(f"unknown topology {spec.topology!r}")
