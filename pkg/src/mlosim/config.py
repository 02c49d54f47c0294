"""Simulation configuration: defaults, dict/YAML round-trip and validation."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

import yaml

from .exceptions import ConfigError
from .policy import PolicyKind
from .scenario import ScenarioSpec
from .spectrum import (BANDS, CHANNEL_SETS, MCS_PRESETS, LinkBudgetParams, McsTable, dcf_effective_rate,
                       get_mcs_preset, mcs_table_from_records)
from .traffic import TrafficSpec


@dataclass
class PhyParams:
    n_ss: int = 2
    guard_interval: float = 3.2  # us
    packet_error_rate: float = 0.1
    mcs_preset: str = "paper-example"
    mcs_table: Optional[list] = None  # overrides the preset when given
    # "dcf": airtime paid per MPDU exchange (backoff, DIFS, preamble, ACK);
    # "phy": airtime at the bare PHY rate, mpdu_bytes/min_contention_window unused
    airtime_model: str = "dcf"
    mpdu_bytes: int = 1500
    min_contention_window: int = 15

    def link_rate(self, phy_rate: float) -> float:
        """Rate (Mbps) at which a link turns airtime into delivered payload, before PER."""
        if self.airtime_model == "phy":
            return phy_rate
        return dcf_effective_rate(phy_rate, self.mpdu_bytes, self.min_contention_window,
                                  self.n_ss, self.guard_interval)

    def table(self) -> McsTable:
        if self.mcs_table:
            return mcs_table_from_records(self.mcs_table)
        return get_mcs_preset(self.mcs_preset)


@dataclass
class SimConfig:
    duration: float = 120.0
    warmup: float = 0.0
    seed: int = 0
    policy: PolicyKind = PolicyKind.MLSA
    scenario: ScenarioSpec = field(default_factory=ScenarioSpec)
    scenario_file: Optional[str] = None
    traffic: TrafficSpec = field(default_factory=TrafficSpec)
    link_budget: LinkBudgetParams = field(default_factory=LinkBudgetParams)
    phy: PhyParams = field(default_factory=PhyParams)

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        sc = dataclasses.asdict(self.scenario)
        return {
            "duration": self.duration,
            "warmup": self.warmup,
            "seed": int(self.seed),
            "policy": PolicyKind.parse(self.policy).value,
            "scenario": {k: list(v) if isinstance(v, tuple) else v for k, v in sc.items()},
            "scenario_file": self.scenario_file,
            "traffic": {k: list(v) if isinstance(v, tuple) else v
                        for k, v in dataclasses.asdict(self.traffic).items()},
            "link_budget": dataclasses.asdict(self.link_budget),
            "phy": dataclasses.asdict(self.phy),
        }

    @classmethod
    def from_dict(cls, data: Optional[dict]) -> "SimConfig":
        errors = []
        cfg = _parse_sim(data or {}, errors, "")
        if errors:
            raise ConfigError(errors)
        return cfg


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


class _Reader:
    """Pulls typed fields out of a mapping, recording every problem instead of stopping."""

    def __init__(self, data, errors: list, prefix: str, known):
        self.data = data
        self.errors = errors
        self.prefix = prefix
        if not isinstance(data, dict):
            errors.append(f"{prefix.rstrip('.') or 'config'}: expected a mapping, got {type(data).__name__}")
            self.data = {}
        for key in self.data:
            if key not in known:
                errors.append(f"{prefix}{key}: unknown field (valid: {', '.join(sorted(known))})")

    def num(self, key, default, *, positive=False, nonneg=False, integer=False, lo=None, hi=None):
        if key not in self.data or self.data[key] is None:
            return default
        v = self.data[key]
        name = self.prefix + key
        if not _is_num(v) or (integer and float(v) != int(v)):
            self.errors.append(f"{name}: expected {'an integer' if integer else 'a number'}, got {v!r}")
            return default
        if positive and not v > 0:
            self.errors.append(f"{name}: must be > 0, got {v}")
        if nonneg and v < 0:
            self.errors.append(f"{name}: must be >= 0, got {v}")
        if lo is not None and v < lo:
            self.errors.append(f"{name}: must be >= {lo}, got {v}")
        if hi is not None and v >= hi:
            self.errors.append(f"{name}: must be < {hi}, got {v}")
        return int(v) if integer else float(v)

    def num_or_range(self, key, default, *, integer=False):
        if key not in self.data or self.data[key] is None:
            return default
        v = self.data[key]
        name = self.prefix + key
        if isinstance(v, (list, tuple)):
            if len(v) != 2 or not all(_is_num(x) for x in v):
                self.errors.append(f"{name}: a range must be [low, high], got {v!r}")
                return default
            lo, hi = v
            if integer and (int(lo) != lo or int(hi) != hi):
                self.errors.append(f"{name}: range bounds must be integers")
            if lo > hi or lo < 0:
                self.errors.append(f"{name}: need 0 <= low <= high, got {v!r}")
            return (int(lo), int(hi)) if integer else (float(lo), float(hi))
        if not _is_num(v) or v < 0 or (integer and int(v) != v):
            self.errors.append(f"{name}: expected a non-negative {'integer' if integer else 'number'} "
                               f"or [low, high], got {v!r}")
            return default
        return int(v) if integer else float(v)

    def choice(self, key, default, valid):
        if key not in self.data or self.data[key] is None:
            return default
        v = self.data[key]
        if v not in valid:
            self.errors.append(f"{self.prefix}{key}: {v!r} is not valid (valid: {', '.join(map(str, valid))})")
            return default
        return v


def _parse_scenario(data, errors, prefix) -> ScenarioSpec:
    d = ScenarioSpec()
    r = _Reader(data, errors, prefix, {f.name for f in dataclasses.fields(ScenarioSpec)})
    area = r.data.get("area", d.area)
    if (not isinstance(area, (list, tuple)) or len(area) != 2
            or not all(_is_num(x) and x > 0 for x in area)):
        errors.append(f"{prefix}area: expected [width, height] with positive values, got {area!r}")
        area = d.area
    chans = r.data.get("inline_channels", d.inline_channels)
    if not isinstance(chans, (list, tuple)) or len(chans) != 3:
        errors.append(f"{prefix}inline_channels: expected one channel number per band, got {chans!r}")
        chans = d.inline_channels
    else:
        for band, ch in zip(BANDS, chans):
            if ch not in CHANNEL_SETS[band]:
                errors.append(f"{prefix}inline_channels: channel {ch!r} is not in the {band} GHz set "
                              f"{sorted(CHANNEL_SETS[band])}")
    return ScenarioSpec(
        area=(float(area[0]), float(area[1])),
        n_aps=r.num("n_aps", d.n_aps, integer=True, lo=1),
        stations_per_ap=r.num_or_range("stations_per_ap", d.stations_per_ap, integer=True),
        topology=r.choice("topology", d.topology, ("random", "inline-3")),
        min_ap_distance=r.num("min_ap_distance", d.min_ap_distance, nonneg=True),
        spacing=r.num("spacing", d.spacing, positive=True),
        inline_channels=tuple(chans),
    )


def _parse_traffic(data, errors, prefix) -> TrafficSpec:
    d = TrafficSpec()
    r = _Reader(data, errors, prefix, {f.name for f in dataclasses.fields(TrafficSpec)})
    return TrafficSpec(
        mean_on=r.num("mean_on", d.mean_on, positive=True),
        mean_off=r.num("mean_off", d.mean_off, positive=True),
        bandwidth=r.num_or_range("bandwidth", d.bandwidth),
    )


def _parse_budget(data, errors, prefix) -> LinkBudgetParams:
    d = LinkBudgetParams()
    r = _Reader(data, errors, prefix, {f.name for f in dataclasses.fields(LinkBudgetParams)})
    return LinkBudgetParams(
        tx_power_ap=r.num("tx_power_ap", d.tx_power_ap),
        tx_power_sta=r.num("tx_power_sta", d.tx_power_sta),
        antenna_gain=r.num("antenna_gain", d.antenna_gain),
        noise_figure=r.num("noise_figure", d.noise_figure, nonneg=True),
        cca_threshold=r.num("cca_threshold", d.cca_threshold),
        breakpoint_m=r.num("breakpoint_m", d.breakpoint_m, positive=True),
        walls=r.num("walls", d.walls, integer=True, nonneg=True),
    )


def _parse_phy(data, errors, prefix) -> PhyParams:
    d = PhyParams()
    r = _Reader(data, errors, prefix, {f.name for f in dataclasses.fields(PhyParams)})
    table = r.data.get("mcs_table")
    if table is not None:
        try:
            mcs_table_from_records(table)
        except (KeyError, TypeError, ValueError) as exc:
            errors.append(f"{prefix}mcs_table: {exc}")
            table = None
    return PhyParams(
        n_ss=r.num("n_ss", d.n_ss, integer=True, lo=1),
        guard_interval=r.choice("guard_interval", d.guard_interval, (0.8, 1.6, 3.2)),
        packet_error_rate=r.num("packet_error_rate", d.packet_error_rate, lo=0.0, hi=1.0),
        mcs_preset=r.choice("mcs_preset", d.mcs_preset, tuple(MCS_PRESETS)),
        mcs_table=table,
        airtime_model=r.choice("airtime_model", d.airtime_model, ("dcf", "phy")),
        mpdu_bytes=r.num("mpdu_bytes", d.mpdu_bytes, integer=True, positive=True),
        min_contention_window=r.num("min_contention_window", d.min_contention_window, integer=True, nonneg=True),
    )


SIM_KEYS = {"duration", "warmup", "seed", "policy", "scenario", "scenario_file", "traffic", "link_budget", "phy"}


def _parse_sim(data, errors, prefix, extra_keys=()) -> SimConfig:
    d = SimConfig()
    r = _Reader(data, errors, prefix, SIM_KEYS | set(extra_keys))
    policy = r.data.get("policy", d.policy)
    try:
        policy = PolicyKind.parse(policy)
    except ValueError as exc:
        errors.append(f"{prefix}policy: {exc}")
        policy = d.policy
    n_err = len(errors)
    duration = r.num("duration", d.duration, positive=True)
    warmup = r.num("warmup", d.warmup, nonneg=True)
    if len(errors) == n_err and warmup >= duration:
        errors.append(f"{prefix}warmup: must be shorter than duration ({warmup} >= {duration})")
    sf = r.data.get("scenario_file")
    if sf is not None and not isinstance(sf, str):
        errors.append(f"{prefix}scenario_file: expected a path string, got {sf!r}")
        sf = None
    return SimConfig(
        duration=duration,
        warmup=warmup,
        seed=r.num("seed", d.seed, integer=True, nonneg=True),
        policy=policy,
        scenario=_parse_scenario(r.data.get("scenario") or {}, errors, prefix + "scenario."),
        scenario_file=sf,
        traffic=_parse_traffic(r.data.get("traffic") or {}, errors, prefix + "traffic."),
        link_budget=_parse_budget(r.data.get("link_budget") or {}, errors, prefix + "link_budget."),
        phy=_parse_phy(r.data.get("phy") or {}, errors, prefix + "phy."),
    )


def load_yaml(path) -> dict:
    """Parse a YAML/JSON config file; syntax errors carry line context."""
    with open(path) as fh:
        text = fh.read()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        line = text.splitlines()[mark.line] if mark and mark.line < len(text.splitlines()) else ""
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"{path}: parse error at {where}: {problem}" + (f"\n    {line}" if line else "")) from None
    return data if data is not None else {}


def load_config(path) -> SimConfig:
    return SimConfig.from_dict(load_yaml(path))
