"""Batch experiments: named presets, sweeps, seeded replay and CSV output."""

from __future__ import annotations

import dataclasses
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .config import SimConfig, _parse_sim, _Reader, load_yaml
from .engine import RunFailure, run_batch
from .exceptions import ConfigError
from .metrics import AP_COLUMNS, SUMMARY_COLUMNS, ap_rows, drop_ratio_cdf, summary_row, write_csv
from .policy import PolicyKind
from .scenario import ScenarioSpec
from .traffic import TrafficSpec

log = logging.getLogger(__name__)

AXES = ("bandwidth", "n_aps", "stations_per_ap")
PRESETS = ("controlled-load", "controlled-density", "random-load", "random-density", "custom")


@dataclass
class ExperimentSpec:
    name: str
    axis: str
    values: list
    base: SimConfig = field(default_factory=SimConfig)
    policies: list = field(default_factory=lambda: [PolicyKind.MLSA])
    runs_per_point: int = 100
    seed: int = 0
    parallelism: int = 1
    out: Optional[str] = None

    def point_config(self, value, policy, run_seed) -> SimConfig:
        base = self.base
        if self.axis == "bandwidth":
            bw = tuple(value) if isinstance(value, (list, tuple)) else float(value)
            base = base.replace(traffic=dataclasses.replace(base.traffic, bandwidth=bw))
        elif self.axis == "n_aps":
            base = base.replace(scenario=dataclasses.replace(base.scenario, n_aps=int(value)))
        elif self.axis == "stations_per_ap":
            spa = tuple(value) if isinstance(value, (list, tuple)) else int(value)
            base = base.replace(scenario=dataclasses.replace(base.scenario, stations_per_ap=spa))
        else:
            raise ValueError(f"unknown sweep axis {self.axis!r}")
        return base.replace(policy=PolicyKind.parse(policy), seed=int(run_seed))

    @property
    def n_simulations(self) -> int:
        return len(self.values) * len(self.policies) * self.runs_per_point


def preset(name: str, runs_per_point: int = 100) -> ExperimentSpec:
    """The four evaluation setups, with their fixed parameters."""
    if name == "controlled-load":
        base = SimConfig(scenario=ScenarioSpec(topology="inline-3", stations_per_ap=20, spacing=15.0))
        return ExperimentSpec(name, "bandwidth", [1, 2, 3, 4, 5, 6, 7, 8], base,
                              [PolicyKind.SL_RANDOM, PolicyKind.MLSA], runs_per_point)
    if name == "controlled-density":
        base = SimConfig(scenario=ScenarioSpec(topology="inline-3", spacing=15.0),
                         traffic=TrafficSpec(bandwidth=(2.0, 8.0)))
        return ExperimentSpec(name, "stations_per_ap", [5, 10, 15, 20, 25, 30], base,
                              [PolicyKind.MLSA, PolicyKind.SLCI], runs_per_point)
    if name == "random-load":
        base = SimConfig(scenario=ScenarioSpec(area=(45.0, 45.0), n_aps=10, stations_per_ap=(15, 25)))
        return ExperimentSpec(name, "bandwidth", [1, 2, 3, 4, 5, 6, 7, 8], base,
                              [PolicyKind.MLSA, PolicyKind.SLCI, PolicyKind.MCAA], runs_per_point)
    if name == "random-density":
        # flow bandwidth as in the controlled density study
        base = SimConfig(scenario=ScenarioSpec(area=(45.0, 45.0), stations_per_ap=(15, 25)),
                         traffic=TrafficSpec(bandwidth=(2.0, 8.0)))
        return ExperimentSpec(name, "n_aps", [5, 10, 20, 40], base,
                              [PolicyKind.MLSA, PolicyKind.SLCI, PolicyKind.MCAA], runs_per_point)
    raise ValueError(f"unknown experiment preset {name!r}, valid: {', '.join(PRESETS[:-1])}")


def derive_seed(master: int, run: int) -> int:
    """Per-run seed from the master seed and run index only.

    Every sweep point and policy reuses the same run seeds, so adding points
    never shifts existing runs and policies are compared on identical draws.
    """
    ss = np.random.SeedSequence(int(master), spawn_key=(int(run),))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


_EXPERIMENT_KEYS = {"name", "axis", "values", "runs_per_point", "policies", "seed", "parallelism", "out"}


def _parse_experiment(data: dict, errors: list) -> ExperimentSpec:
    exp = data.get("experiment") or {}
    r = _Reader(exp, errors, "experiment.", _EXPERIMENT_KEYS)
    name = r.choice("name", "custom", PRESETS)
    spec = preset(name) if name != "custom" else ExperimentSpec("custom", "bandwidth", [])
    # explicit sim keys in the file override the preset's base
    sim_data = {k: v for k, v in data.items() if k != "experiment"}
    base = _parse_sim(_merge(spec.base.to_dict(), sim_data), errors, "", extra_keys=("experiment",))
    axis = r.choice("axis", spec.axis, AXES)
    # a plain simulation config is a single point at its own load
    values = exp.get("values", spec.values or [_point_value(base, axis)])
    if not isinstance(values, list) or not values:
        errors.append("experiment.values: sweep values must be a non-empty list")
        values = spec.values
    policies = exp.get("policies", None)
    if policies is None:
        policies = spec.policies if name != "custom" else [base.policy]
    parsed = []
    for p in policies if isinstance(policies, list) else [policies]:
        try:
            parsed.append(PolicyKind.parse(p))
        except ValueError as exc:
            errors.append(f"experiment.policies: {exc}")
    return ExperimentSpec(
        name=name, axis=axis, values=values, base=base, policies=parsed or [base.policy],
        runs_per_point=r.num("runs_per_point", spec.runs_per_point, integer=True, lo=1),
        seed=r.num("seed", 0, integer=True, nonneg=True),
        parallelism=r.num("parallelism", 1, integer=True, lo=1),
        out=exp.get("out"),
    )


def _point_value(base: SimConfig, axis: str):
    if axis == "bandwidth":
        bw = base.traffic.bandwidth
        return list(bw) if isinstance(bw, (tuple, list)) else bw
    if axis == "n_aps":
        return base.scenario.n_aps
    spa = base.scenario.stations_per_ap
    return list(spa) if isinstance(spa, (tuple, list)) else spa


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def validate_config(path) -> list:
    """Every problem found in an experiment/simulation config file; empty when valid."""
    try:
        data = load_yaml(path)
    except ConfigError as exc:
        return exc.errors
    except OSError as exc:
        return [f"{path}: {exc.strerror or exc}"]
    if not isinstance(data, dict):
        return [f"{path}: top level must be a mapping"]
    errors = []
    spec = _parse_experiment(data, errors)
    errors.extend(_check_sweep(spec))
    if spec.base.scenario_file and not os.path.exists(spec.base.scenario_file):
        errors.append(f"scenario_file: {spec.base.scenario_file} does not exist")
    return errors


def _check_sweep(spec: ExperimentSpec) -> list:
    errors = []
    for v in spec.values:
        if spec.axis == "bandwidth":
            ok = (isinstance(v, (int, float)) and v >= 0) or (
                isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v) and 0 <= v[0] <= v[1])
        elif spec.axis == "n_aps":
            ok = isinstance(v, int) and v >= 1
        else:
            ok = (isinstance(v, int) and v >= 0) or (isinstance(v, list) and len(v) == 2)
        if not ok:
            errors.append(f"experiment.values: {v!r} is not a valid {spec.axis} value")
    return errors


def load_experiment(path) -> ExperimentSpec:
    data = load_yaml(path)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    errors = []
    spec = _parse_experiment(data, errors)
    errors.extend(_check_sweep(spec))
    if errors:
        raise ConfigError(errors)
    return spec


def _check_output_dir(out) -> Path:
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc.strerror or exc}") from None
    return out


def run_experiment(spec: ExperimentSpec, out=None, progress=None) -> dict:
    """Run every (point, policy, run) simulation and write CSV + manifest files.

    Returns ``{"reports": {(point, policy): [MetricsReport...]}, "failures": [...], "out": Path}``.
    """
    if not spec.values:
        raise ConfigError("experiment.values: sweep values must be a non-empty list")
    out = _check_output_dir(out or spec.out or "results")
    seeds = [derive_seed(spec.seed, r) for r in range(spec.runs_per_point)]

    jobs, keys = [], []
    for p, value in enumerate(spec.values):
        for policy in spec.policies:
            for r, s in enumerate(seeds):
                jobs.append(spec.point_config(value, policy, s))
                keys.append((p, PolicyKind.parse(policy).value, r))
    log.info("%s: %d simulations", spec.name, len(jobs))
    results = run_batch(jobs, spec.parallelism)

    reports, failures, summary, detail = {}, [], [], []
    for (p, policy, r), res in zip(keys, results):
        if isinstance(res, RunFailure):
            failures.append({"point": p, "policy": policy, "run": r, "seed": seeds[r], "error": res.error})
            continue
        res.meta["point_value"] = spec.values[p]
        reports.setdefault((p, policy), []).append(res)
        summary.append(summary_row(res, p, r))
        detail.extend(ap_rows(res, p, r))
    write_csv(out / "summary.csv", SUMMARY_COLUMNS, summary)
    write_csv(out / "ap_detail.csv", AP_COLUMNS, detail)
    for (p, policy), reps in sorted(reports.items()):
        xs, fs = drop_ratio_cdf(reps).steps()
        write_csv(out / f"drop_cdf_p{p}_{policy}.csv", ("drop_ratio", "cdf"),
                  [{"drop_ratio": f"{x:.10g}", "cdf": f"{f:.10g}"} for x, f in zip(xs, fs)])
    manifest = {
        "tool": "mlosim",
        "version": __version__,
        "experiment": spec.name,
        "axis": spec.axis,
        "values": spec.values,
        "policies": [PolicyKind.parse(p).value for p in spec.policies],
        "runs_per_point": spec.runs_per_point,
        "master_seed": spec.seed,
        "run_seeds": seeds,
        "base_config": spec.base.to_dict(),
        "failures": failures,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return {"reports": reports, "failures": failures, "out": out}
