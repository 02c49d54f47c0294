"""Event-driven flow-level simulation of a multi-link WLAN deployment."""

from __future__ import annotations

import copy
import heapq
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import SimConfig
from .medium import N_INTERFACES, build_graph, free_airtime, node_index, occupancy, service_ratio, solve_airtime
from .metrics import MetricsReport, flow_satisfaction
from .policy import PolicyKind, allocate
from .scenario import Scenario, attach_single_link, build_scenario
from .traffic import next_on_off_cycle, required_airtime

log = logging.getLogger(__name__)

# SeedSequence spawn-key namespaces
_SCENARIO, _TRAFFIC, _ATTACH = 0, 1, 2

_ARRIVAL, _DEPARTURE = 1, 0


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(key)))


def make_scenario(config: SimConfig) -> Scenario:
    if config.scenario_file:
        return Scenario.load(config.scenario_file)
    return build_scenario(config.scenario, config.link_budget, config.phy.table(), stream(config.seed, _SCENARIO),
                          config.phy.n_ss, config.phy.guard_interval)


@dataclass
class _Flow:
    station: int
    ap: int
    bandwidth: float
    start: float
    nodes: list  # node index per sub-flow
    shares: list  # Mbps per sub-flow
    airtimes: list  # required airtime per sub-flow
    marks: list = field(default_factory=list)  # cumulative service ratio at start, per sub-flow


class Simulation:
    """One run. Use :func:`run` unless you need to inspect intermediate state."""

    def __init__(self, config: SimConfig, scenario: Scenario = None, trace: bool = False):
        self.config = config
        self.policy = PolicyKind.parse(config.policy)
        self.scenario = copy.deepcopy(scenario) if scenario is not None else make_scenario(config)
        self.per = config.phy.packet_error_rate
        self.link_rate = {
            (sta.id, k): config.phy.link_rate(r.rate) for sta in self.scenario.stations for k, r in sta.links.items()
        }
        self.graph = build_graph(self.scenario, config.link_budget)
        n = self.graph.n_nodes
        self.n_aps = len(self.scenario.aps)
        self.demand = np.zeros(n)
        self.load = np.zeros(n)  # Mbps of active sub-flows per node
        self.served = np.zeros(n)
        self.ratio = np.zeros(n)
        self.occ = np.zeros(n)
        # time integrals over the measured window
        self.cum_ratio = np.zeros(n)
        self.int_occupancy = np.zeros(n)
        self.int_throughput = np.zeros(n)
        self.node_flows = [dict() for _ in range(n)]
        self.now = 0.0
        self.trace = [] if trace else None
        self.events = []
        self._seq = 0
        self.n_solves = 0
        self.nonconverged = 0
        self.n_arrivals = 0
        self.n_departures = 0
        self.unservable = 0
        self.active = {}
        self.ap_sat_weighted = np.zeros(self.n_aps)
        self.ap_active_time = np.zeros(self.n_aps)
        self.ap_required = np.zeros(self.n_aps)
        self.ap_achieved = np.zeros(self.n_aps)
        self.flow_eff = []
        self.flow_sat = []
        self.rngs = {}
        self.pending = {}

        if self.policy is PolicyKind.SL_RANDOM:
            for sta in self.scenario.stations:
                if sta.links:
                    attach_single_link(sta, stream(config.seed, _ATTACH, sta.id))
        for sta in self.scenario.stations:
            if not sta.links:
                self.unservable += 1
                continue
            rng = stream(config.seed, _TRAFFIC, sta.id)
            self.rngs[sta.id] = rng
            self._schedule_cycle(sta.id, 0.0)

    # -- events ---------------------------------------------------------
    def _push(self, t, kind, station):
        self._seq += 1
        heapq.heappush(self.events, (t, station, kind, self._seq))

    def _schedule_cycle(self, station, t):
        off, on, bw = next_on_off_cycle(self.config.traffic, self.rngs[station])
        self.pending[station] = (on, bw)
        self._push(t + off, _ARRIVAL, station)

    def _advance(self, t):
        start = max(self.now, self.config.warmup)
        dt = t - start
        if dt > 0:
            self.cum_ratio += self.ratio * dt
            self.int_occupancy += self.occ * dt
            self.int_throughput += self.load * self.ratio * dt
        self.now = t

    def _resolve(self):
        sol = solve_airtime(self.graph, self.demand)
        self.n_solves += 1
        if not sol.converged:
            self.nonconverged += 1
            log.debug("airtime solve did not converge at t=%.6f", self.now)
        self.served = sol.served
        self.ratio = service_ratio(self.demand, self.served)
        self.occ = occupancy(self.graph, self.served)

    def _refresh_node(self, node):
        flows = self.node_flows[node].values()
        self.demand[node] = sum(a for a, _ in flows)
        self.load[node] = sum(b for _, b in flows)

    def _arrival(self, station):
        sta = self.scenario.stations[station]
        on, bw = self.pending.pop(station)
        rho = free_airtime(self.graph, self.served)
        enabled = [(k, rho[node_index(sta.ap_id, k)], self.link_rate[station, k]) for k in sta.enabled]
        shares = allocate(bw, enabled, self.policy, sta.attachment)
        flow = _Flow(station, sta.ap_id, bw, self.now, [], [], [])
        for (k, _, rate), share in zip(enabled, shares):
            if share <= 0:
                continue
            node = node_index(sta.ap_id, k)
            tau = required_airtime(share, rate, self.per)
            flow.nodes.append(node)
            flow.shares.append(share)
            flow.airtimes.append(tau)
            flow.marks.append(self.cum_ratio[node])
            self.node_flows[node][station] = (tau, share)
            self._refresh_node(node)
        self.active[station] = flow
        self.n_arrivals += 1
        self._push(self.now + on, _DEPARTURE, station)
        if self.trace is not None:
            self.trace.append((self.now, "arrival", station, tuple(shares)))
        self._resolve()

    def _close(self, flow, t):
        begin = max(flow.start, self.config.warmup)
        dur = t - begin
        for node in flow.nodes:
            del self.node_flows[node][flow.station]
            self._refresh_node(node)
        if dur <= 0:
            return
        got = [self.cum_ratio[n] - m for n, m in zip(flow.nodes, flow.marks)]
        achieved = sum(s * g for s, g in zip(flow.shares, got))
        required = flow.bandwidth * dur
        sat = flow_satisfaction([a * g for a, g in zip(flow.airtimes, got)], [a * dur for a in flow.airtimes])
        self.flow_sat.append(sat)
        self.flow_eff.append(min(1.0, achieved / required) if required > 0 else 1.0)
        self.ap_sat_weighted[flow.ap] += sat * dur
        self.ap_active_time[flow.ap] += dur
        self.ap_required[flow.ap] += required
        self.ap_achieved[flow.ap] += achieved

    def _departure(self, station):
        flow = self.active.pop(station)
        self._close(flow, self.now)
        self.n_departures += 1
        if self.trace is not None:
            self.trace.append((self.now, "departure", station, ()))
        self._resolve()
        self._schedule_cycle(station, self.now)

    def _on_warmup(self):
        # flows straddling the warm-up boundary are measured from here on
        for flow in self.active.values():
            flow.marks = [self.cum_ratio[n] for n in flow.nodes]

    # -- driver ---------------------------------------------------------
    def run(self) -> MetricsReport:
        horizon = self.config.duration
        warmup = self.config.warmup
        warm_done = warmup <= 0
        while self.events and self.events[0][0] <= horizon:
            t, station, kind, _ = heapq.heappop(self.events)
            if not warm_done and t >= warmup:
                self._advance(warmup)
                self._on_warmup()
                warm_done = True
            self._advance(t)
            if kind == _ARRIVAL:
                self._arrival(station)
            else:
                self._departure(station)
        if not warm_done:
            self._advance(warmup)
            self._on_warmup()
        self._advance(horizon)
        n_active = len(self.active)
        for station in sorted(self.active):
            self._close(self.active[station], horizon)
        return self._report(n_active)

    def _report(self, n_active) -> MetricsReport:
        window = self.config.duration - self.config.warmup
        with np.errstate(invalid="ignore", divide="ignore"):
            ap_sat = np.where(self.ap_active_time > 0, self.ap_sat_weighted / self.ap_active_time, 1.0)
        occ = (self.int_occupancy / window).reshape(self.n_aps, N_INTERFACES)
        thr = self.int_throughput.reshape(self.n_aps, N_INTERFACES).sum(axis=1) / window
        cfg = self.config
        bw = cfg.traffic.bandwidth
        return MetricsReport(
            seed=int(cfg.seed),
            policy=self.policy.value,
            duration=cfg.duration,
            ap_satisfaction=np.clip(ap_sat, 0.0, 1.0),
            ap_throughput=thr,
            ap_required_mbit=self.ap_required.copy(),
            ap_achieved_mbit=self.ap_achieved.copy(),
            occupancy=np.clip(occ, 0.0, 1.0),
            flow_efficiency=np.asarray(self.flow_eff, dtype=float),
            flow_satisfaction=np.asarray(self.flow_sat, dtype=float),
            required_mbit=float(self.ap_required.sum()),
            achieved_mbit=float(self.ap_achieved.sum()),
            node_achieved_mbit=float(self.int_throughput.sum()),
            n_arrivals=self.n_arrivals,
            n_departures=self.n_departures,
            n_active_end=n_active,
            unservable_stations=self.unservable,
            n_solves=self.n_solves,
            nonconverged_solves=self.nonconverged,
            meta={"load": bw if not isinstance(bw, (tuple, list)) else f"{bw[0]}-{bw[1]}",
                  "n_aps": self.n_aps, "n_stations": len(self.scenario.stations)},
        )


def run(config: SimConfig, scenario: Scenario = None, trace: bool = False) -> MetricsReport:
    """Simulate one configuration; deterministic given ``config`` (including its seed)."""
    return Simulation(config, scenario, trace).run()


@dataclass
class RunFailure:
    index: int
    error: str


def _run_safe(args):
    index, config = args
    try:
        return run(config)
    except Exception as exc:  # reported per index, the batch carries on
        log.warning("run %d failed: %s", index, exc)
        return RunFailure(index, f"{type(exc).__name__}: {exc}")


def run_batch(configs, parallelism: int = 1) -> list:
    """Run every config; order preserved, failures returned as :class:`RunFailure`."""
    jobs = list(enumerate(configs))
    if not jobs:
        return []
    if parallelism <= 1 or len(jobs) == 1:
        return [_run_safe(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(_run_safe, jobs, chunksize=max(1, len(jobs) // (4 * parallelism))))
