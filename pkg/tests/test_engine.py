import numpy as np
import pytest

from mlosim.config import SimConfig
from mlosim.engine import RunFailure, Simulation, make_scenario, run, run_batch
from mlosim.policy import PolicyKind
from mlosim.scenario import ScenarioSpec
from mlosim.traffic import TrafficSpec

SMALL = SimConfig(duration=30.0, scenario=ScenarioSpec(area=(20.0, 20.0), n_aps=3, stations_per_ap=(4, 6)),
                  traffic=TrafficSpec(bandwidth=(2.0, 8.0)))


def _same(a, b):
    for f in ("ap_satisfaction", "ap_throughput", "occupancy", "flow_efficiency", "flow_satisfaction"):
        np.testing.assert_array_equal(getattr(a, f), getattr(b, f))
    assert (a.achieved_mbit, a.required_mbit, a.n_arrivals) == (b.achieved_mbit, b.required_mbit, b.n_arrivals)


def test_single_light_flow_fully_served():
    cfg = SimConfig(scenario=ScenarioSpec(n_aps=1, stations_per_ap=1), traffic=TrafficSpec(bandwidth=1.0))
    rep = run(cfg)
    assert rep.n_arrivals > 10
    assert rep.satisfaction == 1.0
    assert rep.drop_ratio == pytest.approx(0.0, abs=1e-12)
    assert rep.nonconverged_solves == 0


def test_run_is_deterministic():
    _same(run(SMALL.replace(seed=3)), run(SMALL.replace(seed=3)))
    assert run(SMALL.replace(seed=4)).achieved_mbit != run(SMALL.replace(seed=3)).achieved_mbit


@pytest.mark.parametrize("policy", list(PolicyKind))
def test_run_invariants(policy):
    cfg = SMALL.replace(policy=policy, seed=11, traffic=TrafficSpec(bandwidth=(10.0, 30.0)))
    rep = run(cfg)
    assert rep.n_arrivals == rep.n_departures + rep.n_active_end
    assert np.all(rep.ap_achieved_mbit <= rep.ap_required_mbit * (1 + 1e-9))
    assert np.all((rep.flow_efficiency >= 0) & (rep.flow_efficiency <= 1))
    assert np.all((rep.ap_satisfaction >= 0) & (rep.ap_satisfaction <= 1))
    assert np.all((rep.occupancy >= 0) & (rep.occupancy <= 1))
    # per-flow and per-interface time integrals agree
    assert rep.node_achieved_mbit == pytest.approx(rep.achieved_mbit, rel=1e-6)
    assert rep.ap_throughput.sum() * cfg.duration == pytest.approx(rep.achieved_mbit, rel=1e-6)


def test_warmup_excludes_early_traffic():
    full = run(SMALL.replace(seed=2))
    warm = run(SMALL.replace(seed=2, warmup=10.0))
    assert warm.n_arrivals == full.n_arrivals
    assert warm.required_mbit < full.required_mbit
    assert warm.node_achieved_mbit == pytest.approx(warm.achieved_mbit, rel=1e-6)


def test_events_stay_inside_horizon():
    sim = Simulation(SMALL.replace(seed=5), trace=True)
    sim.run()
    times = [t for t, *_ in sim.trace]
    assert times == sorted(times)
    assert all(0 <= t <= SMALL.duration for t in times)


def test_sl_random_stations_attached():
    sim = Simulation(SMALL.replace(policy=PolicyKind.SL_RANDOM, seed=1))
    assert all(s.attachment in s.enabled for s in sim.scenario.stations)
    sim.run()


def test_scenario_shared_across_policies():
    # the scenario stream does not depend on the policy
    a = make_scenario(SMALL.replace(seed=8, policy=PolicyKind.SLCI))
    b = make_scenario(SMALL.replace(seed=8, policy=PolicyKind.MCAA))
    assert a.dumps() == b.dumps()


def test_scenario_file(tmp_path):
    sc = make_scenario(SMALL.replace(seed=6))
    path = tmp_path / "sc.json"
    sc.save(path)
    _same(run(SMALL.replace(seed=6, scenario_file=str(path))), run(SMALL.replace(seed=6)))


def test_run_batch_order_and_parallelism():
    cfgs = [SMALL.replace(seed=s, duration=10.0) for s in range(4)]
    seq = run_batch(cfgs, 1)
    par = run_batch(cfgs, 2)
    assert [r.seed for r in seq] == [0, 1, 2, 3]
    for a, b in zip(seq, par):
        _same(a, b)


def test_run_batch_empty_and_failures():
    assert run_batch([], 4) == []
    bad = SMALL.replace(scenario_file="/nonexistent/scenario.json")
    out = run_batch([SMALL.replace(duration=5.0), bad, SMALL.replace(duration=5.0, seed=1)])
    assert isinstance(out[1], RunFailure) and out[1].index == 1
    assert "FileNotFoundError" in out[1].error
    assert not isinstance(out[0], RunFailure) and not isinstance(out[2], RunFailure)
