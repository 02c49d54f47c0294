# Three BSSs in a row, all on the same channels. The middle AP hears both
# neighbours on 2.4 GHz, the outer two don't hear each other, so under heavy
# load the middle one is starved on that band.
#
# Run: python demos/flow_in_the_middle.py

import numpy as np

from mlosim.engine import run_batch
from mlosim.experiments import derive_seed, preset
from mlosim.medium import ContentionGraph, solve_airtime

# %% The medium model in isolation: path A - B - C, everybody wants 80% airtime
path = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=bool)
sol = solve_airtime(ContentionGraph(path), [0.8, 0.8, 0.8])
print("served airtime A/B/C:", sol.served.round(3), "after", sol.iterations, "iterations")

# %% Full simulation, equal split over all links (MLSA)
spec = preset("controlled-load")
seeds = [derive_seed(0, r) for r in range(20)]
for load in (4, 8, 12):
    reports = run_batch([spec.point_config(load, "MLSA", s) for s in seeds])
    occ = np.mean([r.occupancy for r in reports], axis=0)
    sat = np.mean([r.ap_satisfaction for r in reports], axis=0)
    print(f"{load:2} Mbps  AP_B occupancy 2.4/5/6 GHz {occ[1].round(2)}  satisfaction A/B/C {sat.round(2)}")

# %% Same load, single-link stations on a random interface
reports = run_batch([spec.point_config(12, "SL_RANDOM", s) for s in seeds])
print("SL_RANDOM 12 Mbps satisfaction A/B/C", np.mean([r.ap_satisfaction for r in reports], axis=0).round(2))
