# Random 45x45 m deployments, 10 APs: how the three multi-link policies cope
# as the per-flow load grows.
#
# Run: python demos/policy_comparison.py [runs_per_point]

import sys

from mlosim.engine import run_batch
from mlosim.experiments import derive_seed, preset
from mlosim.metrics import allocation_efficiency, drop_ratio_cdf, satisfaction_probability

runs = int(sys.argv[1]) if len(sys.argv) > 1 else 5
spec = preset("random-load")
seeds = [derive_seed(0, r) for r in range(runs)]

print(f"{'load':>4} {'policy':>6} {'P(s>=.95)':>10} {'efficiency':>10} {'p75 drop':>9}")
for load in (2, 5, 8):
    for policy in spec.policies:
        reports = run_batch([spec.point_config(load, policy, s) for s in seeds])
        print(f"{load:4} {policy.value:>6} {satisfaction_probability(reports):10.2f} "
              f"{allocation_efficiency(reports):10.4f} {drop_ratio_cdf(reports).percentile(75):9.4f}")

# Every policy sees the same deployments and arrival processes for a given
# seed, so differences between rows come from the allocation decision alone.
