"""Adding dense local links to a loose flock tips it into a stampede.

Compares the first step labelled Stampede with and without a burst of
closest-pair links at step 100.
"""
import math

from stampede.harness import simulate_swarm
from stampede.presets import densification_pair

control, treatment = densification_pair(seeds=range(5))

for seed in control.seeds:
    a = simulate_swarm(control, seed).summary
    b = simulate_swarm(treatment, seed).summary
    ta = a["first_stampede_t"] if a["first_stampede_t"] is not None else math.inf
    tb = b["first_stampede_t"] if b["first_stampede_t"] is not None else math.inf
    print(f"seed {seed}: first Stampede step  plain={ta}  densified={tb}  "
          f"final degree fraction {a['final_mean_degree_fraction']:.2f} -> {b['final_mean_degree_fraction']:.2f}")
