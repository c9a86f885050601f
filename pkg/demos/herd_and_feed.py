"""A herd heading for a distant goal, then a feed of contrarian voices.

Runs the paired injection experiment for a few seeds and prints how
alignment, spread and peeling change once the feed is switched on.
"""
import numpy as np

from stampede.harness import compare_rows, compare_summary
from stampede.presets import injection_pair

# %% paired runs: same seeds, feed switched on at step 200 in the treatment arm
control, treatment = injection_pair(seeds=range(6), steps=400)
rows = compare_rows(control, treatment)

print(f"{'seed':>4} {'phi ctrl':>9} {'phi feed':>9} {'PR ctrl':>8} {'PR feed':>8} {'peeled':>6}")
for r in rows:
    print(f"{r['seed']:>4} {r['phi_control']:9.3f} {r['phi_treatment']:9.3f} "
          f"{r['participation_ratio_control']:8.3f} {r['participation_ratio_treatment']:8.3f} "
          f"{r['peeled_treatment']:>6}")

# %% medians across seeds
summ = compare_summary("swarm", rows)
for key in ("median_delta_phi", "median_delta_participation_ratio",
            "median_peel_rate_low_rigidity_treatment", "median_peel_rate_high_rigidity_treatment"):
    print(f"{key:45s} {summ[key]}")

# the feed lowers alignment; low-rigidity agents are the ones that peel off
print("alignment lost in", int(np.sum([r["delta_phi"] < 0 for r in rows])), "of", len(rows), "seeds")
