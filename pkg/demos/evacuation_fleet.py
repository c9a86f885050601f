"""Evacuation over a ridge road with a fire on the direct route.

A homogeneous fleet of hazard-blind vehicles keeps driving into the fire
until the wreck count triggers a broadcast closure.  Mixing in vehicles
that stop and block the road caps the losses and forces early replans.
"""
import numpy as np

from stampede.routing import run_scenario
from stampede.presets import fleet_pair, ridge_scenario

# %% one scripted stall: four vehicles then a blocker
res = run_scenario(ridge_scenario(scripted_models=["A"] * 4 + ["B"], p_block=1.0))
for e in res.events[:20]:
    print(e.t_seconds, e.event, e.edge_id, e.vehicle_id, e.detail)
print(res.summary)

# %% many seeds, homogeneous vs diverse fleet
homog, diverse = fleet_pair(seeds=range(20))
lost_h = [run_scenario(homog.scenario_for(s)).destroyed for s in homog.seeds]
lost_d = [run_scenario(diverse.scenario_for(s)).destroyed for s in diverse.seeds]
print("median destroyed  homogeneous", np.median(lost_h), " diverse", np.median(lost_d))
