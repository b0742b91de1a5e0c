#!/usr/bin/env python3
"""The modified Word Mover's metric: distance-based unit weights, negative
log-similarity transport costs, exact solve, and the WMS clamping rules.
"""

import numpy as np

from usagekit import TransportProblem, solve_transport, unit_weights, wmd, wms_example
from usagekit import deterministic_similarity
from usagekit.wms import WmsConfig

sim = deterministic_similarity()
cfg = WmsConfig()

pred = ("grill parties", "smoke vegetables")
ref = ("grilling", "charge phones")

weights_pred = unit_weights(pred, sim)
weights_ref = unit_weights(ref, sim)
print("unit weights (pred):", np.round(weights_pred, 4))
print("unit weights (ref): ", np.round(weights_ref, 4))

costs = np.array([[-np.log(max(sim(x, y), cfg.sim_floor)) for y in ref] for x in pred])
print("cost matrix (-ln sim):")
print(np.round(costs, 3))

plan, objective = solve_transport(TransportProblem(weights_pred, weights_ref, costs))
print("optimal plan:")
print(np.round(plan, 4))
print(f"WMD = {objective:.4f}")
print(f"WMD of a set against itself = {wmd(pred, pred, cfg, sim):.4f}")
print()

# WMS: negative log of WMD, clamped into [0, 1]
for label, p, refs in [
    ("identical sets      ", pred, (pred,)),
    ("related sets        ", pred, (ref,)),
    ("both empty          ", (), ((),)),
    ("one empty           ", pred, ((),)),
]:
    print(f"WMS {label} = {wms_example(p, refs, cfg, sim):.4f}")
