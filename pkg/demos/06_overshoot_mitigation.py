#!/usr/bin/env python3
"""Derating the event threshold to trim instantaneous overshoot.

With the threshold at full capacity, total demand briefly exceeds capacity
by up to one round of growth (n * alpha) before the broadcast lands. Firing
events at a fraction of capacity shifts the whole sawtooth down, trading a
little throughput for headroom.
"""

import dataclasses
from pathlib import Path

import numpy as np

from aimdalloc import parse_config, run

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "tourist_center.json"

base = dataclasses.replace(parse_config(CONFIG), steps=5000)
caps = np.array([p.capacity for p in base.resources])
grain = base.n * np.array([p.alpha for p in base.resources])

print("threshold   peak total demand        peak exceedance over capacity")
for gamma in (1.0, 0.95, 0.9):
    cfg = dataclasses.replace(
        base,
        resources=tuple(dataclasses.replace(p, gamma_cap=gamma) for p in base.resources),
    )
    trace = run(cfg, mode="deterministic")
    peak = trace.totals_inst.max(axis=0)
    exceed = peak - caps
    print(f"  {gamma:<8}  {np.array2string(peak, precision=2, floatmode='fixed'):<24} "
          f"{np.array2string(exceed, precision=2, floatmode='fixed')}")

print(f"\nhard bound at any threshold g: g * capacity + n * alpha")
print(f"one round of growth (n * alpha) per resource: "
      f"{np.array2string(grain, precision=3)}")
print("\nderating to 0.9 keeps instantaneous demand at or under capacity;")
print("the averages then settle near 0.9 * capacity instead of capacity")
