#!/usr/bin/env python3
"""The four update rules in isolation.

Shows linear growth, the scaling factor that prices a device's back-off,
both back-off variants (synchronous deterministic vs coin-flip stochastic),
and the running-average recursion that the convergence claim is about.
"""

import numpy as np

from aimdalloc import (
    additive_increase,
    md_deterministic,
    md_stochastic,
    scaling_factor,
    update_average,
)

print("=== additive increase ===")
x = 0.0
path = []
for _ in range(8):
    x = additive_increase(x, 0.025)
    path.append(x)
print("8 steps of +0.025 from 0:", np.array2string(np.array(path), precision=3))

print("\n=== scaling factor ===")
lam = scaling_factor(1 / 90, grad=18.0, x_bar_j=0.4)
print(f"normalization 1/90, derivative 18, average 0.4 -> lambda = {lam}")
print("a device with a steep cost derivative (relative to what it already")
print("holds) is asked to give back more")

print("\n=== deterministic back-off ===")
for lam in (0.1, 0.5, 0.9):
    print(f"lambda={lam}: 2.0 -> {md_deterministic(2.0, lam, beta=0.7):.3f}")

print("\n=== stochastic back-off ===")
rng = np.random.default_rng(0)
draws = md_stochastic(np.full(100_000, 2.0), 0.5, 0.7, rng)
print(f"lambda=0.5, beta=0.7: mean of 1e5 draws = {draws.mean():.4f}")
print(f"deterministic rule at the same inputs  = {md_deterministic(2.0, 0.5, 0.7):.4f}")
print("(the deterministic rule is the stochastic rule's expectation)")

print("\n=== running average ===")
rng = np.random.default_rng(1)
xs = rng.random(2000)
x_bar = xs[0]
for k in range(len(xs) - 1):
    x_bar = update_average(x_bar, xs[k + 1], k)
print(f"recursion: {x_bar:.12f}")
print(f"direct mean: {xs.mean():.12f}")
