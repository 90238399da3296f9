"""Per-device AIMD update rules and the running-average recursion.

All rules are pure functions mapping old values to new ones; the simulation
engine owns sequencing. Scalars and numpy arrays are both accepted, so the
same kernels drive single-device unit tests and whole-population updates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .costs import CostFunction

#: below this, an average allocation is treated as degenerate in the
#: back-off scaling rule (division would blow up)
AVERAGE_FLOOR = 1e-9

#: clamp margin keeping the scaling factor strictly inside (0, 1)
LAMBDA_MARGIN = 1e-6


class DegenerateAverageError(ValueError):
    """Average allocation too close to zero for the scaling rule."""


@dataclass(frozen=True)
class ResourceParams:
    """Constants of one shared resource.

    gamma_cap is the capacity fraction whose crossing triggers an event
    (1.0 = plain capacity); gamma_norm is the normalization constant that
    keeps the back-off scaling factor inside (0, 1).
    """

    capacity: float
    alpha: float
    beta: float
    gamma_cap: float = 1.0
    gamma_norm: float = 1.0

    def __post_init__(self):
        if not self.capacity > 0:
            raise ValueError(f"capacity must be positive, got {self.capacity}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must be in [0, 1), got {self.beta}")
        if not 0.0 < self.gamma_cap <= 1.0:
            raise ValueError(f"gamma_cap must be in (0, 1], got {self.gamma_cap}")
        if not self.gamma_norm > 0:
            raise ValueError(f"gamma_norm must be positive, got {self.gamma_norm}")


@dataclass(frozen=True)
class DeviceState:
    """Snapshot of one device: allocations, running averages, step count."""

    id: int
    x: np.ndarray
    x_bar: np.ndarray
    k: int
    f: CostFunction


@dataclass
class ClampStats:
    """Counts of scaling-factor clamps, for run diagnostics."""

    low: int = 0
    high: int = 0

    def total(self) -> int:
        return self.low + self.high


def additive_increase(x, alpha):
    """Linear demand growth: x + alpha."""
    return x + alpha


def scaling_factor(gamma_norm, grad, x_bar_j, stats: ClampStats | None = None):
    """Back-off scaling factor: gamma_norm * grad / x_bar_j, kept inside (0, 1).

    The raw ratio is clipped into [LAMBDA_MARGIN, 1 - LAMBDA_MARGIN]; clips
    are counted in ``stats`` when given, so configurations whose
    normalization is too loose are observable. Raises DegenerateAverageError
    when any average is at or below AVERAGE_FLOOR.
    """
    x_bar_arr = np.asarray(x_bar_j, dtype=float)
    if np.any(x_bar_arr <= AVERAGE_FLOOR):
        raise DegenerateAverageError(
            f"average allocation <= {AVERAGE_FLOOR} in scaling factor"
        )
    raw = gamma_norm * np.asarray(grad, dtype=float) / x_bar_arr
    lam = np.clip(raw, LAMBDA_MARGIN, 1.0 - LAMBDA_MARGIN)
    if stats is not None:
        stats.low += int(np.count_nonzero(raw < LAMBDA_MARGIN))
        stats.high += int(np.count_nonzero(raw > 1.0 - LAMBDA_MARGIN))
    return float(lam) if lam.ndim == 0 else lam


def md_deterministic(x, lam, beta):
    """Synchronous back-off: (lam * beta + (1 - lam)) * x.

    The multiplier lies in (beta, 1) for lam in (0, 1), so the decrease is
    never deeper than a full beta back-off.
    """
    return (lam * beta + (1.0 - lam)) * x


def md_stochastic(x, lam, beta, rng: np.random.Generator):
    """Randomized back-off: beta * x with probability lam, else x unchanged.

    Elementwise for arrays (one draw per entry). Draws come only from the
    supplied generator, so the caller controls reproducibility.
    """
    x_arr = np.asarray(x, dtype=float)
    u = rng.random(size=x_arr.shape)
    out = np.where(u < lam, beta * x_arr, x_arr)
    return float(out) if out.ndim == 0 else out


def update_average(x_bar, x_next, k):
    """Running-average step: ((k+1) x_bar + x_next) / (k+2).

    After starting from x_bar(0) = x(0), the iterate equals the arithmetic
    mean of x(0..k+1).
    """
    return (k + 1.0) / (k + 2.0) * x_bar + x_next / (k + 2.0)
