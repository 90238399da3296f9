"""Centralized solvers for the capacity-constrained social-cost minimum.

Two independent routes to the same optimum: a dual bisection that exploits
additive separability across resources (exact up to bisection tolerance),
and a projected-gradient method that only needs values and gradients. Either
result carries a KKT-style residual so callers can certify it.

Cost objects follow the same small protocol as elsewhere: ``value(x)`` and
``gradient(x)``/``partial(x, j)`` on length-m vectors, plus a truthy
``separable`` attribute when cross-partials vanish.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .costs import CostEnsemble, CostFunction


class UnsupportedFunctionError(ValueError):
    """The separable solver was given a function it cannot decouple."""


class BracketError(RuntimeError):
    """Dual bisection could not bracket the capacity (degenerate instance)."""


@dataclass
class OptimalAllocation:
    """Solver output: allocations, per-resource multipliers, certificate data."""

    x_star: np.ndarray      # (n, m)
    mu: np.ndarray          # (m,)
    kkt_residual: float
    iterations: int
    converged: bool = True


def _derivative_spread_term(x_col, g_col, capacity, active_threshold):
    active = x_col > active_threshold * capacity
    if not np.any(active):
        return 0.0
    g_act = g_col[active]
    spread = float(g_act.max() - g_act.min())
    if spread == 0.0:
        return 0.0
    mean = float(g_act.mean())
    if mean <= 0.0:
        return np.inf
    return spread / mean


def _residual_from_grads(x, grads, capacities, active_threshold):
    worst = 0.0
    for j, cap in enumerate(capacities):
        feas = abs(float(x[:, j].sum()) - cap) / cap
        spread = _derivative_spread_term(x[:, j], grads[:, j], cap, active_threshold)
        worst = max(worst, feas, spread)
    return worst


def kkt_residual(functions, x, capacities, active_threshold: float = 1e-9) -> float:
    """Distance-to-optimality proxy for an allocation matrix.

    Per resource, the larger of the relative feasibility gap and the
    normalized derivative spread (max minus min over devices holding more
    than ``active_threshold`` of capacity, divided by the mean derivative);
    the result is the max over resources. Zero at the exact optimum.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("allocation matrix has a negative component")
    capacities = np.asarray(capacities, dtype=float)
    if x.shape != (len(functions), len(capacities)):
        raise ValueError(
            f"allocation shape {x.shape} does not match "
            f"({len(functions)}, {len(capacities)})"
        )
    grads = np.stack([np.asarray(f.gradient(x[i]), dtype=float) for i, f in enumerate(functions)])
    return _residual_from_grads(x, grads, capacities, active_threshold)


def _invert_partial(f, j, m, mu, upper, iters):
    """Solve d f / d x_j = mu for x_j in [0, upper] by bisection.

    Relies on separability: other coordinates are held at zero. The partial
    is nondecreasing, zero at zero, so the bracket is valid whenever
    the partial at ``upper`` exceeds ``mu``; otherwise the inverse saturates.
    """
    point = np.zeros(m)
    point[j] = upper
    if float(f.partial(point, j)) <= mu:
        return upper
    lo, hi = 0.0, upper
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        point[j] = mid
        if float(f.partial(point, j)) <= mu:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _family_demand(coeffs_j, mu, cap, iters):
    """Vectorized inverse derivative for a column of family coefficients.

    ``coeffs_j`` holds the (n,) odd-term coefficients (t, t^3, t^5, t^7) of
    every device's derivative on one resource; all are nonnegative, so the
    derivative is increasing and one shared bisection inverts all devices.
    """
    c1, c3, c5, c7 = coeffs_j

    def deriv(t):
        t2 = t * t
        return ((c7 * t2 + c5) * t2 + c3) * t2 * t + c1 * t

    n = c1.shape[0]
    sat = deriv(np.full(n, cap)) <= mu
    lo = np.zeros(n)
    hi = np.full(n, cap)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = deriv(mid) <= mu
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return np.where(sat, cap, 0.5 * (lo + hi))


def solve_separable(functions, capacities, tol: float = 1e-8) -> OptimalAllocation:
    """Dual bisection per resource: equalize derivatives, meet capacity exactly.

    For each resource, drives the common derivative level mu so that the sum
    of the per-device inverse derivatives hits the capacity within
    ``tol * capacity``. Every supplied function must declare itself separable.
    """
    functions = list(functions)
    if not functions:
        raise ValueError("need at least one cost function")
    for f in functions:
        if not getattr(f, "separable", False):
            raise UnsupportedFunctionError(
                "solve_separable needs additively separable costs; "
                "use solve_projected_gradient instead"
            )
    capacities = np.asarray(capacities, dtype=float)
    if np.any(capacities <= 0):
        raise ValueError("capacities must be positive")
    n, m = len(functions), len(capacities)
    inner_iters = int(np.ceil(np.log2(max(n, 2) / tol))) + 5
    x_star = np.zeros((n, m))
    mu = np.zeros(m)
    outer_total = 0

    family_coeffs = None
    if m == 3 and all(isinstance(f, CostFunction) for f in functions):
        family_coeffs = CostEnsemble(functions).gradient_coefficients

    for j, cap in enumerate(capacities):
        point = np.zeros(m)
        point[j] = cap
        mu_hi = max(float(f.partial(point, j)) for f in functions)
        if mu_hi <= 0.0:
            raise BracketError(f"resource {j}: all derivatives vanish up to capacity")

        if family_coeffs is not None:
            coeffs_j = tuple(g[:, j] for g in family_coeffs)

            def demand(level):
                return _family_demand(coeffs_j, level, cap, inner_iters)

        else:

            def demand(level):
                return np.array(
                    [_invert_partial(f, j, m, level, cap, inner_iters) for f in functions]
                )

        # make sure the upper end over-supplies; expand if numerically short
        for _ in range(64):
            if demand(mu_hi).sum() >= cap:
                break
            mu_hi *= 2.0
        else:
            raise BracketError(f"resource {j}: could not bracket capacity")

        mu_lo = 0.0
        xs = None
        for _ in range(200):
            outer_total += 1
            mid = 0.5 * (mu_lo + mu_hi)
            xs = demand(mid)
            gap = xs.sum() - cap
            if abs(gap) <= tol * cap:
                mu[j] = mid
                break
            if gap > 0:
                mu_hi = mid
            else:
                mu_lo = mid
        else:
            raise BracketError(
                f"resource {j}: dual bisection did not reach tolerance {tol}"
            )
        x_star[:, j] = xs

    residual = kkt_residual(functions, x_star, capacities)
    return OptimalAllocation(
        x_star=x_star, mu=mu, kkt_residual=residual, iterations=outer_total
    )


def project_capacity_simplex(v, capacity: float) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum(x) = capacity} (sort-based)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    ks = np.arange(1, v.size + 1)
    rho = np.nonzero(u + (capacity - css) / ks > 0)[0][-1]
    tau = (capacity - css[rho]) / (rho + 1)
    return np.maximum(v + tau, 0.0)


def solve_projected_gradient(
    functions,
    capacities,
    tol: float = 1e-6,
    max_iters: int = 50_000,
    x0: np.ndarray | None = None,
) -> OptimalAllocation:
    """Projected gradient descent on the product of capacity simplices.

    Backtracking line search against the usual quadratic upper bound; stops
    as soon as the KKT residual drops to ``tol`` (checked before the first
    step, so an optimal start returns at iteration 0). Hitting ``max_iters``
    returns the best iterate flagged ``converged=False``.
    """
    functions = list(functions)
    if not functions:
        raise ValueError("need at least one cost function")
    capacities = np.asarray(capacities, dtype=float)
    if np.any(capacities <= 0):
        raise ValueError("capacities must be positive")
    n, m = len(functions), len(capacities)

    if x0 is None:
        x = np.tile(capacities / n, (n, 1))
    else:
        x = np.asarray(x0, dtype=float).copy()
        if x.shape != (n, m):
            raise ValueError(f"x0 shape {x.shape} does not match ({n}, {m})")
        for j in range(m):
            x[:, j] = project_capacity_simplex(x[:, j], capacities[j])

    def total_cost(mat):
        return float(sum(f.value(mat[i]) for i, f in enumerate(functions)))

    def grad_matrix(mat):
        return np.stack(
            [np.asarray(f.gradient(mat[i]), dtype=float) for i, f in enumerate(functions)]
        )

    fx = total_cost(x)
    grads = grad_matrix(x)
    step = 1.0
    for it in range(max_iters + 1):
        residual = _residual_from_grads(x, grads, capacities, 1e-9)
        if residual <= tol:
            return OptimalAllocation(
                x_star=x, mu=_mean_active_gradient(x, grads, capacities),
                kkt_residual=residual, iterations=it, converged=True,
            )
        if it == max_iters:
            break
        while True:
            cand = np.empty_like(x)
            for j in range(m):
                cand[:, j] = project_capacity_simplex(x[:, j] - step * grads[:, j], capacities[j])
            diff = cand - x
            f_cand = total_cost(cand)
            bound = fx + float((grads * diff).sum()) + float((diff * diff).sum()) / (2.0 * step)
            if f_cand <= bound + 1e-15 * max(1.0, abs(fx)):
                break
            step *= 0.5
            if step < 1e-18:
                break
        x, fx = cand, f_cand
        grads = grad_matrix(x)
        step *= 1.25

    residual = _residual_from_grads(x, grads, capacities, 1e-9)
    return OptimalAllocation(
        x_star=x, mu=_mean_active_gradient(x, grads, capacities),
        kkt_residual=residual, iterations=max_iters, converged=False,
    )


def _mean_active_gradient(x, grads, capacities, active_threshold=1e-9):
    """Per-resource consensus derivative estimate (mean over active devices)."""
    mu = np.zeros(len(capacities))
    for j, cap in enumerate(capacities):
        active = x[:, j] > active_threshold * cap
        mu[j] = float(grads[active, j].mean()) if np.any(active) else 0.0
    return mu
