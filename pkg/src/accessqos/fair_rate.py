"""Weighted max-min (water-filling) allocation of excess bandwidth.

Given the excess capacity, per-flow non-conformant demands and weights,
find the normalized fair rate ``alpha`` such that

    excess = sum_i w_i * min(alpha, demand_i / w_i)

when the flows are saturated, and ``alpha = max_i demand_i / w_i`` when
they are not.
"""
from dataclasses import dataclass

import numpy as np


@dataclass
class FairRateProblem:
    excess_capacity_bps: float
    demands_bps: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.demands_bps = np.atleast_1d(np.asarray(self.demands_bps, dtype=float))
        self.weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if self.demands_bps.ndim != 1 or self.demands_bps.shape != self.weights.shape:
            raise ValueError("demands and weights must be vectors of equal length")
        if self.demands_bps.size == 0:
            raise ValueError("at least one flow is required")
        if np.any(self.weights <= 0) or not np.all(np.isfinite(self.weights)):
            raise ValueError("weights must be positive and finite")
        if np.any(self.demands_bps < 0) or not np.all(np.isfinite(self.demands_bps)):
            raise ValueError("demands must be non-negative and finite")
        if not self.excess_capacity_bps >= 0:
            raise ValueError("excess capacity must be non-negative")


@dataclass
class FairRateSolution:
    alpha: float
    allocations_bps: np.ndarray
    saturated: bool


def solve_alpha(problem):
    """Closed-form water-filling over flows sorted by demand per weight."""
    c = float(problem.excess_capacity_bps)
    d = problem.demands_bps
    w = problem.weights
    if d.sum() <= c:
        alpha = float(np.max(d / w))
        return FairRateSolution(alpha, d.copy(), False)

    order = np.argsort(d / w, kind="stable")
    levels = (d / w)[order]
    ds = d[order]
    ws = w[order]
    # flows [0, k) are capped at their demand, flows [k, n) share the rest
    capped = np.concatenate(([0.0], np.cumsum(ds)))
    free_w = np.concatenate((np.cumsum(ws[::-1])[::-1], [0.0]))
    candidates = (c - capped[:-1]) / free_w[:-1]
    # saturation guarantees the last candidate sits below the top level
    k = int(np.argmax(candidates <= levels))
    alpha = max(float(candidates[k]), 0.0)
    alloc = w * np.minimum(alpha, d / w)
    return FairRateSolution(float(alpha), alloc, True)


def fair_rate(excess_capacity_bps, demands_bps, weights):
    """Convenience wrapper returning a :class:`FairRateSolution`."""
    return solve_alpha(FairRateProblem(excess_capacity_bps, demands_bps, weights))


def residual(problem, alpha):
    d, w = problem.demands_bps, problem.weights
    return problem.excess_capacity_bps - float(np.sum(w * np.minimum(alpha, d / w)))
