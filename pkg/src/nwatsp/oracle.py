"""Exact ATSP on the metric closure, for small instances only."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import TooLarge, Unreachable
from .graph import Instance
from .lp import LpSolution

MAX_N = 15


def closure_matrix(weights) -> np.ndarray:
    """Shortest-path closure of a square weight matrix (``inf`` = no edge)."""
    d = np.array(weights, dtype=float)
    np.fill_diagonal(d, 0.0)
    for k in range(d.shape[0]):
        np.minimum(d, d[:, k, None] + d[None, k, :], out=d)
    return d


def _distances(problem):
    if isinstance(problem, Instance):
        return problem.closure
    return closure_matrix(problem)


def exact_atsp(problem) -> tuple[float, list[int]]:
    """Optimal tour weight and vertex order (starting at 0).

    ``problem`` is an :class:`Instance` or a square matrix of edge weights for
    a general (edge-weighted) digraph.  Subset dynamic programming over the
    closure, O(2^n n^2).
    """
    d = _distances(problem)
    n = d.shape[0]
    if n > MAX_N:
        raise TooLarge(f"exact solver is capped at n = {MAX_N}, got {n}")
    if not np.all(np.isfinite(d)):
        raise Unreachable("graph is not strongly connected")
    if n == 1:
        return 0.0, [0]
    full = 1 << (n - 1)  # subsets of vertices 1..n-1
    cost = np.full((full, n), np.inf)
    parent = np.full((full, n), -1, dtype=int)
    for j in range(1, n):
        cost[1 << (j - 1), j] = d[0, j]
    for mask in range(1, full):
        row = cost[mask]
        if not np.isfinite(row).any():
            continue
        # extend by every vertex k not yet in mask
        cand = row[:, None] + d  # cand[j, k]
        best_j = np.argmin(cand, axis=0)
        best = cand[best_j, np.arange(n)]
        for k in range(1, n):
            bit = 1 << (k - 1)
            if mask & bit:
                continue
            nm = mask | bit
            if best[k] < cost[nm, k]:
                cost[nm, k] = best[k]
                parent[nm, k] = best_j[k]
    last = full - 1
    totals = cost[last] + d[:, 0]
    totals[0] = np.inf
    j = int(np.argmin(totals))
    weight = float(totals[j])
    order = []
    mask = last
    while j > 0:
        order.append(j)
        pj = int(parent[mask, j])
        mask &= ~(1 << (j - 1))
        j = pj
    order.append(0)
    order.reverse()
    return weight, order


def brute_force_atsp(problem) -> float:
    """Minimum over all (n-1)! orders; reference for :func:`exact_atsp`."""
    d = _distances(problem)
    n = d.shape[0]
    best = np.inf
    for perm in itertools.permutations(range(1, n)):
        tour = (0,) + perm + (0,)
        best = min(best, sum(d[a, b] for a, b in zip(tour, tour[1:])))
    return float(best)


@dataclass(frozen=True)
class RelaxationCheck:
    ok: bool
    lp_value: float
    optimum: float


def relaxation_check(instance: Instance, lp: LpSolution, tol: float = 1e-6) -> RelaxationCheck:
    opt, _ = exact_atsp(instance)
    return RelaxationCheck(lp.value <= opt + tol, lp.value, opt)
