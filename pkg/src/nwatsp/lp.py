"""Held-Karp relaxation by cutting planes.

The relaxation minimises ``sum_e x_e w(e)`` subject to flow conservation at
every vertex and ``x(delta^+(S)) >= 1`` for every proper nonempty ``S``.
Cut constraints are generated lazily: start from the singleton cuts, solve,
ask the min-cut oracle for violated cuts, repeat.

Two LP back ends are available.  ``"highs"`` (scipy's dual simplex) is the
default because it is fast; ``"simplex"`` is a small dense tableau method
with Bland's rule kept as an independent route for cross-checks.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import Infeasible, IterationLimit, UnknownVertex
from .flow import FlowNetwork
from .graph import EdgeMultiset, Instance, components

CUT_TOL = 1e-7


@dataclass(frozen=True)
class Cut:
    vertices: frozenset
    value: float  # x(delta^+(S))

    @property
    def violation(self) -> float:
        return 1.0 - self.value


@dataclass(frozen=True, eq=False)
class LpSolution:
    instance: Instance
    x: np.ndarray
    value: float
    lb: np.ndarray
    cuts: tuple = field(default=(), repr=False)
    rounds: int = 0

    def out_flow(self, v: int) -> float:
        """x(delta^+(v))"""
        return float(sum(self.x[e] for e in self.instance.out_edges[v]))

    def cut_value(self, vertices) -> float:
        return cut_value(self.instance, self.x, vertices)

    def to_json(self) -> dict:
        return {
            "x": {str(e): float(v) for e, v in enumerate(self.x)},
            "lb": [float(v) for v in self.lb],
            "value": float(self.value),
        }


def lb_of(solution: LpSolution, vertices) -> float:
    total = []
    for v in vertices:
        if not 0 <= v < solution.instance.n:
            raise UnknownVertex(v)
        total.append(solution.lb[v])
    return math.fsum(total)


def cut_value(instance: Instance, x, vertices) -> float:
    inside = np.zeros(instance.n, dtype=bool)
    inside[list(vertices)] = True
    mask = inside[instance.tails] & ~inside[instance.heads]
    return float(np.sum(np.asarray(x)[mask]))


def lower_bounds(instance: Instance, x) -> np.ndarray:
    """lb(v) = sum of x_e w(e) over edges leaving v."""
    lb = np.zeros(instance.n)
    np.add.at(lb, instance.tails, np.asarray(x) * instance.edge_weights)
    return lb


def _min_cut(instance, capacity, s, t, eps):
    net = FlowNetwork(instance.n, eps=eps)
    for (u, v), c in capacity.items():
        net.add_arc(u, v, c)
    net.max_flow(s, t)
    return frozenset(net.source_side(s))


def _pair_capacities(instance, x, eps):
    capacity = {}
    for e, (u, v) in enumerate(instance.edges):
        if x[e] > eps:
            capacity[(u, v)] = capacity.get((u, v), 0.0) + float(x[e])
    return capacity


def violated_cuts(instance: Instance, x, tol: float = CUT_TOL) -> list[Cut]:
    """Every distinct cut found by the 0->v and v->0 min cuts that is violated.

    Sorted by value, most violated first (ties: smaller vertex tuple).
    """
    x = np.asarray(x, dtype=float)
    eps = 1e-12
    capacity = _pair_capacities(instance, x, eps)
    found = {}
    for v in range(1, instance.n):
        for s, t in ((0, v), (v, 0)):
            side = _min_cut(instance, capacity, s, t, eps)
            if side not in found:
                found[side] = cut_value(instance, x, side)
    cuts = [Cut(s, val) for s, val in found.items() if val < 1.0 - tol]
    cuts.sort(key=lambda c: (c.value, sorted(c.vertices)))
    return cuts


def separate(instance: Instance, x, tol: float = CUT_TOL) -> Cut | None:
    """Most violated subtour cut, or ``None`` if ``x`` satisfies all of them."""
    cuts = violated_cuts(instance, x, tol)
    return cuts[0] if cuts else None


def _support_cuts(instance, x, tol):
    """Components of the support graph; each one is a cut carrying zero flow."""
    ids = [e for e in range(instance.m) if x[e] > tol]
    view = components(EdgeMultiset.of(instance, ids))
    if len(view) < 2:
        return []
    return [Cut(c.vertices, cut_value(instance, x, c.vertices)) for c in view]


def _conservation_matrix(instance):
    a = np.zeros((instance.n, instance.m))
    a[instance.tails, np.arange(instance.m)] += 1.0
    a[instance.heads, np.arange(instance.m)] -= 1.0
    return a


def _cut_row(instance, vertices):
    inside = np.zeros(instance.n, dtype=bool)
    inside[list(vertices)] = True
    return (inside[instance.tails] & ~inside[instance.heads]).astype(float)


def _solve_lp(c, a_ub, b_ub, a_eq, b_eq, method):
    if method == "highs":
        res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs-ds")
        if res.status == 2:
            raise Infeasible(res.message)
        if res.status != 0:
            raise IterationLimit(res.message)
        return np.asarray(res.x), float(res.fun)
    if method == "simplex":
        return simplex(c, a_ub, b_ub, a_eq, b_eq)
    raise ValueError(f"unknown LP method {method!r}")


def solve(instance: Instance, method: str = "highs", tol: float = CUT_TOL, max_rounds: int = 1000) -> LpSolution:
    """Optimal solution of the Held-Karp relaxation.

    Each round adds every violated cut the oracle reports (components of the
    support graph when it is disconnected, min cuts otherwise).  Terminates
    only when :func:`separate` finds nothing.
    """
    c = instance.edge_weights.astype(float)
    a_eq = _conservation_matrix(instance)
    b_eq = np.zeros(instance.n)
    cut_sets = [frozenset([v]) for v in range(instance.n)]
    known = set(cut_sets)
    for rounds in range(1, max_rounds + 1):
        a_ub = -np.array([_cut_row(instance, s) for s in cut_sets])
        b_ub = -np.ones(len(cut_sets))
        x, _ = _solve_lp(c, a_ub, b_ub, a_eq, b_eq, method)
        x = np.where(x > 1e-12, x, 0.0)
        new = [cut for cut in _support_cuts(instance, x, 1e-12) if cut.value < 1.0 - tol]
        if not new:
            new = violated_cuts(instance, x, tol)
        new = [cut for cut in new if cut.vertices not in known]
        if not new:
            if separate(instance, x, tol) is not None:
                raise IterationLimit("oracle keeps returning known cuts")
            lb = lower_bounds(instance, x)
            value = math.fsum(lb)
            return LpSolution(instance, x, value, lb, tuple(cut_sets), rounds)
        for cut in new:
            known.add(cut.vertices)
            cut_sets.append(cut.vertices)
    raise IterationLimit(f"no optimum after {max_rounds} rounds")


def solve_exhaustive(instance: Instance, method: str = "simplex") -> LpSolution:
    """Same LP with all 2^n - 2 cut constraints written out (small n only)."""
    n = instance.n
    cut_sets = []
    for r in range(1, n):
        for s in itertools.combinations(range(n), r):
            cut_sets.append(frozenset(s))
    a_ub = -np.array([_cut_row(instance, s) for s in cut_sets])
    b_ub = -np.ones(len(cut_sets))
    x, _ = _solve_lp(instance.edge_weights.astype(float), a_ub, b_ub, _conservation_matrix(instance), np.zeros(n), method)
    x = np.where(x > 1e-12, x, 0.0)
    lb = lower_bounds(instance, x)
    return LpSolution(instance, x, math.fsum(lb), lb, tuple(cut_sets), 1)


def dump_solution(solution: LpSolution, path) -> None:
    with open(path, "w") as fh:
        json.dump(solution.to_json(), fh)
        fh.write("\n")


# --------------------------------------------------------------------------
# dense simplex


def simplex(c, a_ub=None, b_ub=None, a_eq=None, b_eq=None, tol=1e-9, max_iter=50_000):
    """Minimise ``c @ x`` s.t. ``a_ub @ x <= b_ub``, ``a_eq @ x == b_eq``, ``x >= 0``.

    Two-phase tableau method, Bland's rule for entering and leaving variables.
    Returns ``(x, value)``.
    """
    c = np.asarray(c, dtype=float)
    nvar = c.size
    rows, rhs, slack_sign = [], [], []
    if a_ub is not None and len(a_ub):
        for row, b in zip(np.atleast_2d(a_ub), np.ravel(b_ub)):
            rows.append(np.asarray(row, dtype=float))
            rhs.append(float(b))
            slack_sign.append(1.0)
    if a_eq is not None and len(a_eq):
        for row, b in zip(np.atleast_2d(a_eq), np.ravel(b_eq)):
            rows.append(np.asarray(row, dtype=float))
            rhs.append(float(b))
            slack_sign.append(0.0)
    nrow = len(rows)
    nslack = int(sum(1 for s in slack_sign if s))
    ncol = nvar + nslack + nrow  # originals, slacks, artificials
    t = np.zeros((nrow + 1, ncol + 1))
    k = nvar
    for i, (row, b, sign) in enumerate(zip(rows, rhs, slack_sign)):
        t[i, :nvar] = row
        if sign:
            t[i, k] = 1.0
            k += 1
        t[i, -1] = b
        if b < 0:
            t[i, :] *= -1
        t[i, nvar + nslack + i] = 1.0
    basis = list(range(nvar + nslack, ncol))

    # phase 1: minimise the sum of artificials
    t[-1, :] = 0.0
    t[-1, nvar + nslack : ncol] = 1.0
    for i in range(nrow):
        t[-1, :] -= t[i, :]
    _run_bland(t, basis, ncol, tol, max_iter)
    if t[-1, -1] < -1e-7 * max(1.0, np.abs(rhs).max() if rhs else 1.0):
        raise Infeasible("phase 1 optimum is positive")

    # drive remaining artificials out of the basis; drop redundant rows
    keep = []
    for i in range(nrow):
        if basis[i] >= nvar + nslack:
            cols = np.flatnonzero(np.abs(t[i, : nvar + nslack]) > tol)
            if cols.size:
                _pivot(t, basis, i, int(cols[0]))
                keep.append(i)
        else:
            keep.append(i)
    width = nvar + nslack
    t = np.vstack([t[keep][:, list(range(width)) + [ncol]], np.zeros((1, width + 1))])
    basis = [basis[i] for i in keep]

    # phase 2
    t[-1, :nvar] = c
    for i, b in enumerate(basis):
        if t[-1, b] != 0.0:
            t[-1, :] -= t[-1, b] * t[i, :]
    _run_bland(t, basis, width, tol, max_iter)
    x = np.zeros(width)
    for i, b in enumerate(basis):
        x[b] = t[i, -1]
    x = x[:nvar]
    return x, float(c @ x)


def _pivot(t, basis, r, col):
    t[r, :] /= t[r, col]
    for i in range(t.shape[0]):
        if i != r and t[i, col] != 0.0:
            t[i, :] -= t[i, col] * t[r, :]
    basis[r] = col


def _run_bland(t, basis, ncol, tol, max_iter):
    for _ in range(max_iter):
        reduced = t[-1, :ncol]
        entering = np.flatnonzero(reduced < -tol)
        if entering.size == 0:
            return
        col = int(entering[0])
        column = t[:-1, col]
        candidates = np.flatnonzero(column > tol)
        if candidates.size == 0:
            raise Infeasible("LP is unbounded")
        ratios = t[candidates, -1] / column[candidates]
        best = ratios.min()
        ties = candidates[ratios <= best + tol * max(1.0, abs(best))]
        r = int(min(ties, key=lambda i: basis[i]))
        _pivot(t, basis, r, col)
    raise IterationLimit("simplex iteration limit reached")
