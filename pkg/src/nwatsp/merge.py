"""Local-to-global merging.

Starting from an Eulerian partition (initially all singletons), repeatedly
ask a Local-Connectivity subroutine for an edge set F that leaves every
component of the current solution E*, patch the cheapest remaining
component with short connecting cycles X, and fold the selected component's
new edges into E*.  Whenever the F-components charged to some partition
member are too heavy relative to it, the partition is rebuilt around them
(raising the potential sum of lb^2) and the merge starts over.

Every property the analysis relies on is checked as the run proceeds; a
failed check raises an :class:`~nwatsp.errors.InvariantBreach` subclass.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import (
    InvariantBreach,
    LightnessBreach,
    NoProgress,
    PotentialStalled,
    RestartLimitExceeded,
)
from .graph import (
    TOL,
    EdgeMultiset,
    Instance,
    components,
    eulerian_circuit,
    shortcut,
    shortest_path,
    validate,
    walk_vertices,
)
from .local import ALPHA, solve_lc
from .lp import LpSolution, solve

STANDARD = "standard"
NW_CYCLE_RULE = "nw-cycle-rule"
MODES = (STANDARD, NW_CYCLE_RULE)


@dataclass(frozen=True, eq=False)
class Member:
    vertices: frozenset
    edges: EdgeMultiset
    lb: float

    @property
    def smallest(self) -> int:
        return min(self.vertices)

    @property
    def weight(self) -> float:
        return self.edges.weight()


class EulerianPartition:
    """Disjoint connected Eulerian subgraphs covering V, heaviest lb first."""

    def __init__(self, members, beta: float):
        self.members = tuple(sorted(members, key=lambda h: (-h.lb, h.smallest)))
        self.beta = beta
        n = sum(len(h.vertices) for h in self.members)
        self.member_of = np.full(n, -1, dtype=int)
        for i, h in enumerate(self.members):
            self.member_of[list(h.vertices)] = i
        if np.any(self.member_of < 0):
            raise InvariantBreach("partition members do not cover every vertex")

    def __len__(self):
        return len(self.members)

    def __getitem__(self, i) -> Member:
        return self.members[i]

    def potential(self) -> float:
        return math.fsum(h.lb * h.lb for h in self.members)

    def edges(self, instance) -> EdgeMultiset:
        total = EdgeMultiset(instance)
        for h in self.members:
            total = total.union(h.edges)
        return total

    def check(self, instance, tol=1e-6) -> None:
        for i, h in enumerate(self.members):
            if h.edges:
                if h.edges.vertices() != set(h.vertices) or len(components(h.edges).nontrivial()) != 1:
                    raise InvariantBreach(f"member {i} is not a connected subgraph on its vertex set")
                if not h.edges.is_balanced():
                    raise InvariantBreach(f"member {i} is not Eulerian")
            elif len(h.vertices) != 1:
                raise InvariantBreach(f"member {i} has several vertices but no edges")
            if h.weight > self.beta * h.lb + tol:
                raise LightnessBreach(f"member {i}: w={h.weight:.9g} > {self.beta}*lb={self.beta * h.lb:.9g}")


def _lb(lp: LpSolution, vertices) -> float:
    return math.fsum(lp.lb[v] for v in vertices)


def init_trivial(instance: Instance, lp: LpSolution, alpha: float = ALPHA) -> EulerianPartition:
    empty = EdgeMultiset(instance)
    return EulerianPartition(
        [Member(frozenset([v]), empty, float(lp.lb[v])) for v in range(instance.n)],
        beta=3 * alpha,
    )


def low(vertices, partition: EulerianPartition) -> int:
    """Index of the first (largest-lb) partition member touching ``vertices``."""
    return int(min(partition.member_of[list(vertices)]))


def find_connecting_cycle(instance: Instance, vertices, threshold: float):
    """Cheapest cycle that leaves ``vertices`` and comes back, if it weighs at
    most ``threshold``.

    Every cycle leaving the set uses some edge (u, v) with u inside and v
    outside and returns along a v -> u path, so scanning all such edges with
    shortest return paths finds the overall minimum.  Returns
    ``(cycle, weight)`` or ``None``.
    """
    inside = set(vertices)
    d = instance.closure
    best = None
    for e, (u, v) in enumerate(instance.edges):
        if u in inside and v not in inside:
            w = instance.f[u] + d[v, u]
            if best is None or w < best[0] - TOL:
                best = (w, e)
    if best is None or best[0] > threshold + TOL:
        return None
    _, e = best
    u, v = instance.edges[e]
    path, back = shortest_path(instance, v, u)
    cycle = EdgeMultiset.of(instance, [e] + path)
    return cycle, instance.f[u] + back


@dataclass
class XCycle:
    edges: EdgeMultiset
    mark: int
    weight: float
    threshold: float


@dataclass
class PhaseResult:
    vertices: frozenset
    F_tilde: EdgeMultiset
    X_tilde: EdgeMultiset
    kept: list
    attempted: int


def cycle_threshold(mode: str, alpha: float, lb_low: float, epsilon: float, lb_total: float, n: int) -> float:
    if mode == NW_CYCLE_RULE:
        return lb_low
    return alpha * (3 * lb_low + epsilon * lb_total / n)


def update_phase(instance, lp, partition: EulerianPartition, E_star: EdgeMultiset, F: EdgeMultiset,
                 epsilon: float, mode: str = STANDARD, alpha: float = ALPHA) -> PhaseResult:
    """One update phase: add connecting cycles to the cheapest component of
    E* + F + X until none is cheap enough, then report that component."""
    n = instance.n
    X = EdgeMultiset(instance)
    cycles = []
    while True:
        view = components(E_star.union(F).union(X))
        lows = [low(c.vertices, partition) for c in view]
        # largest low index = smallest lb(low); indices are unique per component
        sel = max(range(len(view)), key=lambda c: (lows[c], -view[c].smallest))
        chosen = view[sel]
        limit = cycle_threshold(mode, alpha, partition[lows[sel]].lb, epsilon, lp.value, n)
        found = find_connecting_cycle(instance, chosen.vertices, limit) if len(view) > 1 else None
        if found is None:
            break
        cycle, weight = found
        X = X.union(cycle)
        cycles.append(XCycle(cycle, lows[sel], weight, limit))
        if len(cycles) > n:
            raise NoProgress("more connecting cycles than vertices in one phase")
    vs = chosen.vertices
    kept = [c for c in cycles if c.edges.vertices() <= vs]
    return PhaseResult(vs, F.restrict(vs), X.restrict(vs), kept, len(cycles))


def lc_family(F_tilde: EdgeMultiset, partition: EulerianPartition) -> dict:
    """Nontrivial components of F~ grouped by their low index."""
    family = {}
    for comp in components(F_tilde).nontrivial():
        family.setdefault(low(comp.vertices, partition), []).append(comp)
    return family


@dataclass
class ConditionResult:
    margins: dict  # i -> rhs - lhs
    violated: int | None


def check_condition(family_lb: dict, member_lb, slack: float) -> ConditionResult:
    """Test lb(family_i) <= 3 lb(H_i) + slack for every i with a family.

    ``slack`` is epsilon * lb(V) / n.  Reports the smallest violating index.
    """
    margins = {i: 3 * member_lb[i] + slack - family_lb[i] for i in sorted(family_lb)}
    violated = next((i for i, gap in margins.items() if gap < -TOL), None)
    return ConditionResult(margins, violated)


def knapsack_select(items, capacity: float) -> list[int]:
    """0/1 packing from the greedy extreme point of the fractional knapsack LP.

    ``items`` is a sequence of ``(size, profit)``.  Items are taken in order
    of decreasing profit/size; the first one that does not fit completely
    would be packed fractionally and is dropped, which ends the greedy.
    """
    order = sorted(
        (j for j, (s, p) in enumerate(items) if p > 0 or s == 0),
        key=lambda j: (-(items[j][1] / items[j][0]) if items[j][0] > 0 else -math.inf, j),
    )
    chosen = []
    for j in order:
        if math.fsum([items[c][0] for c in chosen] + [items[j][0]]) <= capacity:
            chosen.append(j)
        else:
            break
    return sorted(chosen)


@dataclass
class Reinit:
    index: int
    absorbed: list  # I'
    touched: list  # I
    delta: float
    required: float


def reinitialize(instance, lp, partition: EulerianPartition, i: int, family: list,
                 epsilon: float, alpha: float = ALPHA):
    """Rebuild the partition around the overweight family charged to member i.

    Returns ``(new_partition, Reinit)``.
    """
    n = instance.n
    lb_total = lp.value
    fam_vertices = frozenset().union(*(h.vertices for h in family))
    fam_edges = EdgeMultiset(instance)
    for h in family:
        fam_edges = fam_edges.union(h.edges)
    lb_fam = _lb(lp, fam_vertices)
    hi = partition[i]
    if not lb_fam > 3 * hi.lb + epsilon * lb_total / n - TOL:
        raise InvariantBreach(f"reinitialization requested without a violation at {i}")
    if hi.lb > lb_fam / 3 + TOL:
        raise InvariantBreach("lb(H_i) exceeds a third of the family's lb")

    touched = sorted({int(partition.member_of[v]) for v in fam_vertices})
    if touched[0] != i:
        raise InvariantBreach(f"family charged to {i} touches earlier member {touched[0]}")
    others = touched[1:]
    sizes = [_lb(lp, partition[j].vertices & fam_vertices) for j in others]
    profits = [_lb(lp, partition[j].vertices - fam_vertices) for j in others]
    capacity = 2 * lb_fam / 3 - _lb(lp, hi.vertices & fam_vertices)
    if math.fsum(sizes) / 3 > capacity + TOL:
        raise InvariantBreach("uniform one-third packing is infeasible")
    absorbed = [others[c] for c in knapsack_select(list(zip(sizes, profits)), capacity)]

    vertices = fam_vertices | hi.vertices
    edges = fam_edges.union(hi.edges)
    for j in absorbed:
        vertices |= partition[j].vertices
        edges = edges.union(partition[j].edges)
    merged = Member(frozenset(vertices), edges, _lb(lp, vertices))
    if merged.weight > 3 * alpha * merged.lb + 1e-6:
        raise LightnessBreach(f"merged member: w={merged.weight:.9g} > {3 * alpha}*lb={3 * alpha * merged.lb:.9g}")

    members = [merged]
    covered = set(vertices)
    gone = set(touched)
    for j, h in enumerate(partition.members):
        if j not in gone:
            members.append(h)
            covered |= h.vertices
    empty = EdgeMultiset(instance)
    for v in range(n):
        if v not in covered:
            members.append(Member(frozenset([v]), empty, float(lp.lb[v])))
    fresh = EulerianPartition(members, partition.beta)
    fresh.check(instance)

    delta = fresh.potential() - partition.potential()
    required = epsilon**2 * lb_total**2 / (3 * n * n)
    if delta < required * (1 - 1e-9) - 1e-12:
        raise PotentialStalled(f"potential grew by {delta:.9g} < {required:.9g}")
    return fresh, Reinit(i, absorbed, touched, delta, required)


@dataclass
class RunReport:
    lp_value: float
    tour_weight: float
    ratio: float
    merges: int
    restarts: int
    marks: list
    potential_trace: list
    epsilon: float
    mode: str
    n: int = 0
    alpha: float = ALPHA
    bound: float = 0.0
    shortcut_weight: float = 0.0
    tour: list = field(default_factory=list)
    epochs: list = field(default_factory=list)  # per epoch: [components before, after] per accepted merge
    x_cycles: list = field(default_factory=list)
    reinits: list = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"


def tour_bound(mode: str, epsilon: float, alpha: float, lb_total: float) -> float:
    if mode == NW_CYCLE_RULE:
        return (4 * alpha + 1) * lb_total
    return (9 + 2 * epsilon) * alpha * lb_total


def _strip(F: EdgeMultiset, view) -> EdgeMultiset:
    keep = EdgeMultiset(F.instance)
    for comp in components(F).nontrivial():
        labels = {int(view.label[v]) for v in comp.vertices}
        if len(labels) > 1:
            keep = keep.union(comp.edges)
    return keep


def run(instance: Instance, epsilon: float = 0.25, mode: str = STANDARD, *, lp: LpSolution | None = None,
        subroutine=solve_lc, alpha: float = ALPHA, on_lc=None):
    """Approximate tour for a node-weighted ATSP instance.

    ``subroutine(instance, lp, parts)`` must return an Eulerian multiset
    leaving every part whose components are ``alpha``-light.  Returns
    ``(tour, report)`` where ``tour`` is a connected Eulerian edge multiset.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    validate(instance)
    if lp is None:
        lp = solve(instance)
    n = instance.n
    lb_total = lp.value
    slack = epsilon * lb_total / n
    restart_limit = 3 * n * n / epsilon**2

    partition = init_trivial(instance, lp, alpha)
    report = RunReport(lp_value=lb_total, tour_weight=0.0, ratio=0.0, merges=0, restarts=0, marks=[],
                       potential_trace=[partition.potential()], epsilon=epsilon, mode=mode, n=n, alpha=alpha)
    while True:
        partition.check(instance)
        E_star = partition.edges(instance)
        marks = {}
        counts = []
        violation = None
        x_log = []
        view = components(E_star)
        while len(view) > 1:
            F = subroutine(instance, lp, [c.vertices for c in view])
            if on_lc is not None:
                on_lc([c.vertices for c in view], F)
            F = _strip(F, view)
            phase = update_phase(instance, lp, partition, E_star, F, epsilon, mode, alpha)
            report.merges += 1
            family = lc_family(phase.F_tilde, partition)
            family_lb = {i: _lb(lp, frozenset().union(*(h.vertices for h in hs))) for i, hs in family.items()}
            cond = check_condition(family_lb, [h.lb for h in partition.members], slack)
            if cond.violated is not None:
                violation = (cond.violated, family[cond.violated])
                break
            E_star = E_star.union(phase.F_tilde).union(phase.X_tilde)
            bad = E_star.unbalanced_vertex()
            if bad is not None:
                raise InvariantBreach(f"E* became unbalanced at vertex {bad}")
            after = components(E_star)
            if len(after) >= len(view):
                raise NoProgress(f"component count stayed at {len(view)}")
            counts.append([len(view), len(after)])
            for cyc in phase.kept:
                if cyc.mark in marks:
                    raise InvariantBreach(f"member {cyc.mark} marked twice in one epoch")
                marks[cyc.mark] = cyc
                x_log.append({"mark": cyc.mark, "weight": cyc.weight, "threshold": cyc.threshold})
            view = after
        if len(counts) > n - 1:
            raise NoProgress(f"{len(counts)} merges exceed n - 1")
        report.epochs.append(counts)
        if violation is None:
            break
        partition, info = reinitialize(instance, lp, partition, violation[0], violation[1], epsilon, alpha)
        report.restarts += 1
        report.potential_trace.append(partition.potential())
        report.reinits.append(asdict(info))
        if report.restarts > restart_limit:
            raise RestartLimitExceeded(f"{report.restarts} restarts exceed 3n^2/eps^2 = {restart_limit:.1f}")

    tour = E_star
    if tour.unbalanced_vertex() is not None or len(components(tour)) != 1:
        raise InvariantBreach("final edge set is not a connected Eulerian tour")
    weight = tour.weight()
    bound = tour_bound(mode, epsilon, alpha, lb_total)
    if weight > bound + 1e-6 * max(1.0, bound):
        raise InvariantBreach(f"tour weight {weight:.9g} exceeds certified bound {bound:.9g}")
    order, closure_weight = shortcut(instance, walk_vertices(instance, eulerian_circuit(tour)))
    if closure_weight > weight + 1e-9 * max(1.0, weight):
        raise InvariantBreach("shortcutting increased the tour weight")
    report.tour_weight = weight
    report.ratio = weight / lb_total if lb_total > 0 else 1.0
    report.bound = bound
    report.shortcut_weight = closure_weight
    report.tour = order
    report.marks = [x["mark"] for x in x_log]
    report.x_cycles = x_log
    return tour, report
