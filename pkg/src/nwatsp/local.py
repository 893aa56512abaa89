"""3-light algorithm for node-weighted Local-Connectivity ATSP.

Given a partition of V into parts that each induce a strongly connected
subgraph, find an Eulerian edge multiset F that leaves every part at least
once and whose every connected component G~ satisfies
``w(G~) <= 3 lb(G~)``.

The construction subdivides each edge e = (u, v) into u -> out_e -> in_e -> v,
adds a hub A_i per part wired to the subdivisions of the part's outgoing and
incoming edges, and routes one unit of flow through each hub while capping
the out-flow of every original vertex by ceil(x*(delta^+(v))).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CutBelowOne,
    InvariantBreach,
    LightnessBreach,
    NoFeasibleCirculation,
    PartitionNotStronglyConnected,
    RebalancePathMissing,
    SinglePartError,
    InvalidInstance,
    Unreachable,
)
from .flow import FlowNetwork
from .graph import EdgeMultiset, Instance, components, induces_strongly_connected, shortest_path
from .lp import LpSolution

ALPHA = 3
CEIL_SLACK = 1e-6
CONSERVATION_TOL = 1e-9
CUT_SLACK = 1e-7

# arc kinds
TAIL, MID, HEAD, LEAVE, ENTER = "tail", "mid", "head", "leave", "enter"


def capped_ceil(z: float) -> int:
    """ceil(z) that ignores floating-point noise just above an integer."""
    return math.ceil(z - CEIL_SLACK)


@dataclass(frozen=True)
class Partition:
    parts: tuple  # tuple of frozensets
    part_of: tuple  # vertex -> part index

    @classmethod
    def of(cls, instance: Instance, parts) -> "Partition":
        parts = tuple(frozenset(int(v) for v in p) for p in parts)
        part_of = [-1] * instance.n
        for i, p in enumerate(parts):
            if not p:
                raise InvalidInstance(f"part {i} is empty")
            for v in p:
                if not 0 <= v < instance.n:
                    raise InvalidInstance(f"part {i} contains unknown vertex {v}")
                if part_of[v] >= 0:
                    raise InvalidInstance(f"vertex {v} appears in parts {part_of[v]} and {i}")
                part_of[v] = i
        missing = [v for v, i in enumerate(part_of) if i < 0]
        if missing:
            raise InvalidInstance(f"vertex {missing[0]} is not covered by the partition")
        if len(parts) < 2:
            raise SinglePartError("a single part has no outgoing edges to cross")
        for i, p in enumerate(parts):
            if not induces_strongly_connected(instance, p):
                raise PartitionNotStronglyConnected(i)
        return cls(parts, tuple(part_of))

    @property
    def k(self) -> int:
        return len(self.parts)


@dataclass(frozen=True, eq=False)
class AuxGraph:
    instance: Instance
    partition: Partition
    arcs: tuple  # (tail node, head node, kind, edge id, part index or -1)
    index: dict  # (kind, edge id) -> arc index

    @property
    def num_vertices(self) -> int:
        return self.instance.n + 2 * self.instance.m + self.partition.k

    def out_node(self, e):
        return self.instance.n + 2 * e

    def in_node(self, e):
        return self.instance.n + 2 * e + 1

    def hub(self, i):
        return self.instance.n + 2 * self.instance.m + i

    def imbalance(self, y) -> np.ndarray:
        """Out-flow minus in-flow at every auxiliary vertex."""
        res = np.zeros(self.num_vertices)
        for a, (t, h, *_rest) in enumerate(self.arcs):
            res[t] += y[a]
            res[h] -= y[a]
        return res

    def hub_throughput(self, y, i) -> float:
        return float(sum(y[self.index[(LEAVE, e)]] for e in self.leaving(i)))

    def leaving(self, i):
        part_of = self.partition.part_of
        return [e for e, (u, v) in enumerate(self.instance.edges) if part_of[u] == i and part_of[v] != i]

    def entering(self, i):
        part_of = self.partition.part_of
        return [e for e, (u, v) in enumerate(self.instance.edges) if part_of[v] == i and part_of[u] != i]


def build_aux(instance: Instance, partition) -> AuxGraph:
    if not isinstance(partition, Partition):
        partition = Partition.of(instance, partition)
    part_of = partition.part_of
    n, m = instance.n, instance.m
    arcs = []
    index = {}

    def add(t, h, kind, e, part=-1):
        index[(kind, e)] = len(arcs)
        arcs.append((t, h, kind, e, part))

    for e, (u, v) in enumerate(instance.edges):
        out_e, in_e = n + 2 * e, n + 2 * e + 1
        add(u, out_e, TAIL, e)
        add(out_e, in_e, MID, e)
        add(in_e, v, HEAD, e)
    for e, (u, v) in enumerate(instance.edges):
        i, j = part_of[u], part_of[v]
        if i != j:
            add(n + 2 * m + i, n + 2 * e, LEAVE, e, i)
            add(n + 2 * e + 1, n + 2 * m + j, ENTER, e, j)
    return AuxGraph(instance, partition, tuple(arcs), index)


def _part_cut_values(aux, lp):
    values = np.zeros(aux.partition.k)
    part_of = aux.partition.part_of
    for e, (u, v) in enumerate(aux.instance.edges):
        if part_of[u] != part_of[v]:
            values[part_of[u]] += lp.x[e]
    return values


def fractional_circulation(aux: AuxGraph, lp: LpSolution) -> np.ndarray:
    """The fractional witness: a share 1/x*(delta^+(V_i)) of the flow leaving
    each part is routed through that part's hub."""
    inst = aux.instance
    part_of = aux.partition.part_of
    cut = _part_cut_values(aux, lp)
    low = np.flatnonzero(cut < 1.0 - CUT_SLACK)
    if low.size:
        i = int(low[0])
        raise CutBelowOne(f"x*(delta^+(V_{i})) = {cut[i]:.12g} < 1")
    y = np.zeros(len(aux.arcs))
    idx = aux.index
    for e, (u, v) in enumerate(inst.edges):
        xe = float(lp.x[e])
        i, j = part_of[u], part_of[v]
        keep_i = xe * (1.0 - 1.0 / cut[i])
        if i == j:
            y[idx[(TAIL, e)]] = y[idx[(MID, e)]] = y[idx[(HEAD, e)]] = keep_i
        else:
            y[idx[(MID, e)]] = xe
            y[idx[(LEAVE, e)]] = xe / cut[i]
            y[idx[(TAIL, e)]] = keep_i
            y[idx[(ENTER, e)]] = xe / cut[j]
            y[idx[(HEAD, e)]] = xe * (1.0 - 1.0 / cut[j])
    residual = np.abs(aux.imbalance(y)).max(initial=0.0)
    if residual > CONSERVATION_TOL * max(1.0, float(np.max(lp.x, initial=0.0))):
        raise InvariantBreach(f"fractional circulation violates conservation by {residual:.3g}")
    return y


def vertex_caps(lp: LpSolution) -> list[int]:
    return [capped_ceil(lp.out_flow(v)) for v in range(lp.instance.n)]


def integral_circulation(aux: AuxGraph, lp: LpSolution) -> np.ndarray:
    """Integral circulation with hub throughput exactly 1 and original
    vertex out-flow at most ceil(x*(delta^+(v))).

    Vertex caps become split-vertex arcs; the hubs' lower bound of 1 is
    removed by the usual excess/deficit reduction to an s-t max-flow.
    """
    inst = aux.instance
    k = aux.partition.k
    caps = vertex_caps(lp)
    big = sum(caps) + k + 1
    nv = aux.num_vertices
    # node ids: aux vertex a keeps id a as its "in" copy; original vertices and
    # hubs get a separate "out" copy
    out_copy = {}
    net = FlowNetwork(nv)
    for v in range(inst.n):
        out_copy[v] = net.add_node()
    for i in range(k):
        out_copy[aux.hub(i)] = net.add_node()
    for v in range(inst.n):
        net.add_arc(v, out_copy[v], caps[v])
    source, sink = net.add_node(), net.add_node()
    for i in range(k):
        h = aux.hub(i)
        net.add_arc(source, out_copy[h], 1)
        net.add_arc(h, sink, 1)
    flow_arcs = []
    for t, h, *_ in aux.arcs:
        flow_arcs.append(net.add_arc(out_copy.get(t, t), h, big))
    value = net.max_flow(source, sink)
    if value != k:
        raise NoFeasibleCirculation(f"max-flow saturates {value} of {k} hub demands")
    y = np.array([net.flow_on(a) for a in flow_arcs], dtype=int)
    check_integral_circulation(aux, lp, y)
    return y


def check_integral_circulation(aux: AuxGraph, lp: LpSolution, y) -> None:
    if np.any(aux.imbalance(y) != 0):
        raise NoFeasibleCirculation("integral circulation is not conserved")
    for i in range(aux.partition.k):
        if aux.hub_throughput(y, i) != 1:
            raise NoFeasibleCirculation(f"hub {i} carries {aux.hub_throughput(y, i)} units")
    caps = vertex_caps(lp)
    out = np.zeros(aux.instance.n, dtype=int)
    for a, (t, _h, kind, _e, _p) in enumerate(aux.arcs):
        if kind == TAIL:
            out[t] += y[a]
    bad = np.flatnonzero(out > np.array(caps))
    if bad.size:
        v = int(bad[0])
        raise NoFeasibleCirculation(f"vertex {v} sends {out[v]} > cap {caps[v]}")


def assemble(instance: Instance, partition, y, lp: LpSolution | None = None, aux: AuxGraph | None = None) -> EdgeMultiset:
    """Turn an integral circulation into an Eulerian edge multiset F.

    F starts with y(out_e, in_e) copies of each e.  Within a part the hub
    pair leaves at most one deficit vertex (head of the edge absorbed by the
    hub) and one surplus vertex (tail of the edge the hub feeds); a
    minimum-weight path inside the part fixes them.
    """
    if aux is None:
        aux = build_aux(instance, partition)
    partition = aux.partition
    counts = {}
    for a, (_t, _h, kind, e, _p) in enumerate(aux.arcs):
        if kind == MID and y[a]:
            counts[e] = int(y[a])
    F = EdgeMultiset(instance, counts)
    extra = []
    for i, part in enumerate(partition.parts):
        absorbed = [e for e in aux.entering(i) if y[aux.index[(ENTER, e)]] == 1]
        fed = [e for e in aux.leaving(i) if y[aux.index[(LEAVE, e)]] == 1]
        if len(absorbed) != 1 or len(fed) != 1:
            raise NoFeasibleCirculation(f"hub {i} is not used by exactly one arc each way")
        u = instance.edges[absorbed[0]][1]
        v = instance.edges[fed[0]][0]
        if u == v:
            continue
        try:
            path, _ = shortest_path(instance, u, v, restrict=part)
        except Unreachable as exc:
            raise RebalancePathMissing(f"no path {u} -> {v} inside part {i}") from exc
        extra.extend(path)
    F = F.union(EdgeMultiset.of(instance, extra))
    bad = F.unbalanced_vertex()
    if bad is not None:
        raise InvariantBreach(f"assembled multiset is unbalanced at vertex {bad}")
    return F


@dataclass(frozen=True, eq=False)
class LcResult:
    aux: AuxGraph
    y_fractional: np.ndarray
    y: np.ndarray
    F: EdgeMultiset
    ratio: float  # max over components of w/lb (0 when no edges)

    def to_json(self) -> dict:
        return {
            "partition": [sorted(p) for p in self.aux.partition.parts],
            "y": {f"{kind}:{e}": int(self.y[a]) for a, (_t, _h, kind, e, _p) in enumerate(self.aux.arcs) if self.y[a]},
            "F": {str(e): k for e, k in self.F.items()},
            "ratio": self.ratio,
        }


def component_ratio(F: EdgeMultiset, lp: LpSolution) -> float:
    worst = 0.0
    for comp in components(F).nontrivial():
        lb = math.fsum(lp.lb[v] for v in comp.vertices)
        w = comp.edges.weight()
        if w > 0:
            worst = max(worst, w / lb if lb > 0 else math.inf)
    return worst


def certify(instance: Instance, lp: LpSolution, partition: Partition, F: EdgeMultiset, alpha: float = ALPHA, tol: float = 1e-6) -> None:
    """Raise unless F satisfies every property the 3-light construction proves."""
    bad = F.unbalanced_vertex()
    if bad is not None:
        raise InvariantBreach(f"F is unbalanced at vertex {bad}")
    for i, part in enumerate(partition.parts):
        if F.crossing_out(part) < 1:
            raise InvariantBreach(f"F does not leave part {i}")
    out = F.out_degrees()
    caps = vertex_caps(lp)
    for v in range(instance.n):
        if out[v] > caps[v] + 1:
            raise InvariantBreach(f"vertex {v} has out-degree {out[v]} > {caps[v] + 1}")
    for comp in components(F).nontrivial():
        lb = math.fsum(lp.lb[v] for v in comp.vertices)
        w = comp.edges.weight()
        if w > alpha * lb + tol:
            raise LightnessBreach(f"component at {comp.smallest}: w={w:.9g} > {alpha}*lb={alpha * lb:.9g}")


def local_connectivity(instance: Instance, lp: LpSolution, partition) -> LcResult:
    aux = build_aux(instance, partition)
    y_frac = fractional_circulation(aux, lp)
    y = integral_circulation(aux, lp)
    F = assemble(instance, aux.partition, y, lp, aux)
    certify(instance, lp, aux.partition, F)
    return LcResult(aux, y_frac, y, F, component_ratio(F, lp))


def solve_lc(instance: Instance, lp: LpSolution, partition) -> EdgeMultiset:
    """Eulerian multiset crossing every part, each component 3-light."""
    return local_connectivity(instance, lp, partition).F
