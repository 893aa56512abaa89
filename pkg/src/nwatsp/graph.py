"""Directed multigraphs with node-weighted metrics.

An :class:`Instance` is a digraph whose edge weights are induced by vertex
weights, ``w(u, v) = f(u)``.  Edges are identified by their index in
``Instance.edges`` so that parallel edges stay distinct.  Every edge set used
by the solver is an :class:`EdgeMultiset` over those ids.
"""

from __future__ import annotations

import heapq
import json
import math
from collections import Counter, deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InvalidInstance,
    NegativeWeight,
    NotBalanced,
    NotConnected,
    NotStronglyConnected,
    SelfLoop,
    UnknownEdge,
    UnknownVertex,
    Unreachable,
    VertexMissed,
)

TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Instance:
    n: int
    f: tuple[float, ...]
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "f", tuple(float(x) for x in self.f))
        object.__setattr__(self, "edges", tuple((int(u), int(v)) for u, v in self.edges))
        if self.n < 1 or len(self.f) != self.n:
            raise InvalidInstance(f"expected {self.n} vertex weights, got {len(self.f)}")
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InvalidInstance(f"edge ({u}, {v}) references a vertex outside 0..{self.n - 1}")

    @property
    def m(self) -> int:
        return len(self.edges)

    def weight(self, e: int) -> float:
        return self.f[self.edges[e][0]]

    @cached_property
    def edge_weights(self) -> np.ndarray:
        f = np.asarray(self.f)
        return f[self.tails] if self.m else np.zeros(0)

    @cached_property
    def tails(self) -> np.ndarray:
        return np.array([u for u, _ in self.edges], dtype=int)

    @cached_property
    def heads(self) -> np.ndarray:
        return np.array([v for _, v in self.edges], dtype=int)

    @cached_property
    def out_edges(self) -> list[list[int]]:
        out = [[] for _ in range(self.n)]
        for e, (u, _) in enumerate(self.edges):
            out[u].append(e)
        return out

    @cached_property
    def in_edges(self) -> list[list[int]]:
        inc = [[] for _ in range(self.n)]
        for e, (_, v) in enumerate(self.edges):
            inc[v].append(e)
        return inc

    @cached_property
    def edge_between(self) -> dict[tuple[int, int], int]:
        """Smallest edge id for every ordered pair that has an edge."""
        table = {}
        for e, uv in enumerate(self.edges):
            table.setdefault(uv, e)
        return table

    @cached_property
    def closure(self) -> np.ndarray:
        """All-pairs shortest-path distances (Floyd-Warshall)."""
        d = np.full((self.n, self.n), np.inf)
        for u, v in self.edges:
            if u != v:
                d[u, v] = min(d[u, v], self.f[u])
        np.fill_diagonal(d, 0.0)
        for k in range(self.n):
            np.minimum(d, d[:, k, None] + d[None, k, :], out=d)
        return d

    def to_json(self) -> dict:
        return {"n": self.n, "f": list(self.f), "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_json(cls, data: dict) -> "Instance":
        try:
            return cls(int(data["n"]), tuple(data["f"]), tuple(tuple(e) for e in data["edges"]))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidInstance):
                raise
            raise InvalidInstance(f"malformed instance: {exc}") from exc


def load_instance(path) -> Instance:
    with open(path) as fh:
        data = json.load(fh)
    return Instance.from_json(data)


def save_instance(instance: Instance, path) -> None:
    Path(path).write_text(json.dumps(instance.to_json()) + "\n")


def _reachable(n, adjacency, start, allowed=None):
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if v not in seen and (allowed is None or v in allowed):
                seen.add(v)
                queue.append(v)
    return seen


def _successors(instance):
    return [[instance.edges[e][1] for e in es] for es in instance.out_edges]


def _predecessors(instance):
    return [[instance.edges[e][0] for e in es] for es in instance.in_edges]


def validate(instance: Instance) -> None:
    """Raise unless the instance is a usable node-weighted ATSP input."""
    if instance.n < 2:
        raise InvalidInstance("at least two vertices are required")
    for v, fv in enumerate(instance.f):
        if not math.isfinite(fv) or fv < 0:
            raise NegativeWeight(f"vertex {v} has weight {fv}")
    for e, (u, v) in enumerate(instance.edges):
        if u == v:
            raise SelfLoop(f"edge {e} is a self-loop at vertex {u}")
    forward = _reachable(instance.n, _successors(instance), 0)
    for v in range(instance.n):
        if v not in forward:
            raise NotStronglyConnected(0, v)
    backward = _reachable(instance.n, _predecessors(instance), 0)
    for v in range(instance.n):
        if v not in backward:
            raise NotStronglyConnected(v, 0)


def induces_strongly_connected(instance: Instance, vertices: Iterable[int]) -> bool:
    vs = set(vertices)
    if not vs:
        return False
    root = min(vs)
    if _reachable(instance.n, _successors(instance), root, vs) != vs:
        return False
    return _reachable(instance.n, _predecessors(instance), root, vs) == vs


def strongly_connected_components(instance: Instance, vertices: Iterable[int] | None = None) -> list[list[int]]:
    """Tarjan's algorithm (iterative) on the subgraph induced by ``vertices``."""
    allowed = set(range(instance.n)) if vertices is None else set(vertices)
    succ = _successors(instance)
    index = {}
    low = {}
    on_stack = set()
    stack = []
    result = []
    counter = 0
    for root in sorted(allowed):
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            nbrs = succ[v]
            while i < len(nbrs):
                w = nbrs[i]
                i += 1
                if w not in allowed:
                    continue
                if w not in index:
                    work.append((v, i))
                    work.append((w, 0))
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            else:
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        comp.append(w)
                        if w == v:
                            break
                    result.append(sorted(comp))
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[v])
    return result


class EdgeMultiset:
    """Multiset of edge ids of one instance.

    ``union`` adds multiplicities, ``intersection`` takes the minimum and
    ``difference`` subtracts (saturating at zero).
    """

    __slots__ = ("instance", "_counts")

    def __init__(self, instance: Instance, counts=None):
        self.instance = instance
        c = Counter()
        if counts is not None:
            items = counts.items() if hasattr(counts, "items") else Counter(counts).items()
            for e, k in items:
                if not 0 <= e < instance.m:
                    raise UnknownEdge(e)
                if k < 0:
                    raise ValueError(f"negative multiplicity for edge {e}")
                if k:
                    c[int(e)] = int(k)
        self._counts = c

    @classmethod
    def of(cls, instance: Instance, edge_ids: Iterable[int]) -> "EdgeMultiset":
        return cls(instance, Counter(edge_ids))

    def __len__(self):
        return sum(self._counts.values())

    def __bool__(self):
        return bool(self._counts)

    def __iter__(self):
        for e in sorted(self._counts):
            for _ in range(self._counts[e]):
                yield e

    def __eq__(self, other):
        if not isinstance(other, EdgeMultiset):
            return NotImplemented
        return self.instance is other.instance and self._counts == other._counts

    def __repr__(self):
        return f"EdgeMultiset({dict(sorted(self._counts.items()))})"

    def __getitem__(self, e: int) -> int:
        return self._counts.get(e, 0)

    def items(self):
        return sorted(self._counts.items())

    def support(self) -> list[int]:
        return sorted(self._counts)

    def union(self, other: "EdgeMultiset") -> "EdgeMultiset":
        out = EdgeMultiset(self.instance)
        out._counts = self._counts + other._counts
        return out

    __add__ = union

    def intersection(self, other: "EdgeMultiset") -> "EdgeMultiset":
        out = EdgeMultiset(self.instance)
        out._counts = self._counts & other._counts
        return out

    def difference(self, other: "EdgeMultiset") -> "EdgeMultiset":
        out = EdgeMultiset(self.instance)
        out._counts = self._counts - other._counts
        return out

    def restrict(self, vertices) -> "EdgeMultiset":
        """Edges with both endpoints in ``vertices``."""
        vs = set(vertices)
        out = EdgeMultiset(self.instance)
        out._counts = Counter(
            {e: k for e, k in self._counts.items() if self.instance.edges[e][0] in vs and self.instance.edges[e][1] in vs}
        )
        return out

    def weight(self) -> float:
        f = self.instance.f
        return math.fsum(f[self.instance.edges[e][0]] * k for e, k in self._counts.items())

    def out_degrees(self) -> np.ndarray:
        deg = np.zeros(self.instance.n, dtype=int)
        for e, k in self._counts.items():
            deg[self.instance.edges[e][0]] += k
        return deg

    def in_degrees(self) -> np.ndarray:
        deg = np.zeros(self.instance.n, dtype=int)
        for e, k in self._counts.items():
            deg[self.instance.edges[e][1]] += k
        return deg

    def crossing_out(self, vertices) -> int:
        """|delta^+(S)| restricted to this multiset."""
        vs = set(vertices)
        return sum(k for e, k in self._counts.items() if self.instance.edges[e][0] in vs and self.instance.edges[e][1] not in vs)

    def vertices(self) -> set[int]:
        vs = set()
        for e in self._counts:
            vs.update(self.instance.edges[e])
        return vs

    def unbalanced_vertex(self) -> int | None:
        diff = self.out_degrees() - self.in_degrees()
        bad = np.flatnonzero(diff)
        return int(bad[0]) if bad.size else None

    def is_balanced(self) -> bool:
        return self.unbalanced_vertex() is None


@dataclass(frozen=True)
class Component:
    vertices: frozenset
    edges: EdgeMultiset

    @property
    def trivial(self) -> bool:
        return len(self.vertices) == 1

    @property
    def smallest(self) -> int:
        return min(self.vertices)


class ComponentView:
    """Weakly connected components of ``(V, E')``, ordered by smallest vertex."""

    def __init__(self, edges: EdgeMultiset):
        inst = edges.instance
        parent = list(range(inst.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in edges.support():
            a, b = find(inst.edges[e][0]), find(inst.edges[e][1])
            if a != b:
                parent[max(a, b)] = min(a, b)
        groups: dict[int, list[int]] = {}
        for v in range(inst.n):
            groups.setdefault(find(v), []).append(v)
        ordered = sorted(groups.values(), key=lambda g: g[0])
        self.label = np.empty(inst.n, dtype=int)
        for i, g in enumerate(ordered):
            self.label[g] = i
        buckets = [Counter() for _ in ordered]
        for e, k in edges.items():
            buckets[self.label[inst.edges[e][0]]][e] = k
        self.components = [Component(frozenset(g), EdgeMultiset(inst, b)) for g, b in zip(ordered, buckets)]

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i) -> Component:
        return self.components[i]

    def of(self, v: int) -> Component:
        return self.components[self.label[v]]

    def nontrivial(self) -> list[Component]:
        return [c for c in self.components if c.edges]


def components(edges: EdgeMultiset) -> ComponentView:
    return ComponentView(edges)


def shortest_path(instance: Instance, u: int, v: int, restrict=None) -> tuple[list[int], float]:
    """Minimum-weight simple path from ``u`` to ``v``.

    Returns the edge ids along the path and its weight.  Among equally short
    paths the lexicographically smallest vertex sequence wins.
    """
    for x in (u, v):
        if not 0 <= x < instance.n:
            raise UnknownVertex(x)
    allowed = None if restrict is None else set(restrict)
    if allowed is not None and (u not in allowed or v not in allowed):
        raise Unreachable(f"restriction set must contain {u} and {v}")
    if u == v:
        return [], 0.0
    succ = _successors(instance)
    done = set()
    heap = [(0.0, (u,))]
    while heap:
        d, path = heapq.heappop(heap)
        x = path[-1]
        if x in done:
            continue
        done.add(x)
        if x == v:
            edges = [instance.edge_between[(a, b)] for a, b in zip(path, path[1:])]
            return edges, d
        nd = d + instance.f[x]
        for y in sorted(set(succ[x])):
            if y in done or (allowed is not None and y not in allowed):
                continue
            heapq.heappush(heap, (nd, path + (y,)))
    raise Unreachable(f"no path from {u} to {v}")


def eulerian_circuit(edges: EdgeMultiset) -> list[int]:
    """Closed walk (as edge ids) using every occurrence in ``edges`` once."""
    inst = edges.instance
    bad = edges.unbalanced_vertex()
    if bad is not None:
        raise NotBalanced(bad, int(edges.out_degrees()[bad]), int(edges.in_degrees()[bad]))
    if not edges:
        return []
    if len(components(edges).nontrivial()) != 1:
        raise NotConnected("edge multiset spans more than one component")
    pending = [[] for _ in range(inst.n)]
    for e in edges:
        pending[inst.edges[e][0]].append(e)
    for lst in pending:
        lst.reverse()  # pop() then yields the smallest id first
    start = min(edges.vertices())
    walk = []
    stack = [(start, None)]
    while stack:
        v, via = stack[-1]
        if pending[v]:
            e = pending[v].pop()
            stack.append((inst.edges[e][1], e))
        else:
            stack.pop()
            if via is not None:
                walk.append(via)
    walk.reverse()
    return walk


def walk_vertices(instance: Instance, walk: Sequence[int]) -> list[int]:
    """Vertex sequence of an edge walk, closing vertex repeated at the end."""
    if not walk:
        return []
    seq = [instance.edges[walk[0]][0]]
    for e in walk:
        u, v = instance.edges[e]
        if u != seq[-1]:
            raise ValueError(f"edge {e} does not continue the walk at vertex {seq[-1]}")
        seq.append(v)
    return seq


def shortcut(instance: Instance, circuit: Sequence[int]) -> tuple[list[int], float]:
    """Hamiltonian order of a closed vertex walk and its metric-closure weight."""
    seen = set()
    order = []
    for v in circuit:
        if v not in seen:
            seen.add(v)
            order.append(v)
    missed = [v for v in range(instance.n) if v not in seen]
    if missed:
        raise VertexMissed(f"circuit does not visit vertex {missed[0]}")
    d = instance.closure
    weight = math.fsum(d[a, b] for a, b in zip(order, order[1:] + order[:1]))
    return order, weight


def walk_weight(instance: Instance, circuit: Sequence[int]) -> float:
    """Weight of a closed vertex walk ``v0, v1, ..., v0``."""
    return math.fsum(instance.f[a] for a in circuit[:-1])
