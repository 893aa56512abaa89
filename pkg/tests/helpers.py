"""Small instance builders and independent validators used across tests."""

import math
from collections import Counter

import networkx as nx
import numpy as np

from nwatsp.generate import GeneratorSpec, generate
from nwatsp.graph import Instance

ACCEPTANCE_LINES = []


def cycle(n, f=None):
    f = f if f is not None else [1.0] * n
    return Instance(n, tuple(float(x) for x in f), tuple((i, (i + 1) % n) for i in range(n)))


def digon(a=2.0, b=3.0):
    return Instance(2, (float(a), float(b)), ((0, 1), (1, 0)))


def bidirected(f):
    n = len(f)
    return Instance(n, tuple(float(x) for x in f), tuple((u, v) for u in range(n) for v in range(n) if u != v))


def random_instance(n, seed, density=0.3, kind="random"):
    return generate(GeneratorSpec(kind, n, density=density, seed=seed))


def nx_digraph(inst):
    g = nx.DiGraph()
    g.add_nodes_from(range(inst.n))
    for u, v in inst.edges:
        g.add_edge(u, v, weight=inst.f[u])
    return g


def nx_distances(inst):
    d = dict(nx.all_pairs_dijkstra_path_length(nx_digraph(inst)))
    return np.array([[d[u].get(v, math.inf) for v in range(inst.n)] for u in range(inst.n)])


def is_closed_walk(inst, walk, multiset):
    """True when the edge id sequence is a closed walk using each occurrence once."""
    if Counter(walk) != Counter(dict(multiset.items())):
        return False
    for a, b in zip(walk, walk[1:] + walk[:1]):
        if inst.edges[a][1] != inst.edges[b][0]:
            return False
    return True


def lightness_violations(inst, x, F, alpha=3.0, tol=1e-6):
    """Independent check of the local-connectivity certificate. Returns a list
    of human-readable problems (empty when everything holds)."""
    problems = []
    out = np.zeros(inst.n, dtype=int)
    inn = np.zeros(inst.n, dtype=int)
    for e, k in F.items():
        u, v = inst.edges[e]
        out[u] += k
        inn[v] += k
    if np.any(out != inn):
        problems.append("unbalanced")
    xout = np.zeros(inst.n)
    for e, (u, _v) in enumerate(inst.edges):
        xout[u] += x[e]
    lb = np.array(inst.f) * xout
    for v in range(inst.n):
        if out[v] > math.ceil(xout[v] - 1e-6) + 1:
            problems.append(f"degree at {v}")
    g = nx.Graph()
    for e in F.support():
        g.add_edge(*inst.edges[e])
    for comp in nx.connected_components(g):
        w = sum(inst.f[inst.edges[e][0]] * k for e, k in F.items() if inst.edges[e][0] in comp)
        if w > alpha * lb[list(comp)].sum() + tol:
            problems.append(f"heavy component at {min(comp)}")
    return problems


def crosses_all(inst, F, parts):
    for p in parts:
        if not any(inst.edges[e][0] in p and inst.edges[e][1] not in p for e in F.support()):
            return False
    return True
