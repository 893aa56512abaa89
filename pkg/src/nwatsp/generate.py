"""Seeded instance generators and random valid partitions."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import BadSpec
from .graph import Instance, strongly_connected_components

KINDS = ("cycle", "digon-chain", "random", "unweighted-random", "bidirected-complete")
WEIGHT_LAWS = ("uniform", "constant")


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    n: int
    density: float = 0.3
    weights: str = "uniform"  # uniform on [1, max_weight], or constant 1
    max_weight: float = 10.0
    seed: int = 0

    def check(self) -> None:
        if self.kind not in KINDS:
            raise BadSpec(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if self.n < 2:
            raise BadSpec("n must be at least 2")
        if not 0 < self.density <= 1:
            raise BadSpec("density must lie in (0, 1]")
        if self.weights not in WEIGHT_LAWS:
            raise BadSpec(f"unknown weight law {self.weights!r}")
        if self.max_weight < 1:
            raise BadSpec("max_weight must be at least 1")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "GeneratorSpec":
        try:
            return cls(**data)
        except TypeError as exc:
            raise BadSpec(str(exc)) from exc


def generate(spec: GeneratorSpec) -> Instance:
    spec.check()
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    if spec.kind == "cycle":
        edges = [(i, (i + 1) % n) for i in range(n)]
    elif spec.kind == "digon-chain":
        edges = [e for i in range(n - 1) for e in ((i, i + 1), (i + 1, i))]
    elif spec.kind == "bidirected-complete":
        edges = [(u, v) for u in range(n) for v in range(n) if u != v]
    else:
        # Hamiltonian skeleton keeps the graph strongly connected
        perm = rng.permutation(n)
        chosen = {(int(perm[i]), int(perm[(i + 1) % n])) for i in range(n)}
        coins = rng.random((n, n))
        for u in range(n):
            for v in range(n):
                if u != v and coins[u, v] < spec.density:
                    chosen.add((u, v))
        edges = sorted(chosen)
    if spec.kind == "unweighted-random" or spec.weights == "constant":
        f = np.ones(n)
    else:
        f = np.round(rng.uniform(1.0, spec.max_weight, n), 3)
    return Instance(n, tuple(float(x) for x in f), tuple(edges))


def random_partition(instance: Instance, rng, max_parts: int | None = None) -> list[frozenset]:
    """Random partition into parts that each induce a strongly connected subgraph.

    Vertices get random labels; every label class is split into its strongly
    connected pieces.  Retries until at least two parts exist.
    """
    n = instance.n
    top = max_parts or n
    for _ in range(100):
        k = int(rng.integers(1, top + 1))
        labels = rng.integers(0, k, n)
        parts = []
        for lab in range(k):
            group = [v for v in range(n) if labels[v] == lab]
            if group:
                parts.extend(frozenset(c) for c in strongly_connected_components(instance, group))
        if len(parts) >= 2:
            return sorted(parts, key=min)
    return [frozenset([v]) for v in range(n)]
