"""Build a 3-light edge multiset that leaves every part of a partition.

Run: python demos/02_local_connectivity.py
"""

import numpy as np

from nwatsp.generate import GeneratorSpec, generate, random_partition
from nwatsp.graph import components
from nwatsp.local import local_connectivity
from nwatsp.lp import solve

inst = generate(GeneratorSpec("random", 15, density=0.3, seed=21))
lp = solve(inst)
parts = random_partition(inst, np.random.default_rng(5))
print("parts:", [sorted(p) for p in parts])

res = local_connectivity(inst, lp, parts)
print(f"auxiliary graph: {res.aux.num_vertices} vertices, {len(res.aux.arcs)} arcs")
print("F has", len(res.F), "edge occurrences, weight", res.F.weight())

for comp in components(res.F).nontrivial():
    lb = sum(lp.lb[v] for v in comp.vertices)
    print(f"  component {sorted(comp.vertices)}: w={comp.edges.weight():.3f}  lb={lb:.3f}  ratio={comp.edges.weight() / lb:.3f}")
print("worst ratio:", round(res.ratio, 4), "(never above 3)")
