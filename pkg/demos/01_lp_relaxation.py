"""Solve the subtour LP on a few small digraphs and look at where the value sits.

Run: python demos/01_lp_relaxation.py
"""

import numpy as np

from nwatsp.generate import GeneratorSpec, generate
from nwatsp.graph import Instance
from nwatsp.lp import separate, solve, solve_exhaustive

# A directed 5-cycle: the only tour, and the LP knows it.
ring = Instance(5, (1.0, 2.0, 3.0, 4.0, 5.0), tuple((i, (i + 1) % 5) for i in range(5)))
sol = solve(ring)
print("5-cycle LP value:", sol.value, "(sum of f is 15)")
print("lb per vertex:", sol.lb)

# A denser random instance needs a few rounds of cuts.
inst = generate(GeneratorSpec("random", 12, density=0.25, seed=4))
sol = solve(inst)
print(f"\nrandom n=12: value {sol.value:.4f} after {sol.rounds} rounds, {len(sol.cuts)} cut constraints")
print("largest lb share:", np.round(np.sort(sol.lb)[::-1][:4], 3))
print("oracle finds nothing left to cut:", separate(inst, sol.x) is None)

# Small enough to write every cut out and compare.
small = generate(GeneratorSpec("bidirected-complete", 6, seed=2))
a, b = solve(small), solve_exhaustive(small)
print(f"\nbidirected n=6: cutting planes {a.value:.6f}, all 62 cuts {b.value:.6f}")
