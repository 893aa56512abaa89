"""How far from optimal are the tours on small instances?

Run: python demos/04_exact_comparison.py
"""

from nwatsp.generate import GeneratorSpec, generate
from nwatsp.merge import run
from nwatsp.oracle import exact_atsp

print(f"{'seed':>4} {'n':>3} {'lp':>9} {'opt':>9} {'tour':>9} {'tour/opt':>8}")
for seed in range(12):
    inst = generate(GeneratorSpec("random", 6 + seed % 6, density=0.3, seed=seed))
    _, rep = run(inst)
    opt, _ = exact_atsp(inst)
    print(f"{seed:>4} {inst.n:>3} {rep.lp_value:9.3f} {opt:9.3f} {rep.tour_weight:9.3f} {rep.tour_weight / opt:8.3f}")
