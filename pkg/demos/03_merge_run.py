"""Full pipeline on one instance, then a peek at the run ledgers.

Run: python demos/03_merge_run.py
"""

from nwatsp.generate import GeneratorSpec, generate
from nwatsp.merge import NW_CYCLE_RULE, run

inst = generate(GeneratorSpec("random", 30, density=0.15, seed=9))

for mode in ("standard", NW_CYCLE_RULE):
    tour, rep = run(inst, epsilon=0.25, mode=mode)
    print(f"{mode}: tour {rep.tour_weight:.3f}, lp {rep.lp_value:.3f}, ratio {rep.ratio:.3f}, certified bound {rep.bound:.1f}")
    print(f"  merges {rep.merges}, restarts {rep.restarts}, potential {[round(p, 1) for p in rep.potential_trace]}")
    print(f"  shortcut order weight {rep.shortcut_weight:.3f}")
    print(f"  connecting cycles kept: {len(rep.x_cycles)}")
