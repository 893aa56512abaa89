"""Batch run through the same code path as ``nwatsp sweep``.

Run: python demos/05_sweep.py
"""

from nwatsp.cli import sweep, sweep_csv
from nwatsp.generate import GeneratorSpec

specs = [GeneratorSpec(kind, n, seed=s).to_json()
         for kind in ("random", "unweighted-random", "bidirected-complete")
         for n, s in ((6, 1), (9, 2), (20, 3))]
summary = sweep(specs, epsilon=0.25)
print(sweep_csv(summary))
print("max ratio", round(summary["max_ratio"], 4), "mean", round(summary["mean_ratio"], 4))
print("oracle comparisons:", summary["oracle_checks"], "restarts:", summary["total_restarts"])
