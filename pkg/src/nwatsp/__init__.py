"""Approximate tours for asymmetric TSP on node-weighted digraph metrics."""

from .graph import EdgeMultiset, Instance, components, eulerian_circuit, shortcut, shortest_path, validate
from .local import solve_lc
from .lp import LpSolution, lb_of, separate, solve
from .merge import RunReport, run
from .oracle import exact_atsp

__all__ = [
    "EdgeMultiset",
    "Instance",
    "LpSolution",
    "RunReport",
    "components",
    "eulerian_circuit",
    "exact_atsp",
    "lb_of",
    "run",
    "separate",
    "shortcut",
    "shortest_path",
    "solve",
    "solve_lc",
    "validate",
]
