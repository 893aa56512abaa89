import math

import numpy as np
import pytest

from helpers import bidirected, crosses_all, cycle, digon, lightness_violations, random_instance
from nwatsp.errors import CutBelowOne, PartitionNotStronglyConnected, SinglePartError
from nwatsp.generate import random_partition
from nwatsp.local import (
    ENTER,
    HEAD,
    LEAVE,
    MID,
    TAIL,
    Partition,
    assemble,
    build_aux,
    capped_ceil,
    fractional_circulation,
    integral_circulation,
    local_connectivity,
    solve_lc,
)
from nwatsp.lp import LpSolution, lower_bounds, solve

SINGLE = lambda n: [{v} for v in range(n)]  # noqa: E731


def test_aux_counts():
    aux = build_aux(cycle(4), SINGLE(4))
    assert aux.num_vertices == 16 and len(aux.arcs) == 20
    aux = build_aux(digon(), SINGLE(2))
    assert aux.num_vertices == 8 and len(aux.arcs) == 10
    with pytest.raises(SinglePartError):
        build_aux(digon(), [{0, 1}])


def test_partition_must_be_strongly_connected():
    with pytest.raises(PartitionNotStronglyConnected):
        Partition.of(cycle(4), [{0, 1}, {2, 3}])


def expected_witness(inst, parts, x):
    """The witness formulas, evaluated edge by edge."""
    part_of = {v: i for i, p in enumerate(parts) for v in p}
    cut = [sum(x[e] for e, (u, v) in enumerate(inst.edges) if part_of[u] == i and part_of[v] != i) for i in range(len(parts))]
    want = {}
    for e, (u, v) in enumerate(inst.edges):
        i, j = part_of[u], part_of[v]
        if i == j:
            for kind in (TAIL, MID, HEAD):
                want[(kind, e)] = x[e] * (1 - 1 / cut[i])
        else:
            want[(MID, e)] = x[e]
            want[(TAIL, e)] = x[e] * (1 - 1 / cut[i])
            want[(LEAVE, e)] = x[e] / cut[i]
            want[(ENTER, e)] = x[e] / cut[j]
            want[(HEAD, e)] = x[e] * (1 - 1 / cut[j])
    return want


@pytest.mark.parametrize("inst,parts", [(cycle(4), SINGLE(4)), (digon(), SINGLE(2))])
def test_fractional_witness_on_cycles(inst, parts):
    lp = solve(inst)
    aux = build_aux(inst, parts)
    y = fractional_circulation(aux, lp)
    for e in range(inst.m):
        assert y[aux.index[(MID, e)]] == pytest.approx(1)
        assert y[aux.index[(LEAVE, e)]] == pytest.approx(1)
        assert y[aux.index[(ENTER, e)]] == pytest.approx(1)
        assert y[aux.index[(TAIL, e)]] == pytest.approx(0)
        assert y[aux.index[(HEAD, e)]] == pytest.approx(0)
    for i in range(len(parts)):
        assert aux.hub_throughput(y, i) == pytest.approx(1)


@pytest.mark.parametrize("seed", range(10))
def test_fractional_witness_formulas_and_conservation(seed):
    inst = random_instance(10, seed, density=0.4)
    lp = solve(inst)
    parts = random_partition(inst, np.random.default_rng(seed))
    aux = build_aux(inst, parts)
    y = fractional_circulation(aux, lp)
    for key, value in expected_witness(inst, parts, lp.x).items():
        assert y[aux.index[key]] == pytest.approx(value, abs=1e-12)
    assert np.all(y >= -1e-12)
    assert np.abs(aux.imbalance(y)).max() < 1e-9


def test_bidirected_square_conservation():
    inst = bidirected([1, 1, 1, 1])
    lp = solve(inst)
    aux = build_aux(inst, [{0, 1}, {2, 3}])
    assert np.abs(aux.imbalance(fractional_circulation(aux, lp))).max() < 1e-9


def test_cut_below_one_is_reported():
    inst = cycle(4)
    x = np.full(4, 0.5)
    lp = LpSolution(inst, x, 2.0, lower_bounds(inst, x))
    with pytest.raises(CutBelowOne):
        fractional_circulation(build_aux(inst, SINGLE(4)), lp)


def integral_problems(aux, lp, y):
    """Independent check of an integral circulation on the auxiliary graph."""
    problems = []
    if np.any(np.asarray(y) != np.round(y)) or np.any(np.asarray(y) < 0):
        problems.append("not a nonnegative integer vector")
    bal = np.zeros(aux.num_vertices)
    for a, (t, h, *_rest) in enumerate(aux.arcs):
        bal[t] += y[a]
        bal[h] -= y[a]
    if np.any(bal != 0):
        problems.append("not conserved")
    for i in range(aux.partition.k):
        through = sum(y[a] for a, arc in enumerate(aux.arcs) if arc[2] == LEAVE and arc[4] == i)
        if through != 1:
            problems.append(f"hub {i} carries {through}")
    for v in range(aux.instance.n):
        out = sum(y[a] for a, arc in enumerate(aux.arcs) if arc[2] == TAIL and arc[0] == v)
        xout = sum(lp.x[e] for e in aux.instance.out_edges[v])
        if out > math.ceil(xout - 1e-6):
            problems.append(f"vertex {v} over cap")
    return problems


def test_integral_on_cycle_is_the_witness():
    inst = cycle(4)
    lp = solve(inst)
    aux = build_aux(inst, SINGLE(4))
    y = integral_circulation(aux, lp)
    assert y == pytest.approx(fractional_circulation(aux, lp))
    assert integral_problems(aux, lp, y) == []


def test_integral_on_digon_uses_both_edges():
    inst = digon()
    lp = solve(inst)
    aux = build_aux(inst, SINGLE(2))
    y = integral_circulation(aux, lp)
    assert [y[aux.index[(MID, e)]] for e in range(2)] == [1, 1]
    assert integral_problems(aux, lp, y) == []


def test_integral_on_k4():
    inst = bidirected([1, 1, 1, 1])
    lp = solve(inst)
    aux = build_aux(inst, [{0, 1}, {2, 3}])
    assert integral_problems(aux, lp, integral_circulation(aux, lp)) == []


def test_assemble_examples():
    inst = cycle(4)
    lp = solve(inst)
    F = solve_lc(inst, lp, SINGLE(4))
    assert dict(F.items()) == {0: 1, 1: 1, 2: 1, 3: 1}
    res = local_connectivity(inst, lp, SINGLE(4))
    assert res.ratio == pytest.approx(1)

    d = digon()
    F = solve_lc(d, solve(d), SINGLE(2))
    assert dict(F.items()) == {0: 1, 1: 1}

    k4 = bidirected([1, 1, 2, 2])
    lp = solve(k4)
    parts = [{0, 1}, {2, 3}]
    aux = build_aux(k4, parts)
    F = assemble(k4, parts, integral_circulation(aux, lp), lp, aux)
    assert crosses_all(k4, F, parts)
    assert lightness_violations(k4, lp.x, F) == []


def test_capped_ceil_ignores_noise():
    assert capped_ceil(1.0000000001) == 1
    assert capped_ceil(1.2) == 2
    assert capped_ceil(2.0) == 2


@pytest.mark.parametrize("seed", range(50))
def test_randomized_lc_sweep(seed):
    rng = np.random.default_rng(1000 + seed)
    kinds = ["random", "unweighted-random", "bidirected-complete", "digon-chain", "cycle"]
    inst = random_instance(int(rng.integers(3, 16)), seed, density=0.3, kind=kinds[seed % len(kinds)])
    lp = solve(inst)
    parts = random_partition(inst, rng)
    res = local_connectivity(inst, lp, parts)
    assert crosses_all(inst, res.F, parts)
    assert lightness_violations(inst, lp.x, res.F) == []
    assert integral_problems(res.aux, lp, res.y) == []
