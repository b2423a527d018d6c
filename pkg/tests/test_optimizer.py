import itertools
import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from trapkit.analysis import DeviationSet, weighted_reject
from trapkit.errors import EmptyErrors
from trapkit.graph import OpenGraph, complete, cycle, edgeless, fractional_chromatic_number
from trapkit.optimizer import (
    build_relation,
    colouring_distribution,
    general_candidates,
    optimise,
    solve_distribution,
    standard_candidates,
)
from trapkit.pauli import Pauli
from trapkit.traps import build_standard_trap

from conftest import PENTAGON_PAIRS


def test_pentagon_relation_is_membership():
    g = cycle(5)
    tests = [build_standard_trap(g, h) for h in PENTAGON_PAIRS]
    rel = build_relation(tests, DeviationSet.explicit([Pauli({v: "X"}) for v in range(5)]))
    for t, h in enumerate(PENTAGON_PAIRS):
        for e, dev in enumerate(rel.errors):
            (v,) = dev.xy_support
            assert rel.detects[t][e] == int(v in h)


def test_k2_general_relation_is_parity():
    g = complete(2)
    rel = build_relation(general_candidates(g), DeviationSet.all_xy(g.vertices))
    for t, c in enumerate(rel.tests):
        for e, dev in enumerate(rel.errors):
            assert rel.detects[t][e] == len(dev.xy_support & c.H) % 2


def test_empty_errors():
    with pytest.raises(EmptyErrors):
        build_relation(standard_candidates(cycle(5)), DeviationSet.explicit([]))


def test_pentagon_optimum():
    res = optimise(cycle(5))
    assert res.rate == Fraction(2, 5)
    support = {c.H for c, w in zip(res.relation.tests, res.weights) if w > 0}
    assert support == {frozenset(p) for p in PENTAGON_PAIRS}
    assert json.loads(json.dumps(res.to_dict()))["rate"] == "2/5"


def test_general_four_vertices_and_c5():
    assert optimise(cycle(4), "general").rate == Fraction(8, 15)
    assert optimise(cycle(5), "general").rate == Fraction(16, 31)
    assert optimise(complete(3)).rate == Fraction(1, 3)


def test_single_test_detecting_everything():
    g = edgeless(3)
    rel = build_relation([build_standard_trap(g, [0, 1, 2])], DeviationSet.all_xy(g.vertices))
    res = solve_distribution(rel)
    assert res.rate == 1 and res.weights == (Fraction(1),)


def test_colouring_distribution():
    s, rate = colouring_distribution(cycle(5))
    assert rate == Fraction(2, 5) and set(s.weights) == {Fraction(1, 5)}
    s, rate = colouring_distribution(complete(3))
    assert rate == Fraction(1, 3) and len(s.canvases) == 3
    s, rate = colouring_distribution(edgeless(4))
    assert rate == 1 and [c.H for c in s.canvases] == [frozenset(range(4))]


def test_dual_attack_meets_primal():
    res = optimise(cycle(5))
    scheme = res.scheme()
    attack = res.attack()
    assert sum(w for _, w in attack) == 1
    assert sum(w * weighted_reject(scheme, e) for e, w in attack) == res.rate
    assert all(weighted_reject(scheme, e) == res.rate for e, _ in attack)


@st.composite
def graphs(draw, max_n=7):
    n = draw(st.integers(1, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return OpenGraph(range(n), [p for p, k in zip(pairs, keep) if k])


@settings(max_examples=40, deadline=None)
@given(graphs(8))
def test_lp_equals_inverse_fractional_chromatic(g):
    res = optimise(g)
    assert res.rate == 1 / fractional_chromatic_number(g)
    # every error is detected at least at the optimal rate
    scheme = res.scheme()
    for e in res.relation.errors:
        assert weighted_reject(scheme, e) >= res.rate
