import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from trapkit.analysis import DeviationSet, scheme_delta, scheme_epsilon
from trapkit.compiler import (
    Binomial,
    BoundInputs,
    CompilerParams,
    Hypergeometric,
    _term_eps,
    bounds_amplified,
    bounds_parallel,
    bounds_parallel_mixture,
    check_admissible,
    compile_amplified,
    compile_parallel,
    delta_prime,
    epsilon_prime,
    majority_vote,
    mixture_parameters,
    nu_prime,
    p_delta_prime,
    tail_exact,
)
from trapkit.errors import BadParams, CapExceeded, Inadmissible
from trapkit.traps import TrappifiedScheme, build_custom_canvas, compose_schemes


def test_two_round_sampler_is_fair(pentagon):
    cs = compile_amplified(pentagon, CompilerParams(2, 1, 1, 1))
    rng = np.random.default_rng(5)
    hits = sum(cs.sample(rng).tests == (0,) for _ in range(4000))
    assert abs(hits / 4000 - 0.5) < 4 * math.sqrt(0.25 / 4000)


def test_canvas_count(pentagon):
    cs = compile_amplified(pentagon, CompilerParams(10, 5, 5, 1))
    assert cs.canvas_count() == math.comb(10, 5) * 5 ** 5
    assert compile_parallel(pentagon, 3, 1).canvas_count() == 125


def test_bad_params():
    with pytest.raises(BadParams):
        CompilerParams(10, 5, 5, 0)
    with pytest.raises(BadParams):
        CompilerParams(10, 4, 5, 1)
    with pytest.raises(BadParams):
        CompilerParams(10, 5, 5, 1, Fraction(1, 2))


def test_parallel_single_round(pentagon):
    cs = compile_parallel(pentagon, 1, 1)
    draw = cs.sample(np.random.default_rng(0))
    assert draw.tests == (0,) and draw.canvas_at(0) is not None
    assert cs.decide([0]) == 0 and cs.decide([1]) == 1
    with pytest.raises(BadParams):
        compile_parallel(pentagon, 1, 2)


def test_majority_vote():
    assert majority_vote([(1, 0), (1, 1), (0, 0)]) == (1, 0)
    assert majority_vote([(1,), (0,)]) is None
    assert majority_vote([]) is None


def test_decide_threshold(pentagon):
    cs = compile_amplified(pentagon, CompilerParams(6, 3, 3, 2))
    assert [cs.decide(t) for t in ([0, 0, 1], [1, 0, 1], [1, 1, 1])] == [0, 1, 1]


def test_optimised_epsilon_beats_fixed_chi():
    e, chi = epsilon_prime(Fraction(1, 2), 450, 1000, 500, 50)
    assert e <= _term_eps(0.2, 0.45, 0.5, 500, 50)
    assert 0 < chi < 0.45 - 0.2


def test_epsilon_boundary_is_inadmissible():
    # w/(s(1-eps)) = 2/(20 * 2/5) = 1/4 = k_eps/n exactly
    with pytest.raises(Inadmissible, match="k_eps/n"):
        epsilon_prime(Fraction(3, 5), 10, 40, 20, 2)
    epsilon_prime(Fraction(3, 5), 11, 40, 20, 2)


def test_check_admissible_names_inequality():
    p = CompilerParams(1000, 500, 500, 50, Fraction(1, 10))
    ok = BoundInputs(Fraction(1, 2), 0, 0, 300, 100, 400, Fraction(1, 50))
    check_admissible(ok, p)
    cases = [
        (BoundInputs(Fraction(1, 2), 0, 0, 300, 100, 200, Fraction(1, 50)), "k_eps/n <= k_nu/n"),
        (BoundInputs(Fraction(1, 2), 0, 0, 300, 100, 480, Fraction(1, 50)), "(1-2c)/(2-2c)"),
        (BoundInputs(Fraction(1, 2), 0, 0, 300, 10, 400, Fraction(1, 50)), "p_delta < k_delta/n"),
        (BoundInputs(Fraction(1, 2), Fraction(1, 2), 0, 300, 250, 400, Fraction(1, 50)), "w/(s*delta)"),
    ]
    for inp, text in cases:
        with pytest.raises(Inadmissible) as ei:
            check_admissible(inp, p)
        assert text in str(ei.value)


def test_delta_zero_uses_right_end():
    v, chi = delta_prime(0, 100, 1000, 5, 1)
    assert chi == pytest.approx(0.9)
    assert v == pytest.approx(math.exp(-2 * 0.81 * 5))


def test_amplified_report_fields():
    p = CompilerParams(1000, 500, 500, 50, Fraction(1, 10))
    b = bounds_amplified(BoundInputs(Fraction(1, 2), 0, 0, 300, 100, 400, Fraction(1, 50)), p).to_dict()
    assert b["correctness"] == pytest.approx(b["p_delta_prime"] + b["delta_prime"] + b["nu_prime"])
    assert b["security"] == max(b["epsilon_prime"], b["nu_prime"])
    assert b["p_delta_prime"] == pytest.approx(math.exp(-2 * 0.08 ** 2 * 1000))
    assert b["epsilon_prime"] == pytest.approx(0.16389, rel=1e-3)
    assert b["delta_prime"] < 1e-300
    # at c = 1/10 and k_nu/n = 2/5 the majority term never drops below 1
    assert b["nu_prime"] > 1


def test_p_delta_prime_inadmissible():
    with pytest.raises(Inadmissible, match="p_delta"):
        p_delta_prime(Fraction(1, 10), 100, 1000)


def test_parallel_bounds():
    inp = BoundInputs(Fraction(1, 2), 0, 0, 20, 0, 0, 0)
    b = bounds_parallel(inp, 20, 5, 0)
    assert b.epsilon == pytest.approx(math.exp(-2.5))
    assert b.delta == 0.0
    assert b.nu == pytest.approx(math.exp(-40))
    with pytest.raises(Inadmissible):
        bounds_parallel(BoundInputs(Fraction(1, 2), 0, 0, 10, 0, 0, 0), 20, 5, 0)


def test_parallel_nu_form():
    inp = BoundInputs(0, 0, Fraction(1, 10), 2, 0, 4, 0)
    b = bounds_parallel(inp, 20, 1, 3)
    assert b.nu == pytest.approx(math.exp(-2 * (16 * 0.9 - 3) ** 2 / 16))


def test_parallel_mixture_form():
    b = bounds_parallel_mixture(Fraction(3, 5), 0, Fraction(1, 10), 100, 50, 50, 5, 60, 0, 20)
    assert b.epsilon == pytest.approx(math.exp(-2 * (60 * 0.4 / 100 - 0.1) ** 2 * 2500 / 60))
    assert b.nu == pytest.approx(math.exp(-2 * (0.8 * 0.9 - 0.5) ** 2 * 2500 / 80))


def test_tail_exact_examples():
    assert tail_exact(Hypergeometric(10, 5, 5), "<=", 1) == Fraction(13, 126)
    assert tail_exact(Binomial(4, Fraction(1, 2)), ">=", 2) == Fraction(11, 16)
    assert tail_exact(Binomial(4, Fraction(1, 2)), ">", 2) == Fraction(5, 16)
    with pytest.raises(CapExceeded):
        tail_exact(Binomial(10_001, Fraction(1, 2)), "<", 3)


def test_mixture_parameters_example():
    assert mixture_parameters(Fraction(3, 5), Fraction(1, 10), Fraction(1, 5), 6, 4) == (
        Fraction(21, 25), Fraction(1, 25), Fraction(13, 25),
    )


def test_mixture_matches_direct_analysis(pentagon):
    g = pentagon.graph
    blank = build_custom_canvas(g, g.vertices, pentagon.canvases[0].sigma, [])
    comp_only = TrappifiedScheme.uniform([blank])
    dset = DeviationSet.all_xy(g.vertices)
    eps = scheme_epsilon(pentagon, dset).value
    dlt = scheme_delta(pentagon, dset).value
    for d, s in ((1, 1), (3, 2), (6, 4)):
        mix = compose_schemes([comp_only, pentagon], [Fraction(d, d + s), Fraction(s, d + s)])
        e_m, d_m, _ = mixture_parameters(eps, dlt, 0, d, s)
        assert scheme_epsilon(mix, dset).value == e_m
        assert scheme_delta(mix, dset).value == d_m


def test_proof_form_nu_is_not_a_bound():
    # every computation round flips with c = 0.45 and no round is attacked
    exact = tail_exact(Binomial(1000, Fraction(45, 100)), ">=", 500)
    proof, _ = nu_prime(Fraction(45, 100), 0, 1001, 1000, proof_form=True)
    stated, _ = nu_prime(Fraction(45, 100), 0, 1001, 1000)
    assert proof == pytest.approx(6.6e-8, rel=0.05)
    assert float(exact) == pytest.approx(8.4655e-4, rel=1e-4)
    assert proof < float(exact) <= stated


def _accept_exact(n, k, s, w, r):
    """Pr[fewer than w failures] when k of n rounds are attacked, each attacked test failing w.p. r."""
    hg = Hypergeometric(n, k, s)
    return sum(hg.pmf(j) * tail_exact(Binomial(j, r), "<", w) for j in hg.support)


@settings(max_examples=60, deadline=None)
@given(data=st.data(), eps=st.fractions(Fraction(0), Fraction(9, 10), max_denominator=10))
def test_epsilon_prime_is_sound(data, eps):
    # draw an admissible tuple directly: w/(s(1-eps)) < k/n <= 1
    s = data.draw(st.integers(1, 25))
    w = data.draw(st.integers(1, max(1, math.ceil(s * (1 - eps)) - 1)))
    assume(Fraction(w, s) / (1 - eps) < 1)
    n = data.draw(st.integers(max(s, 4), 40))
    k = data.draw(st.integers(math.floor(Fraction(w * n, s) / (1 - eps)) + 1, n))
    bound, _ = epsilon_prime(eps, k, n, s, w)
    assert float(_accept_exact(n, k, s, w, 1 - eps)) <= bound + 1e-12


@settings(max_examples=60, deadline=None)
@given(data=st.data(), dl=st.fractions(Fraction(1, 10), Fraction(1), max_denominator=10))
def test_delta_prime_is_sound(data, dl):
    # admissible: 1 <= k and k/n < w/(s delta)
    s = data.draw(st.integers(1, 25))
    w = data.draw(st.integers(1, s))
    n = data.draw(st.integers(max(s, 4), 40))
    top = min(n, math.ceil(Fraction(w * n, s) / dl) - 1)
    assume(top >= 1)
    k = data.draw(st.integers(1, top))
    bound, _ = delta_prime(dl, k, n, s, w)
    reject = 1 - _accept_exact(n, k, s, w, dl)
    assert float(reject) <= bound + 1e-12


@settings(max_examples=60, deadline=None)
@given(n=st.integers(3, 40), data=st.data(), c=st.fractions(Fraction(0), Fraction(2, 5), max_denominator=10))
def test_nu_prime_is_sound(n, data, c):
    d = data.draw(st.integers(1, n))
    k = data.draw(st.integers(0, n))
    try:
        bound, _ = nu_prime(c, k, n, d)
    except Inadmissible:
        assume(False)
    # attacked computation rounds are all wrong, the rest wrong w.p. c; ties fail
    hg = Hypergeometric(n, k, d)
    fail = sum(
        hg.pmf(j) * tail_exact(Binomial(d - j, c), ">=", Fraction(d, 2) - j) for j in hg.support
    )
    assert float(fail) <= bound + 1e-12
