"""The twelve acceptance criteria, each at its stated tolerance.

Every test prints one PASS/FAIL line. Run standalone with
`python tests/test_acceptance.py`.
"""

import itertools
import math
import sys
import time
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from trapkit.analysis import (
    DeviationSet,
    instance_reject_probability,
    scheme_delta,
    scheme_epsilon,
    simulated_reject_table,
)
from trapkit.compiler import (
    Binomial,
    CompilerParams,
    Hypergeometric,
    compile_amplified,
    compile_bqp,
    delta_prime,
    epsilon_prime,
    hoeffding_binomial,
    hoeffding_hypergeometric,
    nu_prime,
    p_delta_prime,
    tail_exact,
)
from trapkit.graph import (
    OpenGraph,
    chromatic_number,
    clique_number,
    cycle,
    enumerate_independent_sets,
    fractional_chromatic_number,
    fractional_clique_number,
    path,
)
from trapkit.harness import AdversaryStrategy, distinguishing_game, estimate_rates, wilson
from trapkit.mbqc import MeasurementPattern, run_pattern
from trapkit.optimizer import optimise
from trapkit.pauli import Pauli
from trapkit.states import ProductState
from trapkit.traps import TrappifiedScheme, build_general_trap, build_standard_trap
from trapkit.ubqc import ClientSecrets, run_blind_session, twirl_check

from conftest import PENTAGON_PAIRS, line_computation


@pytest.fixture
def report(capsys):
    def emit(n: int, ok: bool, detail: str, started: float) -> None:
        with capsys.disabled():
            print(f"\ncriterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}  ({time.time() - started:.1f}s)")
        assert ok, detail

    return emit


def atlas(max_n: int, connected: bool = False) -> list[OpenGraph]:
    out = []
    for h in nx.graph_atlas_g():
        n = h.number_of_nodes()
        if 1 <= n <= max_n and (not connected or nx.is_connected(h)):
            out.append(OpenGraph(range(n), list(h.edges)))
    return out


def xy_words(vertices, max_weight):
    yield Pauli({})
    for r in range(1, max_weight + 1):
        for vs in itertools.combinations(vertices, r):
            for ls in itertools.product("XY", repeat=r):
                yield Pauli(dict(zip(vs, ls)))


def test_criterion_01_pentagon_optimum(report):
    t0 = time.time()
    res = optimise(cycle(5))
    support = {c.H for c, w in zip(res.relation.tests, res.weights) if w > 0}
    # the 3-colouring baseline: classes {0,2}, {1,3}, {4}
    s3 = TrappifiedScheme.uniform([build_standard_trap(cycle(5), h) for h in ([0, 2], [1, 3], [4])])
    rate3 = 1 - scheme_epsilon(s3, DeviationSet.all_xy(range(5))).value
    elapsed = time.time() - t0
    ok = (
        res.rate == Fraction(2, 5)
        and support == {frozenset(p) for p in PENTAGON_PAIRS}
        and rate3 == Fraction(1, 3)
        and elapsed < 1.0
    )
    report(1, ok, f"rate={res.rate} colouring={rate3} support={len(support)} pairs", t0)


def test_criterion_02_fractional_sandwich(report):
    t0 = time.time()
    graphs = atlas(7, connected=True)
    bad = []
    for g in graphs:
        rate = optimise(g).rate
        chif = fractional_chromatic_number(g)
        chi, omega = chromatic_number(g), clique_number(g)
        if not (rate == 1 / chif and Fraction(1, chi) <= rate <= Fraction(1, omega) and fractional_clique_number(g) == chif):
            bad.append(g)
    ok = len(graphs) >= 850 and not bad and time.time() - t0 < 600
    report(2, ok, f"{len(graphs)} connected graphs, {len(bad)} violations", t0)


def test_criterion_03_general_trap_rate(report):
    t0 = time.time()
    bad = 0
    checked = 0
    for g in atlas(6):
        n = len(g)
        subsets = [frozenset(h) for r in range(1, n + 1) for h in itertools.combinations(range(n), r)]
        scheme = TrappifiedScheme.uniform([build_general_trap(g, h) for h in subsets])
        for r in range(1, n + 1):
            for support in itertools.combinations(range(n), r):
                dev = Pauli({v: "X" for v in support})
                hits = sum(c.predicate_rejects(dev) for c in scheme.canvases)
                checked += 1
                bad += hits != 2 ** (n - 1)
        rate = 1 - scheme_epsilon(scheme, DeviationSet.all_xy(range(n))).value
        bad += rate != Fraction(2 ** (n - 1), 2 ** n - 1) or rate < Fraction(1, 2)
    ok = bad == 0 and time.time() - t0 < 60
    report(3, ok, f"{checked} supports each rejected by exactly 2^(n-1) subsets; rate >= 1/2", t0)


def _random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def test_criterion_04_twirl_cancellation(report):
    t0 = time.time()
    rng = np.random.default_rng(4)
    worst = 0.0
    for q, q2 in itertools.permutations("IXYZ", 2):
        worst = max(worst, twirl_check(_random_density(rng, 2), q, q2))
    words = ["".join(w) for w in itertools.product("IXYZ", repeat=2)]
    for _ in range(50):
        q, q2 = rng.choice(words, size=2, replace=False)
        worst = max(worst, twirl_check(_random_density(rng, 4), str(q), str(q2)))
    report(4, worst < 1e-12 and time.time() - t0 < 5, f"max residual {worst:.2e}", t0)


def test_criterion_05_protocol_correctness(report):
    t0 = time.time()
    g = path(3).with_io(inputs=[0], outputs=[2])
    inp = ProductState({0: "+"})
    rng = np.random.default_rng(5)
    worst = 1.0
    sessions = 0
    for t1, t2 in itertools.product(range(8), repeat=2):
        p = MeasurementPattern.from_flow(g, {0: t1, 1: t2}, {0: 1, 1: 2})
        for raw in itertools.product((0, 1), repeat=2):
            # random client secrets, and the pair also used as the secret rotations
            for sec in (ClientSecrets.sample(p, rng), ClientSecrets.build(p, {0: t1, 1: t2}, r={0: raw[1]})):
                out, _ = run_blind_session(p, inp, secrets=sec, forced=dict(zip((0, 1), raw)), seed=sessions)
                plain = run_pattern(p, inp, [out.outcomes[0], out.outcomes[1]])
                worst = min(worst, out.state.fidelity(plain.state))
                sessions += 1
    ok = worst > 1 - 1e-9 and time.time() - t0 < 30
    report(5, ok, f"{sessions} sessions, min fidelity {worst:.12f}", t0)


def test_criterion_06_trap_determinism_and_predicates(report):
    t0 = time.time()
    canvases = mismatches = 0
    for g in atlas(6):
        n = len(g)
        devs = list(xy_words(range(n), 2))
        cs = [build_general_trap(g, h) for r in range(1, n + 1) for h in itertools.combinations(range(n), r)]
        cs += [build_standard_trap(g, s) for s in enumerate_independent_sets(g) if s]
        for c in cs:
            canvases += 1
            sim = simulated_reject_table(c, devs)
            mismatches += sim[0] != 0
            mismatches += sum(a != c.predicate_rejects(d) for a, d in zip(sim, devs))
    ok = mismatches == 0 and time.time() - t0 < 300
    report(6, ok, f"{canvases} canvases, {mismatches} mismatches", t0)


def test_criterion_07_trap_computation_independence(report, grid_scheme):
    t0 = time.time()
    comps = [line_computation(a) for a in ((4, 0, 0), (0, 2, 0), (2, 4, 6))]
    devs = [Pauli({v: p}) for v in grid_scheme.graph.vertices for p in "XYZ"]
    identical = True
    for k, canvas in enumerate(grid_scheme.canvases):
        tables = []
        for comp in comps:
            # free host vertices at angle 0 keep the whole pattern Clifford
            inst = grid_scheme.instantiate(k, comp)
            tables.append([instance_reject_probability(inst, d) for d in devs])
        identical &= all(t == tables[0] for t in tables)
        identical &= tables[0] == [canvas.predicate_rejects(d) for d in devs]
    report(7, identical and time.time() - t0 < 60,
           f"{len(grid_scheme.canvases)} canvases x {len(devs)} deviations x 3 computations", t0)


TRIALS = 100_000


def test_criterion_08_amplification_soundness(report, pentagon):
    t0 = time.time()
    n, s, w, eps = 40, 20, 2, Fraction(3, 5)
    cs = compile_amplified(pentagon, CompilerParams(n, n - s, s, w))
    lines, ok = [], True
    x0 = Pauli({0: "X"})
    attacks = {
        n: AdversaryStrategy.fixed(x0),
        20: AdversaryStrategy.schedule([x0] * 20 + [Pauli({})] * 20),
        12: AdversaryStrategy.schedule([Pauli({})] * 28 + [x0] * 12),
    }
    for k, adv in attacks.items():
        bound, _ = epsilon_prime(eps, k, n, s, w)
        est = estimate_rates(cs, None, adv, TRIALS, 80 + k)
        rate, lo, hi = est.accept
        ok &= lo <= bound
        lines.append(f"k={k}: undetected {rate:.5f} [{lo:.5f},{hi:.5f}] <= eps' {bound:.4f}")
    # honest-but-noisy: Z-only noise, delta = 0 on standard traps
    p_d = Fraction(1, 50)
    assert scheme_delta(pentagon, DeviationSet.z_only(range(5))).value == 0
    envelope = min(
        p_delta_prime(p_d, k, n) + delta_prime(0, k, n, s, w)[0] for k in range(1, n + 1) if p_d < Fraction(k, n)
    )
    noisy = AdversaryStrategy.noisy(float(p_d), DeviationSet.z_only(range(5)))
    est = estimate_rates(cs, None, noisy, TRIALS, 88)
    rej, lo, hi = est.reject
    blind = estimate_rates(cs, None, noisy, 300, 89, engine="blind")
    ok &= lo <= envelope and blind.accepted == blind.trials
    lines.append(f"noisy false-reject {rej:.5f} [{lo:.5f},{hi:.5f}] <= p_delta'+delta' {envelope:.2e}")
    report(8, ok and time.time() - t0 < 600, "; ".join(lines), t0)


def test_criterion_09_majority_vote(report, grid_scheme):
    t0 = time.time()
    c = Fraction(1, 5)
    params = CompilerParams(12, 11, 1, 1, c)
    cs = compile_bqp(grid_scheme, params)
    comp = line_computation(flip=float(c))
    est = estimate_rates(cs, comp, AdversaryStrategy.honest(), TRIALS, 9, engine="vector")
    failures = est.corrupted + (est.trials - est.accepted)
    rate, lo, hi = wilson(failures, est.trials)
    bound, _ = nu_prime(c, 0, params.n, params.d)
    exact = float(tail_exact(Binomial(11, c), ">=", 6))
    sigma = math.sqrt(exact * (1 - exact) / est.trials)
    ok = lo <= bound and abs(rate - exact) <= 4 * sigma and time.time() - t0 < 300
    report(9, ok, f"failure {rate:.5f} [{lo:.5f},{hi:.5f}] <= nu' {bound:.4f}; exact tail {exact:.5f}", t0)


def test_criterion_10_tail_bounds(report):
    t0 = time.time()
    rng = np.random.default_rng(10)
    tuples = violations = 0
    while tuples < 100:
        N = int(rng.integers(2, 200))
        K = int(rng.integers(0, N + 1))
        s = int(rng.integers(1, N + 1))
        chi = float(rng.uniform(0.01, 0.5))
        hg = Hypergeometric(N, K, s)
        bound = Fraction(hoeffding_hypergeometric(chi, s))
        low = tail_exact(hg, "<=", (Fraction(K, N) - Fraction(chi)) * s)
        high = tail_exact(hg, ">=", (Fraction(K, N) + Fraction(chi)) * s)
        violations += (low > bound) + (high > bound)
        m = int(rng.integers(1, 200))
        q = Fraction(int(rng.integers(0, 101)), 100)
        wv = Fraction(int(rng.integers(0, m + 1)))
        if wv == m * q:
            continue
        b = Binomial(m, q)
        side = "<=" if wv < m * q else ">="
        violations += tail_exact(b, side, wv) > Fraction(hoeffding_binomial(m, q, wv))
        tuples += 1
    report(10, violations == 0 and time.time() - t0 < 60, f"{tuples} tuples, {violations} violations", t0)


def test_criterion_11_distinguishing_game(report, grid_scheme, line):
    t0 = time.time()
    honest = distinguishing_game(grid_scheme, line, AdversaryStrategy.honest(), 10_000, 110)
    harm = Pauli({0: "X", 11: "X"})
    eps_hat = float(scheme_epsilon(grid_scheme, DeviationSet.explicit([harm])).value)
    harmful = distinguishing_game(grid_scheme, line, AdversaryStrategy.fixed(harm), 10_000, 111)
    ok = (
        abs(honest.advantage) <= 3 * honest.sigma
        and harmful.advantage <= eps_hat + 3 * harmful.sigma
        and time.time() - t0 < 300
    )
    report(11, ok, f"honest {honest.advantage:.4f}+-{honest.sigma:.4f}; "
               f"harmful {harmful.advantage:.4f}+-{harmful.sigma:.4f} vs eps {eps_hat}", t0)


def test_criterion_12_dual_attack(report):
    t0 = time.time()
    res = optimise(cycle(5))
    trials = 10_000
    est = estimate_rates(res.scheme(), None, AdversaryStrategy.distribution(res.attack()), trials, 12, engine="blind")
    rate = 1 - est.accepted / trials
    sigma = math.sqrt(0.4 * 0.6 / trials)
    ok = abs(rate - 0.4) <= 3 * sigma and time.time() - t0 < 120
    report(12, ok, f"detection {rate:.4f} vs 2/5 (3 sigma = {3 * sigma:.4f})", t0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
