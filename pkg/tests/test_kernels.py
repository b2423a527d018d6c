import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trapkit import _kernels_py, kernels
from trapkit.graph import cycle, grid, petersen
from trapkit.tableau import Tableau


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="extension not built")
@pytest.mark.parametrize("g", [cycle(5), grid(3, 3), petersen()])
def test_independent_sets_twins(g):
    adj = g.adjacency_masks()
    n = len(g)
    assert list(kernels.independent_sets(adj, n, n)) == list(_kernels_py.independent_sets(adj, n, n))


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="extension not built")
def test_count_failures_twins():
    rng = np.random.default_rng(3)
    T, n, s, K = 200, 12, 6, 5
    dev = rng.integers(0, 1 << 5, size=(T, n)).astype(np.uint64)
    tests = np.sort(np.argsort(rng.random((T, n)), axis=1)[:, :s], axis=1).astype(np.int64)
    picks = rng.integers(0, K, size=(T, s)).astype(np.int64)
    masks = rng.integers(1, 1 << 5, size=K).astype(np.uint64)
    parity = rng.integers(0, 2, size=K).astype(np.uint8)
    a = np.asarray(kernels.count_failures(dev, tests, picks, masks, parity))
    b = np.asarray(_kernels_py.count_failures(dev, tests, picks, masks, parity))
    assert (a == b).all()
    # direct evaluation
    for t in range(T):
        ref = 0
        for j in range(s):
            hit = int(dev[t, tests[t, j]]) & int(masks[picks[t, j]])
            ref += (bin(hit).count("1") & 1) if parity[picks[t, j]] else int(hit != 0)
        assert a[t] == ref


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="extension not built")
def test_tableau_measure_twins():
    for impl in (kernels.tableau_measure, _kernels_py.tableau_measure):
        t = Tableau(2)
        t.h(0)
        t.cnot(0, 1)
        x, z, r = t.x.copy(), t.z.copy(), t.r.copy()
        out, rnd = impl(x, z, r, 2, 0, 1)
        assert rnd and out == 1
        assert impl(x, z, r, 2, 1, 0) == (1, False)


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="extension not built")
@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.data())
def test_rotate_measure_twins(n, data):
    a = data.draw(st.integers(0, n - 1))
    s_pow, pauli, bit = data.draw(st.integers(0, 3)), data.draw(st.integers(0, 3)), data.draw(st.integers(0, 1))
    seq = data.draw(st.lists(st.tuples(st.sampled_from("HSC"), st.integers(0, n - 1), st.integers(0, n - 1)), max_size=12))
    t = Tableau(n)
    for g, i, j in seq:
        if g == "C" and i != j:
            t.cz(i, j)
        elif g != "C":
            t.gate(g, i)
    py = (t.x.copy(), t.z.copy(), t.r.copy())
    cy = (t.x.copy(), t.z.copy(), t.r.copy())
    a1 = _kernels_py.tableau_rotate_measure(*py, n, a, s_pow, pauli, bit)
    a2 = kernels.tableau_rotate_measure(*cy, n, a, s_pow, pauli, bit)
    assert tuple(map(int, a1)) == tuple(map(int, a2))
    for u, v in zip(py, cy):
        assert np.array_equal(u, v)
    # the fused kernel equals the separate gates
    ref = t.copy()
    for _ in range(s_pow):
        ref.s(a)
    ref.h(a)
    ref.gate("IXYZ"[pauli], a)
    assert ref.measure(a, bit) == (int(a1[0]), bool(a1[1]))
