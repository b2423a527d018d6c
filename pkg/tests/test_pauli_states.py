import numpy as np
import pytest
from hypothesis import given, strategies as st

from trapkit.errors import NotClifford
from trapkit.pauli import Pauli
from trapkit.states import PAULI_MATS, ProductState, QuantumState, StateVector, clifford_gates, plus_theta, tag_vector
from trapkit.tableau import Tableau

words = st.dictionaries(st.integers(0, 3), st.sampled_from("IXYZ"), max_size=4)


def _dense(p: Pauli, n: int = 4) -> np.ndarray:
    m = np.eye(1, dtype=complex)
    for v in range(n):
        m = np.kron(m, PAULI_MATS.get(p[v], np.eye(2)) if p[v] != "I" else np.eye(2))
    return (1j ** p.phase) * m


@given(words, words, st.integers(0, 3), st.integers(0, 3))
def test_product_matches_matrices(a, b, pa, pb):
    P, Q = Pauli(a, pa), Pauli(b, pb)
    assert np.allclose(_dense(P * Q), _dense(P) @ _dense(Q))
    assert P.commutes(Q) == np.allclose(_dense(P) @ _dense(Q), _dense(Q) @ _dense(P))


def test_strings_and_supports():
    p = Pauli.from_string("-XZI")
    assert p.sign == -1 and p.support == {0, 1} and p.xy_support == {0}
    assert Pauli.from_string("+YY").weight == 2
    assert Pauli.from_dict(p.unsigned().to_dict()) == p.unsigned()
    assert not Pauli({0: "X"}, 1).squares_to_identity()


def test_tags():
    assert plus_theta(2) == "+i" and plus_theta(1) == "+@1"
    assert np.allclose(tag_vector("+@2"), tag_vector("+i"))
    with pytest.raises(NotClifford):
        clifford_gates("+@1")
    s = ProductState({0: "+", 1: "0"})
    assert ProductState.from_dict(s.to_dict()) == s
    assert s.to_state().norm == pytest.approx(1.0)


def test_measure_removes_qubit_and_impossible_branch():
    sv = StateVector()
    sv.add(0, tag_vector("+"))
    bit, pr = sv.measure(0, 0, forced=0)
    assert (bit, pr) == (0, pytest.approx(1.0))
    from trapkit.states import ImpossibleBranch

    sv.add(1, tag_vector("+"))
    with pytest.raises(ImpossibleBranch):
        sv.measure(1, 0, forced=1)


def test_quantum_state_norm_check():
    with pytest.raises(ValueError):
        QuantumState(np.array([1.0, 1.0]), [0])


def test_tableau_bell_pair():
    t = Tableau(2)
    t.h(0)
    t.cnot(0, 1)
    first, rnd = t.measure(0, 1)
    assert rnd and first == 1
    assert t.measure(1) == (1, False)
