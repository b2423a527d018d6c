"""Single-qubit preparations, dense states and the statevector engine."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import NotClifford, StateTooLarge

STATEVECTOR_CAP = 16

_S2 = 1 / np.sqrt(2)
# e^{i k pi/4}, exact to double precision
PHASES = np.array([np.exp(1j * np.pi * k / 4) for k in range(8)])
PHASES[[0, 2, 4, 6]] = [1, 1j, -1, -1j]
H_GATE = np.array([[1, 1], [1, -1]], dtype=complex) * _S2
PAULI_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def z_rot(k: int) -> np.ndarray:
    """Z(k pi/4) = diag(1, e^{i k pi/4})."""
    return np.diag([1, PHASES[k % 8]])


# -- preparation tags ---------------------------------------------------------

_NAMED = {"0", "1", "+", "-", "+i", "-i"}
_EVEN_THETA = {0: "+", 2: "+i", 4: "-", 6: "-i"}


def plus_theta(k: int) -> str:
    """Tag for |+_{k pi/4}> = Z(k pi/4)|+>; Clifford angles map to named tags."""
    k %= 8
    return _EVEN_THETA.get(k, f"+@{k}")


def check_tag(tag: str) -> str:
    if tag in _NAMED or (tag.startswith("+@") and tag[2:].isdigit()):
        return tag if tag in _NAMED else plus_theta(int(tag[2:]))
    raise ValueError(f"unknown preparation tag {tag!r}")


def tag_vector(tag: str) -> np.ndarray:
    tag = check_tag(tag)
    if tag == "0":
        return np.array([1, 0], dtype=complex)
    if tag == "1":
        return np.array([0, 1], dtype=complex)
    k = {"+": 0, "+i": 2, "-": 4, "-i": 6}.get(tag)
    if k is None:
        k = int(tag[2:])
    return np.array([1, PHASES[k]], dtype=complex) * _S2


def is_clifford_tag(tag: str) -> bool:
    return check_tag(tag) in _NAMED


class ProductState:
    """Per-vertex preparation tags: 0, 1, +, -, +i, -i or +@k for |+_{k pi/4}>."""

    __slots__ = ("tags",)

    def __init__(self, tags: Mapping[int, str] | None = None):
        self.tags: dict[int, str] = {int(v): check_tag(t) for v, t in (tags or {}).items()}

    def __getitem__(self, v: int) -> str:
        return self.tags[v]

    def __contains__(self, v: object) -> bool:
        return v in self.tags

    def __iter__(self):
        return iter(self.tags)

    def __len__(self) -> int:
        return len(self.tags)

    def items(self):
        return self.tags.items()

    def merge(self, other: "ProductState") -> "ProductState":
        clash = set(self.tags) & set(other.tags)
        if clash:
            raise ValueError(f"overlapping preparations on {sorted(clash)}")
        return ProductState({**self.tags, **other.tags})

    def restrict(self, vs: Iterable[int]) -> "ProductState":
        keep = set(vs)
        return ProductState({v: t for v, t in self.tags.items() if v in keep})

    def to_state(self, order: Sequence[int] | None = None) -> "QuantumState":
        labels = list(order) if order is not None else sorted(self.tags)
        vec = np.ones(1, dtype=complex)
        for v in labels:
            vec = np.kron(vec, tag_vector(self.tags[v]))
        return QuantumState(vec, labels)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ProductState) and self.tags == other.tags

    def __repr__(self) -> str:
        return f"ProductState({self.tags})"

    def to_dict(self) -> dict[str, str]:
        return {str(v): t for v, t in sorted(self.tags.items())}

    @classmethod
    def from_dict(cls, d: Mapping[str, str]) -> "ProductState":
        return cls({int(v): t for v, t in d.items()})


@dataclass
class QuantumState:
    """Dense pure state; qubit labels[0] is the most significant bit."""

    amplitudes: np.ndarray
    labels: list[int]

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        self.labels = list(self.labels)
        if self.amplitudes.size != 2 ** len(self.labels):
            raise ValueError("amplitude count does not match labels")
        if abs(np.linalg.norm(self.amplitudes) - 1) > 1e-9:
            raise ValueError("state is not normalised")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def reordered(self, labels: Sequence[int]) -> "QuantumState":
        labels = list(labels)
        if sorted(labels) != sorted(self.labels):
            raise ValueError("label sets differ")
        if labels == self.labels:
            return self
        n = len(labels)
        t = self.amplitudes.reshape((2,) * n)
        perm = [self.labels.index(v) for v in labels]
        return QuantumState(np.transpose(t, perm).reshape(-1), labels)

    def fidelity(self, other: "QuantumState") -> float:
        o = other.reordered(self.labels)
        return float(abs(np.vdot(self.amplitudes, o.amplitudes)) ** 2)

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


class StateVector:
    """Mutable tensor-network-free statevector keyed by vertex label.

    Qubits are added by preparation and removed when measured, so the
    register only holds the qubits that are still alive.
    """

    def __init__(self, cap: int = STATEVECTOR_CAP):
        self.cap = cap
        self.psi = np.ones((), dtype=complex)
        self.labels: list[int] = []

    def copy(self) -> "StateVector":
        c = StateVector(self.cap)
        c.psi = self.psi.copy()
        c.labels = list(self.labels)
        return c

    def _axis(self, v: int) -> int:
        return self.labels.index(v)

    def add(self, v: int, vec: np.ndarray) -> None:
        if len(self.labels) + 1 > self.cap:
            raise StateTooLarge(f"more than {self.cap} qubits")
        self.psi = np.multiply.outer(self.psi, np.asarray(vec, dtype=complex))
        self.labels.append(v)

    def add_state(self, state: QuantumState) -> None:
        if len(self.labels) + len(state.labels) > self.cap:
            raise StateTooLarge(f"more than {self.cap} qubits")
        t = state.amplitudes.reshape((2,) * len(state.labels)) if state.labels else state.amplitudes.reshape(())
        self.psi = np.multiply.outer(self.psi, t)
        self.labels.extend(state.labels)

    def apply(self, v: int, u: np.ndarray) -> None:
        ax = self._axis(v)
        self.psi = np.moveaxis(np.tensordot(u, self.psi, axes=([1], [ax])), 0, ax)

    def apply_pauli(self, v: int, p: str) -> None:
        if p != "I":
            self.apply(v, PAULI_MATS[p])

    def cz(self, u: int, v: int) -> None:
        a, b = self._axis(u), self._axis(v)
        idx = [slice(None)] * len(self.labels)
        idx[a] = 1
        idx[b] = 1
        self.psi[tuple(idx)] *= -1

    def measure(
        self,
        v: int,
        angle: int,
        rng: np.random.Generator | None = None,
        forced: int | None = None,
        deviation: str = "I",
    ) -> tuple[int, float]:
        """Z(-angle), H, optional Pauli, then a Z measurement that removes the qubit.

        Returns (outcome, probability of that outcome).
        """
        ax = self._axis(v)
        u = H_GATE @ z_rot(-angle)
        if deviation != "I":
            u = PAULI_MATS[deviation] @ u
        psi = np.moveaxis(np.tensordot(u, self.psi, axes=([1], [ax])), 0, 0)
        b0 = psi[0]
        p0 = float(np.vdot(b0, b0).real)
        p0 = min(max(p0, 0.0), 1.0)
        if forced is not None:
            bit = int(forced)
        else:
            if rng is None:
                raise ValueError("need an rng or a forced outcome")
            bit = 0 if rng.random() < p0 else 1
        prob = p0 if bit == 0 else 1.0 - p0
        if prob < 1e-14:
            raise ImpossibleBranch(f"outcome {bit} on {v} has probability {prob:.3g}")
        rest = psi[bit] / np.sqrt(prob)
        self.psi = rest
        self.labels.pop(ax)
        return bit, prob

    def state(self, labels: Sequence[int] | None = None) -> QuantumState:
        qs = QuantumState(self.psi.reshape(-1), self.labels)
        return qs.reordered(labels) if labels is not None else qs


class ImpossibleBranch(ValueError):
    """A forced outcome has zero probability."""


def clifford_gates(tag: str) -> list[str]:
    """Gate word preparing tag from |0>, for the tableau back-end."""
    tag = check_tag(tag)
    table = {"0": [], "1": ["X"], "+": ["H"], "-": ["X", "H"], "+i": ["H", "S"], "-i": ["H", "S", "Z"]}
    if tag not in table:
        raise NotClifford(f"{tag} is not a stabiliser state")
    return table[tag]
