"""CHP stabiliser tableau (destabilisers, stabilisers and one scratch row)."""

from __future__ import annotations

import numpy as np

from . import kernels


class Tableau:
    """Stabiliser state on n qubits, initialised to |0...0>.

    Args:
        n: number of qubits.
    """

    def __init__(self, n: int):
        self.n = n
        self.x = np.zeros((2 * n + 1, n), dtype=np.uint8)
        self.z = np.zeros((2 * n + 1, n), dtype=np.uint8)
        self.r = np.zeros(2 * n + 1, dtype=np.uint8)
        for i in range(n):
            self.x[i, i] = 1
            self.z[n + i, i] = 1

    def h(self, a: int) -> None:
        x = self.x[:, a].copy()
        self.r ^= x & self.z[:, a]
        self.x[:, a] = self.z[:, a]
        self.z[:, a] = x

    def s(self, a: int) -> None:
        self.r ^= self.x[:, a] & self.z[:, a]
        self.z[:, a] ^= self.x[:, a]

    def sdg(self, a: int) -> None:
        self.z_gate(a)
        self.s(a)

    def x_gate(self, a: int) -> None:
        self.r ^= self.z[:, a]

    def z_gate(self, a: int) -> None:
        self.r ^= self.x[:, a]

    def y_gate(self, a: int) -> None:
        self.r ^= self.x[:, a] ^ self.z[:, a]

    def cnot(self, a: int, b: int) -> None:
        xa, zb = self.x[:, a], self.z[:, b]
        self.r ^= xa & zb & (self.x[:, b] ^ self.z[:, a] ^ 1)
        self.x[:, b] ^= xa
        self.z[:, a] ^= zb

    def cz(self, a: int, b: int) -> None:
        xa, xb = self.x[:, a], self.x[:, b]
        self.r ^= xa & xb & (self.z[:, a] ^ self.z[:, b])
        self.z[:, a] ^= xb
        self.z[:, b] ^= xa

    def copy(self) -> "Tableau":
        t = Tableau.__new__(Tableau)
        t.n, t.x, t.z, t.r = self.n, self.x.copy(), self.z.copy(), self.r.copy()
        return t

    _GATES = {"H": "h", "S": "s", "X": "x_gate", "Y": "y_gate", "Z": "z_gate"}

    def gate(self, name: str, a: int) -> None:
        if name != "I":
            getattr(self, self._GATES[name])(a)

    def measure(self, a: int, bit: int = 0) -> tuple[int, bool]:
        """Z-measure qubit a; bit decides the outcome if it is random."""
        out, rnd = kernels.tableau_measure(self.x, self.z, self.r, self.n, a, int(bit))
        return int(out), bool(rnd)

    def rotate_measure(self, a: int, s_pow: int, pauli: str, bit: int = 0) -> tuple[int, bool]:
        """S^s_pow, H, then a Pauli on qubit a, followed by a Z measurement."""
        out, rnd = kernels.tableau_rotate_measure(self.x, self.z, self.r, self.n, a, s_pow, "IXYZ".index(pauli), int(bit))
        return int(out), bool(rnd)
