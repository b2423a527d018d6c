"""Sparse signed Pauli words over vertex ids."""

from __future__ import annotations

from typing import Iterable, Mapping

# (x, z) bits per letter; Y = i X Z
_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_LETTER = {v: k for k, v in _BITS.items()}

# single-site products a*b = i^k c
_MUL: dict[tuple[str, str], tuple[int, str]] = {}
for _a in "IXYZ":
    for _b in "IXYZ":
        if _a == "I":
            _MUL[_a, _b] = (0, _b)
        elif _b == "I":
            _MUL[_a, _b] = (0, _a)
        elif _a == _b:
            _MUL[_a, _b] = (0, "I")
        else:
            third = ({"X", "Y", "Z"} - {_a, _b}).pop()
            cyclic = (_a, _b) in {("X", "Y"), ("Y", "Z"), ("Z", "X")}
            _MUL[_a, _b] = (1 if cyclic else 3, third)


class Pauli:
    """A Pauli word i^phase * prod_v P_v with sparse support.

    Vertices absent from the map act as identity. Used both for signed
    stabiliser products and, ignoring the phase, as adversarial deviations.
    """

    __slots__ = ("ops", "phase")

    def __init__(self, ops: Mapping[int, str] | None = None, phase: int = 0):
        clean = {}
        for v, p in (ops or {}).items():
            p = p.upper()
            if p not in _BITS:
                raise ValueError(f"unknown Pauli letter {p!r}")
            if p != "I":
                clean[int(v)] = p
        self.ops: dict[int, str] = dict(sorted(clean.items()))
        self.phase = phase % 4

    @classmethod
    def single(cls, v: int, p: str) -> "Pauli":
        return cls({v: p})

    @classmethod
    def from_string(cls, s: str, sites: Iterable[int] | None = None) -> "Pauli":
        """Parse '+XZI', '-YY', 'iXX'; sites default to 0..len-1."""
        phase = 0
        for prefix, ph in (("+i", 1), ("-i", 3), ("i", 1), ("+", 0), ("-", 2)):
            if s.startswith(prefix):
                phase, s = ph, s[len(prefix):]
                break
        vs = list(range(len(s))) if sites is None else list(sites)
        return cls(dict(zip(vs, s)), phase)

    def __getitem__(self, v: int) -> str:
        return self.ops.get(v, "I")

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.ops)

    @property
    def xy_support(self) -> frozenset[int]:
        return frozenset(v for v, p in self.ops.items() if p in "XY")

    @property
    def weight(self) -> int:
        return len(self.ops)

    def is_identity(self) -> bool:
        return not self.ops

    def __mul__(self, other: "Pauli") -> "Pauli":
        phase = self.phase + other.phase
        ops = dict(self.ops)
        for v, b in other.ops.items():
            k, c = _MUL[ops.get(v, "I"), b]
            phase += k
            ops[v] = c
        return Pauli(ops, phase)

    def commutes(self, other: "Pauli") -> bool:
        anti = sum(1 for v, p in self.ops.items() if other[v] not in ("I", p))
        return anti % 2 == 0

    def squares_to_identity(self) -> bool:
        """True when P^2 = +I, i.e. the phase is real."""
        return self.phase % 2 == 0

    @property
    def sign(self) -> int:
        if self.phase % 2:
            raise ValueError("word has an imaginary phase")
        return 1 if self.phase == 0 else -1

    def unsigned(self) -> "Pauli":
        return Pauli(self.ops)

    def restrict(self, vs: Iterable[int]) -> "Pauli":
        keep = set(vs)
        return Pauli({v: p for v, p in self.ops.items() if v in keep}, self.phase)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Pauli) and self.ops == other.ops and self.phase == other.phase

    def __hash__(self) -> int:
        return hash((tuple(self.ops.items()), self.phase))

    def __repr__(self) -> str:
        pre = ("+", "i", "-", "-i")[self.phase]
        body = " ".join(f"{p}{v}" for v, p in self.ops.items()) or "I"
        return f"Pauli({pre}{body})"

    def to_dict(self) -> dict[str, str]:
        return {str(v): p for v, p in self.ops.items()}

    @classmethod
    def from_dict(cls, d: Mapping[str, str]) -> "Pauli":
        return cls({int(v): p for v, p in d.items()})


PauliDeviation = Pauli
IDENTITY = Pauli()


def pauli_bits(p: str) -> tuple[int, int]:
    return _BITS[p]


def letter(x: int, z: int) -> str:
    return _LETTER[(x & 1, z & 1)]
