"""Measurement patterns with flow, and their execution.

Angles are integers k standing for k*pi/4. A measurement at angle a is
Z(-a), then H, then a computational-basis readout; outcome 0 means |+_a>.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

import numpy as np

from .errors import NotClifford
from .graph import OpenGraph
from .pauli import Pauli
from .states import (
    ImpossibleBranch,
    PAULI_MATS,
    STATEVECTOR_CAP,
    ProductState,
    QuantumState,
    StateVector,
    clifford_gates,
    tag_vector,
)
from .tableau import Tableau

Outcomes = dict[int, int]
OutcomeSource = Union[np.random.Generator, int, Sequence[int], Mapping[int, int], None]


def angle(k: int) -> int:
    return int(k) % 8


@dataclass(frozen=True)
class Violation:
    kind: str
    i: int
    j: int | None = None

    def __str__(self) -> str:
        return f"{self.kind}: ({self.i}, {self.j})" if self.j is not None else f"{self.kind}: {self.i}"


@dataclass(frozen=True)
class MeasurementPattern:
    """Graph, angles on V \\ O, a (possibly partial) flow and precedence constraints.

    Vertices outside the flow's domain emit no corrections; this is how
    trap and dummy qubits sit in an assembled pattern. Vertices in
    `dummies` are prepared in Z eigenstates, which turns their CZ edges
    into identities, so their edges are ignored when computing correction
    dependencies.
    """

    graph: OpenGraph
    angles: Mapping[int, int]
    flow: Mapping[int, int] = field(default_factory=dict)
    order: tuple[tuple[int, int], ...] = ()
    dummies: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "angles", {int(v): angle(k) for v, k in self.angles.items()})
        object.__setattr__(self, "flow", {int(i): int(j) for i, j in self.flow.items()})
        object.__setattr__(self, "order", tuple((int(a), int(b)) for a, b in self.order))
        object.__setattr__(self, "dummies", frozenset(self.dummies))

    @classmethod
    def from_flow(
        cls, graph: OpenGraph, angles: Mapping[int, int], flow: Mapping[int, int], dummies: Iterable[int] = ()
    ) -> "MeasurementPattern":
        """Pattern whose order is exactly the precedence the flow demands."""
        p = cls(graph, angles, flow, (), frozenset(dummies))
        return cls(graph, angles, flow, tuple(sorted(p.flow_precedence())), p.dummies)

    @property
    def measured(self) -> list[int]:
        return [v for v in self.graph.vertices if v not in self.graph.outputs]

    def effective_neighbours(self, v: int) -> frozenset[int]:
        if v in self.dummies:
            return frozenset()
        return frozenset(u for u in self.graph.neighbours(v) if u not in self.dummies)

    def x_deps(self, i: int) -> frozenset[int]:
        """S_X(i) = f^{-1}(i)."""
        return frozenset(j for j, fj in self.flow.items() if fj == i)

    def z_deps(self, i: int) -> frozenset[int]:
        """S_Z(i) = {j : i in N(f(j))}, excluding j = i."""
        return frozenset(j for j, fj in self.flow.items() if j != i and i in self.effective_neighbours(fj))

    def flow_precedence(self) -> set[tuple[int, int]]:
        out = set()
        for i, fi in self.flow.items():
            out.add((i, fi))
            for j in self.effective_neighbours(fi):
                if j != i:
                    out.add((i, j))
        return out

    def measurement_sequence(self) -> list[int]:
        """Deterministic linear extension of order and flow precedence over V \\ O."""
        meas = set(self.measured)
        pos = self.graph.index
        edges = {(a, b) for a, b in set(self.order) | self.flow_precedence() if a in meas and b in meas}
        indeg = {v: 0 for v in meas}
        succ: dict[int, list[int]] = {v: [] for v in meas}
        for a, b in edges:
            succ[a].append(b)
            indeg[b] += 1
        heap = [(pos[v], v) for v in meas if indeg[v] == 0]
        heapq.heapify(heap)
        seq = []
        while heap:
            _, v = heapq.heappop(heap)
            seq.append(v)
            for w in succ[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    heapq.heappush(heap, (pos[w], w))
        if len(seq) != len(meas):
            raise ValueError("precedence constraints are cyclic")
        return seq

    def to_dict(self) -> dict:
        d = {
            "graph": self.graph.to_dict(),
            "angles": {str(v): k for v, k in sorted(self.angles.items())},
            "flow": {str(v): w for v, w in sorted(self.flow.items())},
            "order": [list(e) for e in self.order],
        }
        if self.dummies:
            d["dummies"] = sorted(self.dummies)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "MeasurementPattern":
        return cls(
            OpenGraph.from_dict(d["graph"]),
            {int(v): k for v, k in d.get("angles", {}).items()},
            {int(v): w for v, w in d.get("flow", {}).items()},
            tuple(tuple(e) for e in d.get("order", ())),
            frozenset(d.get("dummies", ())),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "MeasurementPattern":
        return cls.from_dict(json.loads(text))


def _closure(order: Iterable[tuple[int, int]]) -> tuple[dict[int, set[int]], bool]:
    succ: dict[int, set[int]] = {}
    for a, b in order:
        succ.setdefault(a, set()).add(b)
        succ.setdefault(b, set())
    reach: dict[int, set[int]] = {}
    for v in succ:
        seen, stack = set(), list(succ[v])
        while stack:
            w = stack.pop()
            if w not in seen:
                seen.add(w)
                stack.extend(succ[w])
        reach[v] = seen
    cyclic = any(v in reach[v] for v in reach)
    return reach, cyclic


def validate_flow(p: MeasurementPattern) -> list[Violation]:
    """Every violated flow condition; an empty list means the pattern is valid."""
    g = p.graph
    out: list[Violation] = []
    vset = set(g.vertices)
    for v in p.measured:
        if v not in p.angles:
            out.append(Violation("missing angle", v))
    for v in p.angles:
        if v not in vset or v in g.outputs:
            out.append(Violation("angle outside V\\O", v))
    reach, cyclic = _closure(p.order)
    if cyclic:
        out.append(Violation("cyclic order", -1))
    seen: dict[int, int] = {}
    for i, fi in sorted(p.flow.items()):
        if i not in vset or fi not in vset:
            out.append(Violation("unknown vertex", i, fi))
            continue
        if i in g.outputs:
            out.append(Violation("flow on output", i, fi))
        if fi in g.inputs:
            out.append(Violation("flow into input", i, fi))
        if fi in seen:
            out.append(Violation("not injective", seen[fi], i))
        seen[fi] = i
        if not g.has_edge(i, fi):
            out.append(Violation("not an edge", i, fi))
        if fi not in reach.get(i, set()):
            out.append(Violation("i does not precede f(i)", i, fi))
        for j in sorted(p.effective_neighbours(fi)):
            if j != i and j not in reach.get(i, set()):
                out.append(Violation("i does not precede neighbour of f(i)", i, j))
    return out


class PatternRun(NamedTuple):
    outcomes: Outcomes
    state: QuantumState
    probability: float


def _forced_lookup(source, seq: list[int]) -> dict[int, int] | None:
    if isinstance(source, Mapping):
        return {int(v): int(b) for v, b in source.items()}
    if isinstance(source, (list, tuple)):
        if len(source) != len(seq):
            raise ValueError(f"need {len(seq)} forced outcomes, got {len(source)}")
        return {v: int(b) for v, b in zip(seq, source)}
    return None


def _rng(source) -> np.random.Generator | None:
    if isinstance(source, np.random.Generator):
        return source
    if isinstance(source, (int, np.integer)) and not isinstance(source, bool):
        return np.random.default_rng(int(source))
    return None


def corrected_angle(phi: int, sx: int, sz: int) -> int:
    """phi'(i) = (-1)^{s_X} phi + s_Z pi."""
    return ((-phi if sx else phi) + 4 * sz) % 8


def _parity(bits: Mapping[int, int], deps: Iterable[int]) -> int:
    return sum(bits[j] for j in deps) & 1


def run_pattern(
    p: MeasurementPattern,
    inp: ProductState | QuantumState | None,
    source: OutcomeSource,
    deviation: Pauli | None = None,
    cap: int = STATEVECTOR_CAP,
) -> PatternRun:
    """Statevector execution with adaptive corrections.

    inp covers the input vertices (and any extra vertices whose preparation
    is fixed); everything else starts in |+>. source is a seeded RNG or
    seed for Born sampling, or forced outcomes as a sequence in
    measurement order or a vertex map. A deviation acts after H on
    measured qubits and on outputs before the corrections.
    """
    g = p.graph
    seq = p.measurement_sequence()
    forced = _forced_lookup(source, seq)
    rng = _rng(source)
    dev = deviation or Pauli()

    sv = StateVector(cap)
    fixed: set[int] = set()
    if isinstance(inp, QuantumState):
        sv.add_state(inp)
        fixed = set(inp.labels)
    elif isinstance(inp, ProductState):
        fixed = set(inp)
    missing = set(g.inputs) - fixed
    if missing:
        raise ValueError(f"no input state for {sorted(missing)}")
    if len(g) > cap:
        from .errors import StateTooLarge

        raise StateTooLarge(f"{len(g)} qubits exceeds cap {cap}")
    for v in g.vertices:
        if v in fixed and isinstance(inp, QuantumState):
            continue
        sv.add(v, tag_vector(inp[v]) if v in fixed else tag_vector("+"))
    for u, v in sorted(g.edges):
        sv.cz(u, v)

    bits: Outcomes = {}
    prob = 1.0
    for i in seq:
        phi = corrected_angle(p.angles[i], _parity(bits, p.x_deps(i)), _parity(bits, p.z_deps(i)))
        b, pr = sv.measure(i, phi, rng, None if forced is None else forced[i], dev[i])
        bits[i] = b
        prob *= pr

    outs = [v for v in g.vertices if v in g.outputs]
    for o in outs:
        sv.apply_pauli(o, dev[o])
        if _parity(bits, p.x_deps(o)):
            sv.apply(o, PAULI_MATS["X"])
        if _parity(bits, p.z_deps(o)):
            sv.apply(o, PAULI_MATS["Z"])
    return PatternRun(bits, sv.state(outs), prob)


def run_clifford_pattern(
    p: MeasurementPattern,
    inp: ProductState | None,
    source: OutcomeSource,
    deviation: Pauli | None = None,
    choices: Mapping[int, int] | None = None,
) -> Outcomes:
    """Stabiliser-tableau execution returning outcome bits for V \\ O.

    Random outcomes are drawn from source unless `choices` fixes them;
    deterministic outcomes are whatever the state dictates.
    """
    _, bits, _ = _clifford_run(p, inp, source, deviation, choices)
    return bits


def prepare_graph_state(p, inp) -> Tableau:
    """Tableau of the input product state entangled along the graph edges."""
    g = p.graph
    idx = g.index
    tab = Tableau(len(g))
    prep = inp if inp is not None else ProductState()
    missing = set(g.inputs) - set(prep)
    if missing:
        raise ValueError(f"no input state for {sorted(missing)}")
    for v in g.vertices:
        for gate in clifford_gates(prep[v] if v in prep else "+"):
            tab.gate(gate, idx[v])
    for u, v in sorted(g.edges):
        tab.cz(idx[u], idx[v])
    return tab


class CliffordProgram:
    """A Clifford pattern compiled once: prepared tableau plus the measurement schedule."""

    def __init__(self, p: MeasurementPattern, inp):
        for v, k in p.angles.items():
            if k % 2:
                raise NotClifford(f"angle {k}pi/4 on vertex {v}")
        idx = p.graph.index
        self.seq = p.measurement_sequence()
        self.steps = [(i, idx[i], p.angles[i], tuple(p.x_deps(i)), tuple(p.z_deps(i))) for i in self.seq]
        self.prepared = prepare_graph_state(p, inp)

    def run(self, deviation: Pauli | None, choices: Mapping[int, int] | None = None,
            rng: np.random.Generator | None = None, forced: Mapping[int, int] | None = None):
        dev = deviation or Pauli()
        tab = self.prepared.copy()
        bits: Outcomes = {}
        random_at: list[int] = []
        for i, a, ang, xd, zd in self.steps:
            sx = sum(bits[j] for j in xd) & 1
            sz = sum(bits[j] for j in zd) & 1
            if choices is not None and i in choices:
                bit = choices[i]
            elif forced is not None:
                bit = forced[i]
            elif rng is not None:
                bit = int(rng.integers(2))
            else:
                bit = 0
            # Z(-phi) as a power of S, then H and the deviation
            b, rnd = tab.rotate_measure(a, (-corrected_angle(ang, sx, sz) // 2) % 4, dev[i], bit)
            if forced is not None and not rnd and b != forced[i]:
                from .states import ImpossibleBranch

                raise ImpossibleBranch(f"forced outcome {forced[i]} on {i} is impossible")
            bits[i] = b
            if rnd:
                random_at.append(i)
        return tab, bits, random_at


def _clifford_run(p, inp, source, deviation, choices):
    prog = CliffordProgram(p, inp)
    rng = _rng(source)
    forced = _forced_lookup(source, prog.seq) if rng is None else None
    return prog.run(deviation, choices, rng, forced)


def output_distribution(
    p: MeasurementPattern,
    inp: ProductState | QuantumState | None,
    readout: Sequence[int],
    deviation: Pauli | None = None,
    cap: int = STATEVECTOR_CAP,
    tol: float = 1e-13,
) -> dict[tuple[int, ...], float]:
    """Exact distribution of the readout bits, by walking every outcome branch.

    Readout vertices are measured ones; their outcomes already carry the
    flow's Z correction through the adapted angle.
    """
    g = p.graph
    if g.outputs:
        raise ValueError("classical-output patterns only")
    seq = p.measurement_sequence()
    dev = deviation or Pauli()
    sv = StateVector(cap)
    fixed: set[int] = set()
    if isinstance(inp, QuantumState):
        sv.add_state(inp)
        fixed = set(inp.labels)
    elif isinstance(inp, ProductState):
        fixed = set(inp)
    for v in g.vertices:
        if isinstance(inp, QuantumState) and v in fixed:
            continue
        sv.add(v, tag_vector(inp[v]) if v in fixed else tag_vector("+"))
    for u, v in sorted(g.edges):
        sv.cz(u, v)
    xdeps = {i: p.x_deps(i) for i in seq}
    zdeps = {i: p.z_deps(i) for i in seq}
    dist: dict[tuple[int, ...], float] = {}

    def walk(state: StateVector, pos: int, bits: dict[int, int], prob: float) -> None:
        if pos == len(seq):
            key = tuple(bits[v] for v in readout)
            dist[key] = dist.get(key, 0.0) + prob
            return
        i = seq[pos]
        phi = corrected_angle(p.angles[i], _parity(bits, xdeps[i]), _parity(bits, zdeps[i]))
        for b in (0, 1):
            branch = state.copy() if b == 0 else state
            try:
                _, pr = branch.measure(i, phi, None, b, dev[i])
            except ImpossibleBranch:
                continue
            if prob * pr > tol:
                bits[i] = b
                walk(branch, pos + 1, bits, prob * pr)
                del bits[i]

    walk(sv, 0, {}, 1.0)
    return dist


@dataclass(frozen=True)
class Computation:
    """A classical-output MBQC computation.

    readout lists the measured vertices whose decrypted outcomes form the
    output bitstring. flip is an artificial per-run error probability on
    that bitstring, used to emulate a bounded-error computation.
    """

    pattern: MeasurementPattern
    inputs: ProductState
    readout: tuple[int, ...]
    flip: float = 0.0

    def distribution(self, deviation: Pauli | None = None) -> dict[tuple[int, ...], float]:
        return output_distribution(self.pattern, self.inputs, self.readout, deviation)

    def correct_output(self) -> tuple[int, ...]:
        """The most likely output of the noiseless pattern."""
        d = self.distribution()
        return max(d, key=d.get)

    def to_dict(self) -> dict:
        d = self.pattern.to_dict()
        d["input"] = self.inputs.to_dict()
        d["readout"] = list(self.readout)
        if self.flip:
            d["flip"] = self.flip
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "Computation":
        return cls(
            MeasurementPattern.from_dict(d),
            ProductState.from_dict(d.get("input", {})),
            tuple(d.get("readout", ())),
            float(d.get("flip", 0.0)),
        )
