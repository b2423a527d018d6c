"""Exact detection, insensitivity and correctness parameters of canvases and schemes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import CapExceeded
from .mbqc import CliffordProgram, Computation, output_distribution
from .pauli import Pauli
from .states import ProductState
from .traps import Instance, TrappifiedCanvas, TrappifiedScheme

PREDICATE_CAP = 12
SIMULATION_CAP = 8


# -- deviation sets -----------------------------------------------------------

@dataclass(frozen=True)
class DeviationSet:
    """A set of Pauli deviations, explicit or as a symbolic family.

    Families over a vertex set: "all-xy" (every non-empty XY support),
    "all-pauli" (all words, including I and Z-only ones), "z-only" (Z and I
    words). Since a Pauli acting right before a computational readout only
    matters through whether it flips the bit, words are enumerated by their
    XY support with X as the representative; a Z-only word is the identity
    class. "explicit" keeps the listed words as given.
    """

    kind: str
    vertices: tuple[int, ...] = ()
    deviations: tuple[Pauli, ...] = ()

    @classmethod
    def explicit(cls, devs: Iterable[Pauli]) -> "DeviationSet":
        seen: dict[Pauli, None] = {}
        for d in devs:
            seen.setdefault(d.unsigned(), None)
        return cls("explicit", (), tuple(seen))

    @classmethod
    def all_xy(cls, vertices: Iterable[int]) -> "DeviationSet":
        return cls("all-xy", tuple(vertices))

    @classmethod
    def all_pauli(cls, vertices: Iterable[int]) -> "DeviationSet":
        return cls("all-pauli", tuple(vertices))

    @classmethod
    def z_only(cls, vertices: Iterable[int]) -> "DeviationSet":
        return cls("z-only", tuple(vertices))

    @classmethod
    def parse(cls, spec: str, vertices: Iterable[int]) -> "DeviationSet":
        kinds = {"all-xy": cls.all_xy, "all-pauli": cls.all_pauli, "z-only": cls.z_only}
        if spec not in kinds:
            raise ValueError(f"unknown deviation family {spec!r}")
        return kinds[spec](vertices)

    def support_masks(self, index: Mapping[int, int], cap: int = PREDICATE_CAP) -> np.ndarray:
        """XY-support bitmasks of the class representatives."""
        if self.kind == "explicit":
            return np.array([_mask(d.xy_support, index) for d in self.deviations], dtype=np.int64)
        n = len(self.vertices)
        if n > cap:
            raise CapExceeded(f"{n} vertices exceeds analysis cap {cap}")
        base = np.array([1 << index[v] for v in self.vertices], dtype=np.int64)
        if self.kind == "z-only":
            return np.zeros(1, dtype=np.int64)
        subsets = np.arange(0 if self.kind == "all-pauli" else 1, 1 << n, dtype=np.int64)
        masks = np.zeros_like(subsets)
        for k in range(n):
            masks |= np.where((subsets >> k) & 1, base[k], 0)
        return masks

    def members(self, cap: int = PREDICATE_CAP) -> list[Pauli]:
        if self.kind == "explicit":
            return list(self.deviations)
        if len(self.vertices) > cap:
            raise CapExceeded(f"{len(self.vertices)} vertices exceeds analysis cap {cap}")
        if self.kind == "z-only":
            return [Pauli()]
        start = 0 if self.kind == "all-pauli" else 1
        out = []
        for r in range(start, len(self.vertices) + 1):
            for combo in itertools.combinations(self.vertices, r):
                out.append(Pauli({v: "X" for v in combo}))
        return out

    def to_dict(self) -> dict:
        if self.kind == "explicit":
            return {"kind": "explicit", "deviations": [d.to_dict() for d in self.deviations]}
        return {"kind": self.kind, "vertices": list(self.vertices)}


@dataclass(frozen=True)
class WeightBand:
    """Round-structured deviations whose per-round weight lies in [k_min, k_max].

    The weight of a deviation over n rounds counts the rounds whose
    restriction is non-trivial for the base set (XY support for the
    predicate families).
    """

    base: DeviationSet
    rounds: int
    k_min: int = 0
    k_max: int | None = None

    def weight(self, per_round: Sequence[Pauli]) -> int:
        if self.base.kind == "explicit":
            members = set(self.base.deviations)
            return sum(1 for d in per_round if d.unsigned() in members)
        return sum(1 for d in per_round if d.xy_support)

    def contains(self, per_round: Sequence[Pauli]) -> bool:
        if len(per_round) != self.rounds:
            return False
        w = self.weight(per_round)
        return w >= self.k_min and (self.k_max is None or w <= self.k_max)


def _mask(vs: Iterable[int], index: Mapping[int, int]) -> int:
    m = 0
    for v in vs:
        m |= 1 << index[v]
    return m


def _popcount(a: np.ndarray) -> np.ndarray:
    a = a.astype(np.int64).copy()
    c = np.zeros_like(a)
    while a.any():
        c += a & 1
        a >>= 1
    return c


# -- single canvases ----------------------------------------------------------

def _gf2_solutions(rows: list[int], rhs: list[int], nvars: int) -> int | None:
    """Dimension of the solution space of A c = rhs over GF(2), or None if inconsistent."""
    pivots: list[tuple[int, int]] = []
    for row, b in zip(rows, rhs):
        for prow, pb in pivots:
            top = prow.bit_length() - 1
            if (row >> top) & 1:
                row ^= prow
                b ^= pb
        if row == 0:
            if b:
                return None
            continue
        pivots.append((row, b))
        pivots.sort(key=lambda t: -t[0].bit_length())
    return nvars - len(pivots)


def simulated_reject_probability(canvas: TrappifiedCanvas, deviation: Pauli, cap: int = SIMULATION_CAP) -> Fraction:
    """Exact reject probability from the stabiliser tableau.

    The readout bits of a Clifford run form an affine function of the
    random measurement choices. One run with all choices 0 and one per
    flipped choice pin that function down; each parity check is then an
    affine form in the choices and acceptance is a GF(2) linear system.
    Free canvas vertices are run at angle 0.
    """
    return simulated_reject_table(canvas, [deviation], cap)[0]


def simulated_reject_table(canvas: TrappifiedCanvas, deviations: Sequence[Pauli], cap: int = SIMULATION_CAP) -> list[Fraction]:
    """simulated_reject_probability for many deviations, compiling the canvas once."""
    if len(canvas.host) > cap:
        raise CapExceeded(f"{len(canvas.host)} qubits exceeds simulation cap {cap}")
    pattern, sigma = canvas.as_pattern(None)
    prog = CliffordProgram(pattern, sigma)
    return [_affine_reject(prog, canvas.decision.checks, d) for d in deviations]


def _affine_reject(prog: CliffordProgram, checks, deviation: Pauli) -> Fraction:
    _, base, rnd = prog.run(deviation, {})
    zero = {v: 0 for v in rnd}
    diffs = []
    for v in rnd:
        _, bits, _ = prog.run(deviation, {**zero, v: 1})
        diffs.append({u: bits[u] ^ base[u] for u in bits})
    rows, rhs = [], []
    for check in checks:
        row = 0
        for k, d in enumerate(diffs):
            if sum(d[u] for u in check) & 1:
                row |= 1 << k
        rows.append(row)
        rhs.append(sum(base[u] for u in check) & 1)
    dim = _gf2_solutions(rows, rhs, len(rnd))
    accept = Fraction(0) if dim is None else Fraction(2 ** dim, 2 ** len(rnd))
    return 1 - accept


def instance_reject_probability(instance: Instance, deviation: Pauli) -> Fraction:
    """Exact reject probability of a canvas with an embedded Clifford computation.

    Simulates the whole assembled pattern, computation included, so it
    checks rather than assumes that the computation does not move the
    trap statistics.
    """
    return _affine_reject(CliffordProgram(instance.pattern, instance.inputs), instance.canvas.decision.checks, deviation)


def reject_probability(canvas: TrappifiedCanvas, deviation: Pauli, method: str = "auto") -> Fraction:
    """Pr[tau = 1] under the deviation; predicate for stabiliser traps, else simulation."""
    if method in ("auto", "predicate"):
        bit = canvas.predicate_rejects(deviation)
        if bit is not None:
            return Fraction(bit)
        if method == "predicate":
            raise ValueError("custom canvases have no predicate")
    return simulated_reject_probability(canvas, deviation)


# -- schemes ------------------------------------------------------------------

@dataclass(frozen=True)
class Fragment:
    value: Fraction | float
    witness: Pauli | None
    label: str = ""


def _reject_table(s: TrappifiedScheme, dset: DeviationSet) -> tuple[list[Pauli], list[Fraction]]:
    """Weighted reject probability for each class representative."""
    g = s.graph
    predicate = all(c.kind in ("standard", "general") for c in s.canvases)
    if predicate:
        idx = g.index
        masks = dset.support_masks(idx)
        den = lcm(*(w.denominator for w in s.weights))
        total = np.zeros(len(masks), dtype=object)
        for c, w in zip(s.canvases, s.weights):
            hm = _mask(c.H, idx)
            hit = masks & hm
            r = (_popcount(hit) & 1) if c.kind == "general" else (hit != 0).astype(np.int64)
            total = total + r.astype(object) * int(w * den)
        devs = dset.deviations if dset.kind == "explicit" else None
        if devs is None:
            reps = [Pauli({v: "X" for v in g.unmask(int(m))}) for m in masks]
        else:
            reps = list(devs)
        return reps, [Fraction(int(t), den) for t in total]
    devs = dset.members(SIMULATION_CAP)
    vals = []
    for d in devs:
        vals.append(sum((w * reject_probability(c, d) for c, w in zip(s.canvases, s.weights)), Fraction(0)))
    return devs, vals


def weighted_reject(s: TrappifiedScheme, deviation: Pauli) -> Fraction:
    return sum((w * reject_probability(c, deviation) for c, w in zip(s.canvases, s.weights)), Fraction(0))


def scheme_epsilon(s: TrappifiedScheme, dset: DeviationSet) -> Fragment:
    """epsilon = 1 - min_E Pr[reject]; the witness attains the minimum."""
    devs, vals = _reject_table(s, dset)
    k = min(range(len(vals)), key=lambda i: vals[i])
    return Fragment(1 - vals[k], devs[k])


def scheme_delta(s: TrappifiedScheme, dset: DeviationSet) -> Fragment:
    """delta = 1 - min_E Pr[accept] = max_E Pr[reject]."""
    devs, vals = _reject_table(s, dset)
    k = max(range(len(vals)), key=lambda i: vals[i])
    return Fragment(vals[k], devs[k])


def optimal_attack(s: TrappifiedScheme, dset: DeviationSet) -> tuple[Pauli, Fraction]:
    """Deviation with the highest acceptance probability, and that probability."""
    frag = scheme_epsilon(s, dset)
    return frag.witness, frag.value


def total_variation(p: Mapping, q: Mapping) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def scheme_nu(
    s: TrappifiedScheme,
    dset: DeviationSet,
    computation: Computation | None,
    inputs: Sequence[ProductState] | None = None,
) -> Fragment:
    """Worst total-variation distance between the canvas-averaged deviated output and the ideal one."""
    if computation is None or not computation.readout:
        return Fragment(0.0, None, "pure-trap: no computation embedded")
    if all(c.is_pure for c in s.canvases):
        return Fragment(1.0, None, "pure-trap: canvases leave no room for a computation")
    devs = dset.members(SIMULATION_CAP)
    variants = [computation] if not inputs else [
        Computation(computation.pattern, x, computation.readout, computation.flip) for x in inputs
    ]
    worst, witness = 0.0, None
    rng = np.random.default_rng(0)
    for comp in variants:
        ideal = comp.distribution()
        insts = [(w, s.instantiate(i, comp, rng)) for i, w in enumerate(s.weights)]
        for d in devs:
            mix: dict[tuple[int, ...], float] = {}
            for w, inst in insts:
                for k, pr in output_distribution(inst.pattern, inst.inputs, inst.readout, d).items():
                    mix[k] = mix.get(k, 0.0) + float(w) * pr
            tv = total_variation(mix, ideal)
            if tv > worst + 1e-12 or witness is None:
                worst, witness = max(worst, tv), d
    return Fragment(worst, witness, "embedded")


@dataclass
class SchemeReport:
    epsilon: Fraction
    delta: Fraction
    nu: float | None
    witnesses: dict[str, Pauli | None] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def rate(self) -> Fraction:
        return 1 - self.epsilon

    def to_dict(self) -> dict:
        return {
            "epsilon": str(self.epsilon),
            "delta": str(self.delta),
            "nu": self.nu,
            "rate": str(self.rate),
            "witnesses": {k: (v.to_dict() if v is not None else None) for k, v in self.witnesses.items()},
            "notes": self.notes,
        }


def analyse(
    s: TrappifiedScheme,
    dset: DeviationSet,
    computation: Computation | None = None,
) -> SchemeReport:
    eps = scheme_epsilon(s, dset)
    dlt = scheme_delta(s, dset)
    nu = scheme_nu(s, dset, computation) if computation is not None else None
    rep = SchemeReport(eps.value, dlt.value, None if nu is None else float(nu.value),
                       {"epsilon": eps.witness, "delta": dlt.witness})
    if nu is not None:
        rep.witnesses["nu"] = nu.witness
        rep.notes.append(nu.label)
    return rep


def compose_parameter(
    p: Sequence[Fraction], values: Sequence[Fraction], covers: Sequence[Callable[[Pauli], bool]], errors: Iterable[Pauli]
) -> Fraction:
    """Composition rule: 1 - x = min_E sum_{i : E in E_i} p_i (1 - x_i)."""
    best = None
    for e in errors:
        t = sum((pi * (1 - xi) for pi, xi, cov in zip(p, values, covers) if cov(e)), Fraction(0))
        best = t if best is None or t < best else best
    return 1 - (best if best is not None else Fraction(0))
