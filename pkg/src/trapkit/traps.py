"""Trappified canvases and schemes, stabiliser trap constructions and embeddings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DoesNotFit, EmptySet, InvalidSign, NotBlindCompatible, NotIndependent
from .graph import OpenGraph, grid, is_independent
from .mbqc import Computation, MeasurementPattern
from .pauli import Pauli
from .states import ProductState

Z_TAGS = ("0", "1")


@dataclass(frozen=True)
class PartialPattern:
    """A pattern living on V_T inside a host graph."""

    host: OpenGraph
    vertices: frozenset[int]
    inputs: frozenset[int]
    outputs: frozenset[int]
    angles: Mapping[int, int]
    flow: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if not (self.inputs <= self.vertices and self.outputs <= self.vertices):
            raise ValueError("I_T and O_T must lie in V_T")
        if not self.vertices <= set(self.host.vertices):
            raise ValueError("V_T must lie in the host graph")

    @property
    def edges(self) -> frozenset[tuple[int, int]]:
        return frozenset(e for e in self.host.edges if e[0] in self.vertices and e[1] in self.vertices)


@dataclass(frozen=True)
class DecisionFn:
    """Rejects (returns 1) iff some parity check over trap outcomes is odd."""

    checks: tuple[frozenset[int], ...]

    def __call__(self, t: Mapping[int, int]) -> int:
        return int(any(sum(t[i] for i in c) & 1 for c in self.checks))

    @property
    def support(self) -> frozenset[int]:
        return frozenset().union(*self.checks) if self.checks else frozenset()


@dataclass(frozen=True)
class TrappifiedCanvas:
    kind: str  # standard | general | custom
    H: frozenset[int]
    part: PartialPattern
    sigma: ProductState
    decision: DecisionFn
    descriptor: str = "deterministic"

    @property
    def host(self) -> OpenGraph:
        return self.part.host

    @property
    def trap_vertices(self) -> frozenset[int]:
        return self.part.vertices

    @property
    def is_pure(self) -> bool:
        return self.part.vertices == frozenset(self.host.vertices)

    def predicate_rejects(self, deviation: Pauli) -> int | None:
        """Exact reject bit for stabiliser traps; None for custom canvases."""
        m = deviation.xy_support & self.H
        if self.kind == "standard":
            return int(bool(m))
        if self.kind == "general":
            return len(m) & 1
        if not self.decision.checks:
            return 0  # nothing is ever tested
        return None

    def as_pattern(self, rng: np.random.Generator | None = None) -> tuple[MeasurementPattern, ProductState]:
        """The canvas alone as a runnable pattern; free vertices get |+> and a random angle."""
        free = [v for v in self.host.vertices if v not in self.part.vertices]
        angles = {v: 0 for v in self.part.vertices}
        angles.update(self.part.angles)
        for v in free:
            angles[v] = int(rng.integers(8)) if rng is not None else 0
        g = self.host.with_io(inputs=self.part.inputs, outputs=())
        dummies = frozenset(v for v, t in self.sigma.items() if t in Z_TAGS)
        return MeasurementPattern(g, angles, dict(self.part.flow), (), dummies), self.sigma

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "H": sorted(self.H), "sigma": self.sigma.to_dict(),
             "checks": [sorted(c) for c in self.decision.checks]}
        if self.kind == "custom":
            d["vertices"] = sorted(self.part.vertices)
            d["angles"] = {str(v): k for v, k in sorted(self.part.angles.items())}
        return d


def vertex_stabiliser(g: OpenGraph, i: int) -> Pauli:
    """S^i = X_i prod_{j in N(i)} Z_j."""
    ops = {i: "X"}
    ops.update({j: "Z" for j in g.neighbours(i)})
    return Pauli(ops)


def stabiliser_product(g: OpenGraph, h: Iterable[int]) -> Pauli:
    out = Pauli()
    for i in sorted(h):
        out = out * vertex_stabiliser(g, i)
    return out


_EIGEN = {("X", 1): "+", ("X", -1): "-", ("Y", 1): "+i", ("Y", -1): "-i", ("Z", 1): "0", ("Z", -1): "1"}


def prepare_stabiliser_product(P: Pauli, sites: Iterable[int] = ()) -> ProductState:
    """Product of single-qubit eigenstates stabilised by P.

    The sign goes to the first non-identity site. Extra `sites` that P
    acts on trivially are filled with |+>.
    """
    if not P.squares_to_identity():
        raise InvalidSign("P squares to -I")
    sign = P.sign
    tags: dict[int, str] = {}
    for n, (v, letter) in enumerate(P.ops.items()):
        tags[v] = _EIGEN[letter, sign if n == 0 else 1]
    for v in sites:
        tags.setdefault(v, "+")
    return ProductState(tags)


def check_overlap_condition(R: Iterable[Pauli]) -> bool:
    """True iff at every site all words agree or act as identity."""
    seen: dict[int, str] = {}
    for P in R:
        for v, letter in P.ops.items():
            if seen.setdefault(v, letter) != letter:
                return False
    return True


def build_standard_trap(g: OpenGraph, h: Iterable[int], extra_dummies: Iterable[int] = ()) -> TrappifiedCanvas:
    """|+> on the independent set H, |0> on N(H), all X-measured; any 1 on H rejects."""
    H = frozenset(h)
    if not H:
        raise EmptySet("standard trap needs a non-empty independent set")
    if not H <= set(g.vertices):
        raise ValueError("H must be a set of vertices")
    if not is_independent(g, H):
        raise NotIndependent(f"{sorted(H)} is not independent")
    nbrs = frozenset().union(*(g.neighbours(v) for v in H)) | frozenset(extra_dummies)
    nbrs -= H
    vt = H | nbrs
    sigma = ProductState({v: ("+" if v in H else "0") for v in vt})
    part = PartialPattern(g, vt, vt, H, {v: 0 for v in vt})
    checks = tuple(frozenset([v]) for v in sorted(H))
    return TrappifiedCanvas("standard", H, part, sigma, DecisionFn(checks))


def build_general_trap(g: OpenGraph, h: Iterable[int]) -> TrappifiedCanvas:
    """Pure trap testing the parity of prod_{i in H} S^i."""
    H = frozenset(h)
    if not H:
        raise EmptySet("general trap needs a non-empty set")
    P = stabiliser_product(g, H)
    sigma = prepare_stabiliser_product(P, g.vertices)
    vs = frozenset(g.vertices)
    part = PartialPattern(g, vs, vs, H, {v: 0 for v in vs})
    return TrappifiedCanvas("general", H, part, sigma, DecisionFn((H,)))


def build_custom_canvas(
    g: OpenGraph,
    vertices: Iterable[int],
    sigma: ProductState,
    checks: Sequence[Iterable[int]],
    angles: Mapping[int, int] | None = None,
) -> TrappifiedCanvas:
    vt = frozenset(vertices)
    cks = tuple(frozenset(c) for c in checks)
    outs = frozenset().union(*cks) if cks else frozenset()
    ang = {v: 0 for v in vt}
    ang.update(angles or {})
    part = PartialPattern(g, vt, frozenset(sigma.tags) & vt, outs, ang)
    return TrappifiedCanvas("custom", outs, part, sigma, DecisionFn(cks))


# -- schemes ------------------------------------------------------------------

@dataclass(frozen=True)
class Embedding:
    """Embedding algorithm id and its parameters ("none" or "dummy-isolated")."""

    kind: str = "none"
    rows: int = 0
    cols: int = 0


@dataclass(frozen=True)
class Instance:
    """A canvas with a computation embedded: everything one session needs."""

    pattern: MeasurementPattern
    inputs: ProductState
    canvas: TrappifiedCanvas
    readout: tuple[int, ...] = ()

    def trap_outcomes(self, outcomes: Mapping[int, int]) -> dict[int, int]:
        return {v: outcomes[v] for v in self.canvas.part.outputs}

    def verdict(self, outcomes: Mapping[int, int]) -> int:
        return self.canvas.decision(self.trap_outcomes(outcomes))


@dataclass(frozen=True)
class TrappifiedScheme:
    graph: OpenGraph
    canvases: tuple[TrappifiedCanvas, ...]
    weights: tuple[Fraction, ...]
    embedding: Embedding = Embedding()
    components: tuple[tuple[Fraction, "TrappifiedScheme"], ...] = ()

    def __post_init__(self):
        if len(self.canvases) != len(self.weights) or not self.canvases:
            raise ValueError("need one weight per canvas and at least one canvas")
        ws = tuple(Fraction(w) for w in self.weights)
        if any(w < 0 for w in ws) or sum(ws) != 1:
            raise ValueError("weights must be a probability distribution")
        object.__setattr__(self, "weights", ws)
        for c in self.canvases:
            if c.host != self.graph:
                raise NotBlindCompatible("canvases live on different graphs")

    @classmethod
    def uniform(cls, canvases: Sequence[TrappifiedCanvas], embedding: Embedding = Embedding()) -> "TrappifiedScheme":
        k = len(canvases)
        return cls(canvases[0].host, tuple(canvases), tuple(Fraction(1, k) for _ in range(k)), embedding)

    def sample_index(self, rng: np.random.Generator) -> int:
        u = Fraction(int(rng.integers(1 << 53)), 1 << 53)
        acc = Fraction(0)
        for i, w in enumerate(self.weights):
            acc += w
            if u < acc:
                return i
        return len(self.weights) - 1

    def float_weights(self) -> np.ndarray:
        w = np.array([float(x) for x in self.weights])
        return w / w.sum()

    def instantiate(
        self, index: int, computation: Computation | None, rng: np.random.Generator | None = None
    ) -> Instance:
        canvas = self.canvases[index]
        if self.embedding.kind == "dummy-isolated":
            return embed_dummy_isolated(computation, canvas, self.embedding.rows, self.embedding.cols, rng)
        if computation is not None and computation.readout:
            raise DoesNotFit("pure-trap scheme has no room for a computation")
        pattern, sigma = canvas.as_pattern(rng)
        return Instance(pattern, sigma, canvas)

    def to_dict(self) -> dict:
        d = {
            "graph": self.graph.to_dict(),
            "canvases": [c.to_dict() for c in self.canvases],
            "weights": [str(w) for w in self.weights],
        }
        if self.embedding.kind != "none":
            d["embedding"] = {"kind": self.embedding.kind, "rows": self.embedding.rows, "cols": self.embedding.cols}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: Mapping) -> "TrappifiedScheme":
        g = OpenGraph.from_dict(d["graph"])
        canvases = []
        for c in d["canvases"]:
            kind = c.get("kind", "standard")
            if kind == "standard":
                canvas = build_standard_trap(g, c["H"])
            elif kind == "general":
                canvas = build_general_trap(g, c["H"])
            else:
                canvas = build_custom_canvas(
                    g, c.get("vertices", g.vertices), ProductState.from_dict(c["sigma"]), c["checks"],
                    {int(v): k for v, k in c.get("angles", {}).items()},
                )
            if kind != "custom" and "sigma" in c and ProductState.from_dict(c["sigma"]) != canvas.sigma:
                raise ValueError(f"sigma of {kind} canvas H={c['H']} does not match its construction")
            canvases.append(canvas)
        ws = [Fraction(w) for w in d["weights"]] if "weights" in d else [Fraction(1, len(canvases))] * len(canvases)
        e = d.get("embedding") or {}
        emb = Embedding(e.get("kind", "none"), int(e.get("rows", 0)), int(e.get("cols", 0)))
        return cls(g, tuple(canvases), tuple(ws), emb)

    @classmethod
    def from_json(cls, text: str) -> "TrappifiedScheme":
        return cls.from_dict(json.loads(text))


def compose_schemes(schemes: Sequence[TrappifiedScheme], p: Sequence[Fraction | int | str]) -> TrappifiedScheme:
    """Pick scheme i with probability p_i, then a canvas from it."""
    ps = tuple(Fraction(x) for x in p)
    if len(ps) != len(schemes) or sum(ps) != 1 or any(x < 0 for x in ps):
        raise ValueError("p must be a distribution over the schemes")
    first = schemes[0]
    for s in schemes[1:]:
        if s.graph != first.graph:
            raise NotBlindCompatible("schemes use different graphs")
        if s.embedding != first.embedding:
            raise NotBlindCompatible("schemes use different embeddings")
    canvases, weights = [], []
    for pi, s in zip(ps, schemes):
        for c, w in zip(s.canvases, s.weights):
            canvases.append(c)
            weights.append(pi * w)
    return TrappifiedScheme(first.graph, tuple(canvases), tuple(weights), first.embedding, tuple(zip(ps, schemes)))


# -- embedding ----------------------------------------------------------------

def induced_dependencies(p: MeasurementPattern, region: Iterable[int]) -> set[tuple[int, int]]:
    """Correction dependencies (j -> i) crossing into or out of region."""
    reg = set(region)
    out = set()
    for i in p.graph.vertices:
        for j in p.x_deps(i) | p.z_deps(i):
            if (i in reg) != (j in reg):
                out.add((j, i))
    return out


def embed_dummy_isolated(
    computation: Computation | None,
    canvas: TrappifiedCanvas,
    rows: int,
    cols: int,
    rng: np.random.Generator | None = None,
) -> Instance:
    """Place a computation on the bottom rows-3 rows of a rows x cols cluster.

    The trap sits in the top three rows; every vertex of the third row
    that is not already a trap qubit becomes a |0> dummy, which cuts the
    top block off from the computation. Unused computation-region vertices
    are dummies too, and the remaining free vertices up top get random
    angles. Raises DoesNotFit when the computation does not fit.
    """
    host = canvas.host
    if host != grid(rows, cols):
        raise DoesNotFit("canvas is not on the declared cluster")
    top = {r * cols + c for r in range(3) for c in range(cols)}
    if not canvas.part.vertices <= top or any(v >= 2 * cols for v in canvas.H):
        raise DoesNotFit("trap must sit in the top three rows with H in the first two")
    if computation is None or not computation.pattern.graph.vertices:
        pattern, sigma = canvas.as_pattern(rng)
        return Instance(pattern, sigma, canvas)

    cg = computation.pattern.graph
    free_rows = rows - 3
    region = grid(free_rows, cols) if free_rows > 0 else None
    if region is None or not set(cg.vertices) <= set(region.vertices) or not cg.edges <= region.edges:
        raise DoesNotFit("computation does not fit the free region")
    if cg.outputs:
        raise DoesNotFit("only classical-output computations are embeddable")
    shift = 3 * cols
    m = {v: v + shift for v in cg.vertices}
    used = set(m.values())
    # an edge of the host between two used vertices that the computation omits cannot be cut
    for u, v in host.edges:
        if u in used and v in used:
            iu, iv = u - shift, v - shift
            if (min(iu, iv), max(iu, iv)) not in cg.edges:
                raise DoesNotFit("computation graph is not an induced subgraph of the region")

    tags = dict(canvas.sigma.tags)
    for v in host.vertices:
        if v in canvas.part.vertices or v in used:
            continue
        if v >= 2 * cols:  # third row and the unused computation region
            tags[v] = "0"
    for v, t in computation.inputs.items():
        tags[m[v]] = t
    angles: dict[int, int] = {}
    for v in host.vertices:
        if v in canvas.part.vertices:
            angles[v] = canvas.part.angles.get(v, 0)
        elif v not in used:
            angles[v] = int(rng.integers(8)) if rng is not None else 0
    for v, k in computation.pattern.angles.items():
        angles[m[v]] = k
    flow = {m[i]: m[j] for i, j in computation.pattern.flow.items()}
    order = tuple((m[a], m[b]) for a, b in computation.pattern.order)
    dummies = frozenset(v for v, t in tags.items() if t in Z_TAGS)
    inputs = set(canvas.part.inputs) | {v for v in tags}
    g = host.with_io(inputs=inputs, outputs=())
    pattern = MeasurementPattern(g, angles, flow, order, dummies)
    return Instance(pattern, ProductState(tags), canvas, tuple(m[v] for v in computation.readout))
