"""Open graphs, independent sets, cliques and (fractional) colourings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

from . import kernels
from .errors import CapExceeded
from .lp import maximize

ENUMERATION_CAP = 24

IndependentSet = frozenset  # members of an independent set; see is_independent


@dataclass(frozen=True)
class OpenGraph:
    """A simple graph with designated input and output vertices."""

    vertices: tuple[int, ...]
    edges: frozenset[tuple[int, int]]
    inputs: frozenset[int] = field(default_factory=frozenset)
    outputs: frozenset[int] = field(default_factory=frozenset)

    def __init__(
        self,
        vertices: Iterable[int],
        edges: Iterable[Iterable[int]] = (),
        inputs: Iterable[int] = (),
        outputs: Iterable[int] = (),
    ):
        vs = tuple(int(v) for v in vertices)
        if len(set(vs)) != len(vs):
            raise ValueError("duplicate vertex ids")
        vset = set(vs)
        es = set()
        for e in edges:
            u, v = (int(a) for a in e)
            if u == v:
                raise ValueError(f"self-loop on {u}")
            if u not in vset or v not in vset:
                raise ValueError(f"edge ({u}, {v}) has an undeclared endpoint")
            es.add((min(u, v), max(u, v)))
        ins, outs = frozenset(int(v) for v in inputs), frozenset(int(v) for v in outputs)
        if not ins <= vset or not outs <= vset:
            raise ValueError("inputs and outputs must be vertices")
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "edges", frozenset(es))
        object.__setattr__(self, "inputs", ins)
        object.__setattr__(self, "outputs", outs)

    @cached_property
    def adjacency(self) -> dict[int, frozenset[int]]:
        adj: dict[int, set[int]] = {v: set() for v in self.vertices}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return {v: frozenset(n) for v, n in adj.items()}

    @cached_property
    def index(self) -> dict[int, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    def neighbours(self, v: int) -> frozenset[int]:
        return self.adjacency[v]

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def __len__(self) -> int:
        return len(self.vertices)

    def with_io(self, inputs: Iterable[int] = (), outputs: Iterable[int] = ()) -> "OpenGraph":
        return OpenGraph(self.vertices, self.edges, inputs, outputs)

    def subgraph(self, keep: Iterable[int]) -> "OpenGraph":
        ks = set(keep)
        return OpenGraph(
            [v for v in self.vertices if v in ks],
            [e for e in self.edges if e[0] in ks and e[1] in ks],
            self.inputs & ks,
            self.outputs & ks,
        )

    def mask(self, vs: Iterable[int]) -> int:
        idx = self.index
        m = 0
        for v in vs:
            m |= 1 << idx[v]
        return m

    def unmask(self, m: int) -> frozenset[int]:
        return frozenset(v for i, v in enumerate(self.vertices) if (m >> i) & 1)

    def adjacency_masks(self) -> list[int]:
        return [self.mask(self.adjacency[v]) for v in self.vertices]

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [list(e) for e in sorted(self.edges)],
            "inputs": sorted(self.inputs),
            "outputs": sorted(self.outputs),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "OpenGraph":
        return cls(d["vertices"], d.get("edges", ()), d.get("inputs", ()), d.get("outputs", ()))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "OpenGraph":
        return cls.from_dict(json.loads(text))


# -- generators ---------------------------------------------------------------

def cycle(n: int) -> OpenGraph:
    return OpenGraph(range(n), [(i, (i + 1) % n) for i in range(n)] if n > 2 else path(n).edges)


def path(n: int) -> OpenGraph:
    return OpenGraph(range(n), [(i, i + 1) for i in range(n - 1)])


def complete(n: int) -> OpenGraph:
    return OpenGraph(range(n), [(i, j) for i in range(n) for j in range(i + 1, n)])


def edgeless(n: int) -> OpenGraph:
    return OpenGraph(range(n))


def grid(rows: int, cols: int) -> OpenGraph:
    """rows x cols cluster graph; vertex r*cols + c sits at row r, column c."""
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return OpenGraph(range(rows * cols), edges)


def petersen() -> OpenGraph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return OpenGraph(range(10), outer + spokes + inner)


# -- independent sets and cliques --------------------------------------------

def _check_cap(g: OpenGraph, cap: int) -> None:
    if len(g) > cap:
        raise CapExceeded(f"{len(g)} vertices exceeds cap {cap}")


def is_independent(g: OpenGraph, members: Iterable[int]) -> bool:
    ms = list(members)
    return all(not g.has_edge(u, v) for i, u in enumerate(ms) for v in ms[i + 1:])


def enumerate_independent_sets(
    g: OpenGraph, max_size: int | None = None, cap: int = ENUMERATION_CAP
) -> list[frozenset[int]]:
    """Every non-empty independent set with at most max_size members."""
    _check_cap(g, cap)
    size = len(g) if max_size is None else max_size
    masks = kernels.independent_sets(g.adjacency_masks(), len(g), size)
    return [g.unmask(m) for m in masks]


def maximal_independent_sets(g: OpenGraph, cap: int = ENUMERATION_CAP) -> list[frozenset[int]]:
    _check_cap(g, cap)
    adj = g.adjacency_masks()
    full = (1 << len(g)) - 1
    out = []
    for m in kernels.independent_sets(adj, len(g), len(g)):
        covered = m
        for i in range(len(g)):
            if (m >> i) & 1:
                covered |= adj[i]
        if covered == full:
            out.append(g.unmask(m))
    return out


def _max_clique_size(adj: list[int], candidates: int, size: int, best: int) -> int:
    if candidates == 0:
        return max(size, best)
    if size + bin(candidates).count("1") <= best:
        return best
    while candidates:
        if size + bin(candidates).count("1") <= best:
            break
        v = candidates.bit_length() - 1
        best = _max_clique_size(adj, candidates & adj[v], size + 1, best)
        candidates &= ~(1 << v)
    return best


def clique_number(g: OpenGraph, cap: int = ENUMERATION_CAP) -> int:
    _check_cap(g, cap)
    if not g.vertices:
        return 0
    return _max_clique_size(g.adjacency_masks(), (1 << len(g)) - 1, 0, 0)


def _greedy_colour_count(order: list[int], adj: list[int]) -> int:
    colour: dict[int, int] = {}
    for v in order:
        used = {colour[u] for u in colour if (adj[v] >> u) & 1}
        c = 0
        while c in used:
            c += 1
        colour[v] = c
    return max(colour.values(), default=-1) + 1


def _colourable(adj: list[int], order: list[int], k: int) -> bool:
    colour = [-1] * len(adj)

    def rec(pos: int, used: int) -> bool:
        if pos == len(order):
            return True
        v = order[pos]
        forbidden = {colour[u] for u in range(len(adj)) if (adj[v] >> u) & 1 and colour[u] >= 0}
        # symmetry breaking: at most one fresh colour per step
        for c in range(min(k, used + 1)):
            if c in forbidden:
                continue
            colour[v] = c
            if rec(pos + 1, max(used, c + 1)):
                return True
            colour[v] = -1
        return False

    return rec(0, 0)


def chromatic_number(g: OpenGraph, cap: int = ENUMERATION_CAP) -> int:
    """Exact chromatic number: clique lower bound, greedy upper bound, backtracking between."""
    _check_cap(g, cap)
    n = len(g)
    if n == 0:
        return 0
    adj = g.adjacency_masks()
    order = sorted(range(n), key=lambda v: -bin(adj[v]).count("1"))
    lo, hi = clique_number(g, cap), _greedy_colour_count(order, adj)
    for k in range(lo, hi):
        if _colourable(adj, order, k):
            return k
    return hi


# -- fractional colouring -----------------------------------------------------

@dataclass(frozen=True)
class FractionalColouring:
    """Weighted independent sets covering every vertex with total weight >= 1."""

    sets: tuple[frozenset[int], ...]
    weights: tuple[Fraction, ...]

    @property
    def total(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def coverage(self, v: int) -> Fraction:
        return sum((w for s, w in zip(self.sets, self.weights) if v in s), Fraction(0))

    def as_distribution(self) -> "FractionalColouring":
        t = self.total
        return FractionalColouring(self.sets, tuple(w / t for w in self.weights))


@dataclass(frozen=True)
class FractionalSolution:
    value: Fraction
    colouring: FractionalColouring
    clique_weights: dict[int, Fraction]


def fractional_colouring(g: OpenGraph, cap: int = ENUMERATION_CAP) -> FractionalSolution:
    """Solve the fractional clique LP exactly and read the covering LP off its dual.

    Constraints range over maximal independent sets; every other
    independent set's constraint is implied, so the optimum is unchanged.
    """
    _check_cap(g, cap)
    if not g.vertices:
        return FractionalSolution(Fraction(0), FractionalColouring((), ()), {})
    sets = maximal_independent_sets(g, cap)
    A = [[1 if v in s else 0 for v in g.vertices] for s in sets]
    res = maximize([1] * len(g), A, [1] * len(sets))
    chosen = [(s, w) for s, w in zip(sets, res.dual) if w != 0]
    col = FractionalColouring(tuple(s for s, _ in chosen), tuple(w for _, w in chosen))
    clique = {v: y for v, y in zip(g.vertices, res.x)}
    return FractionalSolution(res.value, col, clique)


def fractional_chromatic_number(g: OpenGraph, cap: int = ENUMERATION_CAP) -> Fraction:
    return fractional_colouring(g, cap).colouring.total


def fractional_clique_number(g: OpenGraph, cap: int = ENUMERATION_CAP) -> Fraction:
    return sum(fractional_colouring(g, cap).clique_weights.values(), Fraction(0))
