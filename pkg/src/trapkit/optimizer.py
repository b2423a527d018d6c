"""Optimal trap distributions: the max-min detection LP, its dual and colouring constructions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .analysis import DeviationSet, _mask, _popcount
from .errors import EmptyErrors
from .graph import OpenGraph, enumerate_independent_sets, fractional_colouring
from .lp import maximize
from .pauli import Pauli
from .traps import TrappifiedCanvas, TrappifiedScheme, build_general_trap, build_standard_trap


@dataclass(frozen=True)
class TestErrorRelation:
    """detects[t][e] == 1 iff test t rejects error class e.

    Each error class is represented by one deviation; `classes[e]` counts
    how many enumerated deviations had that identical column.
    """

    __test__ = False  # not a pytest class

    tests: tuple[TrappifiedCanvas, ...]
    errors: tuple[Pauli, ...]
    detects: tuple[tuple[int, ...], ...]
    classes: tuple[int, ...]
    dropped_dominated: int = 0

    def to_dict(self) -> dict:
        return {
            "tests": [c.to_dict() for c in self.tests],
            "errors": [e.to_dict() for e in self.errors],
            "detects": [list(r) for r in self.detects],
            "class_sizes": list(self.classes),
            "dropped_dominated": self.dropped_dominated,
        }


def build_relation(
    candidates: Sequence[TrappifiedCanvas], dset: DeviationSet, drop_dominated: bool = False
) -> TestErrorRelation:
    """Fill the relation from the exact trap predicates and merge identical error columns.

    With drop_dominated, an error whose set of detecting tests contains
    another error's set is dropped too: its constraint is implied, so the
    LP optimum and the optimal distributions are unchanged.
    """
    if not candidates:
        raise ValueError("no candidate tests")
    g = candidates[0].host
    idx = g.index
    masks = dset.support_masks(idx)
    if len(masks) == 0:
        raise EmptyErrors("empty error set")
    cols = np.zeros(len(masks), dtype=object)
    for t, c in enumerate(candidates):
        hit = masks & _mask(c.H, idx)
        bit = (_popcount(hit) & 1) if c.kind == "general" else (hit != 0).astype(np.int64)
        if c.kind not in ("standard", "general"):
            from .analysis import reject_probability

            members = dset.members()
            bit = np.array([int(reject_probability(c, m) == 1) for m in members], dtype=np.int64)
        cols = cols + (bit.astype(object) << t)
    first: dict[int, int] = {}
    count: dict[int, int] = {}
    for e, col in enumerate(cols):
        col = int(col)
        first.setdefault(col, e)
        count[col] = count.get(col, 0) + 1
    keys = list(first)
    dropped = 0
    if drop_dominated:
        keep = []
        for k in keys:
            if any(o != k and (o & k) == o for o in keys):
                dropped += 1
            else:
                keep.append(k)
        keys = keep
    errs = []
    for k in keys:
        e = first[k]
        errs.append(_rep(g, int(masks[e]), dset, e))
    detects = tuple(tuple((k >> t) & 1 for k in keys) for t in range(len(candidates)))
    return TestErrorRelation(tuple(candidates), tuple(errs), detects, tuple(count[k] for k in keys), dropped)


def _rep(g: OpenGraph, mask: int, dset: DeviationSet, e: int) -> Pauli:
    if dset.kind == "explicit":
        return dset.deviations[e]
    return Pauli({v: "X" for v in g.unmask(mask)})


@dataclass(frozen=True)
class OptimalDistribution:
    weights: tuple[Fraction, ...]
    rate: Fraction
    dual: tuple[Fraction, ...]
    unique: bool
    relation: TestErrorRelation

    def scheme(self) -> TrappifiedScheme:
        """The optimal distribution restricted to its support, as a scheme."""
        chosen = [(c, w) for c, w in zip(self.relation.tests, self.weights) if w > 0]
        tot = sum(w for _, w in chosen)
        return TrappifiedScheme(chosen[0][0].host, tuple(c for c, _ in chosen), tuple(w / tot for _, w in chosen))

    def attack(self) -> list[tuple[Pauli, Fraction]]:
        """The dual as a distribution over deviations: an optimal attack."""
        return [(e, y) for e, y in zip(self.relation.errors, self.dual) if y > 0]

    def to_dict(self) -> dict:
        return {
            "rate": str(self.rate),
            "unique": self.unique,
            "distribution": [
                {"canvas": c.to_dict(), "weight": str(w)}
                for c, w in zip(self.relation.tests, self.weights) if w > 0
            ],
            "attack": {
                "kind": "distribution",
                "deviations": [[e.to_dict(), str(y)] for e, y in self.attack()],
            },
            "dedup": {"error_classes": len(self.relation.errors), "dropped_dominated": self.relation.dropped_dominated},
        }


def solve_distribution(rel: TestErrorRelation) -> OptimalDistribution:
    """max eps s.t. sum_t p_t R[t][e] >= eps for every e, sum_t p_t <= 1.

    Variables are (p_1..p_T, eps). The dual variable of each error row is
    the weight of that error in the optimal attack; the dual of the
    normalisation row equals the rate.
    """
    T, E = len(rel.tests), len(rel.errors)
    if E == 0:
        raise EmptyErrors("empty error set")
    c = [0] * T + [1]
    A = [[-rel.detects[t][e] for t in range(T)] + [1] for e in range(E)]
    A.append([1] * T + [0])
    b = [0] * E + [1]
    res = maximize(c, A, b)
    return OptimalDistribution(res.x[:T], res.value, res.dual[:E], res.unique, rel)


def standard_candidates(g: OpenGraph) -> list[TrappifiedCanvas]:
    return [build_standard_trap(g, h) for h in enumerate_independent_sets(g)]


def general_candidates(g: OpenGraph) -> list[TrappifiedCanvas]:
    vs = g.vertices
    return [build_general_trap(g, h) for r in range(1, len(vs) + 1) for h in itertools.combinations(vs, r)]


def optimise(g: OpenGraph, family: str = "standard", dset: DeviationSet | None = None) -> OptimalDistribution:
    cands = standard_candidates(g) if family == "standard" else general_candidates(g)
    rel = build_relation(cands, dset or DeviationSet.all_xy(g.vertices), drop_dominated=True)
    return solve_distribution(rel)


def colouring_distribution(g: OpenGraph) -> tuple[TrappifiedScheme, Fraction]:
    """Standard-trap scheme from an optimal fractional colouring; detects every XY error w.p. >= 1/chi_f."""
    sol = fractional_colouring(g)
    dist = sol.colouring.as_distribution()
    canvases = tuple(build_standard_trap(g, s) for s in dist.sets)
    return TrappifiedScheme(g, canvases, dist.weights), 1 / sol.colouring.total
