"""Exact rational simplex for LPs of the form max c.x, A x <= b, x >= 0, b >= 0.

Every LP in the package (fractional colouring, the trap-distribution
max-min problem) has a non-negative right-hand side, so the slack basis
is feasible and a single phase suffices. Pivoting follows Bland's rule,
which rules out cycling on the degenerate vertices these problems have.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

Number = int | Fraction


@dataclass(frozen=True)
class LPResult:
    value: Fraction
    x: tuple[Fraction, ...]
    dual: tuple[Fraction, ...]
    unique: bool
    pivots: int


class Unbounded(ArithmeticError):
    pass


def maximize(c: Sequence[Number], A: Sequence[Sequence[Number]], b: Sequence[Number]) -> LPResult:
    """Solve max c.x subject to A x <= b, x >= 0 exactly.

    The dual solution y (min b.y, A^T y >= c, y >= 0) is read off the
    final objective row, so strong duality holds by construction and is
    checked by the tests rather than assumed.
    """
    m, n = len(A), len(c)
    if len(b) != m or any(len(row) != n for row in A):
        raise ValueError("dimension mismatch")
    if any(v < 0 for v in b):
        raise ValueError("right-hand side must be non-negative")

    width = n + m
    rows: list[list[Fraction]] = []
    for i in range(m):
        row = [Fraction(v) for v in A[i]] + [Fraction(0)] * m + [Fraction(b[i])]
        row[n + i] = Fraction(1)
        rows.append(row)
    obj = [Fraction(v) for v in c] + [Fraction(0)] * (m + 1)
    basis = list(range(n, n + m))

    pivots = 0
    while True:
        entering = next((j for j in range(width) if obj[j] > 0), None)
        if entering is None:
            break
        leave, best = -1, None
        for i in range(m):
            a = rows[i][entering]
            if a > 0:
                ratio = rows[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave < 0:
            raise Unbounded("objective is unbounded")
        _pivot(rows, obj, leave, entering)
        basis[leave] = entering
        pivots += 1

    x = [Fraction(0)] * width
    for i, var in enumerate(basis):
        x[var] = rows[i][-1]
    dual = tuple(-obj[n + i] for i in range(m))
    basic = set(basis)
    unique = all(obj[j] != 0 for j in range(width) if j not in basic)
    return LPResult(value=-obj[-1], x=tuple(x[:n]), dual=dual, unique=unique, pivots=pivots)


def _pivot(rows: list[list[Fraction]], obj: list[Fraction], p: int, q: int) -> None:
    prow = rows[p]
    piv = prow[q]
    if piv != 1:
        prow[:] = [v / piv for v in prow]
    nz = [j for j, v in enumerate(prow) if v != 0]
    for row in rows:
        if row is prow:
            continue
        f = row[q]
        if f != 0:
            for j in nz:
                row[j] -= f * prow[j]
    f = obj[q]
    if f != 0:
        for j in nz:
            obj[j] -= f * prow[j]
