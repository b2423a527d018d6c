"""Amplified, BQP and parallel-repetition compilers and their bound calculators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .analysis import compose_parameter
from .errors import BadParams, CapExceeded, Inadmissible
from .traps import TrappifiedScheme

Real = Fraction | float | int


@dataclass(frozen=True)
class CompilerParams:
    n: int
    d: int
    s: int
    w: int
    c: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "c", Fraction(self.c))
        if min(self.n, self.d, self.s) < 0 or self.n != self.d + self.s:
            raise BadParams("need n = d + s with d, s >= 0")
        if not 1 <= self.w <= self.s:
            raise BadParams("threshold w must lie in 1..s (w = 0 rejects everything)")
        if not 0 <= self.c < Fraction(1, 2):
            raise BadParams("c must lie in [0, 1/2)")


@dataclass(frozen=True)
class Draw:
    """One sample of a compiled scheme: which rounds are tests and which canvas each uses."""

    tests: tuple[int, ...]
    canvases: tuple[int, ...]

    def canvas_at(self, j: int) -> int | None:
        try:
            return self.canvases[self.tests.index(j)]
        except ValueError:
            return None


@dataclass(frozen=True)
class CompiledScheme:
    base: TrappifiedScheme
    kind: str  # amplified | bqp | parallel
    n: int
    d: int
    s: int
    w: int
    c: Fraction = Fraction(0)

    @property
    def majority(self) -> bool:
        return self.kind == "bqp"

    def sample(self, rng: np.random.Generator) -> Draw:
        if self.kind == "parallel":
            tests = tuple(range(self.n))
        else:
            tests = tuple(sorted(int(v) for v in rng.choice(self.n, size=self.s, replace=False)))
        return Draw(tests, tuple(self.base.sample_index(rng) for _ in tests))

    def canvas_count(self) -> int:
        """Number of equally weighted compiled canvases (counted, never built)."""
        k = sum(1 for w in self.base.weights if w > 0)
        if self.kind == "parallel":
            return k ** self.n
        return math.comb(self.n, self.s) * k ** self.s

    def decide(self, taus: Sequence[int]) -> int:
        """Reject (1) iff at least w test rounds failed."""
        return int(sum(taus) >= self.w)


def compile_amplified(base: TrappifiedScheme, params: CompilerParams) -> CompiledScheme:
    return CompiledScheme(base, "amplified", params.n, params.d, params.s, params.w, params.c)


def compile_bqp(base: TrappifiedScheme, params: CompilerParams) -> CompiledScheme:
    return CompiledScheme(base, "bqp", params.n, params.d, params.s, params.w, params.c)


def compile_parallel(base: TrappifiedScheme, n: int, w: int) -> CompiledScheme:
    """n independent draws of a scheme that embeds the computation in every round."""
    if n < 1 or not 1 <= w <= n:
        raise BadParams("need n >= 1 and 1 <= w <= n")
    return CompiledScheme(base, "parallel", n, n, n, w)


def majority_vote(outputs: Sequence[Sequence[int]]) -> tuple[int, ...] | None:
    """Bitwise majority; None (failure flag) if any bit is tied or there are no rounds."""
    if not outputs:
        return None
    d = len(outputs)
    out = []
    for bits in zip(*outputs):
        ones = sum(bits)
        if 2 * ones == d:
            return None
        out.append(int(2 * ones > d))
    return tuple(out)


# -- mixture of pure computation and pure test rounds -------------------------

def mixture_parameters(epsilon: Real, delta: Real, c: Real, d: int, s: int) -> tuple[Fraction, Fraction, Fraction]:
    """(eps_M, delta_M, nu_M) of choosing a pure-computation round w.p. d/n and a test w.p. s/n.

    Evaluated with the composition rule; the computation-only scheme has
    eps = 1, delta = 0, nu = c and the pure-trap scheme has nu = 1.
    """
    n = d + s
    p = [Fraction(d, n), Fraction(s, n)]
    every = [lambda e: True, lambda e: True]
    errors = [None]
    eps_m = compose_parameter(p, [Fraction(1), Fraction(epsilon)], every, errors)
    # insensitivity composes like detection on acceptance: 1 - delta = min sum p_i (1 - delta_i)
    delta_m = compose_parameter(p, [Fraction(0), Fraction(delta)], every, errors)
    nu_m = compose_parameter(p, [Fraction(c), Fraction(1)], every, errors)
    return eps_m, delta_m, nu_m


# -- bounds -------------------------------------------------------------------

@dataclass(frozen=True)
class BoundInputs:
    epsilon: Fraction
    delta: Fraction
    nu: Fraction
    k_eps: int
    k_delta: int
    k_nu: int
    p_delta: Fraction

    def __post_init__(self):
        for name in ("epsilon", "delta", "nu", "p_delta"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))

    @classmethod
    def from_dict(cls, d: Mapping) -> "BoundInputs":
        return cls(
            Fraction(str(d.get("epsilon", 0))), Fraction(str(d.get("delta", 0))), Fraction(str(d.get("nu", 0))),
            int(d["k_eps"]), int(d["k_delta"]), int(d["k_nu"]), Fraction(str(d.get("p_delta", 0))),
        )


GRID = 10_000
_GOLD = (math.sqrt(5) - 1) / 2


def minimise_chi(f: Callable[[float], float], lo: float, hi: float, rel: float = 1e-9) -> tuple[float, float]:
    """Minimum of f on [lo, hi]: dense grid, then golden-section around the best grid point."""
    if hi < lo:
        raise ValueError("empty chi interval")
    if hi == lo:
        return f(lo), lo
    xs = np.linspace(lo, hi, GRID + 1)
    vals = np.array([f(float(x)) for x in xs])
    i = int(np.argmin(vals))
    a, b = float(xs[max(i - 1, 0)]), float(xs[min(i + 1, GRID)])
    best_x, best = float(xs[i]), float(vals[i])
    c, d = b - _GOLD * (b - a), a + _GOLD * (b - a)
    fc, fd = f(c), f(d)
    while b - a > rel * max(abs(best_x), 1e-300) and b - a > 1e-300:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLD * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLD * (b - a)
            fd = f(d)
        if b - a <= 1e-15 * (1 + abs(a)):
            break
    for x, v in ((c, fc), (d, fd)):
        if v < best:
            best, best_x = v, x
    return best, best_x


def _term_eps(chi: float, k: float, eps: float, s: int, w: int) -> float:
    x = k - chi
    second = math.exp(-2 * ((x * (1 - eps) - w / s) ** 2) / x * s) if x > 0 else 1.0
    return math.exp(-2 * chi * chi * s) + second


def epsilon_prime(epsilon: Real, k_eps: int, n: int, s: int, w: int) -> tuple[float, float]:
    """(eps', chi) for detection amplification; needs w/(s(1-eps)) < k_eps/n."""
    eps = Fraction(epsilon)
    if eps >= 1 or not Fraction(w, s) / (1 - eps) < Fraction(k_eps, n):
        raise Inadmissible("w/(s(1-eps)) < k_eps/n")
    k = k_eps / n
    hi = float(Fraction(k_eps, n) - Fraction(w, s) / (1 - eps))
    return minimise_chi(lambda chi: _term_eps(chi, k, float(eps), s, w), 0.0, hi)


def delta_prime(delta: Real, k_delta: int, n: int, s: int, w: int) -> tuple[float, float]:
    """(delta', chi) for insensitivity amplification; needs k_delta/n < w/(s delta)."""
    dl = Fraction(delta)
    k = k_delta / n
    if dl == 0:
        # no test can fail, so only the hypergeometric term is left; X <= s caps chi
        hi = 1 - k
        if hi < 0:
            raise Inadmissible("k_delta <= n")
        return minimise_chi(lambda chi: math.exp(-2 * chi * chi * s), 0.0, hi)
    if not Fraction(k_delta, n) < Fraction(w, s) / dl:
        raise Inadmissible("k_delta/n < w/(s*delta)")
    hi = float(min(Fraction(w, s) / dl - Fraction(k_delta, n), 1 - Fraction(k_delta, n)))
    d = float(dl)

    def f(chi: float) -> float:
        x = k + chi
        second = math.exp(-2 * ((x * d - w / s) ** 2) / x * s) if x > 0 else 0.0
        return math.exp(-2 * chi * chi * s) + second

    return minimise_chi(f, 0.0, hi)


def _nu_terms(chi: float, k: float, c: float, d: int, proof_form: bool) -> float:
    y = 1 - k - chi
    lead = 2 * y if proof_form else y
    second = math.exp(-2 * ((lead * (1 - c) - 0.5) ** 2) / y * d) if y > 0 else 1.0
    return math.exp(-2 * chi * chi * d) + second


def nu_prime(c: Real, k_nu: int, n: int, d: int, proof_form: bool = False) -> tuple[float, float]:
    """(nu', chi) for majority-vote correctness; needs k_nu/n < (1-2c)/(2-2c).

    proof_form evaluates the variant with 2y(1-c) in place of y(1-c). It is
    not a valid bound (see the counterexample in the tests) and is kept for
    comparison only.
    """
    cc = Fraction(c)
    cap = (1 - 2 * cc) / (2 - 2 * cc)
    if not Fraction(k_nu, n) < cap:
        raise Inadmissible("k_nu/n < (1-2c)/(2-2c)")
    hi = float(cap - Fraction(k_nu, n))
    return minimise_chi(lambda chi: _nu_terms(chi, k_nu / n, float(cc), d, proof_form), 0.0, hi)


def p_delta_prime(p_delta: Real, k_delta: int, n: int) -> float:
    if not Fraction(p_delta) < Fraction(k_delta, n):
        raise Inadmissible("p_delta < k_delta/n")
    return math.exp(-2 * (float(p_delta) - k_delta / n) ** 2 * n)


def check_admissible(inp: BoundInputs, params: CompilerParams) -> None:
    """All strict inequalities of the combined theorem; raises on the first failure."""
    n, s, w, c = params.n, params.s, params.w, params.c
    if inp.epsilon >= 1 or not Fraction(w, s) / (1 - inp.epsilon) < Fraction(inp.k_eps, n):
        raise Inadmissible("w/(s(1-eps)) < k_eps/n")
    if not inp.k_eps <= inp.k_nu:
        raise Inadmissible("k_eps/n <= k_nu/n")
    if not Fraction(inp.k_nu, n) < (1 - 2 * c) / (2 - 2 * c):
        raise Inadmissible("k_nu/n < (1-2c)/(2-2c)")
    if not inp.p_delta < Fraction(inp.k_delta, n):
        raise Inadmissible("p_delta < k_delta/n")
    if inp.delta > 0 and not Fraction(inp.k_delta, n) < Fraction(w, s) / inp.delta:
        raise Inadmissible("k_delta/n < w/(s*delta)")
    if not inp.k_delta <= inp.k_nu:
        raise Inadmissible("k_delta <= k_nu")


@dataclass(frozen=True)
class AmplifiedBounds:
    epsilon: float
    chi_epsilon: float
    delta: float
    chi_delta: float
    nu: float
    chi_nu: float
    nu_proof_form: float
    p_delta: float

    def to_dict(self) -> dict:
        return {
            "epsilon_prime": self.epsilon, "chi_epsilon": self.chi_epsilon,
            "delta_prime": self.delta, "chi_delta": self.chi_delta,
            "nu_prime": self.nu, "chi_nu": self.chi_nu,
            "nu_proof_form": self.nu_proof_form,
            "p_delta_prime": self.p_delta,
            "correctness": self.p_delta + self.delta + self.nu,
            "security": max(self.epsilon, self.nu),
        }


def bounds_amplified(inp: BoundInputs, params: CompilerParams, check: bool = True) -> AmplifiedBounds:
    if check:
        check_admissible(inp, params)
    n, d, s, w = params.n, params.d, params.s, params.w
    e, ce = epsilon_prime(inp.epsilon, inp.k_eps, n, s, w)
    dl, cd = delta_prime(inp.delta, inp.k_delta, n, s, w)
    nu, cn = nu_prime(params.c, inp.k_nu, n, d)
    nu_pf, _ = nu_prime(params.c, inp.k_nu, n, d, proof_form=True)
    return AmplifiedBounds(e, ce, dl, cd, nu, cn, nu_pf, p_delta_prime(inp.p_delta, inp.k_delta, n))


@dataclass(frozen=True)
class ParallelBounds:
    epsilon: float
    delta: float
    nu: float

    def to_dict(self) -> dict:
        return {"epsilon_parallel": self.epsilon, "delta_parallel": self.delta, "nu_parallel": self.nu}


def bounds_parallel(inp: BoundInputs, n: int, w: int, f: Real) -> ParallelBounds:
    eps, dl, nu, f = inp.epsilon, inp.delta, inp.nu, Fraction(f)
    if eps >= 1 or not inp.k_eps > Fraction(w) / (1 - eps):
        raise Inadmissible("k_eps > w/(1-eps)")
    if dl > 0 and not inp.k_delta < Fraction(w) / dl:
        raise Inadmissible("k_delta < w/delta")
    if nu >= 1 or not inp.k_nu < (1 - nu - f / n) / (1 - nu) * n:
        raise Inadmissible("k_nu < (1-nu-f/n)/(1-nu) n")
    e = math.exp(-2 * float((inp.k_eps * (1 - eps) - w) ** 2 / inp.k_eps))
    d = math.exp(-2 * float((inp.k_delta * dl - w) ** 2 / inp.k_delta)) if inp.k_delta > 0 else 0.0
    m = n - inp.k_nu
    v = math.exp(-2 * float(((m * (1 - nu)) - f) ** 2 / m))
    return ParallelBounds(e, d, v)


def bounds_parallel_mixture(
    epsilon: Real, delta: Real, c: Real, n: int, d: int, s: int, w: int, k_eps: int, k_delta: int, k_nu: int
) -> ParallelBounds:
    """Boosted values for parallel repetition of the computation/test mixture."""
    eps, dl, cc = Fraction(epsilon), Fraction(delta), Fraction(c)
    if not Fraction(k_eps) > Fraction(w, s) / (1 - eps) * n:
        raise Inadmissible("k_eps > w n/((1-eps) s)")
    if dl > 0 and not Fraction(k_delta) < Fraction(w, s) / dl * n:
        raise Inadmissible("k_delta < w n/(s delta)")
    if not Fraction(k_nu) < (1 - 2 * cc) / (2 - 2 * cc) * n:
        raise Inadmissible("k_nu < (1-2c)/(2-2c) n")
    e = math.exp(-2 * float((Fraction(k_eps) * (1 - eps) / n - Fraction(w, s)) ** 2 * Fraction(s * s, k_eps)))
    de = (
        math.exp(-2 * float((Fraction(k_delta) * dl / n - Fraction(w, s)) ** 2 * Fraction(s * s, k_delta)))
        if k_delta > 0 else 0.0
    )
    v = math.exp(-2 * float(((1 - Fraction(k_nu, n)) * (1 - cc) - Fraction(1, 2)) ** 2 * Fraction(d * d, n - k_nu)))
    return ParallelBounds(e, de, v)


# -- exact tails ---------------------------------------------------------------

TAIL_CAP = 10_000


@dataclass(frozen=True)
class Hypergeometric:
    """Successes in s draws without replacement from N items of which K are marked."""

    N: int
    K: int
    s: int

    def pmf(self, j: int) -> Fraction:
        return Fraction(math.comb(self.K, j) * math.comb(self.N - self.K, self.s - j), math.comb(self.N, self.s))

    @property
    def support(self) -> range:
        return range(max(0, self.s - (self.N - self.K)), min(self.K, self.s) + 1)

    @property
    def size(self) -> int:
        return self.N


@dataclass(frozen=True)
class Binomial:
    m: int
    p: Fraction

    def __post_init__(self):
        object.__setattr__(self, "p", Fraction(self.p))

    def pmf(self, j: int) -> Fraction:
        return math.comb(self.m, j) * self.p ** j * (1 - self.p) ** (self.m - j)

    @property
    def support(self) -> range:
        return range(0, self.m + 1)

    @property
    def size(self) -> int:
        return self.m


def tail_exact(dist: Hypergeometric | Binomial, predicate: str, x: Real) -> Fraction:
    """Exact Pr[X <= x], Pr[X < x], Pr[X >= x] or Pr[X > x]."""
    if dist.size > TAIL_CAP:
        raise CapExceeded(f"size {dist.size} exceeds {TAIL_CAP}")
    x = Fraction(x)
    tests = {"<=": lambda j: j <= x, "<": lambda j: j < x, ">=": lambda j: j >= x, ">": lambda j: j > x}
    keep = tests[predicate]
    return sum((dist.pmf(j) for j in dist.support if keep(j)), Fraction(0))


def hoeffding_hypergeometric(chi: float, s: int) -> float:
    return math.exp(-2 * chi * chi * s)


def hoeffding_binomial(m: int, q: Real, w: Real) -> float:
    """exp(-2 (m q - w)^2 / m), the bound on Pr[Bin(m,q) < w] (or >= w on the other side)."""
    return math.exp(-2 * float((m * Fraction(q) - Fraction(w)) ** 2 / m))
