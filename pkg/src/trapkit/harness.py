"""Protocol execution, adversaries, Monte Carlo estimation and the distinguishing game."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .analysis import DeviationSet, _mask, reject_probability, total_variation
from .compiler import CompiledScheme, majority_vote
from .errors import DoesNotFit, EmbeddingFailed
from .kernels import count_failures
from .mbqc import Computation, MeasurementPattern, output_distribution
from .pauli import Pauli
from .traps import Instance, TrappifiedScheme
from .ubqc import run_blind_session

CHUNK = 2_000


# -- seeds --------------------------------------------------------------------

def trial_seed(root: int, index: int) -> np.random.SeedSequence:
    """Seed of trial `index`, a pure function of (root, index)."""
    return np.random.SeedSequence(root, spawn_key=(index,))


# -- adversaries --------------------------------------------------------------

@dataclass(frozen=True)
class AdversaryStrategy:
    """How the server deviates, drawn independently per round.

    kinds: honest, fixed (one word every round), distribution (a word drawn
    from weighted choices), noisy (with probability p_delta a word from the
    noise set, else nothing) and schedule (word j on round j).
    """

    kind: str = "honest"
    deviations: tuple[Pauli, ...] = ()
    weights: tuple[Fraction, ...] = ()
    p_delta: float = 0.0
    noise: DeviationSet | None = None

    def __post_init__(self):
        if self.kind == "distribution":
            ws = tuple(Fraction(w) for w in self.weights)
            if len(ws) != len(self.deviations) or sum(ws) != 1 or any(w < 0 for w in ws):
                raise ValueError("distribution weights must sum to 1")
            object.__setattr__(self, "weights", ws)

    @classmethod
    def honest(cls) -> "AdversaryStrategy":
        return cls()

    @classmethod
    def fixed(cls, dev: Pauli) -> "AdversaryStrategy":
        return cls("fixed", (dev,))

    @classmethod
    def distribution(cls, pairs: Sequence[tuple[Pauli, Fraction]]) -> "AdversaryStrategy":
        return cls("distribution", tuple(p for p, _ in pairs), tuple(Fraction(w) for _, w in pairs))

    @classmethod
    def noisy(cls, p_delta: float, noise: DeviationSet) -> "AdversaryStrategy":
        return cls("noisy", p_delta=float(p_delta), noise=noise)

    @classmethod
    def schedule(cls, per_round: Sequence[Pauli]) -> "AdversaryStrategy":
        return cls("schedule", tuple(per_round))

    def _noise_word(self, rng: np.random.Generator) -> Pauli:
        ns = self.noise
        if ns.kind == "z-only":
            # a random non-trivial Z word; it is inert before a readout but still applied physically
            vs = [v for v in ns.vertices if rng.random() < 0.5] or [ns.vertices[int(rng.integers(len(ns.vertices)))]]
            return Pauli({v: "Z" for v in vs})
        members = ns.members()
        return members[int(rng.integers(len(members)))]

    def draw(self, rng: np.random.Generator, round_index: int = 0) -> Pauli:
        if self.kind == "honest":
            return Pauli()
        if self.kind == "fixed":
            return self.deviations[0]
        if self.kind == "schedule":
            return self.deviations[round_index] if round_index < len(self.deviations) else Pauli()
        if self.kind == "distribution":
            w = np.array([float(x) for x in self.weights])
            return self.deviations[int(rng.choice(len(w), p=w / w.sum()))]
        if self.kind == "noisy":
            return self._noise_word(rng) if rng.random() < self.p_delta else Pauli()
        raise ValueError(f"unknown adversary kind {self.kind!r}")

    def masks(self, rng: np.random.Generator, trials: int, rounds: int, index: Mapping[int, int]) -> np.ndarray:
        """(trials, rounds) XY-support masks, for the vectorised engine."""
        out = np.zeros((trials, rounds), dtype=np.uint64)
        if self.kind == "honest":
            return out
        if self.kind == "fixed":
            out[:] = _mask(self.deviations[0].xy_support, index)
            return out
        if self.kind == "schedule":
            for j, d in enumerate(self.deviations[:rounds]):
                out[:, j] = _mask(d.xy_support, index)
            return out
        if self.kind == "distribution":
            table = np.array([_mask(d.xy_support, index) for d in self.deviations], dtype=np.uint64)
            w = np.array([float(x) for x in self.weights])
            return table[rng.choice(len(table), size=(trials, rounds), p=w / w.sum())]
        if self.kind == "noisy":
            hit = rng.random((trials, rounds)) < self.p_delta
            if self.noise.kind == "z-only":
                return out
            table = np.array([_mask(d.xy_support, index) for d in self.noise.members()], dtype=np.uint64)
            pick = table[rng.integers(len(table), size=(trials, rounds))]
            return np.where(hit, pick, np.uint64(0)).astype(np.uint64)
        raise ValueError(f"unknown adversary kind {self.kind!r}")

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind in ("fixed", "schedule"):
            d["deviations"] = [p.to_dict() for p in self.deviations]
        if self.kind == "distribution":
            d["deviations"] = [[p.to_dict(), str(w)] for p, w in zip(self.deviations, self.weights)]
        if self.kind == "noisy":
            d["p_delta"] = self.p_delta
            d["noise"] = self.noise.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "AdversaryStrategy":
        kind = d.get("kind", "honest")
        if kind == "honest":
            return cls.honest()
        if kind == "fixed":
            dev = d["deviation"] if "deviation" in d else d["deviations"][0]
            return cls.fixed(Pauli.from_dict(dev))
        if kind == "schedule":
            return cls.schedule([Pauli.from_dict(x) for x in d["deviations"]])
        if kind == "distribution":
            return cls.distribution([(Pauli.from_dict(p), Fraction(w)) for p, w in d["deviations"]])
        if kind == "noisy":
            ns = d["noise"]
            if ns.get("kind") == "explicit":
                noise = DeviationSet.explicit(Pauli.from_dict(x) for x in ns["deviations"])
            else:
                noise = DeviationSet.parse(ns["kind"], ns["vertices"])
            return cls.noisy(float(d["p_delta"]), noise)
        raise ValueError(f"unknown adversary kind {kind!r}")


# -- sessions -----------------------------------------------------------------

@dataclass(frozen=True)
class SessionResult:
    accepted: bool
    output: tuple[int, ...] | None
    trap_outcomes: dict = field(default_factory=dict)
    seed: tuple[int, int] = (0, 0)
    failures: int = 0

    def __post_init__(self):
        if (self.output is None) == self.accepted:
            raise ValueError("output must be None exactly when rejected")

    @property
    def verdict(self) -> str:
        return "Acc" if self.accepted else "Rej"

    def to_row(self) -> dict:
        return {
            "seed": f"{self.seed[0]}:{self.seed[1]}",
            "verdict": self.verdict,
            "output": "" if self.output is None else "".join(map(str, self.output)),
            "failures": self.failures,
        }


def _apply_flip(bits: tuple[int, ...], p: float, rng: np.random.Generator) -> tuple[int, ...]:
    if p and rng.random() < p:
        return tuple(1 - b for b in bits)
    return bits


def _instantiate(scheme: TrappifiedScheme, index: int, computation: Computation | None, rng) -> Instance:
    try:
        return scheme.instantiate(index, computation, rng)
    except DoesNotFit as exc:
        raise EmbeddingFailed(str(exc)) from exc


def _single_round(
    scheme: TrappifiedScheme,
    computation: Computation | None,
    dev: Pauli,
    rng: np.random.Generator,
    engine: str,
    cache: dict | None = None,
) -> tuple[bool, tuple[int, ...] | None, dict]:
    idx = scheme.sample_index(rng)
    if engine == "blind":
        inst = _instantiate(scheme, idx, computation, rng)
        out, _ = run_blind_session(inst.pattern, inst.inputs, dev, np.random.SeedSequence(int(rng.integers(1 << 63))))
        traps = inst.trap_outcomes(out.outcomes)
        accepted = inst.canvas.decision(traps) == 0
        bits = tuple(out.outcomes[v] for v in inst.readout)
    else:
        canvas = scheme.canvases[idx]
        bit = canvas.predicate_rejects(dev)
        if bit is None:
            bit = int(rng.random() < float(reject_probability(canvas, dev)))
        accepted, traps = bit == 0, {}
        bits = ()
        if computation is not None and computation.readout:
            key = (idx, dev.unsigned())
            dist = None if cache is None else cache.get(key)
            if dist is None:
                inst = _instantiate(scheme, idx, computation, np.random.default_rng(0))
                dist = _as_sampler(output_distribution(inst.pattern, inst.inputs, inst.readout, dev))
                if cache is not None:
                    cache[key] = dist
            bits = dist[0][int(rng.choice(len(dist[0]), p=dist[1]))]
    if computation is not None:
        bits = _apply_flip(bits, computation.flip, rng)
    return accepted, bits if accepted else None, traps


def _as_sampler(dist: Mapping[tuple[int, ...], float]) -> tuple[list, np.ndarray]:
    keys = sorted(dist)
    p = np.array([dist[k] for k in keys])
    return keys, p / p.sum()


def _run_compiled(
    cs: CompiledScheme,
    computation: Computation | None,
    adversary: AdversaryStrategy,
    rng: np.random.Generator,
    engine: str,
) -> tuple[bool, tuple | None, dict, int]:
    draw = cs.sample(rng)
    base = cs.base
    taus, outputs = [], []
    for j in range(cs.n):
        dev = adversary.draw(rng, j)
        k = draw.canvas_at(j)
        if k is not None:
            canvas = base.canvases[k]
            if engine == "blind":
                inst = _instantiate(base, k, computation if cs.kind == "parallel" else None, rng)
                out, _ = run_blind_session(inst.pattern, inst.inputs, dev, np.random.SeedSequence(int(rng.integers(1 << 63))))
                taus.append(inst.canvas.decision(inst.trap_outcomes(out.outcomes)))
                if cs.kind == "parallel" and inst.readout:
                    outputs.append(_apply_flip(tuple(out.outcomes[v] for v in inst.readout), computation.flip, rng))
            else:
                bit = canvas.predicate_rejects(dev)
                taus.append(bit if bit is not None else int(rng.random() < float(reject_probability(canvas, dev))))
        if cs.kind != "parallel" and k is None and computation is not None:
            p = computation.pattern
            d = dev.restrict(p.graph.vertices)
            out, _ = run_blind_session(p, computation.inputs, d, np.random.SeedSequence(int(rng.integers(1 << 63))))
            outputs.append(_apply_flip(tuple(out.outcomes[v] for v in computation.readout), computation.flip, rng))
    failures = int(sum(taus))
    accepted = cs.decide(taus) == 0
    if not accepted:
        return False, None, {}, failures
    if computation is None or not outputs:
        return True, (), {}, failures
    if cs.majority or cs.kind == "parallel":
        dec = majority_vote(outputs)
        if dec is None:  # tie: failure flag, treated as an abort
            return False, None, {}, failures
        return True, dec, {}, failures
    return True, tuple(b for o in outputs for b in o), {}, failures


def run_protocol3(
    scheme: TrappifiedScheme | CompiledScheme,
    computation: Computation | None,
    adversary: AdversaryStrategy | None = None,
    seed: int = 0,
    *,
    index: int = 0,
    engine: str = "blind",
) -> SessionResult:
    """One execution: sample a canvas, embed, delegate blindly, evaluate the decision, decode."""
    adversary = adversary or AdversaryStrategy.honest()
    rng = np.random.default_rng(trial_seed(seed, index))
    if isinstance(scheme, CompiledScheme):
        acc, out, traps, fails = _run_compiled(scheme, computation, adversary, rng, engine)
        return SessionResult(acc, out, traps, (seed, index), fails)
    dev = adversary.draw(rng)
    acc, out, traps = _single_round(scheme, computation, dev, rng, engine)
    return SessionResult(acc, out, traps, (seed, index), int(not acc))


# -- vectorised compiled engine -------------------------------------------------

def _canvas_tables(base: TrappifiedScheme) -> tuple[np.ndarray, np.ndarray]:
    idx = base.graph.index
    if len(idx) > 64:
        raise ValueError("vectorised engine needs at most 64 vertices per round")
    masks, parity = [], []
    for c in base.canvases:
        if c.kind not in ("standard", "general"):
            raise ValueError("vectorised engine needs predicate canvases")
        masks.append(_mask(c.H, idx))
        parity.append(1 if c.kind == "general" else 0)
    return np.array(masks, dtype=np.uint64), np.array(parity, dtype=np.uint8)


def compiled_chunk(
    cs: CompiledScheme,
    computation: Computation | None,
    adversary: AdversaryStrategy,
    seed: int,
    chunk: int,
    trials: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised compiled runs: (accepted, corrupted, failures), one entry per trial.

    Test rounds use the exact trap predicates through the failure-count kernel;
    computation rounds sample from the exact deviated output distribution of
    the computation, then apply the artificial flip. The result depends only
    on (seed, chunk).
    """
    rng = np.random.default_rng(trial_seed(seed, chunk))
    base = cs.base
    canvas_masks, parity = _canvas_tables(base)
    n, s = cs.n, cs.s
    if cs.kind == "parallel":
        tests = np.tile(np.arange(n, dtype=np.int64), (trials, 1))
    else:
        tests = np.sort(np.argsort(rng.random((trials, n)), axis=1)[:, :s], axis=1).astype(np.int64)
    w = base.float_weights()
    picks = rng.choice(len(w), size=tests.shape, p=w).astype(np.int64)
    devs = adversary.masks(rng, trials, n, base.graph.index)
    fails = np.asarray(count_failures(np.ascontiguousarray(devs), np.ascontiguousarray(tests),
                                      np.ascontiguousarray(picks), canvas_masks, parity))
    accepted = fails < cs.w
    corrupted = np.zeros(trials, dtype=bool)
    if computation is not None and computation.readout and cs.kind != "parallel":
        correct = computation.correct_output()
        is_test = np.zeros((trials, n), dtype=bool)
        np.put_along_axis(is_test, tests, True, axis=1)
        comp_idx = np.nonzero(~is_test)[1].reshape(trials, n - s)
        comp_dev = np.take_along_axis(devs, comp_idx, axis=1)
        # restrict to the computation's vertices; only the XY support matters before readout
        cmask = np.uint64(_mask([v for v in computation.pattern.graph.vertices if v in base.graph.index], base.graph.index))
        comp_dev = comp_dev & cmask
        nbits = len(computation.readout)
        samples = np.zeros((trials, n - s), dtype=np.int64)
        for m in np.unique(comp_dev):
            sel = comp_dev == m
            dev = Pauli({v: "X" for v in base.graph.unmask(int(m))})
            keys, p = _as_sampler(computation.distribution(dev))
            codes = np.array([int("".join(map(str, k)) or "0", 2) for k in keys], dtype=np.int64)
            samples[sel] = codes[rng.choice(len(keys), size=int(sel.sum()), p=p)]
        if computation.flip:
            flipped = rng.random(samples.shape) < computation.flip
            samples = np.where(flipped, samples ^ ((1 << nbits) - 1), samples)
        bits = (samples[:, :, None] >> np.arange(nbits - 1, -1, -1)) & 1
        ones = bits.sum(axis=1)
        d = n - s
        tie = (2 * ones == d).any(axis=1)
        decoded = (2 * ones > d).astype(np.int64)
        wrong = (decoded != np.array(correct)).any(axis=1)
        if cs.majority:
            accepted = accepted & ~tie
            corrupted = accepted & wrong
        else:
            corrupted = accepted & (bits != np.array(correct)).any(axis=(1, 2))
    return accepted, corrupted, fails


# -- estimation ---------------------------------------------------------------

def wilson(k: int, n: int, z: float = 1.959963984540054) -> tuple[float, float, float]:
    """Point estimate and Wilson score interval for k successes in n trials."""
    if n == 0:
        return 0.0, 0.0, 1.0
    p = k / n
    den = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return p, max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class RateEstimate:
    trials: int
    accepted: int
    corrupted: int

    @property
    def accept(self) -> tuple[float, float, float]:
        return wilson(self.accepted, self.trials)

    @property
    def corruption(self) -> tuple[float, float, float]:
        return wilson(self.corrupted, self.trials)

    @property
    def reject(self) -> tuple[float, float, float]:
        return wilson(self.trials - self.accepted, self.trials)

    def to_dict(self) -> dict:
        a, c = self.accept, self.corruption
        return {
            "trials": self.trials,
            "accept_rate": a[0], "accept_ci": [a[1], a[2]],
            "corruption_rate": c[0], "corruption_ci": [c[1], c[2]],
        }


def _correct_set(computation: Computation | None, majority: bool) -> set:
    if computation is None or not computation.readout:
        return {()}
    if majority:
        return {computation.correct_output()}
    return {k for k, p in computation.distribution().items() if p > 1e-9}


def _session_chunk(args) -> tuple[int, int]:
    scheme, computation, adversary, seed, start, stop, engine = args
    correct = _correct_set(computation, isinstance(scheme, CompiledScheme) and (scheme.majority or scheme.kind == "parallel"))
    acc = bad = 0
    cache: dict = {}
    for i in range(start, stop):
        if isinstance(scheme, CompiledScheme):
            r = run_protocol3(scheme, computation, adversary, seed, index=i, engine=engine)
            a, out = r.accepted, r.output
        else:
            rng = np.random.default_rng(trial_seed(seed, i))
            a, out, _ = _single_round(scheme, computation, adversary.draw(rng), rng, engine, cache)
        acc += a
        bad += a and out not in correct
    return acc, bad


def _vector_chunk(args) -> tuple[int, int]:
    cs, computation, adversary, seed, chunk, size = args
    a, c, _ = compiled_chunk(cs, computation, adversary, seed, chunk, size)
    return int(a.sum()), int(c.sum())


def _map(fn, jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, jobs))


def estimate_rates(
    scheme: TrappifiedScheme | CompiledScheme,
    computation: Computation | None,
    adversary: AdversaryStrategy,
    trials: int,
    seed: int,
    *,
    engine: str = "auto",
    jobs: int = 1,
) -> RateEstimate:
    """Accept and corruption-and-accept counts over independent sessions.

    engine "auto" picks the vectorised predicate engine for compiled schemes
    of predicate canvases, the predicate engine for single-round predicate
    schemes and blind sessions otherwise. Chunking is fixed by the trial
    count alone, so results do not depend on `jobs`.
    """
    if engine == "auto":
        base = scheme.base if isinstance(scheme, CompiledScheme) else scheme
        predicate = all(c.kind in ("standard", "general") for c in base.canvases)
        engine = "vector" if isinstance(scheme, CompiledScheme) and predicate else ("predicate" if predicate else "blind")
    if engine == "vector":
        if not isinstance(scheme, CompiledScheme):
            raise ValueError("vector engine is for compiled schemes")
        size = 10 * CHUNK
        parts = [(scheme, computation, adversary, seed, k, min(size, trials - k * size))
                 for k in range(math.ceil(trials / size))]
        res = _map(_vector_chunk, parts, jobs)
    else:
        parts = [(scheme, computation, adversary, seed, a, min(a + CHUNK, trials), engine)
                 for a in range(0, trials, CHUNK)]
        res = _map(_session_chunk, parts, jobs)
    return RateEstimate(trials, sum(r[0] for r in res), sum(r[1] for r in res))


# -- ideal world ----------------------------------------------------------------

@dataclass(frozen=True)
class IdealResource:
    """Secure delegated computation with a leak: outputs C[rho]/Acc, or bot/Rej on demand."""

    computation: Computation
    leak: dict

    def run(self, rng: np.random.Generator, e: int = 0, c: int = 0) -> tuple[tuple[int, ...] | None, bool]:
        if e == 1 and c == 1:
            return None, False
        keys, p = _as_sampler(self.computation.distribution())
        return keys[int(rng.choice(len(keys), p=p))], True


def empty_computation(computation: Computation) -> Computation:
    """A computation of the same class: same graph, flow and order, every angle 0, inputs |+>."""
    p = computation.pattern
    q = MeasurementPattern(p.graph, {v: 0 for v in p.angles}, p.flow, p.order, p.dummies)
    return Computation(q, computation.inputs.__class__({v: "+" for v in computation.inputs}), computation.readout)


@dataclass
class Simulator:
    """Runs the client's side with a placeholder computation and forwards the verdict as c."""

    scheme: TrappifiedScheme
    computation: Computation
    engine: str = "blind"
    placeholder: Computation | None = None

    def leak(self) -> dict:
        g = self.scheme.graph
        return {"graph": g.to_dict(), "scheme": self.scheme.to_dict(), "class": "classical-output"}

    def session(self, resource: IdealResource, adversary: AdversaryStrategy, rng: np.random.Generator,
                cache: dict | None = None) -> tuple[tuple[int, ...] | None, bool]:
        dummy = self.placeholder or empty_computation(self.computation)
        accepted, _, _ = _single_round(self.scheme, dummy, adversary.draw(rng), rng, self.engine, cache)
        return resource.run(rng, e=1, c=int(not accepted))


@dataclass(frozen=True)
class GameResult:
    trials: int
    accept_real: float
    accept_ideal: float
    advantage: float
    sigma: float

    def to_dict(self) -> dict:
        return {
            "trials": self.trials, "accept_real": self.accept_real, "accept_ideal": self.accept_ideal,
            "advantage": self.advantage, "sigma": self.sigma,
        }


def _joint(samples: list) -> dict:
    counts: dict = {}
    for x in samples:
        counts[x] = counts.get(x, 0) + 1
    return {k: v / len(samples) for k, v in counts.items()}


def distinguishing_game(
    scheme: TrappifiedScheme,
    computation: Computation,
    adversary: AdversaryStrategy,
    trials: int,
    seed: int,
    *,
    engine: str = "blind",
    placeholder: Computation | None = None,
) -> GameResult:
    """Empirical TV distance between real and simulated (output, verdict) distributions.

    The simulator drives the trap machinery with `placeholder` (by default
    the same pattern with every angle zeroed) and forwards its verdict to
    the ideal resource, which computes `computation` exactly.
    The advantage is the TV of the two empirical joint distributions; sigma
    is a conservative standard error summed over the observed cells.
    """
    real, ideal = [], []
    sim = Simulator(scheme, computation, engine, placeholder)
    resource = IdealResource(computation, sim.leak())
    rcache: dict = {}
    icache: dict = {}
    for i in range(trials):
        rng = np.random.default_rng(trial_seed(seed, 2 * i))
        acc, out, _ = _single_round(scheme, computation, adversary.draw(rng), rng, engine, rcache)
        real.append((out, acc))
        rng = np.random.default_rng(trial_seed(seed, 2 * i + 1))
        out, acc = sim.session(resource, adversary, rng, icache)
        ideal.append((out, acc))
    pr, pi = _joint(real), _joint(ideal)
    adv = total_variation(pr, pi)
    var = sum(pr.get(k, 0) * (1 - pr.get(k, 0)) / trials + pi.get(k, 0) * (1 - pi.get(k, 0)) / trials
              for k in set(pr) | set(pi))
    a_real = sum(1 for _, a in real if a) / trials
    a_ideal = sum(1 for _, a in ideal if a) / trials
    return GameResult(trials, a_real, a_ideal, adv, math.sqrt(var))
