"""Blind delegated MBQC as two message-driven machines over an in-process channel.

The client hides angles with random theta, flips inputs with X^a and
outcomes with r. The server sees only the graph, the measurement order,
the encrypted register and the instructed angles delta.

Deviations act on the server side just before each computational-basis
readout (after the rotation and H), and on output qubits just before
they are returned. In that frame X and Y flip the reported bit, Z does
nothing, which is the frame the trap predicates are stated in.
"""

from __future__ import annotations

import itertools
import json
import struct
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ProtocolOrderViolation, UnknownVertex
from .mbqc import MeasurementPattern, corrected_angle
from .pauli import Pauli
from .states import PAULI_MATS, STATEVECTOR_CAP, ProductState, QuantumState, StateVector, z_rot


# -- secrets ------------------------------------------------------------------

@dataclass(frozen=True)
class ClientSecrets:
    theta: dict[int, int]
    a: dict[int, int]
    r: dict[int, int]

    @staticmethod
    def a_n(pattern: MeasurementPattern, a: Mapping[int, int], v: int) -> int:
        return sum(a.get(u, 0) for u in pattern.graph.neighbours(v)) & 1

    @classmethod
    def build(
        cls,
        pattern: MeasurementPattern,
        theta: Mapping[int, int],
        a: Mapping[int, int] | None = None,
        r: Mapping[int, int] | None = None,
    ) -> "ClientSecrets":
        """Fill in defaults and derive output thetas as (r + a_N) pi."""
        g = pattern.graph
        a_full = {v: (int((a or {}).get(v, 0)) if v in g.inputs else 0) for v in g.vertices}
        r_full = {v: int((r or {}).get(v, 0)) & 1 for v in g.vertices}
        th = {}
        for v in g.vertices:
            if v in g.outputs:
                th[v] = 4 * ((r_full[v] + cls.a_n(pattern, a_full, v)) & 1)
            else:
                th[v] = int(theta.get(v, 0)) % 8
        return cls(th, a_full, r_full)

    @classmethod
    def sample(cls, pattern: MeasurementPattern, rng: np.random.Generator) -> "ClientSecrets":
        vs = pattern.graph.vertices
        theta = {v: int(rng.integers(8)) for v in vs}
        a = {v: int(rng.integers(2)) for v in vs}
        r = {v: int(rng.integers(2)) for v in vs}
        return cls.build(pattern, theta, a, r)


# -- messages -----------------------------------------------------------------

@dataclass(frozen=True)
class GraphMessage:
    graph_json: str
    sequence: tuple[int, ...]


@dataclass(frozen=True)
class Ready:
    pass


@dataclass(frozen=True)
class QubitsMessage:
    state: QuantumState


@dataclass(frozen=True)
class MeasureRequest:
    vertex: int
    delta: int


@dataclass(frozen=True)
class MeasureResult:
    vertex: int
    bit: int


@dataclass(frozen=True)
class OutputRequest:
    pass


@dataclass(frozen=True)
class OutputMessage:
    state: QuantumState


Message = GraphMessage | Ready | QubitsMessage | MeasureRequest | MeasureResult | OutputRequest | OutputMessage

_TAGS: dict[type, int] = {
    GraphMessage: 1, Ready: 2, QubitsMessage: 3, MeasureRequest: 4,
    MeasureResult: 5, OutputRequest: 6, OutputMessage: 7,
}
_TYPES = {v: k for k, v in _TAGS.items()}


def encode(msg: Message) -> bytes:
    """Length-prefixed frame: u32 length, u8 tag, payload."""
    tag = _TAGS[type(msg)]
    if isinstance(msg, GraphMessage):
        body = json.dumps({"graph": json.loads(msg.graph_json), "sequence": list(msg.sequence)}).encode()
    elif isinstance(msg, (QubitsMessage, OutputMessage)):
        labels = msg.state.labels
        body = struct.pack(f"<I{len(labels)}q", len(labels), *labels) + msg.state.amplitudes.astype("<c16").tobytes()
    elif isinstance(msg, MeasureRequest):
        body = struct.pack("<qB", msg.vertex, msg.delta)
    elif isinstance(msg, MeasureResult):
        body = struct.pack("<qB", msg.vertex, msg.bit)
    else:
        body = b""
    return struct.pack("<IB", len(body) + 1, tag) + body


def decode(frame: bytes) -> Message:
    length, tag = struct.unpack_from("<IB", frame)
    body = frame[5:4 + length]
    if len(body) != length - 1:
        raise ValueError("truncated frame")
    cls = _TYPES[tag]
    if cls is GraphMessage:
        d = json.loads(body)
        return GraphMessage(json.dumps(d["graph"]), tuple(d["sequence"]))
    if cls in (QubitsMessage, OutputMessage):
        (k,) = struct.unpack_from("<I", body)
        labels = list(struct.unpack_from(f"<{k}q", body, 4))
        amps = np.frombuffer(body[4 + 8 * k:], dtype="<c16").copy()
        return cls(QuantumState(amps, labels))
    if cls is MeasureRequest:
        v, d = struct.unpack("<qB", body)
        return MeasureRequest(v, d)
    if cls is MeasureResult:
        v, b = struct.unpack("<qB", body)
        return MeasureResult(v, b)
    return cls()


# -- transcript ---------------------------------------------------------------

@dataclass(frozen=True)
class TranscriptEntry:
    vertex: int
    delta: int
    outcome: int


@dataclass
class Transcript:
    header: dict
    entries: list[TranscriptEntry] = field(default_factory=list)

    def to_jsonl(self) -> str:
        lines = [json.dumps(self.header, sort_keys=True)]
        lines += [json.dumps({"vertex": e.vertex, "delta": e.delta, "outcome": e.outcome}) for e in self.entries]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "Transcript":
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        return cls(rows[0], [TranscriptEntry(r["vertex"], r["delta"], r["outcome"]) for r in rows[1:]])


# -- machines -----------------------------------------------------------------

def _xz(state: StateVector, v: int, x: int, z: int) -> None:
    if x:
        state.apply(v, PAULI_MATS["X"])
    if z:
        state.apply(v, PAULI_MATS["Z"])


class BlindClient:
    """Client side of the blind protocol.

    Args:
        pattern: the computation, including any fixed preparations in inp.
        inp: states for the input vertices (product or dense).
        secrets: theta, a, r.
    """

    def __init__(self, pattern: MeasurementPattern, inp: ProductState | QuantumState | None, secrets: ClientSecrets):
        self.pattern = pattern
        self.inp = inp
        self.secrets = secrets
        self.sequence = pattern.measurement_sequence()
        self.outputs = [v for v in pattern.graph.vertices if v in pattern.graph.outputs]
        self.s: dict[int, int] = {}
        self.transcript: list[TranscriptEntry] = []
        self.output_state: QuantumState | None = None
        self.done = False
        self._phase = "start"
        self._pos = 0
        self._pending: MeasureRequest | None = None

    def start(self) -> GraphMessage:
        if self._phase != "start":
            raise ProtocolOrderViolation("session already started")
        self._phase = "graph-sent"
        return GraphMessage(self.pattern.graph.to_json(), tuple(self.sequence))

    def delta(self, i: int) -> int:
        p, sec = self.pattern, self.secrets
        sx = sum(self.s[j] for j in p.x_deps(i)) & 1
        sz = sum(self.s[j] for j in p.z_deps(i)) & 1
        phi = corrected_angle(p.angles[i], sx, sz)
        signed = -phi if sec.a[i] else phi
        return (signed + sec.theta[i] + 4 * (sec.r[i] + ClientSecrets.a_n(p, sec.a, i))) % 8

    def encrypted_register(self) -> QuantumState:
        g, sec = self.pattern.graph, self.secrets
        sv = StateVector(cap=max(STATEVECTOR_CAP, len(g)))
        fixed: set[int] = set()
        if isinstance(self.inp, QuantumState):
            sv.add_state(self.inp)
            fixed = set(self.inp.labels)
        elif isinstance(self.inp, ProductState):
            for v in g.vertices:
                if v in self.inp:
                    sv.add(v, ProductState({v: self.inp[v]}).to_state().amplitudes)
                    fixed.add(v)
        for v in g.vertices:
            if v not in fixed:
                sv.add(v, ProductState({v: "+"}).to_state().amplitudes)
        for v in g.vertices:
            # Z(theta) X^a, with a = 0 off the inputs
            if sec.a[v]:
                sv.apply(v, PAULI_MATS["X"])
            if sec.theta[v]:
                sv.apply(v, z_rot(sec.theta[v]))
        return sv.state(list(g.vertices))

    def _next_request(self) -> Message | None:
        if self._pos < len(self.sequence):
            i = self.sequence[self._pos]
            self._pending = MeasureRequest(i, self.delta(i))
            self._phase = "measuring"
            return self._pending
        if self.outputs:
            self._phase = "awaiting-output"
            return OutputRequest()
        self._phase = "done"
        self.done = True
        return None

    def step(self, msg: Message) -> Message | None:
        if self._phase == "graph-sent" and isinstance(msg, Ready):
            self._phase = "qubits-sent"
            return QubitsMessage(self.encrypted_register())
        if self._phase == "qubits-sent" and isinstance(msg, Ready):
            return self._next_request()
        if self._phase == "measuring" and isinstance(msg, MeasureResult):
            assert self._pending is not None
            if msg.vertex != self._pending.vertex:
                raise UnknownVertex(f"result for {msg.vertex}, expected {self._pending.vertex}")
            i = msg.vertex
            self.s[i] = (msg.bit ^ self.secrets.r[i]) & 1
            self.transcript.append(TranscriptEntry(i, self._pending.delta, msg.bit))
            self._pos += 1
            return self._next_request()
        if self._phase == "awaiting-output" and isinstance(msg, OutputMessage):
            self.output_state = self._decrypt(msg.state)
            self._phase = "done"
            self.done = True
            return None
        raise ProtocolOrderViolation(f"client in phase {self._phase!r} got {type(msg).__name__}")

    def _decrypt(self, state: QuantumState) -> QuantumState:
        p, sec = self.pattern, self.secrets
        sv = StateVector(cap=max(STATEVECTOR_CAP, len(state.labels)))
        sv.add_state(state)
        for o in self.outputs:
            sx = (sum(self.s[j] for j in p.x_deps(o)) + sec.a[o]) & 1
            sz = (sum(self.s[j] for j in p.z_deps(o)) + sec.r[o]) & 1
            _xz(sv, o, sx, sz)
        return sv.state(self.outputs)


class BlindServer:
    """Honest server, optionally with a Pauli deviation and forced raw outcomes."""

    def __init__(
        self,
        deviation: Pauli | None = None,
        rng: np.random.Generator | None = None,
        forced: Mapping[int, int] | None = None,
        cap: int = STATEVECTOR_CAP,
    ):
        self.deviation = deviation or Pauli()
        self.rng = rng
        self.forced = dict(forced or {})
        self.cap = cap
        self.graph = None
        self.sv: StateVector | None = None
        self.measured: set[int] = set()
        self._phase = "idle"

    def step(self, msg: Message) -> Message:
        from .graph import OpenGraph

        if self._phase == "idle" and isinstance(msg, GraphMessage):
            self.graph = OpenGraph.from_json(msg.graph_json)
            self._phase = "awaiting-qubits"
            return Ready()
        if self._phase == "awaiting-qubits" and isinstance(msg, QubitsMessage):
            self.sv = StateVector(self.cap)
            self.sv.add_state(msg.state)
            for u, v in sorted(self.graph.edges):
                self.sv.cz(u, v)
            self._phase = "measuring"
            return Ready()
        if self._phase == "measuring" and isinstance(msg, MeasureRequest):
            v = msg.vertex
            if v not in self.graph.index or v in self.graph.outputs:
                raise UnknownVertex(f"cannot measure vertex {v}")
            if v in self.measured:
                raise ProtocolOrderViolation(f"vertex {v} measured twice")
            bit, _ = self.sv.measure(v, msg.delta, self.rng, self.forced.get(v), self.deviation[v])
            self.measured.add(v)
            return MeasureResult(v, bit)
        if self._phase == "measuring" and isinstance(msg, OutputRequest):
            outs = [v for v in self.graph.vertices if v in self.graph.outputs]
            for o in outs:
                self.sv.apply_pauli(o, self.deviation[o])
            self._phase = "done"
            return OutputMessage(self.sv.state(outs))
        raise ProtocolOrderViolation(f"server in phase {self._phase!r} got {type(msg).__name__}")


def client_step(client: BlindClient, msg: Message | None) -> tuple[BlindClient, Message | None]:
    return client, (client.start() if msg is None else client.step(msg))


def server_step(server: BlindServer, msg: Message) -> tuple[BlindServer, Message]:
    return server, server.step(msg)


@dataclass
class BlindOutput:
    outcomes: dict[int, int]
    state: QuantumState | None
    secrets: ClientSecrets


def run_blind_session(
    pattern: MeasurementPattern,
    inp: ProductState | QuantumState | None,
    deviation: Pauli | None = None,
    seed: int | np.random.SeedSequence | None = None,
    *,
    secrets: ClientSecrets | None = None,
    forced: Mapping[int, int] | None = None,
    codec: bool = False,
    leak: Mapping | None = None,
) -> tuple[BlindOutput, Transcript]:
    """Run one session to completion; outcomes are decrypted, s = b xor r."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    c_ss, s_ss = ss.spawn(2)
    if secrets is None:
        secrets = ClientSecrets.sample(pattern, np.random.default_rng(c_ss))
    client = BlindClient(pattern, inp, secrets)
    server = BlindServer(deviation, np.random.default_rng(s_ss), forced, cap=max(STATEVECTOR_CAP, 0))

    def wire(m: Message) -> Message:
        return decode(encode(m)) if codec else m

    msg: Message | None = wire(client.start())
    while msg is not None:
        reply = wire(server.step(msg))
        msg = client.step(reply)
        if msg is not None:
            msg = wire(msg)
    header = {
        "seed": seed if isinstance(seed, int) else None,
        "deviation": (deviation or Pauli()).to_dict(),
        "leak": dict(leak) if leak else {"graph": pattern.graph.to_dict(), "order": list(client.sequence)},
    }
    return BlindOutput(dict(client.s), client.output_state, secrets), Transcript(header, client.transcript)


# -- twirl --------------------------------------------------------------------

def _pauli_matrix(word: str | Pauli, n: int) -> np.ndarray:
    letters = word if isinstance(word, str) else "".join(word[i] for i in range(n))
    if len(letters) != n:
        raise ValueError("Pauli word length does not match qubit count")
    m = np.ones((1, 1), dtype=complex)
    for ch in letters:
        m = np.kron(m, PAULI_MATS[ch])
    return m


def twirl_sum(rho: np.ndarray, q: str | Pauli, q2: str | Pauli) -> np.ndarray:
    """Sum over the n-qubit Pauli group of P^dag Q P rho P^dag Q'^dag P."""
    n = int(np.log2(rho.shape[0]))
    Q, Q2 = _pauli_matrix(q, n), _pauli_matrix(q2, n)
    total = np.zeros_like(rho, dtype=complex)
    for word in itertools.product("IXYZ", repeat=n):
        P = _pauli_matrix("".join(word), n)
        Pd = P.conj().T
        total += Pd @ Q @ P @ rho @ Pd @ Q2.conj().T @ P
    return total


def twirl_check(rho: np.ndarray | QuantumState, q: str | Pauli, q2: str | Pauli) -> float:
    """Largest absolute entry of the twirled cross term; ~0 whenever Q != Q'."""
    if isinstance(rho, QuantumState):
        rho = rho.density()
    return float(np.max(np.abs(twirl_sum(np.asarray(rho, dtype=complex), q, q2))))
