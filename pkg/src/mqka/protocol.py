"""Multiparty key agreement over GHZ states with decoy channel checks.

Participants are numbered 0..N-1 (Alice = 0). GHZ state ``g`` is led by
participant ``g mod N``; every state carries one key bit. Alice prepares all
states in ``|0...0> + |1...1>`` and keeps qubit 0; qubit ``p`` travels to
participant ``p``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from functools import reduce
from typing import IO, Iterable, Sequence

import numpy as np

from .entangle import EncodingOp, prepare_ghz
from .qsim import Basis, QubitPool, single_qubit

DISTRIBUTE = "distribute"  # step 1: Alice -> everyone
RETURN = "return"  # step 4: followers -> leader

MESSAGE_KINDS = ("decoy-announce", "check-result", "abort", "outcome-publish")


class ProtocolAbort(Exception):
    pass


@dataclass(frozen=True)
class RoundConfig:
    n_participants: int
    key_bits: int
    decoys_per_sequence: int = 10
    sequence_len: int = 100
    error_threshold: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_participants < 2:
            raise ValueError("need at least two participants")
        if self.key_bits < 1:
            raise ValueError("key_bits must be positive")
        if self.sequence_len < 1:
            raise ValueError("sequence_len must be positive")
        if not 0 <= self.decoys_per_sequence <= self.sequence_len:
            raise ValueError("decoys_per_sequence must lie in [0, sequence_len]")
        if not 0.0 <= self.error_threshold <= 1.0:
            raise ValueError("error_threshold must lie in [0, 1]")

    def with_seed(self, seed: int) -> "RoundConfig":
        return RoundConfig(
            self.n_participants,
            self.key_bits,
            self.decoys_per_sequence,
            self.sequence_len,
            self.error_threshold,
            seed,
        )


@dataclass(frozen=True)
class SelfKey:
    owner: int
    bits: str

    def __post_init__(self):
        if set(self.bits) - {"0", "1"}:
            raise ValueError(f"self key must be a bitstring, got {self.bits!r}")


@dataclass(frozen=True)
class DecoySpec:
    position: int
    basis: Basis
    bit: int


@dataclass
class Message:
    seq: int
    sender: int
    kind: str
    payload: dict

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))


@dataclass
class RoundTranscript:
    messages: list[Message] = field(default_factory=list)

    def append(self, sender: int, kind: str, **payload) -> Message:
        if kind not in MESSAGE_KINDS:
            raise ValueError(f"unknown message kind {kind!r}")
        msg = Message(len(self.messages), sender, kind, payload)
        self.messages.append(msg)
        return msg

    def __iter__(self):
        return iter(self.messages)

    def __len__(self):
        return len(self.messages)

    def of_kind(self, kind: str) -> list[Message]:
        return [m for m in self.messages if m.kind == kind]

    def write_json_lines(self, fh: IO[str]) -> None:
        for m in self.messages:
            fh.write(m.to_json() + "\n")

    @classmethod
    def read_json_lines(cls, lines: Iterable[str]) -> "RoundTranscript":
        t = cls()
        for line in lines:
            if line.strip():
                d = json.loads(line)
                t.messages.append(Message(d["seq"], d["sender"], d["kind"], d["payload"]))
        return t


@dataclass
class ResourceCounts:
    transmissions: int = 0  # data-qubit hops, decoys excluded
    measurements: int = 0  # single-qubit readouts inside GHZ measurements
    decoy_qubits: int = 0
    delay_units: int = 0


@dataclass(frozen=True)
class CheckResult:
    chunk: int
    phase: str
    checked: int
    errors: int

    @property
    def rate(self) -> float:
        return channel_error_rate(self.errors, self.checked)


@dataclass(frozen=True)
class DecoyRecord:
    chunk: int
    phase: str
    basis: Basis
    mismatch: bool
    touched: bool


@dataclass
class AgreementResult:
    keys: list[str]
    aborted: bool = False
    abort_phase: str | None = None
    checks: list[CheckResult] = field(default_factory=list)
    labels: list[str] = field(default_factory=list)
    ops: list[tuple[EncodingOp, ...]] = field(default_factory=list)
    counts: ResourceCounts = field(default_factory=ResourceCounts)
    decoys: list[DecoyRecord] = field(default_factory=list)

    @property
    def agreed(self) -> bool:
        return not self.aborted and len(set(self.keys)) == 1

    def error_rates(self, phase: str | None = None) -> list[float]:
        return [c.rate for c in self.checks if phase is None or c.phase == phase]


@dataclass
class Transit:
    """One qubit in flight. Hooks may swap ``handle`` and set ``touched``."""

    phase: str
    chunk: int
    channel: int
    position: int
    sender: int
    receiver: int
    handle: int
    state_index: int | None  # None for decoys
    touched: bool = False

    @property
    def is_decoy(self) -> bool:
        return self.state_index is None


class ChannelHook:
    """No-op attack hook. Subclasses override what they need.

    The null hook never draws randomness, so a run with it is identical to a
    run without a hook.
    """

    def begin_run(self, config: RoundConfig, rng: np.random.Generator) -> None:
        pass

    def intercept(self, pool: QubitPool, transits: list[Transit]) -> None:
        """Called once per sequence position with every qubit in flight there."""

    def publish(
        self, state_index: int, leader: int, label: str, leader_op: EncodingOp, n: int
    ) -> tuple[str, EncodingOp]:
        """Return the label the leader publishes and the op the leader extracts with."""
        return label, leader_op

    def score(self, self_keys: Sequence[str], result: AgreementResult) -> tuple[int, int]:
        """(correct, total) inferences Eve made about key material."""
        return 0, 0


# --- encoding rules -------------------------------------------------------


def leader_for(index: int, n: int) -> int:
    return index % n


def leader_bit(op: EncodingOp, n: int) -> int:
    """Decode a leader op: odd N maps I,Y->0 and X,Z->1; even N maps I,X->0 and Y,Z->1."""
    op = EncodingOp(op)
    return op.x ^ op.z if n % 2 else op.z


def leader_ops_for(bit: int, n: int) -> tuple[EncodingOp, EncodingOp]:
    E = EncodingOp
    if n % 2:
        return (E.I, E.Y) if bit == 0 else (E.X, E.Z)
    return (E.I, E.X) if bit == 0 else (E.Y, E.Z)


def leader_op_for_bit(bit: int, n: int, rng: np.random.Generator) -> EncodingOp:
    pair = leader_ops_for(bit, n)
    return pair[int(rng.integers(2))]


def follower_op_for_bit(bit: int) -> EncodingOp:
    return EncodingOp.X if bit else EncodingOp.I


def _pattern(outcome: str) -> list[int]:
    # position 0 carries the sign bit, so its pattern entry is 0 by construction
    return [0] + [int(b) for b in outcome[1:]]


def _check_outcome(outcome: str, n: int) -> None:
    if len(outcome) != n or set(outcome) - {"0", "1"}:
        raise ValueError(f"outcome {outcome!r} is not an {n}-bit GHZ label")


def extract_key_leader(
    outcome: str, leader_op: EncodingOp, leader_pos: int, n: int
) -> tuple[tuple[EncodingOp, ...], int]:
    """Recover follower ops and the key bit from the leader's side.

    Follower ops are returned in participant order with the leader skipped.
    """
    _check_outcome(outcome, n)
    leader_op = EncodingOp(leader_op)
    p = _pattern(outcome)
    flipped = p[leader_pos] ^ leader_op.x
    followers = tuple(
        follower_op_for_bit(p[m] ^ flipped) for m in range(n) if m != leader_pos
    )
    key = reduce(lambda a, b: a ^ b, (op.x for op in followers), leader_bit(leader_op, n))
    return followers, key


def extract_key_follower(
    outcome: str, own_op: EncodingOp, own_pos: int, leader_pos: int, n: int
) -> tuple[EncodingOp, tuple[EncodingOp, ...], int]:
    """Recover the leader's op, every follower op and the key bit from a follower."""
    _check_outcome(outcome, n)
    own_op = EncodingOp(own_op)
    if own_op.z:
        raise ValueError(f"a follower encodes with I or X only, got {own_op.value}")
    if own_pos == leader_pos:
        raise ValueError("own_pos is the leader's position")
    p = _pattern(outcome)
    flipped = p[own_pos] ^ own_op.x
    leader_op = EncodingOp.from_components(p[leader_pos] ^ flipped, int(outcome[0]))
    followers = tuple(
        follower_op_for_bit(p[m] ^ flipped) for m in range(n) if m != leader_pos
    )
    key = reduce(lambda a, b: a ^ b, (op.x for op in followers), leader_bit(leader_op, n))
    return leader_op, followers, key


def final_key_oracle(keys: Sequence[SelfKey | str]) -> str:
    bits = [k.bits if isinstance(k, SelfKey) else k for k in keys]
    if not bits or len({len(b) for b in bits}) != 1:
        raise ValueError("self keys must be non-empty and of equal length")
    return "".join(str(sum(int(b[i]) for b in bits) % 2) for i in range(len(bits[0])))


# --- channel checking -----------------------------------------------------


def insert_decoys(seq_len: int, count: int, rng: np.random.Generator) -> list[DecoySpec]:
    """Random decoy slots in a sequence of ``seq_len`` data qubits plus ``count`` decoys."""
    if count == 0:
        return []
    positions = np.sort(rng.choice(seq_len + count, size=count, replace=False))
    bases = rng.integers(2, size=count)
    bits = rng.integers(2, size=count)
    return [
        DecoySpec(int(pos), Basis.X if b else Basis.Z, int(v))
        for pos, b, v in zip(positions, bases, bits)
    ]


def channel_error_rate(errors: int, checked: int) -> float:
    return errors / checked if checked else 0.0


def channel_check(specs: Sequence[DecoySpec], measured_bits: Sequence[int]) -> float:
    if len(specs) != len(measured_bits):
        raise ValueError("one measured bit per decoy is required")
    errors = sum(int(s.bit != int(b)) for s, b in zip(specs, measured_bits))
    return channel_error_rate(errors, len(specs))


def interleave(data: Sequence, specs: Sequence[DecoySpec]) -> list:
    """Lay out a transmitted sequence: DecoySpec at decoy slots, data items elsewhere."""
    slots: list = [None] * (len(data) + len(specs))
    for s in specs:
        slots[s.position] = s
    items = iter(data)
    return [s if s is not None else next(items) for s in slots]


# --- the run --------------------------------------------------------------


def random_self_keys(n: int, key_bits: int, rng: np.random.Generator) -> list[SelfKey]:
    bits = rng.integers(2, size=(n, key_bits))
    return [SelfKey(p, "".join(map(str, row))) for p, row in enumerate(bits)]


def _spawn(seed: int, k: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(k)]


@dataclass
class _Decoy:
    spec: DecoySpec
    sender: int
    receiver: int


class _Run:
    def __init__(self, config: RoundConfig, self_keys: Sequence[SelfKey], hook: ChannelHook):
        self.cfg = config
        self.n = config.n_participants
        self.keys = [k.bits for k in self_keys]
        self.hook = hook
        self.rng, pool_rng, eve_rng = _spawn(config.seed, 3)
        self.pool = QubitPool(pool_rng)
        self.transcript = RoundTranscript()
        self.result = AgreementResult(keys=[""] * self.n)
        hook.begin_run(config, eve_rng)

    # A receiver measures a qubit as soon as nothing else will act on it.
    # Operations on disjoint qubits commute, so outcome statistics are the
    # same as measuring everything after the announcements.

    def _send(self, chunk: int, phase: str, sequences: list[list], on_data) -> list[list[int]]:
        """Transmit sequences position by position; returns decoy readouts per sequence."""
        readouts: list[list[int]] = [[] for _ in sequences]
        length = len(sequences[0]) if sequences else 0
        for pos in range(length):
            transits = []
            for ch, seq in enumerate(sequences):
                item = seq[pos]
                if isinstance(item, _Decoy):
                    (h,) = self.pool.add(single_qubit(item.spec.basis, item.spec.bit))
                    transits.append(
                        Transit(phase, chunk, ch, pos, item.sender, item.receiver, h, None)
                    )
                    self.result.counts.decoy_qubits += 1
                else:
                    sender, receiver, g, h = item
                    transits.append(Transit(phase, chunk, ch, pos, sender, receiver, h, g))
                    self.result.counts.transmissions += 1
            self.hook.intercept(self.pool, transits)
            for t in transits:
                item = sequences[t.channel][pos]
                if t.is_decoy:
                    bit = self.pool.measure(t.handle, item.spec.basis)
                    readouts[t.channel].append(bit)
                    self.result.decoys.append(
                        DecoyRecord(chunk, phase, item.spec.basis, bit != item.spec.bit, t.touched)
                    )
                else:
                    on_data(t)
        return readouts

    def _check(self, chunk: int, phase: str, sequences: list[list], readouts) -> None:
        checked = errors = 0
        for ch, (seq, bits) in enumerate(zip(sequences, readouts)):
            decoys = [d for d in seq if isinstance(d, _Decoy)]
            if not decoys:
                continue
            self.transcript.append(
                decoys[0].sender,
                "decoy-announce",
                chunk=chunk,
                phase=phase,
                channel=ch,
                positions=[d.spec.position for d in decoys],
                bases=[d.spec.basis.value for d in decoys],
                senders=[d.sender for d in decoys],
            )
            self.transcript.append(
                decoys[0].receiver,
                "check-result",
                chunk=chunk,
                phase=phase,
                channel=ch,
                bits=list(bits),
            )
            checked += len(decoys)
            errors += sum(int(d.spec.bit != b) for d, b in zip(decoys, bits))
        result = CheckResult(chunk, phase, checked, errors)
        self.result.checks.append(result)
        if result.rate > self.cfg.error_threshold:
            self.transcript.append(
                0, "abort", chunk=chunk, phase=phase, error_rate=result.rate
            )
            self.result.aborted = True
            self.result.abort_phase = phase
            raise ProtocolAbort(phase)

    def _decoy_layout(self, data: list, owner_of) -> list:
        specs = insert_decoys(len(data), self.cfg.decoys_per_sequence, self.rng)
        seq = interleave(data, specs)
        # a decoy is prepared by the sender of the next data qubit in the sequence
        out, nxt = [], None
        for item in reversed(seq):
            if isinstance(item, DecoySpec):
                sender, receiver = owner_of(nxt if nxt is not None else data[-1])
                out.append(_Decoy(item, sender, receiver))
            else:
                nxt = item
                out.append(item)
        return out[::-1]

    def run_chunk(self, chunk: int, states: range) -> None:
        n, pool = self.n, self.pool
        held: dict[tuple[int, int], int] = {}  # (participant, state) -> handle

        # step 1: Alice prepares and distributes
        for g in states:
            for p, h in enumerate(pool.add(prepare_ghz(n, "0" * n))):
                held[(p, g)] = h
        outgoing = [
            self._decoy_layout([(0, j, g, held[(j, g)]) for g in states], lambda it: it[:2])
            for j in range(1, n)
        ]

        def arrive(t: Transit) -> None:
            held[(t.receiver, t.state_index)] = t.handle

        readouts = self._send(chunk, DISTRIBUTE, outgoing, arrive)
        # step 2
        self._check(chunk, DISTRIBUTE, outgoing, readouts)

        # step 3: encoding
        ops: dict[int, list[EncodingOp]] = {}
        for g in states:
            lead = leader_for(g, n)
            row = []
            for p in range(n):
                bit = int(self.keys[p][g])
                op = leader_op_for_bit(bit, n, self.rng) if p == lead else follower_op_for_bit(bit)
                if op is not EncodingOp.I:
                    pool.gate(held[(p, g)], op.value)
                row.append(op)
            ops[g] = row

        # step 4: return sequence r carries the r-th follower's qubit of every state
        returns = []
        for r in range(n - 1):
            data = []
            for g in states:
                lead = leader_for(g, n)
                sender = [p for p in range(n) if p != lead][r]
                data.append((sender, lead, g, held[(sender, g)]))
            returns.append(self._decoy_layout(data, lambda it: it[:2]))

        pending = {g: n - 1 for g in states}
        labels: dict[int, str] = {}

        def deliver(t: Transit) -> None:
            g = t.state_index
            held[(t.sender, g)] = t.handle
            pending[g] -= 1
            if pending[g] == 0:
                labels[g] = self._ghz_measure([held[(p, g)] for p in range(n)])

        readouts = self._send(chunk, RETURN, returns, deliver)
        self._check(chunk, RETURN, returns, readouts)

        # step 5: publication and extraction
        for g in states:
            lead = leader_for(g, n)
            self.result.counts.measurements += n
            self.result.counts.delay_units += 2  # two synchronized hops per key bit
            label, claimed = self.hook.publish(g, lead, labels[g], ops[g][lead], n)
            followers = [p for p in range(n) if p != lead]
            self.transcript.append(
                lead, "outcome-publish", chunk=chunk, state=g, label=label, routed_from=followers
            )
            self.result.labels.append(label)
            self.result.ops.append(tuple(ops[g]))
            for p in range(n):
                if p == lead:
                    _, bit = extract_key_leader(label, claimed, lead, n)
                else:
                    _, _, bit = extract_key_follower(label, ops[g][p], p, lead, n)
                self.result.keys[p] += str(bit)

    def _ghz_measure(self, handles: list[int]) -> str:
        head = handles[0]
        for h in handles[1:]:
            self.pool.cnot(head, h)
        self.pool.gate(head, "H")
        return "".join(str(self.pool.measure(h)) for h in handles)

    def run(self) -> tuple[AgreementResult, RoundTranscript]:
        size = self.cfg.sequence_len
        total = self.cfg.key_bits
        try:
            for chunk, start in enumerate(range(0, total, size)):
                self.run_chunk(chunk, range(start, min(start + size, total)))
        except ProtocolAbort:
            pass
        return self.result, self.transcript


def run_agreement(
    config: RoundConfig,
    self_keys: Sequence[SelfKey | str],
    adversary: ChannelHook | None = None,
) -> tuple[AgreementResult, RoundTranscript]:
    keys = [k if isinstance(k, SelfKey) else SelfKey(i, k) for i, k in enumerate(self_keys)]
    if len(keys) != config.n_participants:
        raise ValueError(f"expected {config.n_participants} self keys, got {len(keys)}")
    if any(len(k.bits) != config.key_bits for k in keys):
        raise ValueError(f"every self key must have {config.key_bits} bits")
    return _Run(config, keys, adversary or ChannelHook()).run()


def num_sequences(key_bits: int, sequence_len: int) -> int:
    return math.ceil(key_bits / sequence_len)
