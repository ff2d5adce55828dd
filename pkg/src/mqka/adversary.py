"""External and internal attacks as channel hooks, plus a Monte Carlo harness."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from typing import Callable, Sequence

import numpy as np

from .entangle import BellLabel, EncodingOp, label_after_ops, prepare_bell, prepare_ghz
from .protocol import (
    RETURN,
    DISTRIBUTE,
    AgreementResult,
    ChannelHook,
    RoundConfig,
    Transit,
    extract_key_leader,
    leader_for,
    leader_ops_for,
    random_self_keys,
    run_agreement,
)
from .qsim import (
    Basis,
    QubitPool,
    StateVector,
    apply_cnot,
    apply_gate1,
    new_basis_state,
    single_qubit,
    tensor,
)

Z95 = 1.959963984540054


def _random_basis(rng: np.random.Generator) -> Basis:
    return Basis.X if rng.integers(2) else Basis.Z


class InterceptResend(ChannelHook):
    """Eve measures every follower-to-leader qubit in a random basis and resends it."""

    def begin_run(self, config, rng):
        self.rng = rng
        self.guesses: list[tuple[int, int, int]] = []  # (state, sender, bit)

    def intercept(self, pool, transits):
        for t in transits:
            if t.phase != RETURN:
                continue
            basis = _random_basis(self.rng)
            bit = pool.measure(t.handle, basis)
            (t.handle,) = pool.add(single_qubit(basis, bit))
            t.touched = True
            if not t.is_decoy:
                self.guesses.append((t.state_index, t.sender, bit))

    def score(self, self_keys, result):
        correct = sum(int(self_keys[p][g]) == b for g, p, b in self.guesses)
        return correct, len(self.guesses)


class CnotAttack(ChannelHook):
    """Eve entangles a fresh |0> ancilla with every qubit at one sequence offset.

    She reads the ancilla as the parity of the followers' bit flips for the state
    she believes sits at that offset. Decoys at that offset get entangled too.
    """

    def begin_run(self, config, rng):
        self.n = config.n_participants
        self.size = config.sequence_len
        self.guesses: list[tuple[int, int]] = []  # (state, parity)

    def intercept(self, pool, transits):
        if not transits or transits[0].phase != RETURN:
            return
        (anc,) = pool.add(new_basis_state(1))
        for t in transits:
            pool.cnot(t.handle, anc)
            t.touched = True
        parity = pool.measure(anc)
        t0 = transits[0]
        self.guesses.append((t0.chunk * self.size + t0.position, parity))

    def score(self, self_keys, result):
        n = self.n
        correct = total = 0
        for g, parity in self.guesses:
            if g >= len(self_keys[0]):
                continue
            lead = leader_for(g, n)
            truth = sum(int(self_keys[p][g]) for p in range(n) if p != lead) % 2
            correct += int(truth == parity)
            total += 1
        return correct, total


class FakeParticipant(ChannelHook):
    """Eve impersonates Alice towards ``victim`` using halves of Bell pairs.

    Every qubit Alice sends the victim for a round the victim follows is swapped
    for Eve's Bell half; decoys look identical to data and are swapped too. On the
    way back Eve Bell-measures the victim's encoded qubit against her retained
    half, re-applies the bit she read to Alice's original qubit and forwards that.
    A returning decoy has no partner half, so her readout collapses it in a guessed
    basis and she resends what she saw.
    """

    def __init__(self, victim: int = 1):
        if victim < 1:
            raise ValueError("the victim must be a participant other than Alice")
        self.victim = victim

    def begin_run(self, config, rng):
        if self.victim >= config.n_participants:
            raise ValueError(f"victim {self.victim} not among {config.n_participants} participants")
        self.n = config.n_participants
        self.rng = rng
        self.originals: dict[int, int] = {}
        self.kept: dict[int, int] = {}
        self.guesses: list[tuple[int, int]] = []

    def intercept(self, pool, transits):
        for t in transits:
            if t.phase == DISTRIBUTE and t.receiver == self.victim:
                if not t.is_decoy and leader_for(t.state_index, self.n) == self.victim:
                    continue
                e, e_prime = pool.add(prepare_bell(BellLabel.PHI_PLUS))
                if not t.is_decoy:
                    self.originals[t.state_index] = t.handle
                    self.kept[t.state_index] = e
                t.handle = e_prime
                t.touched = True
            elif t.phase == RETURN and t.sender == self.victim:
                t.touched = True
                if t.is_decoy:
                    basis = _random_basis(self.rng)
                    bit = pool.measure(t.handle, basis)
                    (t.handle,) = pool.add(single_qubit(basis, bit))
                    continue
                g = t.state_index
                e = self.kept.pop(g)
                pool.cnot(e, t.handle)
                pool.gate(e, "H")
                pool.measure(e)
                bit = pool.measure(t.handle)
                self.guesses.append((g, bit))
                original = self.originals.pop(g)
                if bit:
                    pool.gate(original, "X")
                t.handle = original

    def score(self, self_keys, result):
        correct = sum(int(self_keys[self.victim][g]) == b for g, b in self.guesses)
        return correct, len(self.guesses)


def forged_label(
    honest_label: str, leader_op: EncodingOp, leader_pos: int, n: int, desired_bit: int
) -> tuple[str, EncodingOp]:
    """Label a leader publishes to force ``desired_bit``, and the op it pretends to have used.

    The leader decodes the followers honestly, then picks the first op of the
    pair encoding ``desired_bit XOR followers`` and publishes the label that op
    would have produced from the all-zero state.
    """
    followers, _ = extract_key_leader(honest_label, leader_op, leader_pos, n)
    parity = sum(op.x for op in followers) % 2
    claimed = leader_ops_for(desired_bit ^ parity, n)[0]
    ops = list(followers)
    ops.insert(leader_pos, claimed)
    return label_after_ops("0" * n, ops, leader_pos), claimed


class LeaderForge(ChannelHook):
    """Participant ``attacker`` forces every key bit of the rounds she leads."""

    def __init__(self, desired_bit: int = 1, attacker: int = 0):
        self.desired_bit = int(desired_bit)
        self.attacker = attacker

    def begin_run(self, config, rng):
        self.forged: list[int] = []

    def publish(self, state_index, leader, label, leader_op, n):
        if leader != self.attacker:
            return label, leader_op
        self.forged.append(state_index)
        return forged_label(label, leader_op, leader, n, self.desired_bit)

    def score(self, self_keys, result):
        if result.aborted:
            return 0, 0
        ok = sum(
            all(k[g] == str(self.desired_bit) for k in result.keys) for g in self.forged
        )
        return ok, len(self.forged)


def controlled_positions(key_bits: int, n: int, participant: int = 0) -> int:
    """Key positions a participant leads under the round-robin schedule."""
    return len(range(participant, key_bits, n))


ATTACKS: dict[str, Callable[..., ChannelHook]] = {
    "none": ChannelHook,
    "intercept-resend": InterceptResend,
    "cnot": CnotAttack,
    "fake-participant": FakeParticipant,
    "leader-forge": LeaderForge,
}


def make_attack(kind: str, **kwargs) -> ChannelHook:
    try:
        factory = ATTACKS[kind]
    except KeyError:
        raise ValueError(f"unknown attack {kind!r}; choose from {sorted(ATTACKS)}") from None
    return factory(**kwargs)


@dataclass
class DecoyTally:
    checked: int = 0
    errors: int = 0

    @property
    def rate(self) -> float:
        return self.errors / self.checked if self.checked else 0.0


def half_width(rate: float, trials: int) -> float:
    """95% normal-approximation confidence half-width."""
    return Z95 * math.sqrt(rate * (1.0 - rate) / trials) if trials else 0.0


@dataclass
class AttackReport:
    attack: str
    trials: int
    detections: int
    eve_correct: int = 0
    eve_total: int = 0
    touched: DecoyTally = field(default_factory=DecoyTally)
    by_phase: dict[str, DecoyTally] = field(default_factory=dict)
    by_basis: dict[str, DecoyTally] = field(default_factory=dict)

    @property
    def detection_rate(self) -> float:
        """Fraction of runs that aborted."""
        return self.detections / self.trials

    @property
    def half_width(self) -> float:
        return half_width(self.detection_rate, self.trials)

    @property
    def per_decoy_rate(self) -> float:
        """Mismatch rate over decoys Eve touched."""
        return self.touched.rate

    @property
    def per_decoy_half_width(self) -> float:
        return half_width(self.per_decoy_rate, self.touched.checked)

    @property
    def eve_info_bits(self) -> float:
        return self.eve_correct / self.eve_total if self.eve_total else 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(
            detection_rate=self.detection_rate,
            half_width=self.half_width,
            per_decoy_rate=self.per_decoy_rate,
            per_decoy_half_width=self.per_decoy_half_width,
            eve_info_bits=self.eve_info_bits,
        )
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def trial_seeds(seed: int, trials: int) -> list[int]:
    """Per-trial seeds derived from the master seed, independent of execution order."""
    return [
        int(s.generate_state(1, np.uint64)[0])
        for s in np.random.SeedSequence(seed).spawn(trials)
    ]


def run_trial(kind: str, config: RoundConfig, seed: int, attack_kwargs: dict | None = None):
    """One attacked run with random self keys; returns (result, attack, self keys)."""
    key_rng = np.random.default_rng([seed, 1])
    keys = [k.bits for k in random_self_keys(config.n_participants, config.key_bits, key_rng)]
    attack = make_attack(kind, **(attack_kwargs or {}))
    result, _ = run_agreement(config.with_seed(seed), keys, attack)
    return result, attack, keys


def _run_batch(kind: str, config: RoundConfig, seeds: list[int], attack_kwargs) -> AttackReport:
    report = AttackReport(kind, len(seeds), 0)
    for s in seeds:
        result, attack, keys = run_trial(kind, config, s, attack_kwargs)
        accumulate(report, result, attack, keys)
    report.by_phase = dict(sorted(report.by_phase.items()))
    report.by_basis = dict(sorted(report.by_basis.items()))
    return report


def estimate_detection(
    kind: str,
    config: RoundConfig,
    trials: int,
    seed: int = 0,
    attack_kwargs: dict | None = None,
    workers: int = 1,
) -> AttackReport:
    """Run ``trials`` independent protocol executions with the attack installed.

    Trial seeds depend only on ``seed`` and the trial index, so any ``workers``
    count yields the same report.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    make_attack(kind, **(attack_kwargs or {}))  # fail fast on a bad name
    seeds = trial_seeds(seed, trials)
    if workers <= 1:
        return _run_batch(kind, config, seeds, attack_kwargs)
    from concurrent.futures import ProcessPoolExecutor

    step = math.ceil(trials / workers)
    batches = [seeds[i:i + step] for i in range(0, trials, step)]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        parts = list(
            ex.map(_run_batch, [kind] * len(batches), [config] * len(batches), batches,
                   [attack_kwargs] * len(batches))
        )
    return merge_reports(parts)


def merge_reports(parts: Sequence[AttackReport]) -> AttackReport:
    out = AttackReport(parts[0].attack, 0, 0)
    for r in parts:
        out.trials += r.trials
        out.detections += r.detections
        out.eve_correct += r.eve_correct
        out.eve_total += r.eve_total
        for src, dst in [(r.touched, out.touched)] + [
            (t, out.by_phase.setdefault(k, DecoyTally())) for k, t in r.by_phase.items()
        ] + [(t, out.by_basis.setdefault(k, DecoyTally())) for k, t in r.by_basis.items()]:
            dst.checked += src.checked
            dst.errors += src.errors
    out.by_phase = dict(sorted(out.by_phase.items()))
    out.by_basis = dict(sorted(out.by_basis.items()))
    return out


def accumulate(
    report: AttackReport, result: AgreementResult, attack: ChannelHook, keys: Sequence[str]
) -> None:
    report.detections += int(result.aborted)
    if not result.aborted:
        c, t = attack.score(keys, result)
        report.eve_correct += c
        report.eve_total += t
    for d in result.decoys:
        if not d.touched:
            continue
        for tally in (
            report.touched,
            report.by_phase.setdefault(d.phase, DecoyTally()),
            report.by_basis.setdefault(d.basis.value, DecoyTally()),
        ):
            tally.checked += 1
            tally.errors += int(d.mismatch)


# --- the worked CNOT-attack example ---------------------------------------

# qubit order A, B, C, C', E
CNOT_SCENARIO_FINAL = np.zeros(32, dtype=complex)
for _label in ("01001", "01010", "10100", "10111"):
    CNOT_SCENARIO_FINAL[int(_label, 2)] = 0.5


def cnot_attack_scenario() -> list[StateVector]:
    """Three parties, Alice leads, Bob encodes X, Charlie sends a |+> decoy.

    Returns the register A B C C' E before Eve acts, after CNOT(B, E) and after
    CNOT(C', E).
    """
    ghz = apply_gate1(prepare_ghz(3, "000"), "X", 1)
    start = tensor(tensor(ghz, single_qubit(Basis.X, 0)), new_basis_state(1))
    after_b = apply_cnot(start, 1, 4)
    after_c = apply_cnot(after_b, 3, 4)
    return [start, after_b, after_c]
