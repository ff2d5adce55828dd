"""Command-line entry point: ``mqka {agree,attack,cost,selftest}``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .adversary import ATTACKS, AttackReport, controlled_positions, estimate_detection
from .costmodel import CostMetric, comparison_table, parse_range, write_csv
from .protocol import RoundConfig, SelfKey, final_key_oracle, random_self_keys, run_agreement
from .selftest import run_battery

EXIT_OK = 0
EXIT_ABORT = 2
EXIT_USAGE = 64

FORMATS = ("text", "csv", "json-lines")
ATTACK_KINDS = [k for k in ATTACKS if k != "none"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


@dataclass
class CliConfig:
    subcommand: str
    participants: int = 3
    key_bits: int = 8
    decoys: int = 10
    threshold: float = 0.0
    seed: int | None = None
    trials: int = 20000
    metric: str = "transmissions"
    n_range: str = "2..10"
    fmt: str = "text"
    output: str | None = None
    kind: str | None = None
    desired_bit: int = 1
    victim: int = 1
    keys: str | None = None
    sequence_len: int = 100
    workers: int = 1

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "CliConfig":
        fields = {k: v for k, v in vars(ns).items() if k in cls.__dataclass_fields__}
        return cls(**fields)

    def round_config(self, seed: int) -> RoundConfig:
        try:
            return RoundConfig(
                self.participants,
                self.key_bits,
                decoys_per_sequence=self.decoys,
                sequence_len=self.sequence_len,
                error_threshold=self.threshold,
                seed=seed,
            )
        except ValueError as e:
            raise UsageError(str(e)) from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mqka", description="Multiparty GHZ-based quantum key agreement simulator")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def out_flags(sp, default_fmt="text"):
        sp.add_argument("--format", dest="fmt", choices=FORMATS, default=default_fmt)
        sp.add_argument("--output", "-o", help="write here instead of stdout")

    def round_flags(sp):
        sp.add_argument("--participants", "-N", type=int, default=3)
        sp.add_argument("--key-bits", type=int, default=8)
        sp.add_argument("--decoys", type=int, default=10, help="decoys per sequence")
        sp.add_argument("--sequence-len", type=int, default=100, help="data qubits per sequence")
        sp.add_argument("--threshold", type=float, default=0.0, help="abort above this error rate")
        sp.add_argument("--seed", type=int, help="master seed; generated and printed if omitted")

    a = sub.add_parser("agree", help="run one honest key agreement")
    round_flags(a)
    a.add_argument("--keys", help="comma-separated self keys, one per participant")
    out_flags(a)

    t = sub.add_parser("attack", help="Monte Carlo detection estimate for an attack")
    round_flags(t)
    t.add_argument("--kind", required=True, choices=ATTACK_KINDS)
    t.add_argument("--trials", type=int, default=20000)
    t.add_argument("--desired-bit", type=int, choices=(0, 1), default=1, help="leader-forge target")
    t.add_argument("--victim", type=int, default=1, help="fake-participant target")
    t.add_argument("--workers", type=int, default=1)
    out_flags(t)

    c = sub.add_parser("cost", help="resource-cost comparison table")
    c.add_argument("--metric", default="transmissions")
    c.add_argument("--n", dest="n_range", default="2..10", help="inclusive range such as 2..10")
    out_flags(c, default_fmt="csv")

    s = sub.add_parser("selftest", help="run the embedded verification battery")
    out_flags(s)
    return p


@contextmanager
def _sink(path: str | None, stdout: IO[str]):
    if path is None:
        yield stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _resolve_seed(cfg: CliConfig, out: IO[str]) -> int:
    if cfg.seed is not None:
        return cfg.seed
    seed = int(np.random.SeedSequence().generate_state(1, np.uint32)[0])
    if cfg.fmt == "json-lines":
        out.write(json.dumps({"seed": seed}) + "\n")
    elif cfg.fmt == "csv":
        out.write(f"seed,{seed}\n")
    else:
        out.write(f"seed: {seed}\n")
    return seed


def _self_keys(cfg: CliConfig, seed: int) -> list[SelfKey]:
    if cfg.keys is None:
        return random_self_keys(cfg.participants, cfg.key_bits, np.random.default_rng([seed, 1]))
    parts = cfg.keys.split(",")
    if len(parts) != cfg.participants:
        raise UsageError(f"--keys gives {len(parts)} keys for {cfg.participants} participants")
    if any(len(k) != cfg.key_bits for k in parts):
        raise UsageError(f"every key in --keys must have {cfg.key_bits} bits")
    try:
        return [SelfKey(i, k) for i, k in enumerate(parts)]
    except ValueError as e:
        raise UsageError(str(e)) from None


def cmd_agree(cfg: CliConfig, out: IO[str]) -> int:
    seed = _resolve_seed(cfg, out)
    rc = cfg.round_config(seed)
    keys = _self_keys(cfg, seed)
    result, transcript = run_agreement(rc, keys)
    oracle = final_key_oracle(keys)
    verdict = "abort" if result.aborted else ("agreed" if result.agreed else "disagreed")

    if cfg.fmt == "json-lines":
        transcript.write_json_lines(out)
        payload = {
            "self_keys": [k.bits for k in keys],
            "keys": result.keys,
            "oracle": oracle,
            "verdict": verdict,
            "abort_phase": result.abort_phase,
        }
        out.write(
            json.dumps(
                {"seq": len(transcript), "sender": None, "kind": "result", "payload": payload},
                sort_keys=True,
                separators=(",", ":"),
            )
            + "\n"
        )
    elif cfg.fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["participant", "self_key", "extracted_key"])
        for i, k in enumerate(keys):
            w.writerow([i, k.bits, result.keys[i] if not result.aborted else ""])
        w.writerow(["verdict", verdict, oracle])
    else:
        for i, k in enumerate(keys):
            got = "-" if result.aborted else result.keys[i]
            out.write(f"participant {i}: self key {k.bits}  extracted {got}\n")
        out.write(f"oracle key: {oracle}\n")
        if result.aborted:
            out.write(f"verdict: abort during {result.abort_phase} check\n")
        else:
            out.write(f"verdict: {verdict}\n")
    if result.aborted:
        return EXIT_ABORT
    return EXIT_OK if result.agreed else 1


def _report_text(r: AttackReport, cfg: CliConfig, rc: RoundConfig) -> str:
    lines = [
        f"attack: {r.attack}",
        f"participants: {rc.n_participants}  key bits: {rc.key_bits}  decoys/sequence: {rc.decoys_per_sequence}",
        f"trials: {r.trials}",
        f"detections: {r.detections}",
        f"rate: {r.per_decoy_rate:.4f} +/- {r.per_decoy_half_width:.4f}"
        f"  (per touched decoy, {r.touched.errors}/{r.touched.checked})",
        f"abort rate: {r.detection_rate:.4f} +/- {r.half_width:.4f}",
    ]
    for name, tally in r.by_basis.items():
        lines.append(f"  basis {name}: {tally.rate:.4f}  ({tally.errors}/{tally.checked})")
    for name, tally in r.by_phase.items():
        lines.append(f"  phase {name}: {tally.rate:.4f}  ({tally.errors}/{tally.checked})")
    lines.append(f"eve-info: {r.eve_info_bits:.4f}  ({r.eve_correct}/{r.eve_total} inferences right)")
    if r.attack == "leader-forge":
        forged = r.eve_total
        every = forged > 0 and r.eve_correct == forged
        lines.append(
            f"controlled positions per run: {controlled_positions(rc.key_bits, rc.n_participants)}"
        )
        if every:
            lines.append(f"all followers report bit {cfg.desired_bit}")
        else:
            lines.append(f"followers matched bit {cfg.desired_bit} in {r.eve_correct}/{forged} positions")
    return "\n".join(lines) + "\n"


def cmd_attack(cfg: CliConfig, out: IO[str]) -> int:
    if cfg.trials < 1:
        raise UsageError("--trials must be >= 1")
    if cfg.workers < 1:
        raise UsageError("--workers must be >= 1")
    seed = _resolve_seed(cfg, out)
    rc = cfg.round_config(seed)
    kwargs = {}
    if cfg.kind == "leader-forge":
        kwargs = {"desired_bit": cfg.desired_bit}
    elif cfg.kind == "fake-participant":
        if not 1 <= cfg.victim < cfg.participants:
            raise UsageError(f"--victim must lie in [1, {cfg.participants - 1}]")
        kwargs = {"victim": cfg.victim}
    report = estimate_detection(cfg.kind, rc, cfg.trials, seed=seed, attack_kwargs=kwargs,
                                workers=cfg.workers)
    if cfg.fmt == "json-lines":
        out.write(report.to_json() + "\n")
    elif cfg.fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["attack", "trials", "detections", "abort_rate", "abort_half_width",
                    "decoys_touched", "decoy_errors", "rate", "rate_half_width", "eve_info"])
        w.writerow([report.attack, report.trials, report.detections,
                    f"{report.detection_rate:.6f}", f"{report.half_width:.6f}",
                    report.touched.checked, report.touched.errors,
                    f"{report.per_decoy_rate:.6f}", f"{report.per_decoy_half_width:.6f}",
                    f"{report.eve_info_bits:.6f}"])
    else:
        out.write(_report_text(report, cfg, rc))
    return EXIT_OK


def cmd_cost(cfg: CliConfig, out: IO[str]) -> int:
    try:
        metric = CostMetric.parse(cfg.metric)
        rows = comparison_table(metric, parse_range(cfg.n_range))
    except ValueError as e:
        raise UsageError(str(e)) from None
    if cfg.fmt == "json-lines":
        header = ["N"] + [str(h) for h in ("ShiZhong", "Liu", "Shukla", "Sun1", "Sun2", "Proposed")]
        for row in rows:
            out.write(json.dumps(dict(zip(header, row)), separators=(",", ":")) + "\n")
    elif cfg.fmt == "text":
        buf = io.StringIO()
        write_csv(rows, buf)
        table = [line.split(",") for line in buf.getvalue().splitlines()]
        widths = [max(len(r[i]) for r in table) for i in range(len(table[0]))]
        out.write(f"metric: {metric.value}\n")
        for r in table:
            out.write("  ".join(c.rjust(w) for c, w in zip(r, widths)) + "\n")
    else:
        write_csv(rows, out)
    return EXIT_OK


def cmd_selftest(cfg: CliConfig, out: IO[str]) -> int:
    outcomes = run_battery()
    if cfg.fmt == "json-lines":
        for o in outcomes:
            out.write(json.dumps({"name": o.name, "passed": o.passed, "detail": o.detail},
                                 sort_keys=True, separators=(",", ":")) + "\n")
    elif cfg.fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["check", "passed", "detail"])
        for o in outcomes:
            w.writerow([o.name, int(o.passed), o.detail])
    else:
        for o in outcomes:
            out.write(o.line() + "\n")
    return EXIT_OK if all(o.passed for o in outcomes) else 1


COMMANDS = {"agree": cmd_agree, "attack": cmd_attack, "cost": cmd_cost, "selftest": cmd_selftest}


def main(argv: Sequence[str] | None = None, stdout: IO[str] | None = None) -> int:
    parser = build_parser()
    stdout = stdout or sys.stdout
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    cfg = CliConfig.from_args(ns)
    try:
        with _sink(cfg.output, stdout) as out:
            return COMMANDS[cfg.subcommand](cfg, out)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"mqka {cfg.subcommand}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
