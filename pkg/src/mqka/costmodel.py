"""Closed-form resource costs of six multiparty key agreement protocols.

Transmissions, measurements and delay are counted for a 2-bit key; decoy
qubits for a 180-bit key carried in 100-qubit sequences with 10 decoys each.
The five competing protocols are evaluated exactly as their formulas are
stated, including the asymmetries between scenarios.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from typing import IO

import numpy as np


class ProtocolName(str, Enum):
    SHI_ZHONG = "ShiZhong"
    LIU = "Liu"
    SHUKLA = "Shukla"
    SUN1 = "Sun1"
    SUN2 = "Sun2"
    PROPOSED = "Proposed"


class CostMetric(str, Enum):
    TRANSMISSIONS = "transmissions"
    MEASUREMENTS = "measurements"
    DECOY_QUBITS = "decoys"
    DELAY_UNITS = "delay"

    @classmethod
    def parse(cls, name: str) -> "CostMetric":
        aliases = {
            "transmission": cls.TRANSMISSIONS,
            "measurement": cls.MEASUREMENTS,
            "decoy": cls.DECOY_QUBITS,
            "decoyqubits": cls.DECOY_QUBITS,
            "delayunits": cls.DELAY_UNITS,
        }
        key = name.strip().lower().replace("-", "").replace("_", "")
        for m in cls:
            if key in (m.value, m.name.lower().replace("_", "")):
                return m
        if key in aliases:
            return aliases[key]
        raise ValueError(f"unknown metric {name!r}; choose from {[m.value for m in cls]}")


PROTOCOLS = list(ProtocolName)
CSV_HEADER = ["N"] + [p.value for p in PROTOCOLS]
MAX_N = 1000


@dataclass(frozen=True)
class CostScenario:
    short_key_bits: int = 2  # transmissions, measurements, delay
    long_key_bits: int = 180  # decoy count
    sequence_len: int = 100
    decoys_per_sequence: int = 10

    @property
    def proposed_sequences(self) -> int:
        return math.ceil(self.long_key_bits / self.sequence_len)

    @property
    def liu_runs(self) -> int:
        # each Liu sequence carries sequence_len - decoys key bits
        return math.ceil(self.long_key_bits / (self.sequence_len - self.decoys_per_sequence))


PAPER_SCENARIO = CostScenario()


def _sun1_rounds(n: int) -> int:
    return math.ceil((n - 1) / 2) * 2


def cost(
    protocol: ProtocolName | str,
    metric: CostMetric | str,
    n: int,
    scenario: CostScenario = PAPER_SCENARIO,
) -> int:
    protocol = ProtocolName(protocol)
    metric = metric if isinstance(metric, CostMetric) else CostMetric.parse(metric)
    if n < 2:
        raise ValueError(f"cost formulas need N >= 2, got {n}")
    P, M = ProtocolName, CostMetric
    k = scenario.short_key_bits
    d = scenario.decoys_per_sequence
    table = {
        M.TRANSMISSIONS: {
            P.SHI_ZHONG: n * n,
            P.LIU: n * (n - 1),
            P.SHUKLA: 2 * n * n,
            P.SUN1: _sun1_rounds(n) * n * 4,
            P.SUN2: n * n,
            P.PROPOSED: (n - 1) * 2 * k,
        },
        M.MEASUREMENTS: {
            P.SHI_ZHONG: n * n * 2,
            P.LIU: (n - 1) * n * 2,
            P.SHUKLA: 2 * n * 2,
            P.SUN1: 3 * n * 2,
            P.SUN2: 4 * n,
            P.PROPOSED: n * k,
        },
        M.DECOY_QUBITS: {
            P.SHI_ZHONG: n * n * d,
            P.LIU: (n - 1) * n * d * scenario.liu_runs,
            P.SHUKLA: n * n * d * 2,
            P.SUN1: _sun1_rounds(n) * n * 4 * d,
            P.SUN2: n * n * d,
            P.PROPOSED: (n - 1) * 2 * scenario.proposed_sequences * d,
        },
        M.DELAY_UNITS: {
            P.SHI_ZHONG: n,
            P.LIU: 2,
            P.SHUKLA: n * 2,
            P.SUN1: _sun1_rounds(n),
            P.SUN2: n,
            P.PROPOSED: 2 * k,
        },
    }
    return table[metric][protocol]


def parse_range(text: str) -> range:
    """``"2..10"`` (inclusive) or a single ``"5"``."""
    lo, sep, hi = text.partition("..")
    try:
        start = int(lo)
        stop = int(hi) if sep else start
    except ValueError:
        raise ValueError(f"bad N range {text!r}; expected e.g. 2..10") from None
    return range(start, stop + 1)


def comparison_table(
    metric: CostMetric | str, n_range: range, scenario: CostScenario = PAPER_SCENARIO
) -> list[list[int]]:
    """Rows of ``[N, ShiZhong, Liu, Shukla, Sun1, Sun2, Proposed]``."""
    if len(n_range) == 0:
        raise ValueError("empty N range")
    if n_range.start < 2 or n_range[-1] > MAX_N:
        raise ValueError(f"N range must lie within [2, {MAX_N}]")
    return [[n] + [cost(p, metric, n, scenario) for p in PROTOCOLS] for n in n_range]


def write_csv(rows: list[list[int]], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerows(rows)


def table_csv(metric: CostMetric | str, n_range: range) -> str:
    buf = io.StringIO()
    write_csv(comparison_table(metric, n_range), buf)
    return buf.getvalue()


def minimal_protocols(row: list[int]) -> list[ProtocolName]:
    values = row[1:]
    best = min(values)
    return [p for p, v in zip(PROTOCOLS, values) if v == best]


def empirical_cost_check(
    metric: CostMetric | str, n: int, scenario: CostScenario = PAPER_SCENARIO, seed: int = 0
) -> int:
    """Count the matching resource in an honest protocol run sized like ``scenario``."""
    from .protocol import RoundConfig, random_self_keys, run_agreement

    metric = metric if isinstance(metric, CostMetric) else CostMetric.parse(metric)
    if metric is CostMetric.DECOY_QUBITS:
        config = RoundConfig(
            n,
            scenario.long_key_bits,
            decoys_per_sequence=scenario.decoys_per_sequence,
            sequence_len=scenario.sequence_len,
            seed=seed,
        )
    else:
        config = RoundConfig(
            n,
            scenario.short_key_bits,
            decoys_per_sequence=scenario.decoys_per_sequence,
            sequence_len=scenario.sequence_len,
            seed=seed,
        )
    keys = random_self_keys(n, config.key_bits, np.random.default_rng([seed, n]))
    result, _ = run_agreement(config, keys)
    if result.aborted:
        raise RuntimeError("honest run aborted; counts are incomplete")
    counts = result.counts
    return {
        CostMetric.TRANSMISSIONS: counts.transmissions,
        CostMetric.MEASUREMENTS: counts.measurements,
        CostMetric.DECOY_QUBITS: counts.decoy_qubits,
        CostMetric.DELAY_UNITS: counts.delay_units,
    }[metric]
