"""Statevector simulation of a multiparty GHZ-based quantum key agreement protocol."""
from .protocol import AgreementResult, RoundConfig, RoundTranscript, SelfKey, run_agreement
from .adversary import AttackReport, estimate_detection
from .costmodel import CostMetric, ProtocolName, comparison_table, cost

__all__ = [
    "AgreementResult",
    "AttackReport",
    "CostMetric",
    "ProtocolName",
    "RoundConfig",
    "RoundTranscript",
    "SelfKey",
    "comparison_table",
    "cost",
    "estimate_detection",
    "run_agreement",
]
__version__ = "0.1.0"
