"""Machine-checkable claims: orthogonality, redundancy, activation, entanglement."""

from .checks import (
    ORTHOGONALITY_LOST,
    PROTOCOL_REQUIRED,
    activation_check,
    branch_probabilities,
    default_patterns,
    eq8_identity_check,
    genuine_entanglement_check,
    orthogonality_report,
    redundancy_scan,
    scan_pattern,
)
from .report import Evidence, VerificationReport, dumps
from .suite import CLAIMS, CRITERIA, TABLE_1, run_claim, run_suite

__all__ = [
    "CLAIMS",
    "CRITERIA",
    "Evidence",
    "ORTHOGONALITY_LOST",
    "PROTOCOL_REQUIRED",
    "TABLE_1",
    "VerificationReport",
    "activation_check",
    "branch_probabilities",
    "default_patterns",
    "dumps",
    "eq8_identity_check",
    "genuine_entanglement_check",
    "orthogonality_report",
    "redundancy_scan",
    "run_claim",
    "run_suite",
    "scan_pattern",
]
