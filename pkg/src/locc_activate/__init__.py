"""Activation of nonlocal properties in locally distinguishable state sets.

Dense state-vector tools (:mod:`.hilbert`), projective local measurements
(:mod:`.measurement`), the state families (:mod:`.states`), LOCC protocol
trees (:mod:`.protocol`) and the claim checkers (:mod:`.verify`).
"""

from .errors import (
    CompletenessError,
    InputError,
    LoccError,
    PreconditionError,
    ProtocolError,
    ProtocolSyntaxError,
    ProtocolValidationError,
)
from .hilbert import (
    DensityMatrix,
    Party,
    PartyLayout,
    StateVector,
    UnitaryOperator,
    apply_unitary,
    basis_state,
    fidelity_up_to_phase,
    partial_trace,
    schmidt_coefficients,
    superpose,
    tensor,
    trace_distance,
)
from .measurement import OPM, Projector, is_orthogonality_preserving, measure, opm_from_spans
from .states import LabeledSet, construct_family, correction_unitary

__version__ = "0.1.0"

__all__ = [
    "CompletenessError",
    "DensityMatrix",
    "InputError",
    "LabeledSet",
    "LoccError",
    "OPM",
    "Party",
    "PartyLayout",
    "PreconditionError",
    "Projector",
    "ProtocolError",
    "ProtocolSyntaxError",
    "ProtocolValidationError",
    "StateVector",
    "UnitaryOperator",
    "apply_unitary",
    "basis_state",
    "construct_family",
    "correction_unitary",
    "fidelity_up_to_phase",
    "is_orthogonality_preserving",
    "measure",
    "opm_from_spans",
    "partial_trace",
    "schmidt_coefficients",
    "superpose",
    "tensor",
    "trace_distance",
]
