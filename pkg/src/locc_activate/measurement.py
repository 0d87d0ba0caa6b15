"""Projective local measurements.

An :class:`OPM` is a complete family of mutually orthogonal projectors on a
subset of factors, each given by an orthonormal spanning list.  Whether it is
*orthogonality preserving* is a property of the pair (measurement, state set)
and is checked by :func:`is_orthogonality_preserving`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .errors import CompletenessError, InputError, PreconditionError
from .hilbert import (
    DEFAULT_TOL,
    PartyLayout,
    StateVector,
    _check_target,
    apply_local,
    gram_matrix,
)


@dataclass(frozen=True, eq=False)
class Projector:
    target: tuple[str, ...]
    dims: tuple[int, ...]
    span: np.ndarray
    label: str

    def __post_init__(self):
        span = np.atleast_2d(np.array(self.span, dtype=np.complex128))
        d = int(np.prod(self.dims))
        if span.shape[1] != d:
            raise InputError(f"outcome {self.label!r}: span vectors have length {span.shape[1]}, target dimension is {d}")
        span.setflags(write=False)
        object.__setattr__(self, "span", span)
        object.__setattr__(self, "target", tuple(self.target))
        object.__setattr__(self, "dims", tuple(self.dims))

    @property
    def matrix(self) -> np.ndarray:
        return self.span.T @ self.span.conj()

    @property
    def rank(self) -> int:
        return self.span.shape[0]


@dataclass(frozen=True, eq=False)
class OPM:
    """Named complete projective measurement on one set of factors."""

    name: str
    outcomes: tuple[Projector, ...]
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        outcomes = tuple(self.outcomes)
        if not outcomes:
            raise InputError(f"measurement {self.name!r} has no outcomes")
        target, dims = outcomes[0].target, outcomes[0].dims
        if any(p.target != target or p.dims != dims for p in outcomes):
            raise InputError(f"measurement {self.name!r}: outcomes act on different targets")
        labels = [p.label for p in outcomes]
        if len(set(labels)) != len(labels):
            raise InputError(f"measurement {self.name!r}: duplicate outcome labels {labels}")
        object.__setattr__(self, "outcomes", outcomes)
        _validate_spans(self.name, outcomes, self.tol)

    @property
    def target(self) -> tuple[str, ...]:
        return self.outcomes[0].target

    @property
    def dims(self) -> tuple[int, ...]:
        return self.outcomes[0].dims

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(p.label for p in self.outcomes)

    def outcome(self, label: str) -> Projector:
        for p in self.outcomes:
            if p.label == label:
                return p
        raise InputError(f"measurement {self.name!r} has no outcome {label!r}")


def _validate_spans(name, outcomes, tol):
    vecs = np.concatenate([p.span for p in outcomes])
    norms = np.linalg.norm(vecs, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1) > tol)
    if bad.size:
        raise InputError(f"measurement {name!r}: span vector {int(bad[0])} has norm {norms[bad[0]]:.6g}, expected 1")
    g = vecs.conj() @ vecs.T
    off = np.abs(g - np.eye(len(vecs)))
    if off.max(initial=0.0) > tol:
        i, j = np.unravel_index(np.argmax(off), off.shape)
        raise InputError(f"measurement {name!r}: span vectors {int(i)} and {int(j)} overlap by {off[i, j]:.6g}")
    d = vecs.shape[1]
    if len(vecs) != d:
        total = sum(p.matrix for p in outcomes)
        deficit = np.eye(d) - total
        raise CompletenessError(
            f"measurement {name!r} is incomplete: projectors cover rank {len(vecs)} of {d}",
            deficit=deficit,
        )


def _as_vector(v, d):
    if isinstance(v, (int, np.integer)):
        if not 0 <= v < d:
            raise InputError(f"basis index {v} outside target dimension {d}")
        e = np.zeros(d, dtype=np.complex128)
        e[v] = 1
        return e
    arr = np.asarray(v, dtype=np.complex128).reshape(-1)
    if arr.shape[0] != d:
        raise InputError(f"span vector of length {arr.shape[0]}, target dimension is {d}")
    return arr


def opm_from_spans(layout: PartyLayout, target, spans: Mapping[str, Sequence], name: str = "",
                   tol: float = DEFAULT_TOL) -> OPM:
    """Build and validate a projective measurement.

    ``spans`` maps each outcome label to its orthonormal spanning vectors,
    written over the target subspace (factors of ``target`` in the given
    order).  A bare integer stands for that computational basis vector.
    Nothing is orthonormalized: non-unit or overlapping vectors raise
    :class:`InputError`, missing directions raise :class:`CompletenessError`.
    """
    pos = layout.positions(target)
    labels = tuple(layout.labels[p] for p in pos)
    dims = tuple(layout.dims[p] for p in pos)
    d = int(np.prod(dims))
    outcomes = [
        Projector(labels, dims, np.stack([_as_vector(v, d) for v in vecs]), str(lab))
        for lab, vecs in spans.items()
    ]
    return OPM(name, tuple(outcomes), tol)


def computational_opm(layout: PartyLayout, target, name: str = "") -> OPM:
    """Measurement in the computational basis; outcome labels are digit strings."""
    pos = layout.positions(target)
    dims = tuple(layout.dims[p] for p in pos)
    spans = {}
    for idx in range(int(np.prod(dims))):
        digits = np.unravel_index(idx, dims)
        spans["".join(str(int(x)) for x in digits)] = [idx]
    return opm_from_spans(layout, target, spans, name)


def product_opm(first: OPM, second: OPM, name: str | None = None) -> OPM:
    """Joint measurement of two OPMs on disjoint factors.

    Outcome labels are ``"<first>,<second>"``; the target is the
    concatenation of both targets.
    """
    if set(first.target) & set(second.target):
        raise InputError("product_opm: targets overlap")
    outcomes = []
    for p in first.outcomes:
        for q in second.outcomes:
            span = np.stack([np.kron(u, w) for u in p.span for w in q.span])
            outcomes.append(
                Projector(first.target + second.target, first.dims + second.dims, span, f"{p.label},{q.label}")
            )
    return OPM(name or f"{first.name}x{second.name}", tuple(outcomes), min(first.tol, second.tol))


def project(v: StateVector, p: Projector) -> np.ndarray:
    """Unnormalized amplitudes of P v."""
    pos = _check_target(v.layout, p.target, p.dims)
    return apply_local(v.amplitudes, v.layout.dims, p.matrix, pos)


@dataclass(frozen=True)
class OutcomeRecord:
    label: str
    probability: float
    post_state: StateVector | None


def measure(v: StateVector, m: OPM, tol: float = DEFAULT_TOL) -> list[OutcomeRecord]:
    """Born-rule outcome distribution and normalized post-measurement states."""
    if not v.is_normalized(tol):
        raise InputError(f"measure: input has norm {v.norm():.12g}, expected 1")
    records = []
    for p in m.outcomes:
        amps = project(v, p)
        prob = float(np.vdot(amps, amps).real)
        post = StateVector(v.layout, amps / np.sqrt(prob)) if prob >= tol else None
        records.append(OutcomeRecord(p.label, prob, post))
    return records


@dataclass
class PreservationReport:
    preserving: bool
    # (outcome, label_i, label_j, |<i|j>| of normalized post-states)
    violations: list[tuple[str, str, str, float]]
    probabilities: dict[str, dict[str, float]]
    tol: float

    def __bool__(self):
        return self.preserving


def is_orthogonality_preserving(states: Sequence[StateVector], m: OPM, tol: float = DEFAULT_TOL,
                                labels: Sequence[str] | None = None) -> PreservationReport:
    """Check that every outcome of ``m`` leaves the set pairwise orthogonal.

    Members whose probability for an outcome is below ``tol`` do not take
    part in that outcome's check.
    """
    states = list(states)
    labels = list(labels) if labels is not None else [str(i) for i in range(len(states))]
    g = gram_matrix(states)
    off = np.abs(g - np.diag(np.diag(g)))
    if off.max(initial=0.0) > tol:
        raise PreconditionError("is_orthogonality_preserving: input set is not orthogonal")
    probs: dict[str, dict[str, float]] = {}
    violations = []
    for p in m.outcomes:
        live = []
        probs[p.label] = {}
        for lab, v in zip(labels, states):
            amps = project(v, p)
            prob = float(np.vdot(amps, amps).real) / max(v.norm() ** 2, np.finfo(float).tiny)
            probs[p.label][lab] = prob
            if prob >= tol:
                live.append((lab, amps / np.linalg.norm(amps)))
        for (la, a), (lb, b) in combinations(live, 2):
            ov = abs(np.vdot(a, b))
            if ov > tol:
                violations.append((p.label, la, lb, float(ov)))
    return PreservationReport(not violations, violations, probs, tol)
