"""Checkers that turn set-level claims into evidence-backed reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from ..errors import InputError, PreconditionError
from ..hilbert import (
    DEFAULT_TOL,
    DensityMatrix,
    StateVector,
    UnitaryOperator,
    apply_unitary,
    fidelity_up_to_phase,
    overlap,
    partial_trace,
    party_bipartitions,
    schmidt_coefficients,
    trace_distance,
)
from ..measurement import OPM, is_orthogonality_preserving, product_opm, project
from ..states import LabeledSet, correction_unitary, ghz
from .report import VerificationReport

ORTHOGONALITY_LOST = "orthogonality lost"
PROTOCOL_REQUIRED = "orthogonal - distinguishability must be shown by a protocol"


def orthogonality_report(states: LabeledSet, tol: float = DEFAULT_TOL) -> VerificationReport:
    rep = VerificationReport(f"orthogonality:{states.name}", tolerances={"orthogonality": tol})
    g = states.gram()
    off = np.abs(g - np.diag(np.diag(g)))
    diag = np.abs(np.diag(g).real - 1)
    max_off = float(off.max(initial=0.0))
    worst = []
    for i, j in zip(*np.nonzero(np.triu(off > tol, 1))):
        worst.append({"pair": [states.labels[i], states.labels[j]], "overlap": g[i, j]})
    rep.add("off-diagonal", max_off < tol, max_off, tol, residual=max_off,
            violations=worst, gram=g, labels=states.labels)
    rep.add("diagonal", float(diag.max(initial=0.0)) <= tol, float(diag.max(initial=0.0)), tol,
            residual=float(diag.max(initial=0.0)))
    return rep


@dataclass
class PatternResult:
    pattern: tuple[str, ...]
    reduced: dict[str, DensityMatrix]
    overlaps: np.ndarray
    distances: np.ndarray
    status: str
    identical: list[tuple[str, str]] = field(default_factory=list)
    nonorthogonal: list[tuple[str, str, float]] = field(default_factory=list)


def _pattern_name(pattern) -> str:
    return "+".join(pattern)


def scan_pattern(states: LabeledSet, pattern: Sequence, tol: float = DEFAULT_TOL) -> PatternResult:
    labels = states.labels
    reduced = {lab: partial_trace(v, list(pattern)) for lab, v in states}
    n = len(labels)
    ov = np.zeros((n, n))
    td = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            ov[i, j] = overlap(reduced[labels[i]], reduced[labels[j]])
            td[i, j] = trace_distance(reduced[labels[i]], reduced[labels[j]]) if i != j else 0.0
    nonorth = [(labels[i], labels[j], float(ov[i, j]))
               for i, j in combinations(range(n), 2) if ov[i, j] >= tol]
    ident = [(labels[i], labels[j]) for i, j in combinations(range(n), 2) if td[i, j] < tol]
    status = ORTHOGONALITY_LOST if nonorth else PROTOCOL_REQUIRED
    return PatternResult(tuple(str(p) for p in pattern), reduced, ov, td, status, ident, nonorth)


def redundancy_scan(states: LabeledSet, patterns: Sequence[Sequence], tol: float = DEFAULT_TOL,
                    results: list | None = None) -> VerificationReport:
    """Reduce the set by each discard pattern and classify the reduced set.

    An evidence item passes when the reduced set is no longer orthogonal.
    Patterns that keep it orthogonal are reported with the status
    ``PROTOCOL_REQUIRED`` (they fail the strict criterion but may still be
    harmless if the reduced set is locally distinguishable).
    """
    patterns = [tuple(p) if not isinstance(p, str) else (p,) for p in patterns]
    if not patterns:
        raise InputError("redundancy_scan needs at least one pattern")
    everything = set(states.layout.labels)
    for pat in patterns:
        if set(states.layout.positions(list(pat))) == set(range(len(everything))):
            raise InputError(f"pattern {_pattern_name(pat)!r} discards every factor")
    rep = VerificationReport(f"redundancy:{states.name}", tolerances={"overlap": tol, "trace_distance": tol})
    for pat in patterns:
        res = scan_pattern(states, pat, tol)
        if results is not None:
            results.append(res)
        max_ov = max((x for _, _, x in res.nonorthogonal), default=0.0)
        rep.add(f"discard {_pattern_name(res.pattern)}", res.status == ORTHOGONALITY_LOST, res.status, tol,
                identical=[list(p) for p in res.identical],
                nonorthogonal=[[a, b, x] for a, b, x in res.nonorthogonal],
                max_overlap=max_ov, overlaps=res.overlaps, trace_distances=res.distances,
                labels=states.labels)
    return rep


def default_patterns(states: LabeledSet, full: bool = False) -> list[tuple[str, ...]]:
    """Single-factor discards, whole-party discards and the set's named groups.

    ``full`` returns every non-empty proper subset of factors instead.
    """
    layout = states.layout
    labels = layout.labels
    if full:
        return [c for r in range(1, len(labels)) for c in combinations(labels, r)]
    pats = [(lab,) for lab in labels]
    for p in layout.parties:
        if len(p.labels) > 1 and len(p.labels) < len(labels):
            pats.append(p.labels)
    named = {
        "s2": [("A1", "b1", "b2"), ("A2", "B2")],
        "s4": [("a1", "b1"), ("a1", "b2"), ("a2", "b1"), ("a2", "b2")],
    }
    for pat in named.get(states.name, []):
        if pat not in pats:
            pats.append(pat)
    return pats


def _as_list(x):
    if x is None:
        return []
    if isinstance(x, UnitaryOperator):
        return [x]
    return list(x)


def activation_check(states: LabeledSet, opms, targets, corrections: Mapping | None = None,
                     assignment: Mapping | None = None, tol: float = DEFAULT_TOL,
                     claim: str | None = None) -> VerificationReport:
    """Check that a local measurement turns ``states`` into the target sets.

    ``opms`` is one OPM or two on distinct parties (measured jointly).
    ``targets`` maps an outcome label to a :class:`LabeledSet` (a single set
    applies to every branch).  ``corrections`` maps an outcome label to one
    or more unitaries applied after that outcome.  ``assignment`` maps
    an outcome to ``{member: target label}`` (or one dict for all branches);
    without it the members surviving a branch are matched to the targets in
    order.  Every surviving member must equal its target up to a global
    phase, and each branch's post set must be orthogonal.
    """
    component_checks = []
    if isinstance(opms, OPM):
        m = opms
    else:
        opms = list(opms)
        if len(opms) == 1:
            m = opms[0]
        elif len(opms) == 2:
            owners = [{states.layout.owners[p] for p in states.layout.positions(o.target)} for o in opms]
            if owners[0] & owners[1]:
                raise InputError("the two measurements must act on distinct parties")
            m = product_opm(*opms)
            component_checks = opms
        else:
            raise InputError("activation_check takes one or two measurements")
    if states.max_offdiagonal() > tol:
        raise PreconditionError(f"input set {states.name!r} is not orthogonal")
    corrections = dict(corrections or {})
    if isinstance(targets, LabeledSet):
        targets = {lab: targets for lab in m.labels}
    for lab, t in targets.items():
        if t.max_offdiagonal() > tol:
            raise PreconditionError(f"target set for branch {lab!r} is not orthogonal")
    if assignment is not None and not all(isinstance(v, Mapping) for v in assignment.values()):
        assignment = {lab: assignment for lab in m.labels}

    rep = VerificationReport(claim or f"activation:{states.name}:{m.name}",
                             tolerances={"fidelity": tol, "orthogonality": tol, "probability": tol})
    pres = is_orthogonality_preserving(states.states, m, tol, states.labels)
    rep.add("measurement is orthogonality preserving", pres.preserving,
            len(pres.violations), violations=[list(v) for v in pres.violations])
    for o in component_checks:
        sub = is_orthogonality_preserving(states.states, o, tol, states.labels)
        rep.add(f"{o.name} alone is orthogonality preserving", sub.preserving, len(sub.violations))
    probs = {}
    for p in m.outcomes:
        live = []
        for lab, v in states:
            amps = project(v, p)
            q = float(np.vdot(amps, amps).real)
            probs.setdefault(lab, {})[p.label] = q
            if q >= tol:
                post = StateVector(v.layout, amps / np.sqrt(q))
                for u in _as_list(corrections.get(p.label)):
                    post = apply_unitary(post, u)
                live.append((lab, post))
        if not live:
            continue
        if p.label not in targets:
            raise InputError(f"no target set for branch {p.label!r}")
        tset = targets[p.label]
        if len(live) != len(tset):
            raise InputError(
                f"branch {p.label!r}: {len(live)} surviving members but {len(tset)} targets")
        if assignment is not None:
            amap = assignment.get(p.label, {})
            chosen = [amap.get(lab) for lab, _ in live]
            if None in chosen:
                raise InputError(f"branch {p.label!r}: assignment misses a surviving member")
        else:
            chosen = tset.labels
        rep.add(f"branch {p.label}: distinct targets", len(set(chosen)) == len(chosen), chosen)
        for (lab, post), tlab in zip(live, chosen):
            f = fidelity_up_to_phase(post, tset[tlab], tol)
            rep.add(f"branch {p.label}: {lab} -> {tlab}", abs(1 - f) <= tol, f, tol,
                    residual=abs(1 - f), probability=probs[lab][p.label])
        g = np.array([[abs(np.vdot(a.amplitudes, b.amplitudes)) for _, b in live] for _, a in live])
        off = float(np.max(g - np.diag(np.diag(g)), initial=0.0))
        rep.add(f"branch {p.label}: post set orthogonal", off <= tol, off, tol, residual=off)
    for lab in states.labels:
        total = sum(probs[lab].values())
        rep.add(f"{lab}: branch probabilities sum to 1", abs(total - 1) <= tol, probs[lab], tol,
                residual=abs(total - 1))
    rep.notes.append("branch probabilities p(outcome|member) are in the per-member evidence")
    return rep


def branch_probabilities(rep: VerificationReport) -> dict[str, dict[str, float]]:
    """Extract ``{member: {outcome: p}}`` from an activation report."""
    out = {}
    for e in rep.evidence:
        if e.name.endswith(": branch probabilities sum to 1"):
            out[e.name.split(":")[0]] = dict(e.value)
    return out


def genuine_entanglement_check(v: StateVector, tol: float = DEFAULT_TOL,
                               claim: str = "genuine entanglement") -> VerificationReport:
    """Schmidt rank >= 2 across every bipartition of the parties."""
    if len(v.layout.parties) < 2:
        raise InputError("genuine entanglement needs at least two parties")
    if not v.is_normalized(tol):
        raise InputError("genuine_entanglement_check: state is not normalized")
    rep = VerificationReport(claim, tolerances={"schmidt": tol})
    for side in party_bipartitions(v.layout):
        coeffs = schmidt_coefficients(v, list(side), tol)
        rest = [p for p in v.layout.party_names if p not in side]
        rep.add(f"{''.join(side)}|{''.join(rest)}", len(coeffs) >= 2, len(coeffs), tol,
                coefficients=coeffs)
    return rep


def eq8_identity_check(n: int, tol: float = 1e-12) -> VerificationReport:
    """(I x U_k^±)|G_0(+)> equals |G_k(±)> for every k and sign, as vectors."""
    basis = ghz(n)
    g0 = basis["G_0(+)"]
    rep = VerificationReport(f"ghz-unitary-identities:n={n}", tolerances={"residual": tol})
    for lab, target in basis:
        k = int(lab[2:lab.index("(")])
        sign = lab[-2]
        u = correction_unitary("uk", n=n, k=k, sign=sign)
        out = apply_unitary(g0, u)
        resid = float(np.max(np.abs(out.amplitudes - target.amplitudes)))
        rep.add(f"U_{k}({sign}) G_0(+) = {lab}", resid < tol, resid, tol, residual=resid)
    return rep
