"""Exhaustive branch enumeration and discrimination checks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError, PreconditionError
from ..hilbert import DEFAULT_TOL, StateVector, apply_unitary
from ..measurement import project
from ..states import LabeledSet
from .model import BranchTranscript, Leaf, ProtocolTree


def enumerate_branches(tree: ProtocolTree, state: StateVector, tol: float = DEFAULT_TOL,
                       include_pruned: bool = False) -> list[BranchTranscript]:
    """Expand every outcome path of ``tree`` on ``state``, depth first.

    Outcomes whose conditional probability is below ``tol`` are pruned; they
    appear (with probability 0 and no verdict) only when ``include_pruned``.
    """
    if state.layout != tree.layout:
        raise InputError("input state layout differs from the protocol layout")
    if not state.is_normalized(tol):
        raise InputError(f"input state has norm {state.norm():.12g}, expected 1")
    out: list[BranchTranscript] = []

    def walk(node, v, prob, steps):
        if isinstance(node, Leaf):
            out.append(BranchTranscript(tuple(steps), prob, v, node))
            return
        m = tree.opms[node.opm]
        cases = {c.label: c for c in node.cases}
        for p in m.outcomes:
            amps = project(v, p)
            q = float(np.vdot(amps, amps).real)
            step = steps + [(node.party, p.label)]
            if q < tol:
                if include_pruned:
                    out.append(BranchTranscript(tuple(step), 0.0, None, None, pruned=True))
                continue
            post = StateVector(v.layout, amps / np.sqrt(q))
            case = cases[p.label]
            if case.apply is not None:
                post = apply_unitary(post, tree.unitaries[case.apply])
            walk(case.child, post, prob * q, step)

    walk(tree.root, state, 1.0, [])
    return out


@dataclass
class MemberResult:
    label: str
    identified_probability: float
    total_probability: float
    transcripts: list[BranchTranscript]
    failures: list[BranchTranscript] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


@dataclass
class DiscriminationReport:
    passed: bool
    members: list[MemberResult]
    tol: float

    @property
    def identified(self) -> int:
        return sum(m.passed for m in self.members)

    def summary(self) -> str:
        return f"{self.identified}/{len(self.members)} identified"


def verify_discrimination(states: LabeledSet, tree: ProtocolTree,
                          tol: float = DEFAULT_TOL) -> DiscriminationReport:
    """Every live transcript of every member must end in ``identify(member)``."""
    if states.max_offdiagonal() > tol:
        raise PreconditionError(f"set {states.name!r} is not orthogonal")
    results = []
    for label, v in states:
        ts = enumerate_branches(tree, v, tol)
        fails = [t for t in ts if t.verdict != Leaf("identify", label)]
        hit = sum(t.probability for t in ts if t.verdict == Leaf("identify", label))
        total = sum(t.probability for t in ts)
        if abs(total - 1.0) > tol or abs(hit - 1.0) > tol:
            fails = fails or ts
        results.append(MemberResult(label, hit, total, ts, fails))
    return DiscriminationReport(all(r.passed for r in results), results, tol)


def discrimination_table(states: LabeledSet, tree: ProtocolTree, row_party: str,
                         tol: float = DEFAULT_TOL):
    """Tabulate which member produces each (row outcome, other outcomes) cell.

    Columns concatenate the outcomes of every other party in transcript
    order.  Returns ``(rows, cols, cells)`` with ``cells[(row, col)]`` the
    list of members reaching that cell.
    """
    cells: dict[tuple[str, str], list[str]] = {}
    rows: list[str] = []
    cols: list[str] = []
    for label, v in states:
        for t in enumerate_branches(tree, v, tol):
            row = "".join(t.outcomes_of(row_party))
            col = "".join(o for p, o in t.steps if p != row_party)
            cells.setdefault((row, col), []).append(label)
            if row not in rows:
                rows.append(row)
            if col not in cols:
                cols.append(col)
    m = _row_opm(tree, row_party)
    if m is not None:
        rows = [lab for lab in m.labels if lab in rows] + [r for r in rows if r not in m.labels]
    return rows, sorted(cols), cells


def _row_opm(tree, party):
    for m in tree.opms.values():
        if set(m.target) <= set(tree.layout.party(party).labels):
            return m
    return None
