"""Protocol trees: local measurements, outcome branches, corrections, leaves."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ..errors import InputError, ProtocolValidationError
from ..hilbert import PartyLayout, StateVector, UnitaryOperator
from ..measurement import OPM


@dataclass(frozen=True)
class Leaf:
    """``identify <member>`` or ``output <handle>``."""

    kind: str
    value: str
    pos: tuple[int, int] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in ("identify", "output"):
            raise InputError(f"unknown leaf kind {self.kind!r}")

    def __str__(self):
        return f"{self.kind}({self.value})"


@dataclass(frozen=True)
class Case:
    label: str
    child: "Node"
    apply: str | None = None
    pos: tuple[int, int] | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class MeasureNode:
    party: str
    opm: str
    cases: tuple[Case, ...]
    pos: tuple[int, int] | None = field(default=None, compare=False, repr=False)


Node = Union[MeasureNode, Leaf]


@dataclass(frozen=True, eq=False)
class ProtocolTree:
    layout: PartyLayout
    opms: dict[str, OPM]
    unitaries: dict[str, UnitaryOperator]
    root: Node
    family: tuple[str, tuple[tuple[str, object], ...]] | None = None

    def __post_init__(self):
        validate_tree(self)

    @property
    def depth(self) -> int:
        def walk(node):
            if isinstance(node, Leaf):
                return 0
            return 1 + max(walk(c.child) for c in node.cases)
        return walk(self.root)

    def leaves(self) -> list[Leaf]:
        out = []

        def walk(node):
            if isinstance(node, Leaf):
                out.append(node)
            else:
                for c in node.cases:
                    walk(c.child)
        walk(self.root)
        return out

    def family_params(self) -> dict:
        return dict(self.family[1]) if self.family else {}


def _locality_owner(layout: PartyLayout, labels, what, pos):
    try:
        positions = layout.positions(tuple(labels))
    except InputError as exc:
        raise ProtocolValidationError(f"{what}: {exc}", "layout", *(pos or (None, None))) from None
    owners = {layout.owners[p] for p in positions}
    return owners, positions


def validate_tree(tree: ProtocolTree) -> None:
    """Check references, branch coverage and locality; raise on the first problem."""
    layout = tree.layout
    for name, u in tree.unitaries.items():
        owners, positions = _locality_owner(layout, u.target, f"unitary {name!r}", None)
        if len(owners) != 1:
            raise ProtocolValidationError(
                f"unitary {name!r} acts on factors of several parties {sorted(owners)}", "locality")
        if tuple(layout.dims[p] for p in positions) != u.dims:
            raise ProtocolValidationError(f"unitary {name!r}: dims do not match the layout", "layout")
    for name, m in tree.opms.items():
        _, positions = _locality_owner(layout, m.target, f"measurement {name!r}", None)
        if tuple(layout.dims[p] for p in positions) != m.dims:
            raise ProtocolValidationError(f"measurement {name!r}: dims do not match the layout", "layout")

    def walk(node):
        if isinstance(node, Leaf):
            return
        where = node.pos or (None, None)
        if node.party not in layout.party_names:
            raise ProtocolValidationError(f"unknown party {node.party!r}", "reference", *where)
        if node.opm not in tree.opms:
            raise ProtocolValidationError(f"unknown measurement {node.opm!r}", "reference", *where)
        m = tree.opms[node.opm]
        owners, _ = _locality_owner(layout, m.target, f"measurement {node.opm!r}", node.pos)
        if owners != {node.party}:
            raise ProtocolValidationError(
                f"party {node.party!r} cannot perform {node.opm!r}, which acts on {sorted(owners)}",
                "locality", *where)
        labels = [c.label for c in node.cases]
        if len(set(labels)) != len(labels):
            raise ProtocolValidationError(f"duplicate case labels under {node.opm!r}", "coverage", *where)
        missing = [lab for lab in m.labels if lab not in labels]
        if missing:
            raise ProtocolValidationError(
                f"measurement {node.opm!r} has no branch for outcome(s) {missing}", "coverage", *where)
        extra = [lab for lab in labels if lab not in m.labels]
        if extra:
            raise ProtocolValidationError(
                f"measurement {node.opm!r} has no outcome(s) {extra}", "coverage", *where)
        for c in node.cases:
            if c.apply is not None and c.apply not in tree.unitaries:
                raise ProtocolValidationError(
                    f"unknown unitary {c.apply!r}", "reference", *(c.pos or (None, None)))
            walk(c.child)

    walk(tree.root)


def _close(a, b, tol):
    return a.shape == b.shape and np.allclose(a, b, atol=tol, rtol=0)


def structurally_equal(t1: ProtocolTree, t2: ProtocolTree, tol: float = 1e-9) -> bool:
    """Same layout, same named operators (numerically) and same node structure."""
    if t1.layout != t2.layout or t1.root != t2.root or t1.family != t2.family:
        return False
    if set(t1.opms) != set(t2.opms) or set(t1.unitaries) != set(t2.unitaries):
        return False
    for name, m1 in t1.opms.items():
        m2 = t2.opms[name]
        if m1.target != m2.target or m1.labels != m2.labels:
            return False
        for p, q in zip(m1.outcomes, m2.outcomes):
            if not _close(p.matrix, q.matrix, tol):
                return False
    for name, u1 in t1.unitaries.items():
        u2 = t2.unitaries[name]
        if u1.target != u2.target or not _close(u1.matrix, u2.matrix, tol):
            return False
    return True


@dataclass(frozen=True)
class BranchTranscript:
    steps: tuple[tuple[str, str], ...]
    probability: float
    final_state: StateVector | None
    verdict: Leaf | None
    pruned: bool = False

    def outcomes_of(self, party: str) -> list[str]:
        return [o for p, o in self.steps if p == party]
