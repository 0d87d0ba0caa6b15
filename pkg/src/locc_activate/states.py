"""Constructors for the state families, target sets and correction unitaries.

Composite ("bold") indices of a multi-factor party are the big-endian
encoding of its factor digits, so for a party made of two qubits
``0 = 00, 1 = 01, 2 = 10, 3 = 11``.  All constructors return normalized
states.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError
from .hilbert import (
    DEFAULT_TOL,
    PartyLayout,
    StateVector,
    UnitaryOperator,
    basis_state,
    gram_matrix,
    normalize,
    tensor,
)

SQRT2 = np.sqrt(2.0)


def alpha(n: int) -> int:
    """Largest (n-1)-bit integer, ``2**(n-1) - 1``."""
    return 2 ** (n - 1) - 1


@dataclass(frozen=True, eq=False)
class LabeledSet:
    """Ordered, labeled collection of states on one layout.

    Orthogonality is not enforced here (reports need to describe
    non-orthogonal sets too); :func:`construct_family` verifies it for every
    family it returns.
    """

    name: str
    layout: PartyLayout
    members: tuple[tuple[str, StateVector], ...]

    def __post_init__(self):
        members = tuple((str(lab), v) for lab, v in self.members)
        labels = [lab for lab, _ in members]
        if len(set(labels)) != len(labels):
            raise InputError(f"set {self.name!r}: duplicate member labels")
        for lab, v in members:
            if v.layout != self.layout:
                raise InputError(f"set {self.name!r}: member {lab!r} is on a different layout")
        object.__setattr__(self, "members", members)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @property
    def labels(self) -> list[str]:
        return [lab for lab, _ in self.members]

    @property
    def states(self) -> list[StateVector]:
        return [v for _, v in self.members]

    def __getitem__(self, label: str) -> StateVector:
        for lab, v in self.members:
            if lab == label:
                return v
        raise KeyError(label)

    def gram(self) -> np.ndarray:
        return gram_matrix(self.states)

    def max_offdiagonal(self) -> float:
        g = self.gram()
        return float(np.max(np.abs(g - np.diag(np.diag(g))), initial=0.0))

    def subset(self, labels: Sequence[str], name: str | None = None) -> "LabeledSet":
        return LabeledSet(name or self.name, self.layout, tuple((lab, self[lab]) for lab in labels))


def _party_state(layout: PartyLayout, terms) -> StateVector:
    """Normalized sum of ``coef * |i_1, i_2, ...>`` with one composite index per party."""
    amps = np.zeros(layout.total_dim, dtype=np.complex128)
    for coef, idx in terms:
        digits = []
        for p, i in zip(layout.parties, idx):
            digits.extend(int(x) for x in np.unravel_index(i, p.factors))
        amps[layout.encode(digits)] += coef
    return normalize(StateVector(layout, amps))


def _qubit_parties(n, first="A"):
    start = string.ascii_uppercase.index(first)
    names = string.ascii_uppercase[start:start + n]
    if len(names) < n:
        raise InputError(f"too many parties ({n})")
    return [(c, (2,)) for c in names]


def bell_layout() -> PartyLayout:
    return PartyLayout.build([("A", (2,)), ("B", (2,))])


def s1_layout() -> PartyLayout:
    return PartyLayout.build([("A", (2,), ("a",)), ("B", (2, 2), ("b1", "b2"))])


def s2_layout() -> PartyLayout:
    return PartyLayout.build([("A", (2, 2), ("A1", "A2")), ("B", (2, 2, 2), ("b1", "b2", "B2"))])


def s4_layout() -> PartyLayout:
    return PartyLayout.build([("A", (2, 2), ("a1", "a2")), ("B", (2, 2), ("b1", "b2"))])


def s5_layout(n: int) -> PartyLayout:
    return PartyLayout.build([("A", (2, 2), ("a1", "a2"))] + _qubit_parties(n - 1, "B"))


def ghz_layout(n: int) -> PartyLayout:
    return PartyLayout.build(_qubit_parties(n))


# coefficient, (Alice index, Bob composite index)
_S1_TERMS = {
    "psi_1": [(1, (0, 0)), (1, (0, 2)), (1, (1, 1)), (-1, (1, 3))],
    "psi_2": [(1, (0, 0)), (-1, (0, 2)), (-1, (1, 1)), (-1, (1, 3))],
    "psi_3": [(1, (0, 1)), (-1, (1, 2)), (-1, (1, 0)), (-1, (0, 3))],
    "psi_4": [(1, (0, 1)), (-1, (1, 2)), (1, (1, 0)), (1, (0, 3))],
}

_S4_TERMS = {
    "xi_1": [(1, (0, 0)), (1, (0, 2)), (1, (3, 1)), (-1, (3, 3))],
    "xi_2": [(1, (0, 0)), (-1, (0, 2)), (-1, (3, 1)), (-1, (3, 3))],
    "xi_3": [(1, (0, 1)), (-1, (3, 2)), (-1, (3, 0)), (-1, (0, 3))],
    "xi_4": [(1, (0, 1)), (1, (3, 2)), (1, (3, 0)), (-1, (0, 3))],
    "xi_5": [(1, (1, 0)), (1, (1, 2)), (1, (2, 1)), (-1, (2, 3))],
    "xi_6": [(1, (1, 0)), (1, (1, 2)), (-1, (2, 1)), (1, (2, 3))],
    "xi_7": [(1, (1, 1)), (-1, (2, 2)), (1, (2, 0)), (1, (1, 3))],
    "xi_8": [(1, (1, 1)), (-1, (2, 2)), (-1, (2, 0)), (-1, (1, 3))],
}

_BELL_TERMS = {
    "phi+": [(1, (0, 0)), (1, (1, 1))],
    "phi-": [(1, (0, 0)), (-1, (1, 1))],
    "psi+": [(1, (0, 1)), (1, (1, 0))],
    "psi-": [(1, (0, 1)), (-1, (1, 0))],
}


def _sign_char(s):
    return "+" if s > 0 else "-"


def bell4() -> LabeledSet:
    lay = bell_layout()
    return LabeledSet("bell4", lay, tuple((lab, _party_state(lay, t)) for lab, t in _BELL_TERMS.items()))


def s1() -> LabeledSet:
    lay = s1_layout()
    return LabeledSet("s1", lay, tuple((lab, _party_state(lay, t)) for lab, t in _S1_TERMS.items()))


def s2() -> LabeledSet:
    lay = s2_layout()
    left = PartyLayout.build([("A", (2,), ("A1",)), ("B", (2, 2), ("b1", "b2"))])
    right = PartyLayout.build([("A", (2,), ("A2",)), ("B", (2,), ("B2",))])
    phi = {s: _party_state(right, _BELL_TERMS[f"phi{s}"]) for s in "+-"}
    members = []
    for i, (lab, terms) in enumerate(_S1_TERMS.items(), start=1):
        psi = _party_state(left, terms)
        members.append((f"xi_{i}", tensor(psi, phi["+" if i == 1 else "-"], lay)))
    return LabeledSet("s2", lay, tuple(members))


def s3(indices: Sequence[int] = (1, 2, 3)) -> LabeledSet:
    idx = tuple(int(i) for i in indices)
    if len(idx) != 3 or len(set(idx)) != 3 or not all(1 <= i <= 4 for i in idx):
        raise InputError(f"s3 needs three distinct indices in 1..4, got {indices!r}")
    return s1().subset([f"psi_{i}" for i in idx], name="s3")


def s4() -> LabeledSet:
    lay = s4_layout()
    return LabeledSet("s4", lay, tuple((lab, _party_state(lay, t)) for lab, t in _S4_TERMS.items()))


def _check_n(n, family):
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise InputError(f"{family} needs an integer n >= 2, got {n!r}")
    return int(n)


def _split(n, value):
    """Digits of ``value`` as n-1 single-qubit parties."""
    return tuple(int(x) for x in format(value, f"0{n - 1}b"))


def s5(n: int) -> LabeledSet:
    """The 2**n states |0,k> ± |1,a-k> ± (|2,k> - |3,a-k>), a = alpha(n)."""
    n = _check_n(n, "s5")
    lay = s5_layout(n)
    a = alpha(n)
    members = []
    for k in range(a + 1):
        for s in (1, -1):
            terms = [
                (1, (0,) + _split(n, k)),
                (s, (1,) + _split(n, a - k)),
                (s, (2,) + _split(n, k)),
                (-1, (3,) + _split(n, a - k)),
            ]
            members.append((f"eta_{k}({_sign_char(s)})", _party_state(lay, terms)))
    return LabeledSet("s5", lay, tuple(members))


def ghz(n: int) -> LabeledSet:
    """N-qubit GHZ basis G_k(±) = |0>|k> ± |1>|a-k>."""
    n = _check_n(n, "ghz")
    lay = ghz_layout(n)
    a = alpha(n)
    members = []
    for k in range(a + 1):
        for s in (1, -1):
            terms = [(1, (0,) + _split(n, k)), (s, (1,) + _split(n, a - k))]
            members.append((f"G_{k}({_sign_char(s)})", _party_state(lay, terms)))
    return LabeledSet("ghz", lay, tuple(members))


def weak_targets(branch: int = 1) -> LabeledSet:
    """Four states (|0p> ± |1q>) x phi and (|0q> ± |1p>) x phi- on the s2 layout.

    ``branch`` 1 uses (p, q) = (0, 1), branch 2 uses (2, 3).
    """
    if branch not in (1, 2):
        raise InputError(f"branch must be 1 or 2, got {branch!r}")
    p, q = (0, 1) if branch == 1 else (2, 3)
    lay = s2_layout()
    left = PartyLayout.build([("A", (2,), ("A1",)), ("B", (2, 2), ("b1", "b2"))])
    right = PartyLayout.build([("A", (2,), ("A2",)), ("B", (2,), ("B2",))])
    phi = {s: _party_state(right, _BELL_TERMS[f"phi{s}"]) for s in "+-"}
    rows = [
        ("0p+1q.phi+", [(1, (0, p)), (1, (1, q))], "+"),
        ("0p-1q.phi-", [(1, (0, p)), (-1, (1, q))], "-"),
        ("0q+1p.phi-", [(1, (0, q)), (1, (1, p))], "-"),
        ("0q-1p.phi-", [(1, (0, q)), (-1, (1, p))], "-"),
    ]
    members = tuple((lab, tensor(_party_state(left, t), phi[s], lay)) for lab, t, s in rows)
    return LabeledSet(f"weak_targets[{branch}]", lay, members)


def ghz_branch_targets(n: int, branch: int = 1) -> LabeledSet:
    """Post-measurement forms of s5(n) after Alice's two-outcome measurement.

    Branch 1: ``phi_k(±) = |0,k> ± |1,a-k>``, i.e. |0>_a1 tensored with the
    GHZ basis on (a2, B, C, ...).  Branch 2: ``phi'_k(±) = |2,k> ∓ |3,a-k>``.
    """
    n = _check_n(n, "eq6_targets")
    if branch not in (1, 2):
        raise InputError(f"branch must be 1 or 2, got {branch!r}")
    lay = s5_layout(n)
    if branch == 1:
        first = PartyLayout.build([("A", (2,), ("a1",))])
        rest = PartyLayout.build([("A", (2,), ("a2",))] + [
            (p.name, p.factors, p.labels) for p in lay.parties[1:]
        ])
        zero = basis_state(first, (0,))
        members = tuple(
            (lab.replace("G_", "phi_"), tensor(zero, StateVector(rest, g.amplitudes), lay))
            for lab, g in ghz(n)
        )
        return LabeledSet("ghz_branch_targets[1]", lay, members)
    a = alpha(n)
    members = []
    for k in range(a + 1):
        for s in (1, -1):
            terms = [(1, (2,) + _split(n, k)), (-s, (3,) + _split(n, a - k))]
            members.append((f"phi'_{k}({_sign_char(s)})", _party_state(lay, terms)))
    return LabeledSet("ghz_branch_targets[2]", lay, tuple(members))


def bell_targets(layout: PartyLayout, qubits: Sequence[str], fixed: dict | None = None,
                 name: str = "bell") -> LabeledSet:
    """The Bell basis on two qubit factors of ``layout``, other factors fixed.

    ``fixed`` gives the digit of every factor not in ``qubits``.
    """
    fixed = dict(fixed or {})
    if len(qubits) != 2:
        raise InputError("bell_targets needs exactly two qubit factors")
    covered = set(qubits) | set(fixed)
    if covered != set(layout.labels) or len(qubits) + len(fixed) != len(layout.labels):
        raise InputError(f"qubits {qubits} and fixed {sorted(fixed)} must cover {layout.labels} exactly")
    qa, qb = layout.positions(tuple(qubits))
    members = []
    for lab, terms in _BELL_TERMS.items():
        amps = np.zeros(layout.total_dim, dtype=np.complex128)
        for coef, (x, y) in terms:
            digits = [fixed.get(l, 0) for l in layout.labels]
            digits[qa], digits[qb] = x, y
            amps[layout.encode(digits)] += coef
        members.append((lab, normalize(StateVector(layout, amps))))
    return LabeledSet(name, layout, tuple(members))


FAMILIES = {
    "bell4": lambda **kw: bell4(),
    "s1": lambda **kw: s1(),
    "s2": lambda **kw: s2(),
    "s3": lambda indices=(1, 2, 3), **kw: s3(indices),
    "s4": lambda **kw: s4(),
    "s5": lambda n=3, **kw: s5(n),
    "ghz": lambda n=3, **kw: ghz(n),
    "weak_targets": lambda branch=1, **kw: weak_targets(branch),
    "ghz_branch_targets": lambda n=3, branch=1, **kw: ghz_branch_targets(n, branch),
}
FAMILIES["eq3_targets"] = FAMILIES["weak_targets"]
FAMILIES["eq6_targets"] = FAMILIES["ghz_branch_targets"]

_FAMILY_PARAMS = {
    "s3": {"indices"},
    "s5": {"n"},
    "ghz": {"n"},
    "weak_targets": {"branch"},
    "eq3_targets": {"branch"},
    "ghz_branch_targets": {"n", "branch"},
    "eq6_targets": {"n", "branch"},
}


def construct_family(family: str, tol: float = DEFAULT_TOL, **params) -> LabeledSet:
    """Build a named family and verify it is a normalized orthogonal set."""
    if family not in FAMILIES:
        raise InputError(f"unknown family {family!r}; known: {', '.join(sorted(FAMILIES))}")
    params = {k: v for k, v in params.items() if v is not None}
    extra = set(params) - _FAMILY_PARAMS.get(family, set())
    if extra:
        raise InputError(f"family {family!r} takes no parameter(s) {sorted(extra)}")
    out = FAMILIES[family](**params)
    g = out.gram()
    resid = float(np.max(np.abs(g - np.eye(len(out)))))
    if resid > tol:
        raise AssertionError(f"family {family!r} failed its orthonormality check ({resid:.3e})")
    return out


def relabel_unitary(target: Sequence[str], dims: Sequence[int], mapping: dict,
                    name: str = "") -> UnitaryOperator:
    """Signed permutation of the target's basis.

    ``mapping`` sends a source basis index to ``dest`` or ``(dest, sign)``.
    Unmapped sources go to unused destinations in ascending order with sign
    +1, which fixes a canonical completion.
    """
    d = int(np.prod(dims))
    cols: dict[int, tuple[int, int]] = {}
    for src, dst in mapping.items():
        dst, sign = dst if isinstance(dst, tuple) else (dst, 1)
        if not (0 <= src < d and 0 <= dst < d):
            raise InputError(f"relabel {src}->{dst} outside dimension {d}")
        cols[int(src)] = (int(dst), int(sign))
    used = [dst for dst, _ in cols.values()]
    if len(set(used)) != len(used):
        raise InputError("relabel mapping is not injective")
    free_src = [j for j in range(d) if j not in cols]
    free_dst = [i for i in range(d) if i not in used]
    for src, dst in zip(free_src, free_dst):
        cols[src] = (dst, 1)
    m = np.zeros((d, d), dtype=np.complex128)
    for src, (dst, sign) in cols.items():
        m[dst, src] = sign
    return UnitaryOperator(tuple(target), tuple(dims), m, name)


def correction_unitary(kind: str, **params) -> UnitaryOperator:
    """Named correction unitaries.

    ``phase_flip_b1``
        ``diag(1, -1)`` on the qubit of Bob's first ququad that survives his
        two-outcome measurement (factor ``b2`` of the s2 layout).
    ``relabel_23_to_01`` / ``u3``
        On a ququad (default Alice's ``a1, a2``): ``|2> -> |0>``,
        ``|3> -> -|1>``, ``|0> -> |2>``, ``|1> -> |3>``.
    ``uk``
        ``n``, ``k``, ``sign``: on the last n-1 qubits of the GHZ layout,
        ``|0..0> -> |k>`` and ``|1..1> -> sign |a-k>``, completed canonically.
    """
    if kind == "phase_flip_b1":
        target = params.get("target", "b2")
        return UnitaryOperator((target,), (2,), np.diag([1.0, -1.0]), kind)
    if kind in ("relabel_23_to_01", "u3"):
        target = tuple(params.get("target", ("a1", "a2")))
        return relabel_unitary(target, (2, 2), {2: 0, 3: (1, -1), 0: 2, 1: 3}, kind)
    if kind == "uk":
        n = _check_n(params.get("n"), "uk")
        k = params.get("k")
        sign = params.get("sign", 1)
        sign = {"+": 1, "-": -1}.get(sign, sign)
        a = alpha(n)
        if not isinstance(k, (int, np.integer)) or not 0 <= k <= a:
            raise InputError(f"uk needs 0 <= k <= {a}, got {k!r}")
        if sign not in (1, -1):
            raise InputError(f"uk sign must be +1 or -1, got {sign!r}")
        target = tuple(params.get("target") or ghz_layout(n).labels[1:])
        return relabel_unitary(target, (2,) * (n - 1), {0: int(k), a: (a - int(k), sign)},
                               f"U_{k}({_sign_char(sign)})")
    raise InputError(f"unknown correction unitary {kind!r}")
