"""The discrimination protocols shipped as ready-made trees."""

from __future__ import annotations

import numpy as np

from ..errors import InputError
from ..measurement import OPM, computational_opm, opm_from_spans
from ..states import alpha, s1_layout, s2_layout, s5_layout
from .model import Case, Leaf, MeasureNode, ProtocolTree

R = 1 / np.sqrt(2)


def _e(d, *pairs):
    v = np.zeros(d)
    for i, c in pairs:
        v[i] = c
    return v


def ququad_pm_opm(layout, target, name) -> OPM:
    """Four-outcome basis {0±2, 1±3} on a two-qubit target."""
    spans = {
        "0+2": [_e(4, (0, R), (2, R))],
        "0-2": [_e(4, (0, R), (2, -R))],
        "1+3": [_e(4, (1, R), (3, R))],
        "1-3": [_e(4, (1, R), (3, -R))],
    }
    return opm_from_spans(layout, target, spans, name)


# Bob's outcome -> member, for each outcome of Alice's qubit
_TWO_ROUND_LEAVES = {
    "0": {"0+2": 1, "0-2": 2, "1+3": 4, "1-3": 3},
    "1": {"0+2": 3, "0-2": 4, "1+3": 2, "1-3": 1},
}


def _two_round(layout, alice_target, bob_target, member, family):
    opms = {
        "MA": computational_opm(layout, alice_target, "MA"),
        "NB": ququad_pm_opm(layout, bob_target, "NB"),
    }
    cases = []
    for a, leaves in _TWO_ROUND_LEAVES.items():
        bob = MeasureNode("B", "NB", tuple(
            Case(b, Leaf("identify", f"{member}_{i}")) for b, i in leaves.items()
        ))
        cases.append(Case(a, bob))
    return ProtocolTree(layout, opms, {}, MeasureNode("A", "MA", tuple(cases)), family)


def prop1() -> ProtocolTree:
    """Alice measures her qubit; Bob measures {0±2, 1±3} on his ququad."""
    return _two_round(s1_layout(), "a", ("b1", "b2"), "psi", ("s1", ()))


def prop2() -> ProtocolTree:
    """The same two rounds on the A1 | b1 b2 part of the s2 states."""
    return _two_round(s2_layout(), "A1", ("b1", "b2"), "xi", ("s2", ()))


def prop4(n: int) -> ProtocolTree:
    """Parties 2..n read k in the computational basis, then Alice measures
    {0+2, 0-2, 1+3, 1-3}."""
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise InputError(f"prop4 needs n >= 2, got {n!r}")
    layout = s5_layout(n)
    a = alpha(n)
    others = layout.party_names[1:]
    opms = {f"Z_{p}": computational_opm(layout, p, f"Z_{p}") for p in others}
    spans = {
        "N1": [_e(4, (0, R), (2, R))],
        "N2": [_e(4, (0, R), (2, -R))],
        "N3": [_e(4, (1, R), (3, R))],
        "N4": [_e(4, (1, R), (3, -R))],
    }
    opms["NA"] = opm_from_spans(layout, "A", spans, "NA")

    def alice(k):
        leaves = {"N1": f"eta_{k}(+)", "N2": f"eta_{k}(-)",
                  "N3": f"eta_{a - k}(-)", "N4": f"eta_{a - k}(+)"}
        return MeasureNode("A", "NA", tuple(Case(o, Leaf("identify", m)) for o, m in leaves.items()))

    def build(depth, bits):
        if depth == len(others):
            return alice(int(bits, 2))
        p = others[depth]
        return MeasureNode(p, f"Z_{p}", tuple(Case(b, build(depth + 1, bits + b)) for b in "01"))

    return ProtocolTree(layout, opms, {}, build(0, ""), ("s5", (("n", int(n)),)))


BUILTINS = {"prop1": prop1, "prop2": prop2, "prop4": prop4}


def builtin_protocol(name: str, n: int | None = None) -> ProtocolTree:
    if name not in BUILTINS:
        raise InputError(f"unknown builtin protocol {name!r}; known: {', '.join(BUILTINS)}")
    if name == "prop4":
        return prop4(3 if n is None else n)
    return BUILTINS[name]()
