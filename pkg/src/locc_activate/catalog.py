"""Named local measurements and branch corrections used by the activation checks."""

from __future__ import annotations

from .errors import InputError
from .measurement import OPM, computational_opm, opm_from_spans, product_opm
from .protocol.builtin import ququad_pm_opm
from .states import relabel_unitary, s1_layout, s2_layout, s4_layout, s5_layout


def two_block(layout, target, name, first=(0, 1), second=(2, 3), labels=("N1", "N2")) -> OPM:
    """Two-outcome projective split of a ququad into two 2-d blocks."""
    return opm_from_spans(layout, target, {labels[0]: list(first), labels[1]: list(second)}, name)


def nb_s1() -> OPM:
    return two_block(s1_layout(), "B", "N_B")


def nb1_s2() -> OPM:
    return two_block(s2_layout(), ("b1", "b2"), "N_B1")


def ra_s4() -> OPM:
    return two_block(s4_layout(), "A", "R_A", (0, 3), (1, 2), ("R1", "R2"))


def nb_s4() -> OPM:
    return two_block(s4_layout(), "B", "N_B")


def ra_nb_s4() -> OPM:
    return product_opm(ra_s4(), nb_s4(), "R_A x N_B")


def ka_s5(n: int) -> OPM:
    return two_block(s5_layout(n), "A", "K_A", labels=("K1", "K2"))


def th_b2_corrections() -> dict:
    """Per-branch unitaries moving every product-measurement branch of s4
    onto the Bell basis of (a2, b2) with a1 = b1 = 0."""
    a_r1 = relabel_unitary(("a1", "a2"), (2, 2), {0: 0, 3: 1}, "A:3->1")
    a_r2 = relabel_unitary(("a1", "a2"), (2, 2), {1: 0, 2: 1}, "A:1->0,2->1")
    b_n2 = relabel_unitary(("b1", "b2"), (2, 2), {2: 0, 3: 1}, "B:2->0,3->1")
    return {
        "R1,N1": [a_r1],
        "R1,N2": [a_r1, b_n2],
        "R2,N1": [a_r2],
        "R2,N2": [a_r2, b_n2],
    }


def named_opms(max_n: int = 6) -> dict[str, OPM]:
    """Every measurement the shipped protocols and activation checks use."""
    out = {
        "s1:M_A": computational_opm(s1_layout(), "A", "M_A"),
        "s1:Bob4": ququad_pm_opm(s1_layout(), "B", "Bob4"),
        "s1:N_B": nb_s1(),
        "s2:N_B1": nb1_s2(),
        "s4:R_A": ra_s4(),
        "s4:N_B": nb_s4(),
        "s4:R_AxN_B": ra_nb_s4(),
    }
    for n in range(2, max_n + 1):
        out[f"s5({n}):K_A"] = ka_s5(n)
        out[f"s5({n}):N_A"] = opm_from_spans(
            s5_layout(n), "A",
            {"N1": [[2 ** -0.5, 0, 2 ** -0.5, 0]], "N2": [[2 ** -0.5, 0, -(2 ** -0.5), 0]],
             "N3": [[0, 2 ** -0.5, 0, 2 ** -0.5]], "N4": [[0, 2 ** -0.5, 0, -(2 ** -0.5)]]},
            "N_A",
        )
    return out


def get_opm(name: str) -> OPM:
    opms = named_opms()
    if name not in opms:
        raise InputError(f"unknown measurement {name!r}")
    return opms[name]
