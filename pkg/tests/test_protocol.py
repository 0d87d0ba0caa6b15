import numpy as np
import pytest

from locc_activate.errors import InputError, PreconditionError, ProtocolSyntaxError, ProtocolValidationError
from locc_activate.hilbert import UnitaryOperator, basis_state, embed_operator
from locc_activate.measurement import computational_opm
from locc_activate.protocol import (
    Case,
    Leaf,
    MeasureNode,
    ProtocolTree,
    builtin_protocol,
    discrimination_table,
    enumerate_branches,
    format_protocol,
    parse_protocol,
    shipped_protocol_files,
    structurally_equal,
    verify_discrimination,
)
from locc_activate.states import LabeledSet, bell4, s1, s1_layout, s2, s5

HEADER = """
layout A(a:2) B(b1:2,b2:2)
opm MA on A:
  outcome 0 span { |0> }
  outcome 1 span { |1> }
opm NB on B:
  outcome N1 span { |0> ; |1> }
  outcome N2 span { |2> ; |3> }
"""


def depth(node):
    if isinstance(node, Leaf):
        return 0
    return 1 + max(depth(c.child) for c in node.cases)


def leaves(node):
    if isinstance(node, Leaf):
        return [node]
    return [x for c in node.cases for x in leaves(c.child)]


# --- parsing -------------------------------------------------------------------

def test_prop1_file_has_depth_two_and_eight_leaves():
    tree = parse_protocol(shipped_protocol_files()["prop1.locc"])
    assert depth(tree.root) == 2
    assert len(leaves(tree.root)) == 8
    assert tree.family == ("s1", ())


def test_prop1_file_matches_builtin():
    tree = parse_protocol(shipped_protocol_files()["prop1.locc"])
    assert structurally_equal(tree, builtin_protocol("prop1"))


def test_missing_branch_is_a_coverage_error():
    text = HEADER + "(measure B NB (case N1 (identify psi_1)))"
    with pytest.raises(ProtocolValidationError) as exc:
        parse_protocol(text)
    assert exc.value.kind == "coverage"
    assert "N2" in str(exc.value)


def test_extra_branch_is_a_coverage_error():
    text = HEADER + "(measure A MA (case 0 (output x)) (case 1 (output y)) (case 2 (output z)))"
    with pytest.raises(ProtocolValidationError) as exc:
        parse_protocol(text)
    assert exc.value.kind == "coverage"


def test_wrong_party_is_a_locality_error():
    text = HEADER + "(measure A NB (case N1 (output x)) (case N2 (output y)))"
    with pytest.raises(ProtocolValidationError) as exc:
        parse_protocol(text)
    assert exc.value.kind == "locality"
    assert exc.value.line is not None


def test_unknown_opm_is_a_reference_error():
    text = HEADER + "(measure A ZZ (case 0 (output x)))"
    with pytest.raises(ProtocolValidationError) as exc:
        parse_protocol(text)
    assert exc.value.kind == "reference"


def test_nonlocal_unitary_is_rejected():
    lay = s1_layout()
    opms = {"Z": computational_opm(lay, "A", "Z")}
    swap = UnitaryOperator(("a", "b1"), (2, 2), np.eye(4)[[0, 2, 1, 3]], "swap")
    root = MeasureNode("A", "Z", (Case("0", Leaf("output", "x"), apply="swap"),
                                  Case("1", Leaf("output", "y"))))
    with pytest.raises(ProtocolValidationError) as exc:
        ProtocolTree(lay, opms, {"swap": swap}, root)
    assert exc.value.kind == "locality"


def test_unitary_target_must_name_a_party():
    text = HEADER + "unitary U on a, b1: map { |0,0> -> |1,1> ; |1,1> -> |0,0> }\n(output x)"
    with pytest.raises(ProtocolSyntaxError, match="line 9"):
        parse_protocol(text)


@pytest.mark.parametrize("text, where", [
    ("layout A(a:2)\n(measure A", "line 2"),
    ("layout A(a:2) B:2\nopm M on A:\n  outcome 0 span { |0> ; }\n(output x)", "line 3"),
    ("layout\n(output x)", "line"),
    ("layout A:2 B:2\n(identify x", "line 2"),
    ("layout A:2 B:2\n(frobnicate x)", "line 2"),
])
def test_syntax_errors_carry_location(text, where):
    with pytest.raises(ProtocolSyntaxError) as exc:
        parse_protocol(text)
    assert where in str(exc.value)
    assert exc.value.line >= 1 and exc.value.col >= 1


def test_span_overlap_in_file_is_an_error():
    text = """layout A(a:2) B(b:2)
opm M on A:
  outcome x span { |0> }
  outcome y span { |0> + |1> }
(output z)"""
    with pytest.raises((ProtocolSyntaxError, ProtocolValidationError, InputError)):
        parse_protocol(text)


def test_leaf_only_tree():
    tree = parse_protocol("layout A(a:2) B(b:2)\n(output done)")
    ts = enumerate_branches(tree, basis_state(tree.layout, (0, 1)))
    assert len(ts) == 1
    assert ts[0].probability == 1
    assert ts[0].verdict == Leaf("output", "done")


@pytest.mark.parametrize("name", sorted(shipped_protocol_files()))
def test_round_trip_of_shipped_files(name):
    t1 = parse_protocol(shipped_protocol_files()[name])
    printed = format_protocol(t1)
    t2 = parse_protocol(printed)
    assert structurally_equal(t1, t2)
    assert format_protocol(t2) == printed


@pytest.mark.parametrize("name, n", [("prop1", None), ("prop2", None), ("prop4", 2), ("prop4", 4)])
def test_round_trip_of_builtins(name, n):
    t1 = builtin_protocol(name, n=n)
    assert structurally_equal(t1, parse_protocol(format_protocol(t1)))


def test_complex_coefficients_round_trip():
    text = """layout A(a:2) B(b:2)
opm M on A:
  outcome x span { |0> + (0+1j)*|1> }
  outcome y span { |0> - (0+1j)*|1> }
(measure A M (case x (output p)) (case y (output q)))"""
    t1 = parse_protocol(text)
    span = t1.opms["M"].outcome("x").span[0]
    assert np.allclose(span, [1 / np.sqrt(2), 1j / np.sqrt(2)])
    assert structurally_equal(t1, parse_protocol(format_protocol(t1)))


def test_structural_inequality():
    assert not structurally_equal(builtin_protocol("prop1"), builtin_protocol("prop2"))


# --- locality of measurements --------------------------------------------------

@pytest.mark.parametrize("name, n", [("prop1", None), ("prop2", None), ("prop4", 3)])
def test_every_node_acts_locally(name, n):
    tree = builtin_protocol(name, n=n)
    lay = tree.layout

    def walk(node):
        if isinstance(node, Leaf):
            return
        m = tree.opms[node.opm]
        assert {lay.owners[p] for p in lay.positions(m.target)} == {node.party}
        for p in m.outcomes:
            full = embed_operator(lay, p.matrix, m.target)
            # the embedded projector commutes with any operator on the other parties
            others = [lab for lab in lay.labels if lab not in lay.party(node.party).labels]
            z = np.diag([1, -1])
            for lab in others:
                zf = embed_operator(lay, z, [lab])
                assert np.allclose(full @ zf, zf @ full)
        for c in node.cases:
            walk(c.child)

    walk(tree.root)


def test_programmatic_tree_validation():
    lay = s1_layout()
    opms = {"Z": computational_opm(lay, "A", "Z")}
    root = MeasureNode("A", "Z", (Case("0", Leaf("output", "x")),))
    with pytest.raises(ProtocolValidationError):
        ProtocolTree(lay, opms, {}, root)
    with pytest.raises(ProtocolValidationError):
        ProtocolTree(lay, opms, {}, MeasureNode("B", "Z", (Case("0", Leaf("output", "x")),
                                                          Case("1", Leaf("output", "y")))))


# --- simulation ------------------------------------------------------------------

def test_prop1_on_psi2_has_two_transcripts():
    ts = enumerate_branches(builtin_protocol("prop1"), s1()["psi_2"])
    assert [t.outcomes_of("A") for t in ts] == [["0"], ["1"]]
    assert [t.probability for t in ts] == pytest.approx([0.5, 0.5])
    assert all(t.verdict == Leaf("identify", "psi_2") for t in ts)


def test_prop4_on_eta0_plus():
    ts = enumerate_branches(builtin_protocol("prop4", n=3), s5(3)["eta_0(+)"])
    paths = {("".join(o for p, o in t.steps if p != "A"), t.outcomes_of("A")[0]) for t in ts}
    assert paths == {("00", "N1"), ("11", "N4")}
    assert all(t.verdict == Leaf("identify", "eta_0(+)") for t in ts)


def test_pruned_branches_reported_on_request():
    tree = builtin_protocol("prop1")
    ts = enumerate_branches(tree, s1()["psi_1"], include_pruned=True)
    # three of Bob's four outcomes are impossible after either Alice outcome
    assert sum(t.pruned for t in ts) == 6
    assert sum(t.probability for t in ts) == pytest.approx(1)


def test_enumerate_rejects_wrong_layout():
    with pytest.raises(InputError):
        enumerate_branches(builtin_protocol("prop1"), s2()["xi_1"])


def test_prop1_identifies_s1():
    rep = verify_discrimination(s1(), builtin_protocol("prop1"))
    assert rep.passed and rep.summary() == "4/4 identified"


def test_prop2_identifies_s2():
    assert verify_discrimination(s2(), builtin_protocol("prop2")).passed


@pytest.mark.parametrize("n", range(2, 7))
def test_prop4_identifies_s5(n):
    rep = verify_discrimination(s5(n), builtin_protocol("prop4", n=n))
    assert rep.passed
    assert rep.identified == 2**n


def test_prop4_depth():
    assert depth(builtin_protocol("prop4", n=3).root) == 3
    assert depth(builtin_protocol("prop4", n=2).root) == 2


def test_prop4_table_for_three_parties():
    rows, cols, cells = discrimination_table(s5(3), builtin_protocol("prop4", n=3), "A")
    assert rows == ["N1", "N2", "N3", "N4"]
    assert cols == ["00", "01", "10", "11"]
    assert cells[("N1", "10")] == ["eta_2(+)"]
    assert cells[("N3", "00")] == ["eta_3(-)"]
    assert all(len(v) == 1 for v in cells.values())
    assert len(cells) == 16


@pytest.mark.parametrize("party", ["A", "B"])
def test_bell_basis_defeats_single_round_trees(party):
    B = bell4()
    lay = B.layout
    m = computational_opm(lay, party, "Z")
    # best guess per outcome: any labelling fails for some member
    for guess0 in B.labels:
        for guess1 in B.labels:
            tree = ProtocolTree(lay, {"Z": m}, {}, MeasureNode(party, "Z", (
                Case("0", Leaf("identify", guess0)), Case("1", Leaf("identify", guess1)))))
            assert not verify_discrimination(B, tree).passed


def test_discrimination_needs_orthogonal_set():
    S = s1()
    dup = LabeledSet("dup", S.layout, (("x", S["psi_1"]), ("y", S["psi_1"])))
    with pytest.raises(PreconditionError):
        verify_discrimination(dup, builtin_protocol("prop1"))


def test_unknown_builtin():
    with pytest.raises(InputError):
        builtin_protocol("prop9")
    with pytest.raises(InputError):
        builtin_protocol("prop4", n=1)


def test_weak_activation_file_applies_flip():
    tree = parse_protocol(shipped_protocol_files()["weak_activation.locc"])
    ts = enumerate_branches(tree, s2()["xi_1"])
    assert [t.verdict.value for t in ts] == ["weak_targets_1", "weak_targets_2"]
    assert [t.probability for t in ts] == pytest.approx([0.5, 0.5])
