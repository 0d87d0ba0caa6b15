import itertools

import numpy as np
import pytest

from locc_activate.errors import InputError
from locc_activate.hilbert import apply_unitary, fidelity_up_to_phase, partial_trace, trace_distance
from locc_activate.states import (
    FAMILIES,
    alpha,
    bell4,
    bell_targets,
    construct_family,
    correction_unitary,
    ghz,
    ghz_branch_targets,
    relabel_unitary,
    s1,
    s1_layout,
    s2,
    s3,
    s4,
    s5,
    weak_targets,
)


def amps_by_composite(v):
    """{(party composite digits): amplitude} for nonzero amplitudes."""
    out = {}
    for digits, amp in v.support():
        i, key = 0, []
        for p in v.layout.parties:
            val = 0
            for d, x in zip(p.factors, digits[i:i + len(p.factors)]):
                val = val * d + x
            key.append(val)
            i += len(p.factors)
        out[tuple(key)] = amp
    return out


def test_alpha():
    assert [alpha(n) for n in (2, 3, 4)] == [1, 3, 7]


def test_s1_member_psi1():
    got = amps_by_composite(s1()["psi_1"])
    assert got == pytest.approx({(0, 0): 0.5, (0, 2): 0.5, (1, 1): 0.5, (1, 3): -0.5})


def test_s1_members_frozen():
    # hand-expanded from the defining sums
    expected = {
        "psi_2": {(0, 0): 0.5, (0, 2): -0.5, (1, 1): -0.5, (1, 3): -0.5},
        "psi_3": {(0, 1): 0.5, (0, 3): -0.5, (1, 0): -0.5, (1, 2): -0.5},
        "psi_4": {(0, 1): 0.5, (0, 3): 0.5, (1, 0): 0.5, (1, 2): -0.5},
    }
    S = s1()
    for lab, want in expected.items():
        assert amps_by_composite(S[lab]) == pytest.approx(want)


def test_s5_eta0_plus_n3():
    got = amps_by_composite(s5(3)["eta_0(+)"])
    # B and C digits listed separately; k = 0 -> (0, 0), alpha - k = 3 -> (1, 1)
    assert got == pytest.approx({(0, 0, 0): 0.5, (1, 1, 1): 0.5, (2, 0, 0): 0.5, (3, 1, 1): -0.5})


def test_s5_minus_sign_pattern():
    got = amps_by_composite(s5(3)["eta_1(-)"])
    assert got == pytest.approx({(0, 0, 1): 0.5, (1, 1, 0): -0.5, (2, 0, 1): -0.5, (3, 1, 0): -0.5})


@pytest.mark.parametrize("n", range(2, 7))
def test_s5_cardinality_and_orthogonality(n):
    S = s5(n)
    assert len(S) == 2 * (alpha(n) + 1) == 2**n
    assert S.max_offdiagonal() < 1e-12


def test_ghz_n2_is_bell_basis():
    g, b = ghz(2), bell4()
    pairs = {"G_0(+)": "phi+", "G_0(-)": "phi-", "G_1(+)": "psi+", "G_1(-)": "psi-"}
    for gl, bl in pairs.items():
        assert np.allclose(g[gl].amplitudes, b[bl].amplitudes)


@pytest.mark.parametrize("family, params, size", [
    ("bell4", {}, 4), ("s1", {}, 4), ("s2", {}, 4), ("s3", {"indices": (1, 2, 4)}, 3),
    ("s4", {}, 8), ("s5", {"n": 4}, 16), ("ghz", {"n": 5}, 32),
    ("weak_targets", {"branch": 2}, 4), ("ghz_branch_targets", {"n": 3, "branch": 2}, 8),
    ("eq3_targets", {"branch": 1}, 4), ("eq6_targets", {"n": 3}, 8),
])
def test_every_family_is_orthonormal(family, params, size):
    S = construct_family(family, **params)
    assert len(S) == size
    assert np.allclose(S.gram(), np.eye(size), atol=1e-12)


def test_family_registry_covers_ids():
    assert {"s1", "s2", "s3", "s4", "s5", "ghz", "bell4"} <= set(FAMILIES)


@pytest.mark.parametrize("family, params", [
    ("nope", {}), ("s5", {"n": 1}), ("s3", {"indices": (1, 1, 2)}),
    ("s3", {"indices": (1, 2)}), ("s1", {"n": 3}), ("weak_targets", {"branch": 3}),
])
def test_bad_family_requests(family, params):
    with pytest.raises(InputError):
        construct_family(family, **params)


def test_s2_members_factor():
    # tracing out the Bell pair recovers s1
    S, ref = s2(), s1()
    for i, (lab, v) in enumerate(S, start=1):
        rho = partial_trace(v, ["A2", "B2"])
        target = ref[f"psi_{i}"].amplitudes
        assert np.real(target.conj() @ rho.entries @ target) == pytest.approx(1)


def test_s3_is_a_subset():
    S = s3((2, 3, 4))
    assert S.labels == ["psi_2", "psi_3", "psi_4"]
    assert np.allclose(S["psi_3"].amplitudes, s1()["psi_3"].amplitudes)


def test_s4_is_orthogonal_with_eight_members():
    S = s4()
    assert len(S) == 8
    assert S.max_offdiagonal() < 1e-12


def test_s4_reduced_by_b1_merges_xi3_xi4():
    S = s4()
    r3, r4 = partial_trace(S["xi_3"], ["b1"]), partial_trace(S["xi_4"], ["b1"])
    assert trace_distance(r3, r4) < 1e-12
    # the common state is (|001><001| + |110><110|)/2 on (a1, a2, b2)
    want = np.zeros((8, 8))
    want[1, 1] = want[6, 6] = 0.5
    assert np.allclose(r3.entries, want)


def test_s5_invariant_under_permuting_trailing_parties():
    n = 4
    S = s5(n)
    vecs = {lab: v.tensor_view() for lab, v in S}
    for perm in itertools.permutations(range(2, n + 1)):
        axes = [0, 1] + list(perm)
        permuted = [np.transpose(t, axes).reshape(-1) for t in vecs.values()]
        for p in permuted:
            # each permuted member is again a member, up to sign
            assert any(abs(abs(np.vdot(p, v.amplitudes)) - 1) < 1e-12 for v in S.states)


def test_bell_targets_layout_and_fixed_digits():
    t = bell_targets(s1_layout(), ("a", "b2"), {"b1": 0})
    assert t.labels == ["phi+", "phi-", "psi+", "psi-"]
    got = amps_by_composite(t["psi-"])
    r = 1 / np.sqrt(2)
    assert got == pytest.approx({(0, 1): r, (1, 0): -r})
    with pytest.raises(InputError):
        bell_targets(s1_layout(), ("a", "b2"))


def test_weak_target_labels():
    assert weak_targets(1).labels == ["0p+1q.phi+", "0p-1q.phi-", "0q+1p.phi-", "0q-1p.phi-"]


# --- correction unitaries ---------------------------------------------------

def test_uk_base_case_is_identity():
    u = correction_unitary("uk", n=3, k=0, sign="+")
    assert np.allclose(u.matrix, np.eye(4))


def test_uk_completion_is_canonical():
    # n=3, k=1, sign -: columns 0 -> 1 and 3 -> -2; columns 1, 2 fill rows 0, 3
    u = correction_unitary("uk", n=3, k=1, sign="-").matrix.real
    want = np.zeros((4, 4))
    want[1, 0] = 1
    want[2, 3] = -1
    want[0, 1] = 1
    want[3, 2] = 1
    assert np.array_equal(u, want)


@pytest.mark.parametrize("n", range(2, 6))
def test_uk_maps_g0_onto_every_ghz_member(n):
    g = ghz(n)
    for lab, target in g:
        k, sign = int(lab[2:lab.index("(")]), lab[-2]
        out = apply_unitary(g["G_0(+)"], correction_unitary("uk", n=n, k=k, sign=sign))
        assert np.max(np.abs(out.amplitudes - target.amplitudes)) < 1e-12


def test_uk_parameter_errors():
    with pytest.raises(InputError):
        correction_unitary("uk", n=3, k=4, sign="+")
    with pytest.raises(InputError):
        correction_unitary("uk", n=3, k=0, sign="?")
    with pytest.raises(InputError):
        correction_unitary("nope")


@pytest.mark.parametrize("n", [3, 4, 5])
def test_relabel_takes_branch2_to_branch1(n):
    fix = correction_unitary("relabel_23_to_01")
    t1, t2 = ghz_branch_targets(n, 1), ghz_branch_targets(n, 2)
    for lab, v in t2:
        out = apply_unitary(v, fix)
        assert fidelity_up_to_phase(out, t1[lab.replace("'", "")]) == pytest.approx(1)


def test_phase_flip_targets_b2():
    u = correction_unitary("phase_flip_b1")
    assert u.target == ("b2",)
    assert np.allclose(u.matrix, np.diag([1, -1]))


def test_relabel_unitary_rejects_collisions():
    with pytest.raises(InputError):
        relabel_unitary(("a",), (2,), {0: 1, 1: 1})
    with pytest.raises(InputError):
        relabel_unitary(("a",), (2,), {0: 2})
