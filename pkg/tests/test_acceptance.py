"""Acceptance criteria 1-10, one verdict line each (shown in the terminal summary)."""
import itertools
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from locc_activate import catalog
from locc_activate.hilbert import partial_trace, schmidt_coefficients, trace_distance
from locc_activate.measurement import measure
from locc_activate.protocol import builtin_protocol, discrimination_table, verify_discrimination
from locc_activate.states import bell4, ghz, s1, s2, s3, s4, s5
from locc_activate.verify import CRITERIA, run_claim
from locc_activate.verify.suite import TABLE_1, th_b2_literal_quarter


def record(k, ok, note=""):
    ACCEPTANCE[k] = f"criterion {k:>2}: {'PASS' if ok else 'FAIL'} [{CRITERIA[k]}]" + (f" {note}" if note else "")
    return ok


def claim(k):
    rep = run_claim(CRITERIA[k])
    failing = "; ".join(e.name for e in rep.failures())
    return rep, failing


def test_criterion_1_orthogonality():
    sets = [s1(), s2(), s4(), bell4()] + [s3(c) for c in itertools.combinations(range(1, 5), 3)]
    sets += [s5(n) for n in range(2, 7)] + [ghz(n) for n in range(2, 7)]
    worst = max(S.max_offdiagonal() for S in sets)
    rep, failing = claim(1)
    ok = record(1, rep.passed and worst < 1e-12, f"max off-diagonal {worst:.1e} over {len(sets)} sets")
    assert ok, failing


def test_criterion_2_prop1():
    res = verify_discrimination(s1(), builtin_protocol("prop1"))
    pairs = {"b1": ("psi_3", "psi_4"), "b2": ("psi_2", "psi_3"), "a": ("psi_2", "psi_4")}
    S = s1()
    dists = {k: trace_distance(partial_trace(S[x], [k]), partial_trace(S[y], [k]))
             for k, (x, y) in pairs.items()}
    rep, failing = claim(2)
    ok = record(2, rep.passed and res.passed and max(dists.values()) < 1e-12,
                f"{res.summary()}, max pair distance {max(dists.values()):.1e}")
    assert ok, failing


def test_criterion_3_prop2():
    res = verify_discrimination(s2(), builtin_protocol("prop2"))
    S = s2()
    r = {lab: partial_trace(v, ["A1", "b1", "b2"]).entries for lab, v in S}
    phi_minus = [("xi_2", "xi_3"), ("xi_2", "xi_4"), ("xi_3", "xi_4")]
    ovs = [np.real(np.trace(r[a] @ r[b])) for a, b in phi_minus]
    rep, failing = claim(3)
    ok = record(3, rep.passed and res.passed and min(ovs) > 0.9,
                f"{res.summary()}, phi- pair overlaps {min(ovs):.12f}")
    assert ok, failing


def test_criterion_4_weak_activation():
    rep, failing = claim(4)
    assert record(4, rep.passed), failing


def test_criterion_5_s3():
    rep, failing = claim(5)
    assert record(5, rep.passed, "all four 3-subsets"), failing


def test_criterion_6_th_b1():
    S = s1()
    coeffs = []
    for _, v in S:
        for r in measure(v, catalog.nb_s1()):
            coeffs.append(schmidt_coefficients(r.post_state, ["a"]))
    dev = max(np.max(np.abs(c[:2] - 1 / np.sqrt(2))) for c in coeffs)
    rep, failing = claim(6)
    ok = record(6, rep.passed and len(coeffs) == 8 and dev < 1e-10,
                f"8 post-states, Schmidt deviation {dev:.1e}")
    assert ok, failing


def test_criterion_7_th_b2():
    rep, failing = claim(7)
    literal, probs = th_b2_literal_quarter()
    per = tuple(round(p, 12) for p in probs["xi_1"].values())
    note = ("Bell-target matching passes; literal 1/4 per member is false, "
            f"xi_1 branch probabilities are {per}") if rep.passed and not literal else failing
    record(7, rep.passed and literal, note)
    # the checkable content (target matching, 1/4 marginal, exact distribution) must hold
    assert rep.passed, failing


@pytest.mark.xfail(strict=True, reason="each member reaches only the two branches of its R block")
def test_criterion_7_literal_quarter_per_member():
    literal, probs = th_b2_literal_quarter()
    assert literal, probs


def test_criterion_8_prop4_table():
    rows, cols, cells = discrimination_table(s5(3), builtin_protocol("prop4", n=3), "A")
    got = {(r, c): cells[(r, c)] for r in rows for c in cols}
    want = {(r, c): [lab] for r, row in TABLE_1.items() for c, lab in row.items()}
    t0 = time.perf_counter()
    big = verify_discrimination(s5(6), builtin_protocol("prop4", n=6))
    secs = time.perf_counter() - t0
    rep, failing = claim(8)
    ok = record(8, rep.passed and got == want and big.passed and secs < 5,
                f"16/16 cells, N=6 {big.summary()} in {secs:.2f} s")
    assert ok, failing


def test_criterion_9_theo5():
    rep, failing = claim(9)
    assert record(9, rep.passed, f"max residual {rep.max_residual():.1e}"), failing


def test_criterion_10_properties():
    rep, failing = claim(10)
    assert record(10, rep.passed), failing
