"""``locc-activate`` command line.

Exit codes: 0 success, 2 usage or parse error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .errors import InputError, LoccError, ProtocolError
from .hilbert import DEFAULT_TOL
from .protocol import builtin_protocol, discrimination_table, parse_protocol, verify_discrimination
from .protocol.builtin import BUILTINS
from .render import expansion, render_state
from .states import FAMILIES, LabeledSet, construct_family
from .verify import CLAIMS, default_patterns, dumps, redundancy_scan, run_suite
from .verify.report import _jsonable

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 2, 3
MAX_TOL = 1e-3
N_RANGE = (2, 8)


class UsageError(Exception):
    pass


def _tolerance(arg) -> float:
    raw = arg if arg is not None else os.environ.get("LOCC_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise UsageError(f"tolerance {raw!r} is not a number") from None
    if not 0 < tol <= MAX_TOL:
        raise UsageError(f"tolerance must lie in (0, {MAX_TOL:g}], got {tol:g}")
    return tol


def _check_n(n):
    if n is not None and not N_RANGE[0] <= n <= N_RANGE[1]:
        raise UsageError(f"--n must lie in [{N_RANGE[0]}, {N_RANGE[1]}], got {n}")


def _indices(raw):
    if raw is None:
        return None
    try:
        return tuple(int(x) for x in raw.split(","))
    except ValueError:
        raise UsageError(f"--indices expects comma-separated integers, got {raw!r}") from None


def _family(args, tol) -> LabeledSet:
    _check_n(args.n)
    params = {"n": args.n, "indices": _indices(getattr(args, "indices", None)),
              "branch": getattr(args, "branch", None)}
    try:
        return construct_family(args.set, tol=max(tol, DEFAULT_TOL), **params)
    except TypeError as exc:
        raise UsageError(str(exc)) from None


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _doc(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


# --- construct ----------------------------------------------------------------

def cmd_construct(args) -> int:
    tol = _tolerance(args.tol)
    st = _family(args, tol)
    g = st.gram()
    resid = float(np.max(np.abs(g - np.eye(len(st)))))
    if args.format == "doc":
        doc = {
            "family": args.set,
            "layout": st.layout.describe(),
            "members": [{"label": lab, "terms": [list(t) for t in expansion(v)]} for lab, v in st],
            "gram_max_deviation": resid,
            "gram_identity": resid <= tol,
        }
        _emit(_doc(doc), args.out)
        return EXIT_OK
    lines = [f"{st.name}: {len(st)} members on {st.layout.describe()}"]
    width = max(len(lab) for lab in st.labels)
    for lab, v in st:
        lines.append(f"  {lab:<{width}} = {render_state(v)}")
    verdict = "identity" if resid <= tol else "NOT identity"
    lines.append(f"Gram = {verdict} (max deviation {resid:.3e}, tol {tol:g})")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# --- run ----------------------------------------------------------------------

def _load_tree(args):
    if bool(args.protocol) == bool(args.builtin):
        raise UsageError("give exactly one of --protocol FILE or --builtin NAME")
    if args.builtin:
        if args.builtin not in BUILTINS:
            raise UsageError(f"unknown builtin {args.builtin!r}; known: {', '.join(BUILTINS)}")
        _check_n(args.n)
        return builtin_protocol(args.builtin, n=args.n)
    try:
        text = Path(args.protocol).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {args.protocol}: {exc.strerror}") from None
    return parse_protocol(text)


def _table_text(rows, cols, cells) -> list[str]:
    width = max([len(c) for c in cols] + [len(x) for v in cells.values() for x in [", ".join(v)]] + [2])
    head = " " * 4 + " | ".join(f"{c:^{width}}" for c in cols)
    out = [head, "-" * len(head)]
    for r in rows:
        out.append(f"{r:<4}" + " | ".join(f"{', '.join(cells.get((r, c), [])) or '-':^{width}}" for c in cols))
    return out


def cmd_run(args) -> int:
    tol = _tolerance(args.tol)
    tree = _load_tree(args)
    if args.set is None:
        if tree.family is None:
            raise UsageError("the protocol declares no family; pass --set")
        args.set = tree.family[0]
        params = dict(tree.family[1])
        if args.n is None and "n" in params:
            args.n = params["n"]
    st = _family(args, tol)
    if st.layout != tree.layout:
        raise UsageError(f"set layout {st.layout.describe()} differs from protocol layout "
                         f"{tree.layout.describe()}")
    t0 = time.perf_counter()
    report = verify_discrimination(st, tree, tol)
    seconds = time.perf_counter() - t0
    table = None
    if st.name == "s5" and "A" in tree.layout.party_names:
        table = discrimination_table(st, tree, "A", tol)
    if args.format == "doc":
        doc = {
            "set": st.name,
            "passed": report.passed,
            "identified": report.identified,
            "members": [
                {
                    "label": m.label,
                    "identified_probability": m.identified_probability,
                    "total_probability": m.total_probability,
                    "branches": [
                        {"steps": [list(s) for s in t.steps], "probability": t.probability,
                         "verdict": str(t.verdict)}
                        for t in m.transcripts
                    ],
                }
                for m in report.members
            ],
        }
        if table is not None:
            rows, cols, cells = table
            doc["table"] = {"rows": rows, "cols": cols,
                            "cells": {f"{r}|{c}": cells.get((r, c), []) for r in rows for c in cols}}
        _emit(_doc(doc), args.out)
    else:
        lines = [f"{st.name} under {args.builtin or args.protocol}: {report.summary()}"]
        for m in report.members:
            mark = "ok  " if m.passed else "FAIL"
            lines.append(f"  {mark} {m.label}: p(identified) = {m.identified_probability:.12g}")
            for t in m.transcripts:
                path = " ".join(f"{p}={o}" for p, o in t.steps)
                lines.append(f"         {path:<30} p = {t.probability:.6g}  -> {t.verdict}")
        if table is not None:
            lines.append("")
            lines.append("Alice's outcome (rows) x other parties' outcomes (columns):")
            lines.extend(_table_text(*table))
        lines.append(f"verdict: {'pass' if report.passed else 'fail'} ({seconds:.3f} s)")
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if report.passed else EXIT_FAIL


# --- verify-all ---------------------------------------------------------------

def cmd_verify_all(args) -> int:
    tol = _tolerance(args.tol) if (args.tol is not None or "LOCC_TOL" in os.environ) else None
    claims = args.claim or None
    if claims:
        for c in claims:
            if c not in CLAIMS:
                raise UsageError(f"unknown claim {c!r}; known: {', '.join(CLAIMS)}")
    t0 = time.perf_counter()
    reports = run_suite(claims, tol, jobs=args.jobs)
    wall = time.perf_counter() - t0
    passed = all(r.passed for r in reports)
    if args.format == "doc":
        _emit(dumps(reports, tolerance_override=tol), args.out)
    else:
        lines = [r.summary_line() for r in reports]
        for r in reports:
            for e in r.failures()[:5]:
                lines.append(f"    failed: {r.claim} / {e.name}: value {e.value}")
        n_ok = sum(r.passed for r in reports)
        lines.append(f"{n_ok}/{len(reports)} claims pass; wall time {wall:.2f} s")
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if passed else EXIT_FAIL


# --- scan-redundancy ----------------------------------------------------------

def cmd_scan(args) -> int:
    tol = _tolerance(args.tol)
    st = _family(args, tol)
    if args.pattern:
        patterns = [tuple(p.split(",")) for p in args.pattern]
    else:
        patterns = default_patterns(st, full=args.all_patterns)
    rep = redundancy_scan(st, patterns, tol)
    if args.format == "doc":
        _emit(dumps([rep], family=st.name), args.out)
        return EXIT_OK
    lines = [f"redundancy scan of {st.name} ({len(patterns)} patterns, tol {tol:g})"]
    for e in rep.evidence:
        ident = ", ".join("=".join(p) for p in e.detail["identical"]) or "none"
        lines.append(f"  {e.name:<24} {e.value}")
        lines.append(f"  {'':<24} identical pairs: {ident}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="locc-activate",
                                 description="Construct state families, run LOCC protocols and "
                                             "verify activation claims.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, family=True):
        if family:
            p.add_argument("--n", type=int, help="number of parties for s5 / ghz families")
            p.add_argument("--indices", help="comma-separated member indices for s3, e.g. 1,2,3")
            p.add_argument("--branch", type=int, choices=(1, 2), help="branch for target families")
        p.add_argument("--tol", help="numerical tolerance (default: $LOCC_TOL or 1e-10)")
        p.add_argument("--format", choices=("text", "doc"), default="text",
                       help="'doc' emits a JSON document")
        p.add_argument("--out", help="write output to this path instead of stdout")

    p = sub.add_parser("construct", help="list a family's members and its Gram summary")
    p.add_argument("set", nargs="?", metavar="SET", help=f"one of {', '.join(sorted(FAMILIES))}")
    p.add_argument("--set", dest="set_opt", metavar="SET", help=argparse.SUPPRESS)
    common(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("run", help="run a protocol on every member of a set")
    p.add_argument("--protocol", metavar="FILE", help="protocol file (.locc)")
    p.add_argument("--builtin", metavar="NAME", help=f"one of {', '.join(BUILTINS)}")
    p.add_argument("--set", help="family id (default: the protocol's declared family)")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify-all", help="run the acceptance claims")
    p.add_argument("--claim", action="append", help=f"restrict to a claim: {', '.join(CLAIMS)}")
    p.add_argument("--jobs", type=int, default=1, help="claims verified concurrently")
    common(p, family=False)
    p.set_defaults(func=cmd_verify_all)

    p = sub.add_parser("scan-redundancy", help="check which discards destroy orthogonality")
    p.add_argument("--set", required=True, help="family id")
    p.add_argument("--pattern", action="append",
                   help="comma-separated factor labels to discard (repeatable)")
    p.add_argument("--all-patterns", action="store_true",
                   help="scan every proper subset of factors")
    common(p)
    p.set_defaults(func=cmd_scan)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "construct":
        args.set = args.set or args.set_opt
        if args.set is None:
            parser.error("construct needs a family id")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"locc-activate: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProtocolError as exc:
        print(f"locc-activate: {args.protocol or 'protocol'}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"locc-activate: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LoccError as exc:
        print(f"locc-activate: verification error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
