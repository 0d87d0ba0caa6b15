"""Reader and writer for ``.locc`` protocol files.

Grammar (``#`` starts a comment; whitespace is free)::

    file     := decl* tree
    decl     := "layout" party+
              | "family" NAME param*
              | "opm" NAME "on" target ":" outcome+
              | "unitary" NAME "on" target ":" "map" "{" [map (";" map)*] "}"
              | "unitary" NAME "=" NAME param*
    party    := NAME ":" INT ("," INT)*
              | NAME "(" NAME ":" INT ("," NAME ":" INT)* ")"
    param    := NAME "=" atom ("," atom)*
    target   := NAME ["(" NAME ("," NAME)* ")"]
    outcome  := "outcome" label "span" "{" vexpr (";" vexpr)* "}"
    map      := KET "->" vexpr
    vexpr    := ["+"|"-"] term (("+"|"-") term)*
    term     := [coef "*"] KET
    coef     := NUMBER | "(" complex literal ")"
    KET      := "|" INT ("," INT)* ">"
    tree     := "(" "measure" NAME NAME case+ ")"
              | "(" "identify" label ")" | "(" "output" label ")"
    case     := "(" "case" label ["apply" NAME] tree ")"
    label    := NAME | INT | STRING

A party written ``B:2,2`` gets default factor labels ``b1, b2``.  A target
without a factor list means every factor of the party.  A ket lists one
digit per target factor, or a single composite index over the whole target
(``|2>`` on two qubits is ``|1,0>``).  Every vector expression is scaled to
unit norm; spans are *not* orthogonalized, so overlapping spans are an
error.  In ``map`` bodies, each listed basis ket is sent to the expression;
unlisted kets are left fixed.  ``unitary U = <kind> key=value...`` builds
one of the named correction unitaries.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from ..errors import InputError, LoccError, ProtocolSyntaxError, ProtocolValidationError
from ..hilbert import Party, PartyLayout, UnitaryOperator
from ..measurement import OPM, opm_from_spans
from ..states import correction_unitary
from .model import Case, Leaf, MeasureNode, ProtocolTree

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<ket>\|[ \t]*\d+(?:[ \t]*,[ \t]*\d+)*[ \t]*>)
  | (?P<arrow>->)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?j?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_.']*)
  | (?P<punct>[(){}:;,=*+\-])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ProtocolSyntaxError(f"unexpected character {text[i]!r}", line, i - line_start + 1)
        kind = m.lastgroup
        tok_text = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            if kind == "number" and tok_text.isdigit():
                kind = "int"
            tokens.append(Token(kind, tok_text, line, i - line_start + 1))
        i = m.end()
    tokens.append(Token("eof", "", line, i - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0
        self.layout: PartyLayout | None = None
        self.family = None
        self.opms: dict[str, OPM] = {}
        self.unitaries: dict[str, UnitaryOperator] = {}

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ProtocolSyntaxError(msg, tok.line, tok.col)

    def next(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def at(self, text=None, kind=None) -> bool:
        t = self.tok
        return (text is None or t.text == text) and (kind is None or t.kind == kind)

    def expect(self, text=None, kind=None) -> Token:
        if not self.at(text, kind):
            want = repr(text) if text else kind
            got = self.tok.text or "end of file"
            raise self.error(f"expected {want}, found {got!r}")
        return self.next()

    def name(self) -> Token:
        return self.expect(kind="name")

    def label(self) -> str:
        t = self.tok
        if t.kind in ("name", "int"):
            return self.next().text
        if t.kind == "string":
            self.next()
            return re.sub(r"\\(.)", r"\1", t.text[1:-1])
        raise self.error(f"expected a label, found {t.text or 'end of file'!r}")

    # declarations
    def parse(self) -> ProtocolTree:
        while not self.at("("):
            t = self.tok
            if t.kind == "eof":
                raise self.error("missing protocol tree")
            if t.text == "layout":
                self.layout_decl()
            elif t.text == "family":
                self.family_decl()
            elif t.text == "opm":
                self.opm_decl()
            elif t.text == "unitary":
                self.unitary_decl()
            else:
                raise self.error(f"expected a declaration or '(', found {t.text!r}")
        root = self.tree()
        if not self.at(kind="eof"):
            raise self.error(f"unexpected {self.tok.text!r} after the protocol tree")
        if self.layout is None:
            raise ProtocolValidationError("no layout declared", "layout")
        return ProtocolTree(self.layout, self.opms, self.unitaries, root, self.family)

    def layout_decl(self):
        start = self.next()
        if self.layout is not None:
            raise self.error("layout declared twice", start)
        parties = []
        while self.at(kind="name") and self.toks[self.i + 1].text in (":", "("):
            pname = self.name()
            if self.at(":"):
                self.next()
                dims = [int(self.expect(kind="int").text)]
                while self.at(","):
                    self.next()
                    dims.append(int(self.expect(kind="int").text))
                labels = ()
            else:
                self.expect("(")
                labels, dims = [], []
                while True:
                    labels.append(self.name().text)
                    self.expect(":")
                    dims.append(int(self.expect(kind="int").text))
                    if not self.at(","):
                        break
                    self.next()
                self.expect(")")
            try:
                parties.append(Party(pname.text, tuple(dims), tuple(labels)))
            except InputError as exc:
                raise self.error(str(exc), pname) from None
        if not parties:
            raise self.error("layout needs at least one party")
        try:
            self.layout = PartyLayout(tuple(parties))
        except InputError as exc:
            raise self.error(str(exc), start) from None

    def params(self) -> dict:
        out = {}
        while self.at(kind="name") and self.toks[self.i + 1].text == "=":
            key = self.next().text
            self.next()
            vals = [self.atom()]
            while self.at(","):
                self.next()
                vals.append(self.atom())
            out[key] = vals[0] if len(vals) == 1 else tuple(vals)
        return out

    def atom(self):
        t = self.tok
        if t.kind == "int":
            self.next()
            return int(t.text)
        if t.text in ("+", "-"):
            self.next()
            if self.at(kind="int"):
                v = int(self.next().text)
                return v if t.text == "+" else -v
            return t.text
        if t.kind in ("name", "string"):
            return self.label()
        raise self.error(f"expected a value, found {t.text or 'end of file'!r}")

    def family_decl(self):
        self.next()
        fam = self.name().text
        params = self.params()
        self.family = (fam, tuple(sorted(params.items())))

    def need_layout(self, tok):
        if self.layout is None:
            raise self.error("layout must be declared first", tok)
        return self.layout

    def target(self):
        layout = self.need_layout(self.tok)
        pt = self.name()
        try:
            party = layout.party(pt.text)
        except InputError as exc:
            raise self.error(str(exc), pt) from None
        if not self.at("("):
            return party.labels, party.factors
        self.next()
        labels = [self.name()]
        while self.at(","):
            self.next()
            labels.append(self.name())
        self.expect(")")
        dims = []
        for lt in labels:
            if lt.text not in layout.labels:
                raise self.error(f"unknown factor {lt.text!r}", lt)
            dims.append(layout.dims[layout.labels.index(lt.text)])
        # factor ownership is checked by the tree validator, not here
        return tuple(t.text for t in labels), tuple(dims)

    def opm_decl(self):
        start = self.next()
        name = self.name()
        if name.text in self.opms:
            raise self.error(f"measurement {name.text!r} declared twice", name)
        self.expect("on")
        labels, dims = self.target()
        self.expect(":")
        spans = {}
        while self.at("outcome"):
            self.next()
            lt = self.tok
            lab = self.label()
            if lab in spans:
                raise self.error(f"duplicate outcome {lab!r}", lt)
            self.expect("span")
            self.expect("{")
            vecs = [self.vexpr(dims)]
            while self.at(";"):
                self.next()
                vecs.append(self.vexpr(dims))
            self.expect("}")
            spans[lab] = vecs
        if not spans:
            raise self.error("measurement needs at least one outcome")
        try:
            self.opms[name.text] = opm_from_spans(self.layout, labels, spans, name.text)
        except InputError as exc:
            raise self.error(str(exc), start) from None

    def unitary_decl(self):
        start = self.next()
        name = self.name()
        if name.text in self.unitaries:
            raise self.error(f"unitary {name.text!r} declared twice", name)
        if self.at("="):
            self.next()
            kind = self.name()
            params = self.params()
            try:
                u = correction_unitary(kind.text, **params)
            except (LoccError, TypeError) as exc:
                raise self.error(str(exc), kind) from None
            self.unitaries[name.text] = UnitaryOperator(u.target, u.dims, u.matrix, name.text)
            return
        self.expect("on")
        labels, dims = self.target()
        self.expect(":")
        self.expect("map")
        self.expect("{")
        d = int(np.prod(dims))
        mat = np.eye(d, dtype=np.complex128)
        seen = set()
        if not self.at("}"):
            while True:
                kt = self.expect(kind="ket")
                src = self.ket_index(kt, dims)
                if src in seen:
                    raise self.error("basis ket mapped twice", kt)
                seen.add(src)
                self.expect("->")
                mat[:, src] = self.vexpr(dims)
                if not self.at(";"):
                    break
                self.next()
        self.expect("}")
        try:
            self.unitaries[name.text] = UnitaryOperator(labels, dims, mat, name.text)
        except InputError as exc:
            raise self.error(str(exc), start) from None

    def ket_index(self, tok, dims) -> int:
        digits = [int(x) for x in tok.text.strip("|> \t").split(",")]
        if len(digits) == 1 and len(dims) > 1:
            idx = digits[0]
            if not 0 <= idx < int(np.prod(dims)):
                raise self.error(f"composite index {idx} out of range", tok)
            return idx
        if len(digits) != len(dims):
            raise self.error(f"ket has {len(digits)} digits, target has {len(dims)} factors", tok)
        for x, d in zip(digits, dims):
            if not 0 <= x < d:
                raise self.error(f"digit {x} out of range for a factor of dimension {d}", tok)
        return int(np.ravel_multi_index(digits, dims))

    def coef(self) -> complex:
        if self.at("("):
            start = self.next()
            parts = []
            while not self.at(")"):
                if self.at(kind="eof"):
                    raise self.error("unterminated coefficient", start)
                parts.append(self.next().text)
            self.next()
            try:
                return complex("".join(parts))
            except ValueError:
                raise self.error(f"bad complex coefficient {''.join(parts)!r}", start) from None
        t = self.tok
        if t.kind in ("number", "int"):
            self.next()
            return complex(t.text)
        raise self.error(f"expected a coefficient or ket, found {t.text or 'end of file'!r}")

    def term(self, dims, vec, sign):
        c = 1.0 + 0j
        if not self.at(kind="ket"):
            c = self.coef()
            self.expect("*")
        kt = self.expect(kind="ket")
        vec[self.ket_index(kt, dims)] += sign * c

    def vexpr(self, dims) -> np.ndarray:
        start = self.tok
        vec = np.zeros(int(np.prod(dims)), dtype=np.complex128)
        sign = 1
        if self.at("+") or self.at("-"):
            sign = -1 if self.next().text == "-" else 1
        self.term(dims, vec, sign)
        while self.at("+") or self.at("-"):
            sign = -1 if self.next().text == "-" else 1
            self.term(dims, vec, sign)
        n = np.linalg.norm(vec)
        if n == 0:
            raise self.error("vector expression is zero", start)
        return vec / n

    # tree
    def tree(self):
        open_ = self.expect("(")
        head = self.name()
        pos = (open_.line, open_.col)
        if head.text in ("identify", "output"):
            value = self.label()
            self.expect(")")
            return Leaf(head.text, value, pos)
        if head.text != "measure":
            raise self.error(f"expected 'measure', 'identify' or 'output', found {head.text!r}", head)
        party = self.name().text
        opm = self.name().text
        cases = []
        while self.at("("):
            copen = self.next()
            self.expect("case")
            lab = self.label()
            apply = None
            if self.at("apply"):
                self.next()
                apply = self.name().text
            child = self.tree()
            self.expect(")")
            cases.append(Case(lab, child, apply, (copen.line, copen.col)))
        self.expect(")")
        if not cases:
            raise self.error("measure node without cases", open_)
        return MeasureNode(party, opm, tuple(cases), pos)


def parse_protocol(text: str) -> ProtocolTree:
    """Parse and validate a protocol file's text."""
    return _Parser(text).parse()


# --- printing -------------------------------------------------------------

_LABEL_RE = re.compile(r"^(?:[A-Za-z_][A-Za-z0-9_.']*|\d+)$")
_KEYWORDS = {"measure", "identify", "output", "case", "apply"}


def _fmt_label(lab: str) -> str:
    if _LABEL_RE.match(lab) and lab not in _KEYWORDS:
        return lab
    return '"' + lab.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _fmt_vector(vec, dims) -> str:
    # spans: overall phase is irrelevant, normalize the largest entry to 1
    vec = np.asarray(vec)
    return _fmt_vector_raw(vec / vec[np.argmax(np.abs(vec))], dims)


def _fmt_target(layout, labels) -> str:
    owner = layout.owners[layout.labels.index(labels[0])]
    return f"{owner}(" + ",".join(labels) + ")"


def _fmt_param(v) -> str:
    if isinstance(v, tuple):
        return ",".join(_fmt_param(x) for x in v)
    if isinstance(v, str):
        return _fmt_label(v)
    return str(v)


def format_protocol(tree: ProtocolTree) -> str:
    """Canonical text for ``tree``; :func:`parse_protocol` inverts it."""
    lay = tree.layout
    lines = ["layout " + lay.describe()]
    if tree.family:
        fam, params = tree.family
        lines.append("family " + " ".join([fam] + [f"{k}={_fmt_param(v)}" for k, v in params]))
    for name, m in tree.opms.items():
        lines.append(f"opm {name} on {_fmt_target(lay, m.target)}:")
        for p in m.outcomes:
            body = " ; ".join(_fmt_vector(v, m.dims) for v in p.span)
            lines.append(f"  outcome {_fmt_label(p.label)} span {{ {body} }}")
    for name, u in tree.unitaries.items():
        d = u.matrix.shape[0]
        maps = []
        for j in range(d):
            col = u.matrix[:, j]
            e = np.zeros(d)
            e[j] = 1
            if not np.allclose(col, e, atol=1e-15, rtol=0):
                src = "|" + ",".join(str(int(x)) for x in np.unravel_index(j, u.dims)) + ">"
                maps.append(f"{src} -> {_fmt_vector_phase(col, u.dims)}")
        lines.append(f"unitary {name} on {_fmt_target(lay, u.target)}: map {{ " + " ; ".join(maps) + " }")
    lines.append(_fmt_node(tree.root, 0))
    return "\n".join(lines) + "\n"


def _fmt_vector_phase(vec, dims) -> str:
    # keep the column's phase: scale by a positive real only
    vec = np.asarray(vec)
    scale = np.max(np.abs(vec))
    return _fmt_vector_raw(vec / scale, dims)


def _signed_coef(c: complex) -> tuple[str, str]:
    if abs(c.imag) < 1e-15:
        sign, mag = ("-" if c.real < 0 else "+"), abs(c.real)
        return sign, ("" if abs(mag - 1) < 1e-15 else f"{mag!r}*")
    if abs(c.real) < 1e-15:
        return ("-" if c.imag < 0 else "+"), f"{abs(c.imag)!r}j*"
    return "+", f"({c.real!r}{c.imag:+.17g}j)*"


def _fmt_vector_raw(vec, dims) -> str:
    out = ""
    for n, idx in enumerate(np.flatnonzero(np.abs(vec) > 1e-15)):
        sign, coef = _signed_coef(complex(vec[idx]))
        ket = "|" + ",".join(str(int(x)) for x in np.unravel_index(idx, dims)) + ">"
        if n == 0:
            out = ("-" if sign == "-" else "") + coef + ket
        else:
            out += f" {sign} {coef}{ket}"
    return out


def _fmt_node(node, indent) -> str:
    pad = "  " * indent
    if isinstance(node, Leaf):
        return f"{pad}({node.kind} {_fmt_label(node.value)})"
    lines = [f"{pad}(measure {node.party} {node.opm}"]
    for c in node.cases:
        head = f"{pad}  (case {_fmt_label(c.label)}"
        if c.apply:
            head += f" apply {c.apply}"
        if isinstance(c.child, Leaf):
            lines.append(f"{head} {_fmt_node(c.child, 0)})")
        else:
            lines.append(head)
            lines.append(_fmt_node(c.child, indent + 2) + ")")
    lines[-1] += ")"
    return "\n".join(lines)
