"""Textual grammar language.

    system := defn+
    defn   := IDENT "=" expr
    expr   := "Epsilon" | "Atom" | "Atom" "(" IDENT ")" | IDENT
            | ("Union" | "Prod") "(" expr ("," expr)+ ")"
            | ("Seq" | "MSet" | "PSet" | "Cycle") "(" expr ("," restr)? ")"
    restr  := "card" ("=" | "<=" | ">=") INT | INT "<=" "card" "<=" INT

``#`` starts a comment.  Comment lines of the form ``#! root = NAME`` and
``#! mode = labeled`` are directives; ``render_system`` emits them only when
the root is not the first class or the mode is labeled, so rendering always
round-trips.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .analyzer import check_well_founded
from .errors import ParseError, ValidationError
from .grammar import (
    LABELED,
    MODES,
    RESERVED,
    UNLABELED,
    Atom,
    ClassRef,
    Cycle,
    Epsilon,
    Expr,
    MSet,
    Prod,
    PSet,
    Restriction,
    Seq,
    SpecSystem,
    Union,
    build_system,
)

ERROR = "error"
WARNING = "warning"

_COLLECTIONS = {"Seq": Seq, "MSet": MSet, "PSet": PSet, "Cycle": Cycle}
_TUPLES = {"Union": Union, "Prod": Prod}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<directive>\#![^\n]*)
  | (?P<comment>\#[^\n]*)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<op><=|>=|=|\(|\)|,)
""", re.VERBOSE)

_DIRECTIVE_RE = re.compile(r"#!\s*(root|mode)\s*=\s*([A-Za-z][A-Za-z0-9_]*)\s*$")


@dataclass(frozen=True)
class SourceDiagnostic:
    line: int
    column: int
    message: str
    severity: str = ERROR

    def __str__(self):
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


@dataclass
class ParseResult:
    system: Optional[SpecSystem]
    diagnostics: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.system is not None

    @property
    def errors(self) -> list:
        return [d for d in self.diagnostics if d.severity == ERROR]


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


class _Syntax(Exception):
    def __init__(self, tok, message):
        self.tok = tok
        self.message = message


def _tokenize(text: str, diags: list):
    toks, directives = [], []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            diags.append(SourceDiagnostic(line, col, f"unexpected character {text[pos]!r}"))
            pos += 1
            continue
        kind = m.lastgroup
        chunk = m.group()
        if kind == "directive":
            directives.append(_Tok(kind, chunk, line, col))
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, chunk, line, col))
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks, directives


class _Parser:
    def __init__(self, toks):
        self.toks = toks
        self.i = 0
        self.refs = []  # (name, token) for every class reference

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.tok
        if t.text != text or t.kind not in ("op", "ident"):
            found = "end of input" if t.kind == "eof" else repr(t.text)
            raise _Syntax(t, f"expected {text!r}, found {found}")
        return self.take()

    def at_defn_start(self) -> bool:
        return self.tok.kind == "ident" and self.peek().text == "="

    def expr(self) -> Expr:
        t = self.tok
        if t.kind != "ident":
            found = "end of input" if t.kind == "eof" else repr(t.text)
            raise _Syntax(t, f"expected an expression, found {found}")
        self.take()
        name = t.text
        if name == "Epsilon":
            return Epsilon()
        if name == "Atom":
            if self.tok.text == "(":
                self.take()
                lab = self.tok
                if lab.kind != "ident":
                    raise _Syntax(lab, "expected an atom label")
                self.take()
                self.expect(")")
                return Atom(lab.text)
            return Atom()
        if name in _TUPLES or name in _COLLECTIONS:
            self.expect("(")
            if name in _TUPLES:
                parts = [self.expr()]
                while self.tok.text == ",":
                    self.take()
                    parts.append(self.expr())
                close = self.tok
                self.expect(")")
                if len(parts) < 2:
                    raise _Syntax(close, f"{name} needs at least 2 arguments, got {len(parts)}")
                return _TUPLES[name](*parts)
            arg = self.expr()
            restr = Restriction()
            if self.tok.text == ",":
                self.take()
                restr = self.restriction()
            self.expect(")")
            return _COLLECTIONS[name](arg, restr)
        if name == "card":
            raise _Syntax(t, "'card' is only allowed inside a restriction")
        if self.tok.text == "(":
            raise _Syntax(t, f"unknown constructor {name}")
        self.refs.append((name, t))
        return ClassRef(name)

    def integer(self) -> int:
        t = self.tok
        if t.kind != "int":
            raise _Syntax(t, f"expected an integer, found {t.text!r}")
        self.take()
        return int(t.text)

    def restriction(self) -> Restriction:
        start = self.tok
        if start.kind == "int":
            lo = self.integer()
            self.expect("<=")
            self.expect("card")
            self.expect("<=")
            hi = self.integer()
        else:
            self.expect("card")
            op = self.tok
            if op.text not in ("=", "<=", ">="):
                raise _Syntax(op, f"expected '=', '<=' or '>=' after card, found {op.text!r}")
            self.take()
            k = self.integer()
            lo, hi = {"=": (k, k), "<=": (0, k), ">=": (k, None)}[op.text]
        if hi is not None and lo > hi:
            raise _Syntax(start, f"restriction error: min {lo} > max {hi}")
        return Restriction(lo, hi)


def parse(text: str, root: Optional[str] = None, mode: Optional[str] = None) -> ParseResult:
    """Parse grammar text, collecting every diagnostic found.

    ``root`` and ``mode`` override the directives; the root otherwise
    defaults to the first definition, and the mode to unlabeled.
    """
    diags: list = []
    toks, directives = _tokenize(text, diags)
    p = _Parser(toks)
    defs, def_tok = [], {}

    for d in directives:
        m = _DIRECTIVE_RE.match(d.text)
        if not m:
            diags.append(SourceDiagnostic(d.line, d.col, f"ignored malformed directive {d.text!r}",
                                          WARNING))
            continue
        key, value = m.groups()
        if key == "root" and root is None:
            root = value
        elif key == "mode" and mode is None:
            if value not in MODES:
                diags.append(SourceDiagnostic(d.line, d.col, f"unknown mode {value!r}"))
            else:
                mode = value

    if p.tok.kind == "eof":
        diags.append(SourceDiagnostic(p.tok.line, p.tok.col, "empty grammar"))
    while p.tok.kind != "eof":
        try:
            name_tok = p.tok
            if name_tok.kind != "ident":
                raise _Syntax(name_tok, f"expected a class name, found {name_tok.text!r}")
            p.take()
            p.expect("=")
            e = p.expr()
            if not (p.tok.kind == "eof" or p.at_defn_start()):
                t = p.tok
                raise _Syntax(t, f"unexpected {t.text!r} after definition of {name_tok.text}")
            name = name_tok.text
            if name in RESERVED:
                diags.append(SourceDiagnostic(name_tok.line, name_tok.col,
                                              f"{name} is a reserved word"))
            elif name in def_tok:
                first = def_tok[name]
                diags.append(SourceDiagnostic(
                    name_tok.line, name_tok.col,
                    f"duplicate definition of {name} (first defined at {first.line}:{first.col})"))
            else:
                def_tok[name] = name_tok
                defs.append((name, e))
        except _Syntax as exc:
            diags.append(SourceDiagnostic(exc.tok.line, exc.tok.col, exc.message))
            p.take()
            while p.tok.kind != "eof" and not p.at_defn_start():
                p.take()

    for name, t in p.refs:
        if name not in def_tok and name not in RESERVED:
            diags.append(SourceDiagnostic(t.line, t.col, f"unresolved class {name}"))
    if root is not None and defs and root not in def_tok:
        first = toks[0]
        diags.append(SourceDiagnostic(first.line, first.col, f"root class {root} is not defined"))

    if any(d.severity == ERROR for d in diags):
        return ParseResult(None, _sorted(diags))

    mode = UNLABELED if mode is None else mode
    try:
        system = build_system(defs, root, mode)
    except ValidationError as exc:
        for name, msg in exc.violations:
            t = def_tok.get(name, toks[0])
            diags.append(SourceDiagnostic(t.line, t.col, msg))
        return ParseResult(None, _sorted(diags))

    reachable = set(system.reachable())
    for name, t in def_tok.items():
        if name not in reachable:
            diags.append(SourceDiagnostic(t.line, t.col,
                                          f"class {name} is unused (unreachable from {system.root})",
                                          WARNING))
    return ParseResult(system, _sorted(diags))


def _sorted(diags):
    return sorted(diags, key=lambda d: (d.line, d.column))


def parse_system(text: str, root: Optional[str] = None, mode: Optional[str] = None) -> SpecSystem:
    """Parse and validate; raise :class:`ParseError` carrying positioned diagnostics."""
    res = parse(text, root, mode)
    if res.system is None:
        raise ParseError(res.diagnostics)
    return res.system


def parse_file(path, root: Optional[str] = None, mode: Optional[str] = None) -> ParseResult:
    with open(path, encoding="utf-8") as f:
        return parse(f.read(), root, mode)


def render_restriction(r: Restriction) -> str:
    lo, hi = r.min_card, r.max_card
    if hi is None:
        return f"card >= {lo}" if lo else ""
    if lo == hi:
        return f"card = {lo}"
    if lo == 0:
        return f"card <= {hi}"
    return f"{lo} <= card <= {hi}"


def render_expr(e: Expr) -> str:
    if isinstance(e, Epsilon):
        return "Epsilon"
    if isinstance(e, Atom):
        return "Atom" if e.label == "z" else f"Atom({e.label})"
    if isinstance(e, ClassRef):
        return e.name
    if isinstance(e, Union):
        return "Union(" + ", ".join(render_expr(b) for b in e.branches) + ")"
    if isinstance(e, Prod):
        return "Prod(" + ", ".join(render_expr(f) for f in e.factors) + ")"
    head = type(e).__name__
    r = render_restriction(e.restr)
    return f"{head}({render_expr(e.arg)}, {r})" if r else f"{head}({render_expr(e.arg)})"


def render_system(sys: SpecSystem) -> str:
    lines = []
    if sys.root != sys.defs[0][0]:
        lines.append(f"#! root = {sys.root}")
    if sys.mode == LABELED:
        lines.append(f"#! mode = {LABELED}")
    lines.extend(f"{name} = {render_expr(e)}" for name, e in sys.defs)
    return "\n".join(lines) + "\n"


def analyze_text(text: str, root: Optional[str] = None, mode: Optional[str] = None):
    """Parse then run the well-foundedness gate; returns ``(ParseResult, report or None)``."""
    res = parse(text, root, mode)
    if res.system is None:
        return res, None
    return res, check_well_founded(res.system)
