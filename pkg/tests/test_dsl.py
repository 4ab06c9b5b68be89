import pytest
from hypothesis import given, settings

from specc.dsl import parse, parse_system, render_expr, render_system
from specc.errors import ParseError
from specc.grammar import (
    LABELED,
    Atom,
    ClassRef,
    Cycle,
    MSet,
    Prod,
    Restriction,
    Seq,
    Union,
    build_system,
)
from strategies import systems


def test_trees_transcription():
    sys = parse_system("T = Prod(Atom, Seq(T))")
    assert sys == build_system([("T", Prod(Atom(), Seq(ClassRef("T"))))], "T")


def test_binary_trees():
    sys = parse_system("B = Union(Atom, Prod(Atom, B, B))")
    assert sys["B"] == Union(Atom(), Prod(Atom(), ClassRef("B"), ClassRef("B")))


def test_missing_comma_points_at_column():
    res = parse("T = Prod(Atom Seq(T))")
    assert not res.ok
    (d,) = res.errors
    assert (d.line, d.column) == (1, 15)
    assert "Seq" in d.message


@pytest.mark.parametrize("text, line, col, fragment", [
    ("T = Foo(Atom)", 1, 5, "unknown constructor Foo"),
    ("T = Prod(Atom)", 1, 14, "Prod needs at least 2 arguments"),
    ("T = Seq(Atom, 3 <= card <= 2)", 1, 15, "min 3 > max 2"),
    ("T = Atom\nT = Epsilon", 2, 1, "duplicate definition of T"),
    ("T = Prod(Atom, U)", 1, 16, "unresolved class U"),
    ("T = Seq(Atom, card < 2)", 1, 20, "expected"),
    ("T = Seq(card)", 1, 9, "'card' is only allowed"),
    ("\n  T = Prod(Atom, Seq(T)", 2, 24, "expected ')'"),
    ("T = @", 1, 5, "unexpected character"),
    ("", 1, 1, "empty grammar"),
])
def test_positioned_errors(text, line, col, fragment):
    res = parse(text)
    assert res.system is None
    hits = [d for d in res.errors if fragment in d.message]
    assert hits, [str(d) for d in res.diagnostics]
    assert (hits[0].line, hits[0].column) == (line, col)


def test_every_failure_is_positioned():
    with pytest.raises(ParseError) as exc:
        parse_system("A = Prod(Atom B)\nB = Seq(Q)\nC = Cycle(Atom, 5 <= card <= 1)")
    lines = sorted(d.line for d in exc.value.diagnostics)
    assert lines == [1, 2, 3]


def test_recovery_continues_after_error():
    res = parse("A = Prod(Atom,\nB = Atom\nC = Union(B, Q)")
    msgs = [d.message for d in res.errors]
    assert any("unresolved class Q" in m for m in msgs)


def test_unused_class_warning():
    res = parse("T = Atom\nU = Seq(Atom)")
    assert res.ok
    assert [d.severity for d in res.diagnostics] == ["warning"]
    assert "unused" in res.diagnostics[0].message


def test_comments_and_whitespace():
    text = "# ordered trees\nT = Prod( Atom ,   # the root\n  Seq(T) )\n"
    assert parse_system(text) == parse_system("T = Prod(Atom, Seq(T))")


def test_restriction_forms():
    sys = parse_system("P = MSet(I, card >= 1)\nI = Seq(Atom, card >= 1)\n"
                       "Q = Cycle(Atom, card = 3)\nR = Seq(Atom, card <= 2)\nS = PSet(Atom, 1 <= card <= 4)",
                       root="P")
    assert sys["P"] == MSet(ClassRef("I"), Restriction(1))
    assert sys["Q"] == Cycle(Atom(), Restriction(3, 3))
    assert sys["R"].restr == Restriction(0, 2)
    assert sys["S"].restr == Restriction(1, 4)


def test_render_examples():
    sys = parse_system("T = Prod(Atom, Seq(T))")
    assert render_system(sys) == "T = Prod(Atom, Seq(T))\n"
    assert render_expr(MSet(ClassRef("I"), Restriction(1))) == "MSet(I, card >= 1)"
    assert render_expr(Atom("a")) == "Atom(a)"


def test_root_and_mode_directives_round_trip():
    sys = parse_system("A = Union(Atom, B)\nB = Cycle(A, 2 <= card <= 4)", root="B", mode=LABELED)
    text = render_system(sys)
    assert text.startswith("#! root = B\n#! mode = labeled\n")
    assert parse_system(text) == sys


def test_caller_overrides_directive():
    sys = parse_system("#! root = B\nA = Atom\nB = Seq(A)", root="A")
    assert sys.root == "A"


@settings(max_examples=200, deadline=None)
@given(systems())
def test_round_trip(sys):
    assert parse_system(render_system(sys)) == sys
