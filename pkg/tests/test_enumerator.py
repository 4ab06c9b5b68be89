import itertools
import json
import time
from collections import Counter

import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from conftest import CYCLE_FREE, corpus_ids
from oracle import UnlabeledOracle, necklaces, to_oracle
from specc.analyzer import check_well_founded
from specc.counter import PROD, count, series
from specc.dsl import parse_system
from specc.enumerator import (
    MAX_SEED,
    engine_for,
    format_structure,
    iterate,
    list_structures,
    make_rng,
    parse_structure,
    random_structure,
    rank,
    structure_from_json,
    structure_to_json,
    uniform_below,
    unrank,
)
from specc.errors import EmptyError, MembershipError, ModeError, RangeError, UnsupportedError
from specc.grammar import (
    LABELED,
    AtomLeaf,
    Cycle,
    CycleNode,
    MSetNode,
    MSet,
    PSet,
    PSetNode,
    Seq,
    member_of,
    size_of,
)
from strategies import systems

TREES = parse_system("T = Prod(Atom, Seq(T))")
NECKLACES = parse_system("N = Cycle(Union(Atom(a), Atom(b)), card >= 1)")


def test_single_size_one_tree():
    assert [format_structure(s) for s in iterate(TREES, "T", 1)] == ["P(Z[z],S())"]


def test_size_five_trees():
    trees = list_structures(TREES, "T", 5)
    assert len(trees) == 14 == len(set(trees))
    assert all(size_of(t) == 5 and member_of(t, TREES, "T") for t in trees)


def test_path_tree_text():
    s = parse_structure("P(Z[z],S(P(Z[z],S(P(Z[z],S())))))")
    assert size_of(s) == 3 and member_of(s, TREES, "T")
    assert list_structures(TREES, "T", 3)[0] == s


def test_necklaces_are_minimal_rotations():
    items = list_structures(NECKLACES, "N", 4)
    assert len(items) == 6 == necklaces(2, 4)
    eng = engine_for(NECKLACES)
    arg = eng.c.nodes[eng.c.resolve(eng.class_node("N"))].arg
    for c in items:
        keys = [eng.key(arg, x) for x in c.children]
        assert keys == min(keys[i:] + keys[:i] for i in range(len(keys)))


@pytest.mark.parametrize("text", [
    "A = Cycle(Union(A, Atom), card >= 2)",
    "A = Cycle(Union(A, Atom), 2 <= card <= 3)",
    "A = Seq(Union(A, Atom), card >= 2)",
])
def test_recursive_component_of_multi_component_collection(text):
    # a component may be the class itself; block sizes must never reach n
    sys = parse_system(text)
    o = UnlabeledOracle(sys)
    for n in range(8):
        items = list_structures(sys, "A", n)
        assert {to_oracle(s) for s in items} == o.structures("A", n)
        assert [rank(sys, "A", s) for s in items] == list(range(len(items)))


def test_list_limit_is_a_prefix():
    assert list_structures(TREES, "T", 5, limit=3) == list_structures(TREES, "T", 5)[:3]


def test_below_valuation_lists_nothing():
    sys = parse_system("A = Prod(Atom, Atom, Seq(Atom))")
    assert list_structures(sys, "A", 1) == []


def test_iteration_is_lazy():
    it = iterate(TREES, "T", 60)
    t0 = time.perf_counter()
    first = list(itertools.islice(it, 5))
    assert time.perf_counter() - t0 < 2
    assert [rank(TREES, "T", s) for s in first] == [0, 1, 2, 3, 4]


def test_rank_positions():
    trees = list_structures(TREES, "T", 5)
    assert [rank(TREES, "T", t) for t in trees] == list(range(14))


def test_rank_rejects_non_members():
    with pytest.raises(MembershipError):
        rank(TREES, "T", AtomLeaf())


def test_unrank_examples():
    assert unrank(TREES, "T", 5, 0) == list_structures(TREES, "T", 5)[0]
    with pytest.raises(RangeError):
        unrank(TREES, "T", 5, 14)
    with pytest.raises(RangeError):
        unrank(TREES, "T", 5, -1)
    with pytest.raises(UnsupportedError):
        unrank(NECKLACES, "N", 4, 0)


def test_cycle_rank_is_supported():
    items = list_structures(NECKLACES, "N", 5)
    assert [rank(NECKLACES, "N", c) for c in items] == list(range(len(items)))


def test_random_examples():
    s = random_structure(TREES, "T", 50, seed=7)
    assert size_of(s) == 50 and member_of(s, TREES, "T")
    assert random_structure(TREES, "T", 50, seed=7) == s
    only = list_structures(TREES, "T", 1)[0]
    assert {random_structure(TREES, "T", 1, seed) for seed in range(20)} == {only}


def test_random_errors():
    with pytest.raises(EmptyError):
        random_structure(TREES, "T", 0, seed=1)
    with pytest.raises(UnsupportedError):
        random_structure(NECKLACES, "N", 4, seed=1)
    with pytest.raises(ValueError):
        random_structure(TREES, "T", 4, seed=MAX_SEED)
    with pytest.raises(ValueError):
        random_structure(TREES, "T", 4, seed=-1)


def test_labeled_generation_is_refused():
    sys = parse_system("L = Seq(Atom)", mode=LABELED)
    with pytest.raises(ModeError):
        list_structures(sys, "L", 3)
    with pytest.raises(ModeError):
        random_structure(sys, "L", 3, seed=1)


def test_uniform_below_covers_range_exactly():
    rng = make_rng(3)
    draws = Counter(uniform_below(5, rng) for _ in range(5000))
    assert set(draws) == set(range(5))
    big = 3 ** 90
    assert all(0 <= uniform_below(big, rng) < big for _ in range(200))


def test_uniformity_chi_square():
    total = count(TREES, "T", 6)
    hits = Counter(rank(TREES, "T", random_structure(TREES, "T", 6, seed)) for seed in range(42 * 1000))
    stat, p = chisquare([hits[r] for r in range(total)])
    assert total == 42 and p > 0.001


# -- formats ------------------------------------------------------------------


@pytest.mark.parametrize("entry", CYCLE_FREE, ids=corpus_ids(CYCLE_FREE))
def test_text_and_json_round_trip(entry):
    sys = entry.load()
    for n in range(7):
        for s in list_structures(sys, entry.cls, n):
            assert parse_structure(format_structure(s)) == s
            line = json.dumps(structure_to_json(s))
            assert structure_from_json(json.loads(line)) == s
            assert structure_from_json(line) == s


@pytest.mark.parametrize("bad", ["", "P(", "Q()", "P(Z[z],)", "U1(E", "E E", "Z[1]"])
def test_parse_structure_rejects_garbage(bad):
    with pytest.raises(ValueError):
        parse_structure(bad)


# -- corpus-wide properties ---------------------------------------------------------------


def test_listing_matches_oracle(corpus_entry):
    sys = corpus_entry.load()
    o = UnlabeledOracle(sys)
    for n in range(10):
        items = list_structures(sys, corpus_entry.cls, n)
        assert len(items) == count(sys, corpus_entry.cls, n)
        converted = [to_oracle(s) for s in items]
        assert len(set(converted)) == len(converted)
        assert set(converted) == o.structures(corpus_entry.cls, n)
        assert all(member_of(s, sys, corpus_entry.cls) for s in items)


def _check_canonical(eng, nid, s):
    node = eng.nodes[eng.c.resolve(nid)]
    if isinstance(s, (MSetNode, PSetNode, CycleNode)):
        keys = [eng.key(node.arg, x) for x in s.children]
        if isinstance(s, MSetNode):
            assert keys == sorted(keys, reverse=True)
        elif isinstance(s, PSetNode):
            assert keys == sorted(set(keys), reverse=True)
        else:
            assert keys == min((keys[i:] + keys[:i] for i in range(len(keys))), default=keys)


def test_collections_are_canonical(corpus_entry):
    sys = corpus_entry.load()
    eng = engine_for(sys)
    root = eng.class_node(corpus_entry.cls)
    for n in range(9):
        for s in list_structures(sys, corpus_entry.cls, n):
            stack = [(root, s)]
            while stack:
                nid, x = stack.pop()
                node = eng.nodes[eng.c.resolve(nid)]
                _check_canonical(eng, nid, x)
                kids = getattr(x, "children", None)
                if kids is None and hasattr(x, "child"):
                    stack.append((node.kids[x.branch_index], x.child))
                elif kids is not None:
                    targets = node.kids if node.kind == PROD else [node.arg] * len(kids)
                    stack.extend(zip(targets, kids))


@pytest.mark.parametrize("entry", CYCLE_FREE, ids=corpus_ids(CYCLE_FREE))
def test_bijection_small(entry):
    sys = entry.load()
    for n in range(9):
        items = list_structures(sys, entry.cls, n)
        assert [unrank(sys, entry.cls, n, r) for r in range(len(items))] == items
        assert [rank(sys, entry.cls, s) for s in items] == list(range(len(items)))


@settings(max_examples=80, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(systems(collections=(Seq, MSet, PSet)), st.integers(0, 8), st.data())
def test_unrank_rank_identity_on_random_systems(sys, n, data):
    assume(check_well_founded(sys).ok)
    c = series(sys, sys.root, n)[n]
    assume(c > 0)
    r = data.draw(st.integers(0, c - 1))
    s = unrank(sys, sys.root, n, r)
    assert size_of(s) == n
    assert member_of(s, sys, sys.root)
    assert rank(sys, sys.root, s) == r


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(systems(collections=(Seq, MSet, PSet, Cycle)), st.integers(0, 6))
def test_iteration_matches_oracle_on_random_systems(sys, n):
    assume(check_well_founded(sys).ok)
    assume(series(sys, sys.root, n)[n] <= 3000)
    items = list_structures(sys, sys.root, n)
    assert {to_oracle(s) for s in items} == UnlabeledOracle(sys).structures(sys.root, n)
    assert len(items) == len({to_oracle(s) for s in items})
