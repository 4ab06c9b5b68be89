"""Canonical enumeration, ranking, unranking and uniform random generation.

Structures of a node are totally ordered by size, then by rank within size.
Rank within size is defined recursively:

* Union: blocks by branch index.
* Prod: blocks by size composition (lexicographic ascending), then
  mixed radix over the factor ranks, first factor most significant.
* Seq: blocks by length ascending, then as a Prod of that many copies.
* MSet / PSet: canonical non-increasing (strictly decreasing) child tuples,
  compared greatest child first; realized by peeling the maximum component
  with :class:`~specc.counter.BoundedComponents`.
* Cycle: minimal-rotation representatives in the order of their sequences.
  Ranking goes through the filter; unranking is not supported.
"""

from __future__ import annotations

import itertools
import json
import random as _random
import re
from functools import lru_cache
from typing import Iterator, Optional

from .counter import (
    ATOM,
    CYCLE,
    EPS,
    MSET,
    PROD,
    PSET,
    REF,
    SEQ,
    UNION,
    CardState,
    compiled_for,
    resolve_class,
    table_for,
)
from .errors import EmptyError, MembershipError, ModeError, RangeError, UnsupportedError
from .grammar import (
    LABELED,
    AtomLeaf,
    CycleNode,
    EpsilonLeaf,
    MSetNode,
    ProdNode,
    PSetNode,
    SeqNode,
    SpecSystem,
    Structure,
    UnionNode,
    size_of,
)

GENERATOR_VERSION = 1
_BLOCK_BITS = 32
MAX_SEED = 2**64
LIST_CACHE_MAX = 1 << 16  # levels up to this many structures are kept as lists
RANK_MEMO_MAX = 1 << 20


def is_min_rotation(keys: list) -> bool:
    n = len(keys)
    return all(keys <= keys[i:] + keys[:i] for i in range(1, n))


def min_rotation(items: list, key=lambda x: x) -> list:
    keys = [key(x) for x in items]
    n = len(items)
    if n == 0:
        return []
    best = min(range(n), key=lambda i: keys[i:] + keys[:i])
    return list(items[best:]) + list(items[:best])


class PowerTable:
    """``get(L, m)``: number of length-L sequences of a node's structures at size m.

    Row 1 is read straight from the counts; rows ``L >= 2`` only involve
    component sizes below ``m``.
    """

    def __init__(self, count):
        self.count = count
        self.memo: dict = {}

    def get(self, L: int, m: int) -> int:
        if m < 0:
            return 0
        if L == 0:
            return 1 if m == 0 else 0
        if L == 1:
            return self.count(m)
        if L > m:
            return 0
        v = self.memo.get((L, m))
        if v is None:
            v = 0
            for k in range(1, m - L + 2):
                rest = self.get(L - 1, m - k)
                if rest:
                    v += self.count(k) * rest
            self.memo[(L, m)] = v
        return v


class Engine:
    """Enumeration engine bound to one accepted system."""

    def __init__(self, sys: SpecSystem):
        self.sys = sys
        self.c = compiled_for(sys)
        self.nodes = self.c.nodes
        self.table = table_for(sys)
        self._powers: dict = {}
        self._ranks: dict = {}
        self._sizes: dict = {}
        self._cycle_index: dict = {}
        self._lists: dict = {}
        self._members: dict = {}

    # -- counting helpers --------------------------------------------------

    def cnt(self, nid: int, n: int) -> int:
        return self.table.get(nid, n)

    def size(self, s: Structure) -> int:
        v = self._sizes.get(s)
        if v is None:
            v = self._sizes[s] = size_of(s)
        return v

    def power(self, nid: int, L: int, m: int) -> int:
        pt = self._powers.get(nid)
        if pt is None:
            arg = self.nodes[nid].arg
            pt = self._powers[nid] = PowerTable(lambda k: self.cnt(arg, k))
        return pt.get(L, m)

    def seq_lengths(self, nid: int, n: int) -> range:
        node = self.nodes[nid]
        v = max(1, self.c.valuation[node.arg])
        hi = n // v if v != float("inf") else 0
        if node.restr.max_card is not None:
            hi = min(hi, node.restr.max_card)
        return range(node.restr.min_card, hi + 1)

    def _tuple_spec(self, nid: int, n: int, L: Optional[int] = None):
        """(factor nodes, suffix count function) for a Prod node or a length-L Seq block."""
        node = self.nodes[nid]
        if node.kind == PROD:
            return node.kids, lambda j, m: self.table.suffix(nid, j, m)
        factors = (node.arg,) * L
        return factors, lambda j, m: self.power(nid, L - j, m)

    def _size_ranges(self, factors, rem: int, j: int) -> range:
        """Sizes factor j may take when factors j.. share ``rem``: between its
        valuation and what the valuations of the later factors leave over."""
        vals = [self.c.valuation[f] for f in factors[j:]]
        if any(v == float("inf") for v in vals):
            return range(0)
        return range(vals[0], rem - sum(vals[1:]) + 1)

    def class_node(self, cls: Optional[str]) -> int:
        cls = self.sys.root if cls is None else cls
        return self.c.class_node[cls]

    # -- ordering ------------------------------------------------------------

    def key(self, nid: int, s: Structure) -> tuple:
        return (self.size(s), self._rank(nid, s))

    # -- membership --------------------------------------------------------

    def is_member(self, s: Structure, cls: Optional[str] = None) -> bool:
        return self._member(self.class_node(cls), s)

    def _member(self, nid: int, s) -> bool:
        k = (nid, s)
        try:
            v = self._members.get(k)
        except TypeError:  # malformed input with unhashable parts
            return self._check_member(nid, s)
        if v is None:
            v = self._check_member(nid, s)
            if len(self._members) >= RANK_MEMO_MAX:
                self._members.clear()
            self._members[k] = v
        return v

    def _check_member(self, nid: int, s) -> bool:
        node = self.nodes[nid]
        kind = node.kind
        t = type(s)
        if kind == REF:
            return self._member(node.arg, s)
        if kind == EPS:
            return t is EpsilonLeaf
        if kind == ATOM:
            return t is AtomLeaf and s.label == node.label
        if kind == UNION:
            return (t is UnionNode and isinstance(s.branch_index, int)
                    and 0 <= s.branch_index < len(node.kids)
                    and self._member(node.kids[s.branch_index], s.child))
        if kind == PROD:
            return (t is ProdNode and type(s.children) is tuple and len(s.children) == len(node.kids)
                    and all(self._member(k, x) for k, x in zip(node.kids, s.children)))
        expected = {SEQ: SeqNode, MSET: MSetNode, PSET: PSetNode, CYCLE: CycleNode}[kind]
        if t is not expected or type(s.children) is not tuple or not node.restr.allows(len(s.children)):
            return False
        arg = node.arg
        if not all(self._member(arg, x) for x in s.children):
            return False
        if kind == SEQ:
            return True
        keys = [self.key(arg, x) for x in s.children]
        if kind == MSET:
            return all(a >= b for a, b in zip(keys, keys[1:]))
        if kind == PSET:
            return all(a > b for a, b in zip(keys, keys[1:]))
        return is_min_rotation(keys)

    # -- iteration ---------------------------------------------------------

    def iterate(self, nid: int, n: int) -> Iterator[Structure]:
        """Structures of size n in ascending rank order, lazily."""
        if n < 0:
            return iter(())
        nid = self.c.resolve(nid)
        if self.cnt(nid, n) == 0:
            return iter(())
        return self._generate(nid, n)

    def _sub(self, nid: int, n: int) -> Iterator[Structure]:
        """Like iterate, for inner factors: those are re-iterated once per
        prefix, so levels of at most LIST_CACHE_MAX structures are kept."""
        if n < 0:
            return iter(())
        nid = self.c.resolve(nid)
        total = self.cnt(nid, n)
        if total == 0:
            return iter(())
        if total > LIST_CACHE_MAX:
            return self._generate(nid, n)
        key = (nid, n)
        items = self._lists.get(key)
        if items is None:
            items = self._lists[key] = list(self._generate(nid, n))
        return iter(items)

    def _generate(self, nid: int, n: int) -> Iterator[Structure]:
        node = self.nodes[nid]
        kind = node.kind
        if kind == REF:
            yield from self._sub(node.arg, n)
        elif kind == EPS:
            yield EpsilonLeaf()
        elif kind == ATOM:
            yield AtomLeaf(node.label)
        elif kind == UNION:
            for i, b in enumerate(node.kids):
                for x in self._sub(b, n):
                    yield UnionNode(i, x)
        elif kind == PROD:
            factors, suffix = self._tuple_spec(nid, n)
            for t in self._iter_tuples(factors, suffix, n):
                yield ProdNode(t)
        elif kind == SEQ:
            for L in self.seq_lengths(nid, n):
                if self.power(nid, L, n) == 0:
                    continue
                factors, suffix = self._tuple_spec(nid, n, L)
                for t in self._iter_tuples(factors, suffix, n):
                    yield SeqNode(t)
        elif kind in (MSET, PSET):
            make = MSetNode if kind == MSET else PSetNode
            bc = self.table.components(nid)
            for t in self._iter_bounded(nid, bc, n, (n, self.cnt(node.arg, n) - 1), 0):
                yield make(t)
        elif kind == CYCLE:
            arg = node.arg
            for sq in self._sub(node.seq, n):
                ch = sq.children
                if is_min_rotation([self.key(arg, x) for x in ch]):
                    yield CycleNode(ch)

    def _iter_tuples(self, factors, suffix, n):
        k = len(factors)

        def compositions(j, rem):
            if j == k - 1:
                if self.cnt(factors[j], rem):
                    yield (rem,)
                return
            for m in self._size_ranges(factors, rem, j):
                if self.cnt(factors[j], m) and suffix(j + 1, rem - m):
                    for rest in compositions(j + 1, rem - m):
                        yield (m,) + rest

        def product(sizes, j):
            if j == k:
                yield ()
                return
            for x in self._sub(factors[j], sizes[j]):
                for rest in product(sizes, j + 1):
                    yield (x,) + rest

        if k == 0:
            if n == 0:
                yield ()
            return
        for sizes in compositions(0, n):
            yield from product(sizes, 0)

    def _iter_bounded(self, nid, bc, n, bound, q):
        """Canonical tuples of size n with every component <= bound, greatest first."""
        if q is None:
            return
        if n == 0:
            if bc.card.accept(q):
                yield ()
            return
        arg = self.nodes[nid].arg
        distinct = bc.distinct
        q1 = bc.card.adv(q)
        if q1 is None:
            return
        bs, br = bound
        for s in range(1, min(n, bs) + 1):
            top = br if s == bs else self.cnt(arg, s) - 1
            if top < 0 or bc.bounded(n, s, top, q) == bc.bounded(n, s, -1, q):
                continue
            for r, x in enumerate(self._sub(arg, s)):
                if r > top:
                    break
                tail_bound = (s, r - 1) if distinct else (s, r)
                if bc.bounded(n - s, tail_bound[0], tail_bound[1], q1) == 0:
                    continue
                for tail in self._iter_bounded(nid, bc, n - s, tail_bound, q1):
                    yield (x,) + tail

    # -- ranking -----------------------------------------------------------

    def _rank(self, nid: int, s: Structure) -> int:
        k = (nid, s)
        r = self._ranks.get(k)
        if r is None:
            r = self._compute_rank(nid, s)
            if len(self._ranks) >= RANK_MEMO_MAX:
                self._ranks.clear()
            self._ranks[k] = r
        return r

    def _compute_rank(self, nid: int, s: Structure) -> int:
        node = self.nodes[nid]
        kind = node.kind
        if kind == REF:
            return self._rank(node.arg, s)
        if kind in (EPS, ATOM):
            return 0
        n = self.size(s)
        if kind == UNION:
            i = s.branch_index
            return sum(self.cnt(b, n) for b in node.kids[:i]) + self._rank(node.kids[i], s.child)
        if kind == PROD:
            factors, suffix = self._tuple_spec(nid, n)
            return self._rank_tuple(factors, suffix, s.children, n)
        if kind == SEQ:
            L = len(s.children)
            offset = sum(self.power(nid, l, n) for l in self.seq_lengths(nid, n) if l < L)
            factors, suffix = self._tuple_spec(nid, n, L)
            return offset + self._rank_tuple(factors, suffix, s.children, n)
        if kind in (MSET, PSET):
            bc = self.table.components(nid)
            arg = node.arg
            r, q, rem = 0, 0, n
            for x in s.children:
                sz, rk = self.key(arg, x)
                r += bc.bounded(rem, sz, rk - 1, q)
                rem -= sz
                q = bc.card.adv(q)
            return r
        if kind == CYCLE:
            return self._cycle_ranks(nid, n)[s]
        raise AssertionError(kind)

    def _rank_tuple(self, factors, suffix, children, n) -> int:
        offset, prefix, rem = 0, 1, n
        sizes = [self.size(x) for x in children]
        for j, (f, nj) in enumerate(zip(factors, sizes)):
            for m in self._size_ranges(factors, rem, j):
                if m >= nj:
                    break
                c = self.cnt(f, m)
                if c:
                    offset += prefix * c * suffix(j + 1, rem - m)
            prefix *= self.cnt(f, nj)
            rem -= nj
        mixed = 0
        for f, nj, x in zip(factors, sizes, children):
            mixed = mixed * self.cnt(f, nj) + self._rank(f, x)
        return offset + mixed

    def _cycle_ranks(self, nid: int, n: int) -> dict:
        k = (nid, n)
        idx = self._cycle_index.get(k)
        if idx is None:
            idx = self._cycle_index[k] = {x: i for i, x in enumerate(self.iterate(nid, n))}
        return idx

    def count_cycles_by_filter(self, nid: int, n: int) -> int:
        node = self.nodes[nid]
        arg = node.arg
        total = 0
        for sq in self._sub(node.seq, n):
            if is_min_rotation([self.key(arg, x) for x in sq.children]):
                total += 1
        return total

    def rank(self, s: Structure, cls: Optional[str] = None) -> int:
        nid = self.class_node(cls)
        if not self._member(nid, s):
            raise MembershipError(f"structure is not a member of class {cls or self.sys.root}")
        return self._rank(nid, s)

    # -- unranking ---------------------------------------------------------

    def unrank(self, nid: int, n: int, r: int) -> Structure:
        total = self.cnt(nid, n)
        if not 0 <= r < total:
            raise RangeError(f"rank {r} out of range [0, {total}) at size {n}")
        if self.c.reaches_cycle(nid):
            raise UnsupportedError("unranking through a Cycle constructor is not supported")
        return self._unrank(nid, n, r)

    def _unrank(self, nid: int, n: int, r: int) -> Structure:
        node = self.nodes[nid]
        kind = node.kind
        if kind == REF:
            return self._unrank(node.arg, n, r)
        if kind == EPS:
            return EpsilonLeaf()
        if kind == ATOM:
            return AtomLeaf(node.label)
        if kind == UNION:
            for i, b in enumerate(node.kids):
                c = self.cnt(b, n)
                if r < c:
                    return UnionNode(i, self._unrank(b, n, r))
                r -= c
            raise AssertionError("rank past the last branch")
        if kind == PROD:
            factors, suffix = self._tuple_spec(nid, n)
            return ProdNode(self._unrank_tuple(factors, suffix, n, r))
        if kind == SEQ:
            for L in self.seq_lengths(nid, n):
                c = self.power(nid, L, n)
                if r < c:
                    factors, suffix = self._tuple_spec(nid, n, L)
                    return SeqNode(self._unrank_tuple(factors, suffix, n, r))
                r -= c
            raise AssertionError("rank past the last length block")
        if kind in (MSET, PSET):
            make = MSetNode if kind == MSET else PSetNode
            return make(self._unrank_bounded(nid, n, r))
        raise UnsupportedError("unranking through a Cycle constructor is not supported")

    def _unrank_tuple(self, factors, suffix, n, r) -> tuple:
        sizes, prefix, rem = [], 1, n
        for j, f in enumerate(factors):
            for m in self._size_ranges(factors, rem, j):
                c = self.cnt(f, m)
                if not c:
                    continue
                block = prefix * c * suffix(j + 1, rem - m)
                if r < block:
                    break
                r -= block
            else:
                raise AssertionError("rank past the last composition")
            sizes.append(m)
            prefix *= c
            rem -= m
        ranks = []
        for f, m in reversed(list(zip(factors, sizes))):
            r, rj = divmod(r, self.cnt(f, m))
            ranks.append(rj)
        ranks.reverse()
        return tuple(self._unrank(f, m, rj) for f, m, rj in zip(factors, sizes, ranks))

    def _unrank_bounded(self, nid: int, n: int, r: int) -> tuple:
        bc = self.table.components(nid)
        arg = self.nodes[nid].arg
        out = []
        q = 0
        bs, br = n, self.cnt(arg, n) - 1
        while n > 0:
            # smallest component c <= bound with bounded(n, c, q) > r
            for s in range(1, min(n, bs) + 1):
                top = br if s == bs else self.cnt(arg, s) - 1
                if top >= 0 and bc.bounded(n, s, top, q) > r:
                    break
            else:
                raise AssertionError("rank past the last component")
            lo, hi = 0, top
            while lo < hi:
                mid = (lo + hi) // 2
                if bc.bounded(n, s, mid, q) > r:
                    hi = mid
                else:
                    lo = mid + 1
            r -= bc.bounded(n, s, lo - 1, q)
            out.append(self._unrank(arg, s, lo))
            n -= s
            q = bc.card.adv(q)
            bs, br = (s, lo - 1) if bc.distinct else (s, lo)
        return tuple(out)

    # -- random ------------------------------------------------------------

    def random(self, nid: int, n: int, seed: int) -> Structure:
        total = self.cnt(nid, n)
        if total == 0:
            raise EmptyError(f"no structure of size {n}")
        if self.c.reaches_cycle(nid):
            raise UnsupportedError("random generation through a Cycle constructor is not supported")
        return self._unrank(nid, n, uniform_below(total, make_rng(seed)))


def make_rng(seed: int) -> _random.Random:
    if not isinstance(seed, int) or not 0 <= seed < MAX_SEED:
        raise ValueError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return _random.Random(seed)


def uniform_below(bound: int, rng: _random.Random) -> int:
    """Exactly uniform integer in ``[0, bound)`` by rejection on 32-bit blocks."""
    bits = bound.bit_length()
    blocks = -(-bits // _BLOCK_BITS)
    while True:
        x = 0
        for _ in range(blocks):
            x = (x << _BLOCK_BITS) | rng.getrandbits(_BLOCK_BITS)
        x >>= blocks * _BLOCK_BITS - bits
        if x < bound:
            return x


@lru_cache(maxsize=64)
def engine_for(sys: SpecSystem) -> Engine:
    return Engine(sys)


def _engine(sys: SpecSystem, cls: Optional[str], need_unlabeled: bool = True):
    if need_unlabeled and sys.mode == LABELED:
        raise ModeError("structure generation is only available for unlabeled systems")
    sys, nid = resolve_class(sys, cls)
    return engine_for(sys), nid


# -- functional API -----------------------------------------------------------


def iterate(sys: SpecSystem, cls: Optional[str], n: int) -> Iterator[Structure]:
    eng, nid = _engine(sys, cls)
    return eng.iterate(nid, n)


def list_structures(sys: SpecSystem, cls: Optional[str], n: int,
                    limit: Optional[int] = None) -> list:
    it = iterate(sys, cls, n)
    return list(it if limit is None else itertools.islice(it, limit))


def rank(sys: SpecSystem, cls: Optional[str], s: Structure) -> int:
    eng, nid = _engine(sys, cls)
    if not eng._member(nid, s):
        raise MembershipError(f"structure is not a member of class {cls or sys.root}")
    return eng._rank(nid, s)


def unrank(sys: SpecSystem, cls: Optional[str], n: int, r: int) -> Structure:
    eng, nid = _engine(sys, cls)
    return eng.unrank(nid, n, r)


def random_structure(sys: SpecSystem, cls: Optional[str], n: int, seed: int) -> Structure:
    eng, nid = _engine(sys, cls)
    return eng.random(nid, n, seed)


# -- textual and JSON forms ---------------------------------------------------

_TAGS = {SeqNode: "S", MSetNode: "M", PSetNode: "PS", CycleNode: "C", ProdNode: "P"}
_FROM_TAG = {v: k for k, v in _TAGS.items()}


def format_structure(s: Structure) -> str:
    """Stable one-line text: E | Z[l] | U<i>(s) | P(..) | S(..) | M(..) | PS(..) | C(..)."""
    t = type(s)
    if t is EpsilonLeaf:
        return "E"
    if t is AtomLeaf:
        return f"Z[{s.label}]"
    if t is UnionNode:
        return f"U{s.branch_index}({format_structure(s.child)})"
    return _TAGS[t] + "(" + ",".join(format_structure(x) for x in s.children) + ")"


_TOKEN = re.compile(r"\s*(?:(Z)\[([A-Za-z][A-Za-z0-9_]*)\]|U(\d+)\(|(PS|P|S|M|C)\(|(E)|([,)]))")


def parse_structure(text: str) -> Structure:
    """Inverse of :func:`format_structure`."""
    pos = 0

    def expect_token():
        nonlocal pos
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"bad structure text at offset {pos}: {text[pos:pos + 20]!r}")
        pos = m.end()
        return m

    def node():
        m = expect_token()
        if m.group(1):
            return AtomLeaf(m.group(2))
        if m.group(5):
            return EpsilonLeaf()
        if m.group(3) is not None:
            child = node()
            if expect_token().group(6) != ")":
                raise ValueError(f"expected ')' at offset {pos}")
            return UnionNode(int(m.group(3)), child)
        if m.group(4):
            kids = []
            if text[pos:].lstrip().startswith(")"):
                expect_token()
                return _FROM_TAG[m.group(4)](tuple(kids))
            while True:
                kids.append(node())
                sep = expect_token().group(6)
                if sep == ")":
                    return _FROM_TAG[m.group(4)](tuple(kids))
                if sep != ",":
                    raise ValueError(f"expected ',' or ')' at offset {pos}")
        raise ValueError(f"unexpected token at offset {pos}")

    s = node()
    if text[pos:].strip():
        raise ValueError(f"trailing text at offset {pos}")
    return s


def structure_to_json(s: Structure) -> dict:
    t = type(s)
    if t is EpsilonLeaf:
        return {"k": "E"}
    if t is AtomLeaf:
        return {"k": "Z", "l": s.label}
    if t is UnionNode:
        return {"k": "U", "i": s.branch_index, "c": [structure_to_json(s.child)]}
    return {"k": _TAGS[t], "c": [structure_to_json(x) for x in s.children]}


def structure_from_json(d) -> Structure:
    if isinstance(d, str):
        d = json.loads(d)
    k = d["k"]
    if k == "E":
        return EpsilonLeaf()
    if k == "Z":
        return AtomLeaf(d["l"])
    if k == "U":
        (child,) = d["c"]
        return UnionNode(int(d["i"]), structure_from_json(child))
    return _FROM_TAG[k](tuple(structure_from_json(x) for x in d["c"]))
