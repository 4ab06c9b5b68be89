"""Exact counting of structures by size.

Expressions are compiled to a flat node graph (equal sub-expressions share a
node) and counted level by level: before size ``n`` is filled for any node,
every node is complete for all sizes below ``n``.  Dependencies at equal size
only follow zero-weight edges, which the analyzer guarantees are acyclic, so
the on-demand recursion inside a level terminates.

Unlabeled counts are Python ints.  Labeled counts are kept as exponential
coefficients (``Fraction``, count / n!) and scaled back at the end.
"""

from __future__ import annotations

import math
import os
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

from .analyzer import check_well_founded
from .errors import AnalysisError, ModeError, SealedTableError, TableLimitError
from .grammar import (
    LABELED,
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
)

EPS, ATOM, REF, UNION, PROD, SEQ, MSET, PSET, CYCLE = range(9)
KIND_NAMES = ("Epsilon", "Atom", "ClassRef", "Union", "Prod", "Seq", "MSet", "PSet", "Cycle")

DEFAULT_MAX_TABLE_MB = 512


def divisors(n: int) -> list:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def totient(n: int) -> int:
    result, m, p = n, n, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


# -- sequence transforms (list in, list out) ----------------------------------


def seq_transform(a: list, N: int) -> list:
    """Counts of sequences of components: b = 1 / (1 - a), with a[0] == 0."""
    b = [1] + [0] * N
    for n in range(1, N + 1):
        b[n] = sum(a[k] * b[n - k] for k in range(1, n + 1))
    return b


def euler_transform(a: list, N: int) -> list:
    """Multisets of components: ``n b_n = sum_k c_k b_{n-k}``, ``c_k = sum_{d|k} d a_d``."""
    c = [0] + [sum(d * a[d] for d in divisors(k)) for k in range(1, N + 1)]
    b = [1] + [0] * N
    for n in range(1, N + 1):
        q, r = divmod(sum(c[k] * b[n - k] for k in range(1, n + 1)), n)
        assert r == 0
        b[n] = q
    return b


def signed_euler_transform(a: list, N: int) -> list:
    """Sets of distinct components; same shape with ``c_k = sum_{d|k} (-1)^(k/d+1) d a_d``."""
    c = [0] + [sum((1 if (k // d) % 2 else -1) * d * a[d] for d in divisors(k))
               for k in range(1, N + 1)]
    b = [1] + [0] * N
    for n in range(1, N + 1):
        q, r = divmod(sum(c[k] * b[n - k] for k in range(1, n + 1)), n)
        assert r == 0
        b[n] = q
    return b


def cycle_transform(a: list, N: int, include_empty: bool = False) -> list:
    """Cycles of components via the totient formula, exact rationals inside.

    ``b_n = sum_{k|n} phi(k)/k * L_{n/k}`` with ``L = sum_m a^m / m``.
    """
    s = seq_transform(a, N)
    L = [Fraction(0)] + [Fraction(sum(k * a[k] * s[m - k] for k in range(1, m + 1)), m)
                         for m in range(1, N + 1)]
    b = [1 if include_empty else 0]
    for n in range(1, N + 1):
        v = sum(Fraction(totient(k), k) * L[n // k] for k in divisors(n))
        if v.denominator != 1:
            raise ArithmeticError(f"non-integral cycle count at n={n}: {v}")
        b.append(v.numerator)
    return b


# -- compiled node graph ------------------------------------------------------


@dataclass
class Node:
    kind: int
    expr: Expr
    kids: tuple = ()
    restr: Optional[Restriction] = None
    label: Optional[str] = None
    name: Optional[str] = None
    seq: Optional[int] = None  # Cycle: node of the underlying Seq(arg, restr)

    @property
    def arg(self) -> int:
        return self.kids[0]


class Compiled:
    """Flat node graph for a system; ``class_node[name]`` is the node of a class."""

    def __init__(self, sys: SpecSystem):
        self.sys = sys
        self.nodes: list = []
        self._index: dict = {}
        self.class_node: dict = {}
        for name in sys.names:
            self.class_node[name] = self._add(Node(REF, ClassRef(name), name=name))
        for name, e in sys.defs:
            self.nodes[self.class_node[name]].kids = (self.node_of(e),)
        report = check_well_founded(sys)
        self.report = report
        self.valuation = [report.valuation.of(n.expr) for n in self.nodes]
        self.live = self._reachable(self.class_node[sys.root])

    def _add(self, node: Node) -> int:
        self.nodes.append(node)
        return len(self.nodes) - 1

    def node_of(self, e: Expr) -> int:
        if isinstance(e, ClassRef):
            return self.class_node[e.name]
        nid = self._index.get(e)
        if nid is not None:
            return nid
        if isinstance(e, Epsilon):
            node = Node(EPS, e)
        elif isinstance(e, Atom):
            node = Node(ATOM, e, label=e.label)
        elif isinstance(e, Union):
            node = Node(UNION, e, tuple(self.node_of(b) for b in e.branches))
        elif isinstance(e, Prod):
            node = Node(PROD, e, tuple(self.node_of(f) for f in e.factors))
        else:
            kind = {Seq: SEQ, MSet: MSET, PSet: PSET, Cycle: CYCLE}[type(e)]
            node = Node(kind, e, (self.node_of(e.arg),), restr=e.restr)
            if kind == CYCLE:
                node.seq = self.node_of(Seq(e.arg, e.restr))
        nid = self._add(node)
        self._index[e] = nid
        return nid

    def resolve(self, nid: int) -> int:
        """Follow class references to the underlying constructor node."""
        seen = set()
        while self.nodes[nid].kind == REF:
            if nid in seen:
                break
            seen.add(nid)
            nid = self.nodes[nid].arg
        return nid

    def _reachable(self, nid: int) -> list:
        seen, todo = set(), [nid]
        while todo:
            x = todo.pop()
            if x in seen:
                continue
            seen.add(x)
            node = self.nodes[x]
            todo.extend(node.kids)
            if node.seq is not None:
                todo.append(node.seq)
        return sorted(seen)

    def reaches_cycle(self, nid: int) -> bool:
        return any(self.nodes[x].kind == CYCLE for x in self._reachable(nid))


class CardState:
    """Saturating component counter for a cardinality restriction.

    States are ``0..top``: with an upper bound the state is the exact number
    of components placed so far; without one it saturates at ``min_card``.
    """

    def __init__(self, restr: Restriction):
        self.lo = restr.min_card
        self.hi = restr.max_card
        self.top = self.hi if self.hi is not None else self.lo
        self.states = range(self.top + 1)

    def adv(self, q, j: int = 1):
        if q is None:
            return None
        t = q + j
        if self.hi is not None:
            return t if t <= self.hi else None
        return min(t, self.lo)

    def accept(self, q) -> bool:
        return q is not None and q >= self.lo and (self.hi is None or q <= self.hi)


class BoundedComponents:
    """Multisets (or sets, ``distinct=True``) of components counted under a bound.

    Components are ordered by (size, rank within size).  ``D(n, s, q)`` counts
    collections of total size ``n`` whose components all have size ``<= s``
    and whose cardinality is acceptable starting from state ``q``.
    ``bounded(n, s, r, q)`` further caps components of size ``s`` at rank
    ``r``; it is the peel-the-maximum table behind ranking and unranking.
    """

    def __init__(self, arg_count: Callable[[int], int], restr: Restriction, distinct: bool):
        self.a = arg_count
        self.card = CardState(restr)
        self.distinct = distinct
        self.D: dict = {}
        self.level = -1

    def weight(self, kinds: int, j: int) -> int:
        # ways to pick j components among `kinds` distinct ones
        if j == 0:
            return 1
        if self.distinct:
            return math.comb(kinds, j)
        return math.comb(kinds + j - 1, j) if kinds > 0 else 0

    def d(self, n: int, s: int, q) -> int:
        if q is None or n < 0:
            return 0
        s = min(s, n)
        key = (n, s, q)
        v = self.D.get(key)
        if v is None:
            # (n, n, q) is filled lazily: only the one-component term needs
            # the count of size-n components, which may still be in progress.
            assert s == n >= 1, key
            v = self.d(n, n - 1, q)
            if self.card.accept(self.card.adv(q)):
                v += self.weight(self.a(n), 1)
            self.D[key] = v
        return v

    def extend(self, N: int) -> None:
        card = self.card
        for m in range(self.level + 1, N + 1):
            for q in card.states:
                self.D[(m, 0, q)] = 1 if (m == 0 and card.accept(q)) else 0
            for s in range(1, m):
                a = self.a(s)
                for q in card.states:
                    tot = 0
                    for j in range(m // s + 1):
                        w = self.weight(a, j)
                        if w == 0:
                            break
                        tot += w * self.d(m - j * s, s - 1, card.adv(q, j))
                    self.D[(m, s, q)] = tot
            self.level = m

    def total(self, n: int, q=0) -> int:
        self.extend(n)
        return self.d(n, n, q)

    def bounded(self, n: int, s: int, r: int, q) -> int:
        """Collections of size ``n`` whose components are all ``<= (s, r)``."""
        if q is None or n < 0:
            return 0
        self.extend(n)
        if s > n:
            return self.d(n, n, q)
        tot = 0
        for j in range(n // s + 1):
            w = self.weight(r + 1, j)
            if w == 0:
                break
            tot += w * self.d(n - j * s, s - 1, self.card.adv(q, j))
        return tot


def _charge(v) -> int:
    if isinstance(v, Fraction):
        return 56 + (v.numerator.bit_length() + v.denominator.bit_length()) // 8
    return 28 + v.bit_length() // 8


class _LevelTable:
    """Level-by-level memo shared by the unlabeled and labeled tables."""

    def __init__(self, compiled: Compiled, max_table_mb: Optional[float] = None):
        if max_table_mb is None:
            max_table_mb = float(os.environ.get("SPECC_MAX_TABLE_MB", DEFAULT_MAX_TABLE_MB))
        self.c = compiled
        self.nodes = compiled.nodes
        self.values = [[] for _ in self.nodes]
        self.aux: dict = {}
        self.level = -1
        self.building = None
        self._builder = None
        self.sealed = False
        self.entries = 0
        self.bytes = 0
        self.max_bytes = max_table_mb * 2**20
        self._lock = threading.RLock()
        self._active: set = set()

    def seal(self) -> None:
        self.sealed = True

    def ensure(self, n: int) -> None:
        if n <= self.level:
            return
        with self._lock:
            if n <= self.level:  # built by another thread while we waited
                return
            if self.sealed:
                raise SealedTableError(f"table sealed at size {self.level}, size {n} requested")
            for m in range(self.level + 1, n + 1):
                self.building = m
                self._builder = threading.get_ident()
                try:
                    for nid in self.c.live:
                        self._value(nid, m)
                finally:
                    self.building = None
                self.level = m
                if self.bytes > self.max_bytes:
                    raise TableLimitError(
                        f"counting tables exceed {self.max_bytes / 2**20:g} MB at size {m}")

    def get(self, nid: int, n: int):
        if n < 0:
            return 0
        tab = self.values[nid]
        if n < len(tab):
            return tab[n]
        if self.building == n and self._builder == threading.get_ident():
            return self._value(nid, n)
        self.ensure(n)
        return self.values[nid][n]

    def _value(self, nid: int, m: int):
        tab = self.values[nid]
        if m < len(tab):
            return tab[m]
        key = (nid, m)
        if key in self._active:
            raise RuntimeError(f"same-size dependency cycle at node {nid}, size {m}")
        self._active.add(key)
        try:
            v = self._compute(nid, m)
        finally:
            self._active.discard(key)
        tab.append(v)
        self.entries += 1
        self.bytes += _charge(v)
        return v

    def _bounds(self, nid: int, j: int, x: int):
        """Size range for factor j of a Prod node when factors j.. share size x.

        Keeping to valuations means a same-size lookup only happens when all
        other factors can be empty, i.e. along an edge the analyzer checked.
        """
        node = self.nodes[nid]
        vals = [self.c.valuation[k] for k in node.kids[j:]]
        if any(v == math.inf for v in vals):
            return range(0)
        return range(vals[0], x - sum(vals[1:]) + 1)

    def suffix(self, nid: int, j: int, x: int):
        """Number of tuples formed by factors ``j..k-1`` of a Prod node at size x."""
        kids = self.nodes[nid].kids
        k = len(kids)
        if x < 0:
            return 0
        if j >= k:
            return 1 if x == 0 else 0
        if j == k - 1:
            return self.get(kids[j], x)
        if j == 0:
            return self.get(nid, x)
        memo = self.aux.setdefault(nid, {})
        v = memo.get((j, x))
        if v is None:
            v = memo[(j, x)] = self._convolve(nid, j, x)
        return v

    def _convolve(self, nid: int, j: int, x: int):
        kid = self.nodes[nid].kids[j]
        v = 0
        for i in self._bounds(nid, j, x):
            rest = self.suffix(nid, j + 1, x - i)
            if rest:
                ci = self.get(kid, i)
                if ci:
                    v += ci * rest
        return v


class CountTable(_LevelTable):
    """Unlabeled counts per (node, size)."""

    def _compute(self, nid: int, m: int) -> int:
        node = self.nodes[nid]
        kind = node.kind
        if kind == EPS:
            return 1 if m == 0 else 0
        if kind == ATOM:
            return 1 if m == 1 else 0
        if kind == REF:
            return self.get(node.arg, m)
        if kind == UNION:
            return sum(self.get(b, m) for b in node.kids)
        if kind == PROD:
            return self._convolve(nid, 0, m)
        if kind == SEQ:
            return self._seq(nid, node, m)
        if kind in (MSET, PSET):
            if node.restr.unrestricted:
                return self._euler(nid, node, m)
            return self.components(nid).total(m)
        if kind == CYCLE:
            if self.cycle_uses_formula(node.restr):
                return self._cycle(nid, node, m)
            return self.cycle_filter_count(nid, m)
        raise AssertionError(kind)

    def _seq(self, nid, node, m):
        a = node.arg
        if node.restr.unrestricted:
            if m == 0:
                return 1
            tab = self.values[nid]
            return sum(self.get(a, k) * tab[m - k] for k in range(1, m + 1))
        # partial[q][x] excludes the single-component term a_x * accept(q+1),
        # which is added on read so that a_m is only touched when needed
        card = CardState(node.restr)
        partial = self.aux.setdefault(nid, {q: [] for q in card.states})

        def full(q, x):
            v = partial[q][x]
            if x >= 1 and card.accept(card.adv(q)):
                v += self.get(a, x)
            return v

        for q in card.states:
            q1 = card.adv(q)
            v = 1 if (m == 0 and card.accept(q)) else 0
            if q1 is not None:
                for k in range(1, m):
                    rest = full(q1, m - k)
                    if rest:
                        v += self.get(a, k) * rest
            partial[q].append(v)
        return full(0, m)

    def _euler(self, nid, node, m):
        if m == 0:
            return 1
        a = node.arg
        c = self.aux.setdefault(nid, [0])
        sign = node.kind == PSET
        ck = 0
        for d in divisors(m):
            t = d * self.get(a, d)
            ck += -t if (sign and (m // d) % 2 == 0) else t
        c.append(ck)
        tab = self.values[nid]
        q, r = divmod(sum(c[k] * tab[m - k] for k in range(1, m + 1)), m)
        assert r == 0, "Euler transform produced a non-integer"
        return q

    @staticmethod
    def cycle_uses_formula(restr: Restriction) -> bool:
        return restr.min_card <= 1 and restr.max_card is None

    def _cycle(self, nid, node, m):
        if m == 0:
            return 1 if node.restr.min_card == 0 else 0
        a = node.arg
        s, L = self.aux.setdefault(nid, ([1], [Fraction(0)]))
        s.append(sum(self.get(a, k) * s[m - k] for k in range(1, m + 1)))
        L.append(Fraction(sum(k * self.get(a, k) * s[m - k] for k in range(1, m + 1)), m))
        v = sum(Fraction(totient(k), k) * L[m // k] for k in divisors(m))
        if v.denominator != 1:
            raise ArithmeticError(f"non-integral cycle count at size {m}: {v}")
        return v.numerator

    def cycle_filter_count(self, nid: int, m: int) -> int:
        """Count cycles by keeping minimal rotations of the underlying sequences (slow)."""
        from .enumerator import engine_for

        return engine_for(self.c.sys).count_cycles_by_filter(nid, m)

    def components(self, nid: int) -> BoundedComponents:
        key = ("bc", nid)
        bc = self.aux.get(key)
        if bc is None:
            node = self.nodes[nid]
            arg = node.arg
            bc = BoundedComponents(lambda s: self.get(arg, s), node.restr, node.kind == PSET)
            self.aux[key] = bc
        return bc


class LabeledTable(_LevelTable):
    """Exponential coefficients (count / n!) per (node, size)."""

    def _power(self, nid: int, k: int, x: int) -> Fraction:
        """[z^x] A(z)^k for the node's argument; rows k >= 2 are tabulated per level."""
        a = self.nodes[nid].arg
        if k == 0:
            return Fraction(1 if x == 0 else 0)
        if k == 1:
            return self.get(a, x)
        if k > x:
            return Fraction(0)
        P = self.aux.setdefault(("pow", nid), {})
        v = P.get((k, x))
        if v is None:
            # components have size >= 1, so every term here is below size x
            v = sum((self.get(a, i) * self._power(nid, k - 1, x - i)
                     for i in range(1, x - k + 2)), Fraction(0))
            P[(k, x)] = v
        return v

    def _compute(self, nid: int, m: int) -> Fraction:
        node = self.nodes[nid]
        kind = node.kind
        if kind == EPS:
            return Fraction(1 if m == 0 else 0)
        if kind == ATOM:
            return Fraction(1 if m == 1 else 0)
        if kind == REF:
            return self.get(node.arg, m)
        if kind == UNION:
            return sum((self.get(b, m) for b in node.kids), Fraction(0))
        if kind == PROD:
            return Fraction(self._convolve(nid, 0, m))
        a = node.arg
        restr = node.restr
        tab = self.values[nid]
        if kind == SEQ and restr.unrestricted:
            if m == 0:
                return Fraction(1)
            return sum((self.get(a, k) * tab[m - k] for k in range(1, m + 1)), Fraction(0))
        if kind == MSET and restr.unrestricted:
            if m == 0:
                return Fraction(1)
            return sum((k * self.get(a, k) * tab[m - k] for k in range(1, m + 1)),
                       Fraction(0)) / m
        hi = m if restr.max_card is None else min(restr.max_card, m)
        ks = range(restr.min_card, hi + 1)
        P = self._power
        if kind == SEQ:
            return sum((P(nid, k, m) for k in ks), Fraction(0))
        if kind == MSET:
            return sum((P(nid, k, m) / math.factorial(k) for k in ks), Fraction(0))
        if kind == CYCLE:
            v = sum((P(nid, k, m) / k for k in ks if k >= 1), Fraction(0))
            if m == 0 and restr.min_card == 0:
                v += 1
            return v
        raise ModeError("PSet is not defined for labeled classes")


# -- functional API -----------------------------------------------------------


@lru_cache(maxsize=64)
def compiled_for(sys: SpecSystem) -> Compiled:
    c = Compiled(sys)
    if not c.report.ok:
        raise AnalysisError(c.report)
    return c


@lru_cache(maxsize=64)
def table_for(sys: SpecSystem) -> CountTable:
    return CountTable(compiled_for(sys))


@lru_cache(maxsize=64)
def labeled_table_for(sys: SpecSystem) -> LabeledTable:
    return LabeledTable(compiled_for(sys))


def resolve_class(sys: SpecSystem, cls: Optional[str]):
    """Return ``(system, node)`` for a class; re-roots the system when the
    class is not reachable from the current root (tables only cover the
    root's reachable part)."""
    cls = sys.root if cls is None else cls
    if cls not in sys:
        raise KeyError(f"unknown class {cls}")
    if cls not in sys.reachable():
        sys = sys.with_root(cls)
    return sys, compiled_for(sys).class_node[cls]


def count(sys: SpecSystem, cls: Optional[str], n: int) -> int:
    """Number of unlabeled structures of size ``n`` in class ``cls``."""
    sys, nid = resolve_class(sys, cls)
    if n < 0:
        return 0
    return table_for(sys).get(nid, n)


def count_labeled(sys: SpecSystem, cls: Optional[str], n: int) -> int:
    """Number of labeled structures on ``{1..n}``; requires a labeled-mode system."""
    if sys.mode != LABELED:
        raise ModeError("count_labeled needs a labeled-mode system")
    sys, nid = resolve_class(sys, cls)
    if n < 0:
        return 0
    v = labeled_table_for(sys).get(nid, n) * math.factorial(n)
    if v.denominator != 1:
        raise ArithmeticError(f"non-integral labeled count at size {n}: {v}")
    return v.numerator


def series(sys: SpecSystem, cls: Optional[str], N: int, mode: Optional[str] = None) -> list:
    """``[count(0), ..., count(N)]`` in the requested mode (default: the system's)."""
    mode = sys.mode if mode is None else mode
    if mode == LABELED:
        return [count_labeled(sys, cls, n) for n in range(N + 1)]
    if mode != UNLABELED:
        raise ModeError(f"unknown mode {mode!r}")
    sys, nid = resolve_class(sys, cls)
    t = table_for(sys)
    t.ensure(N)
    return list(t.values[nid][: N + 1])
