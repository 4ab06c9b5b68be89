"""Independent brute-force oracles.

Nothing here touches the package's tables or orders: structures are built
naively as nested tuples, and multisets, sets and cycles are normalized by
sorting on ``repr`` (or taking the least rotation under ``repr``).  Two
implementations agree only if they describe the same sets.
"""

import itertools
import math
from functools import lru_cache

from specc.grammar import (
    Atom,
    AtomLeaf,
    ClassRef,
    Cycle,
    CycleNode,
    Epsilon,
    EpsilonLeaf,
    MSet,
    MSetNode,
    Prod,
    ProdNode,
    PSet,
    PSetNode,
    Seq,
    SeqNode,
    Union,
    UnionNode,
)


def _bag(items):
    return tuple(sorted(items, key=repr))


def _necklace(items):
    items = tuple(items)
    if not items:
        return items
    return min((items[i:] + items[:i] for i in range(len(items))), key=lambda t: [repr(x) for x in t])


def _compositions(n, k, least):
    """Ordered k-tuples of sizes >= least summing to n."""
    if k == 0:
        if n == 0:
            yield ()
        return
    for first in range(least, n - least * (k - 1) + 1):
        for rest in _compositions(n - first, k - 1, least):
            yield (first,) + rest


def min_sizes(sys):
    """Least size each class can reach (a lower bound), by plain fixpoint iteration."""
    val = {name: math.inf for name, _ in sys.defs}

    def ev(e):
        if isinstance(e, Epsilon):
            return 0
        if isinstance(e, Atom):
            return 1
        if isinstance(e, ClassRef):
            return val[e.name]
        if isinstance(e, Union):
            return min(ev(b) for b in e.branches)
        if isinstance(e, Prod):
            return sum(ev(f) for f in e.factors)
        a = e.restr.min_card
        return 0 if a == 0 else a * ev(e.arg)

    changed = True
    while changed:
        changed = False
        for name, e in sys.defs:
            v = ev(e)
            if v < val[name]:
                val[name], changed = v, True
    return val, ev


class UnlabeledOracle:
    def __init__(self, sys):
        self.sys = sys
        self.gen = lru_cache(maxsize=None)(self._gen)
        self.least = lru_cache(maxsize=None)(min_sizes(sys)[1])

    def structures(self, cls, n):
        return self.gen(ClassRef(cls), n)

    def count(self, cls, n):
        return len(self.structures(cls, n))

    def _sequences(self, arg, n, restr):
        out = []
        hi = n if restr.max_card is None else min(restr.max_card, n)
        for k in range(restr.min_card, hi + 1):
            for sizes in _compositions(n, k, 1):
                pools = [self.gen(arg, s) for s in sizes]
                out.extend(itertools.product(*pools))
        return out

    def _gen(self, e, n):
        if isinstance(e, Epsilon):
            return frozenset({("E",)}) if n == 0 else frozenset()
        if isinstance(e, Atom):
            return frozenset({("Z", e.label)}) if n == 1 else frozenset()
        if isinstance(e, ClassRef):
            return self.gen(self.sys[e.name], n)
        if isinstance(e, Union):
            return frozenset(("U", i, s) for i, b in enumerate(e.branches) for s in self.gen(b, n))
        if isinstance(e, Prod):
            out = set()
            k = len(e.factors)
            least = [self.least(f) for f in e.factors]
            for sizes in _compositions(n, k, 0):
                if any(s < m for s, m in zip(sizes, least)):
                    continue
                pools = [None] * k
                # smallest sizes first, stopping at the first empty factor,
                # so a factor that takes all of n is only expanded when needed
                for i in sorted(range(k), key=lambda i: sizes[i]):
                    pools[i] = self.gen(e.factors[i], sizes[i])
                    if not pools[i]:
                        break
                else:
                    out.update(("P", t) for t in itertools.product(*pools))
            return frozenset(out)
        seqs = self._sequences(e.arg, n, e.restr)
        if isinstance(e, Seq):
            return frozenset(("S", t) for t in seqs)
        if isinstance(e, MSet):
            return frozenset(("M", _bag(t)) for t in seqs)
        if isinstance(e, PSet):
            return frozenset(("PS", _bag(t)) for t in seqs if len(set(t)) == len(t))
        if isinstance(e, Cycle):
            return frozenset(("C", _necklace(t)) for t in seqs)
        raise TypeError(e)


@lru_cache(maxsize=None)
def to_oracle(s):
    """Package structure -> oracle normal form (collections re-normalized)."""
    if isinstance(s, EpsilonLeaf):
        return ("E",)
    if isinstance(s, AtomLeaf):
        return ("Z", s.label)
    if isinstance(s, UnionNode):
        return ("U", s.branch_index, to_oracle(s.child))
    kids = tuple(to_oracle(c) for c in s.children)
    if isinstance(s, ProdNode):
        return ("P", kids)
    if isinstance(s, SeqNode):
        return ("S", kids)
    if isinstance(s, MSetNode):
        return ("M", _bag(kids))
    if isinstance(s, PSetNode):
        return ("PS", _bag(kids))
    if isinstance(s, CycleNode):
        return ("C", _necklace(kids))
    raise TypeError(s)


# -- labeled ------------------------------------------------------------------


def _ordered_partitions(labels, k, allow_empty):
    """Assignments of each label to one of k ordered blocks."""
    labels = sorted(labels)
    for assign in itertools.product(range(k), repeat=len(labels)):
        blocks = [frozenset(l for l, b in zip(labels, assign) if b == i) for i in range(k)]
        if allow_empty or all(blocks):
            yield blocks


def _set_partitions(labels):
    labels = sorted(labels)
    if not labels:
        yield []
        return
    first, rest = labels[0], labels[1:]
    for part in _set_partitions(rest):
        yield [frozenset({first})] + part
        for i in range(len(part)):
            yield part[:i] + [part[i] | {first}] + part[i + 1:]


class LabeledOracle:
    """Structures on an explicit label set; counts depend only on its size."""

    def __init__(self, sys):
        self.sys = sys
        self.gen = lru_cache(maxsize=None)(self._gen)
        self.least = lru_cache(maxsize=None)(min_sizes(sys)[1])

    def count(self, cls, n):
        return len(self.gen(ClassRef(cls), frozenset(range(1, n + 1))))

    def _gen(self, e, L):
        if isinstance(e, Epsilon):
            return frozenset({("E",)}) if not L else frozenset()
        if isinstance(e, Atom):
            return frozenset({("Z", next(iter(L)))}) if len(L) == 1 else frozenset()
        if isinstance(e, ClassRef):
            return self.gen(self.sys[e.name], L)
        if isinstance(e, Union):
            return frozenset(("U", i, s) for i, b in enumerate(e.branches) for s in self.gen(b, L))
        if isinstance(e, Prod):
            out = set()
            least = [self.least(f) for f in e.factors]
            for blocks in _ordered_partitions(L, len(e.factors), True):
                if any(len(b) < m for b, m in zip(blocks, least)):
                    continue
                k = len(e.factors)
                pools = [None] * k
                for i in sorted(range(k), key=lambda i: len(blocks[i])):
                    pools[i] = self.gen(e.factors[i], frozenset(blocks[i]))
                    if not pools[i]:
                        break
                else:
                    out.update(("P", t) for t in itertools.product(*pools))
            return frozenset(out)
        r = e.restr
        ok = r.allows
        if isinstance(e, Seq):
            out = set()
            for k in range(len(L) + 1):
                if not ok(k):
                    continue
                for blocks in _ordered_partitions(L, k, False):
                    pools = [self.gen(e.arg, b) for b in blocks]
                    out.update(("S", t) for t in itertools.product(*pools))
            return frozenset(out)
        out = set()
        for blocks in _set_partitions(L):
            if not ok(len(blocks)):
                continue
            pools = [self.gen(e.arg, b) for b in blocks]
            for t in itertools.product(*pools):
                if isinstance(e, MSet):
                    out.add(("M", frozenset(t)))
                elif isinstance(e, Cycle) and not t:
                    out.add(("C", ()))
                elif isinstance(e, Cycle):
                    # every cyclic order of the blocks, rotated to start at the first block
                    for perm in itertools.permutations(t[1:]):
                        out.add(("C", (t[0],) + perm))
                else:
                    raise TypeError(e)
        return frozenset(out)


# -- closed forms ---------------------------------------------------------------


def necklaces(k, n):
    """Burnside: k-ary necklaces of length n >= 1."""
    return sum(_phi(d) * k ** (n // d) for d in range(1, n + 1) if n % d == 0) // n


def _phi(n):
    return sum(1 for i in range(1, n + 1) if math.gcd(i, n) == 1)

