"""Constructor algebra, validated grammar systems and structure terms.

Expressions are immutable and hashable, so equal sub-expressions can share
counting tables.  Structures mirror the expression constructors, except that
class references are transparent: a structure of ``ClassRef("T")`` is simply a
structure of the definition of ``T``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional

from .errors import ValidationError

UNLABELED = "unlabeled"
LABELED = "labeled"
MODES = (UNLABELED, LABELED)

IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
RESERVED = frozenset({"Epsilon", "Atom", "Union", "Prod", "Seq", "MSet", "PSet", "Cycle", "card"})


@dataclass(frozen=True)
class Restriction:
    """Cardinality constraint ``min_card <= #components <= max_card``.

    ``max_card=None`` means unbounded.
    """

    min_card: int = 0
    max_card: Optional[int] = None

    def __post_init__(self):
        if self.min_card < 0:
            raise ValueError("min_card must be non-negative")
        if self.max_card is not None and self.max_card < self.min_card:
            raise ValueError(f"restriction min {self.min_card} > max {self.max_card}")

    @property
    def unrestricted(self) -> bool:
        return self.min_card == 0 and self.max_card is None

    def allows(self, k: int) -> bool:
        return k >= self.min_card and (self.max_card is None or k <= self.max_card)


NO_RESTRICTION = Restriction()


class Expr:
    """Marker base class for constructor expressions."""

    __slots__ = ()


@dataclass(frozen=True)
class Epsilon(Expr):
    pass


@dataclass(frozen=True)
class Atom(Expr):
    label: str = "z"


@dataclass(frozen=True)
class ClassRef(Expr):
    name: str


@dataclass(frozen=True, init=False)
class Union(Expr):
    branches: tuple

    def __init__(self, *branches):
        if len(branches) == 1 and isinstance(branches[0], (list, tuple)):
            branches = tuple(branches[0])
        object.__setattr__(self, "branches", tuple(branches))


@dataclass(frozen=True, init=False)
class Prod(Expr):
    factors: tuple

    def __init__(self, *factors):
        if len(factors) == 1 and isinstance(factors[0], (list, tuple)):
            factors = tuple(factors[0])
        object.__setattr__(self, "factors", tuple(factors))


@dataclass(frozen=True)
class Seq(Expr):
    arg: Expr
    restr: Restriction = NO_RESTRICTION


@dataclass(frozen=True)
class MSet(Expr):
    arg: Expr
    restr: Restriction = NO_RESTRICTION


@dataclass(frozen=True)
class PSet(Expr):
    arg: Expr
    restr: Restriction = NO_RESTRICTION


@dataclass(frozen=True)
class Cycle(Expr):
    arg: Expr
    restr: Restriction = NO_RESTRICTION


COLLECTIONS = (Seq, MSet, PSet, Cycle)


def children_of(e: Expr) -> tuple:
    if isinstance(e, Union):
        return e.branches
    if isinstance(e, Prod):
        return e.factors
    if isinstance(e, COLLECTIONS):
        return (e.arg,)
    return ()


def walk(e: Expr):
    """Pre-order traversal of an expression tree (class references are leaves)."""
    stack = [e]
    while stack:
        x = stack.pop()
        yield x
        stack.extend(reversed(children_of(x)))


def class_refs(e: Expr) -> list:
    return [x.name for x in walk(e) if isinstance(x, ClassRef)]


@dataclass(frozen=True)
class SpecSystem:
    defs: tuple  # ((name, Expr), ...) in definition order
    root: str
    mode: str = UNLABELED

    @cached_property
    def table(self) -> dict:
        return dict(self.defs)

    @property
    def names(self) -> list:
        return [n for n, _ in self.defs]

    def __getitem__(self, name: str) -> Expr:
        return self.table[name]

    def __contains__(self, name) -> bool:
        return name in self.table

    def __len__(self) -> int:
        return len(self.defs)

    def with_root(self, root: str) -> "SpecSystem":
        return build_system(self.defs, root, self.mode)

    @cached_property
    def _root_reachable(self) -> tuple:
        return tuple(self._reach(self.root))

    def reachable(self, start: Optional[str] = None) -> list:
        """Class names reachable from ``start`` (default: the root), in discovery order."""
        if start is None or start == self.root:
            return list(self._root_reachable)
        return self._reach(start)

    def _reach(self, start: str) -> list:
        seen = [start]
        todo = [start]
        while todo:
            for ref in class_refs(self.table[todo.pop()]):
                if ref not in seen and ref in self.table:
                    seen.append(ref)
                    todo.append(ref)
        return seen


def _expr_violations(name: str, e: Expr, names: set, mode: str):
    for x in walk(e):
        if not isinstance(x, Expr):
            yield name, f"not an expression: {x!r}"
        elif isinstance(x, ClassRef):
            if x.name not in names:
                yield name, f"unresolved class {x.name}"
        elif isinstance(x, Atom):
            if not isinstance(x.label, str) or not IDENT_RE.match(x.label):
                yield name, f"bad atom label {x.label!r}"
        elif isinstance(x, Union) and len(x.branches) < 2:
            yield name, f"Union needs at least 2 branches, got {len(x.branches)}"
        elif isinstance(x, Prod) and len(x.factors) < 2:
            yield name, f"Prod needs at least 2 factors, got {len(x.factors)}"
        elif isinstance(x, COLLECTIONS):
            if not isinstance(x.restr, Restriction):
                yield name, f"bad restriction {x.restr!r}"
            if isinstance(x, PSet) and mode == LABELED:
                yield name, "PSet not defined for labeled classes"


def build_system(defs: Iterable, root: Optional[str] = None, mode: str = UNLABELED) -> SpecSystem:
    """Validate ``(name, Expr)`` pairs into a :class:`SpecSystem`.

    Every violation is collected before raising :class:`ValidationError`.
    ``root`` defaults to the first definition.
    """
    defs = tuple((n, e) for n, e in defs)
    violations = []
    if mode not in MODES:
        violations.append(("<system>", f"unknown mode {mode!r}"))
    if not defs:
        violations.append(("<system>", "system has no definitions"))
        raise ValidationError(violations)
    names = set()
    for n, _ in defs:
        if not isinstance(n, str) or not IDENT_RE.match(n):
            violations.append((str(n), "bad class name"))
        elif n in RESERVED:
            violations.append((n, f"{n} is a reserved word"))
        if n in names:
            violations.append((n, f"duplicate definition of {n}"))
        names.add(n)
    for n, e in defs:
        violations.extend(_expr_violations(n, e, names, mode))
    if root is None:
        root = defs[0][0]
    elif root not in names:
        violations.append((root, f"root class {root} is not defined"))
    if violations:
        raise ValidationError(violations)
    return SpecSystem(defs, root, mode)


# -- structures ---------------------------------------------------------------


class Structure:
    """Base of the immutable structure trees.

    Hashes are cached on first use: structures are dictionary keys in the
    rank memo, and recomputing a deep hash at every level is quadratic.
    """

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((type(self).__name__,) + tuple(getattr(self, f) for f in self.__dataclass_fields__))
            object.__setattr__(self, "_hash", h)
        return h


def _node(cls):
    cls = dataclass(frozen=True)(cls)
    cls.__hash__ = Structure.__hash__
    return cls


@_node
class EpsilonLeaf(Structure):
    pass


@_node
class AtomLeaf(Structure):
    label: str = "z"


@_node
class UnionNode(Structure):
    branch_index: int
    child: Structure


@_node
class ProdNode(Structure):
    children: tuple


@_node
class SeqNode(Structure):
    children: tuple = ()


@_node
class MSetNode(Structure):
    children: tuple = ()


@_node
class PSetNode(Structure):
    children: tuple = ()


@_node
class CycleNode(Structure):
    children: tuple = ()


CONTAINERS = (ProdNode, SeqNode, MSetNode, PSetNode, CycleNode)


def size_of(s: Structure) -> int:
    """Number of atom leaves in ``s``."""
    total = 0
    stack = [s]
    while stack:
        x = stack.pop()
        if isinstance(x, AtomLeaf):
            total += 1
        elif isinstance(x, UnionNode):
            stack.append(x.child)
        elif isinstance(x, CONTAINERS):
            stack.extend(x.children)
    return total


def member_of(s: Structure, sys: SpecSystem, cls: Optional[str] = None) -> bool:
    """True iff ``s`` derives from class ``cls`` in canonical form.

    Canonical form for multisets, sets and cycles is judged under the global
    structure order, which needs the counting tables of the system.
    """
    from .enumerator import _engine  # ordering keys live with the tables

    cls = sys.root if cls is None else cls
    if cls not in sys:
        return False
    eng, nid = _engine(sys, cls, need_unlabeled=False)
    return eng._member(nid, s)

