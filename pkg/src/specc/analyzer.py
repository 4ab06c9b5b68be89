"""Static checks that make every counting table finite.

Three conditions gate a system: every reachable class has a finite valuation
(the least size at which it has a structure), every collection constructor
ranges over an argument of valuation at least 1, and no class can contain
itself without consuming size (an epsilon-cycle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter

from .grammar import (
    COLLECTIONS,
    Atom,
    ClassRef,
    Epsilon,
    Expr,
    Prod,
    SpecSystem,
    Union,
    walk,
)

INF = math.inf

ERROR = "ERROR"
WARNING = "WARNING"

INFINITE_VALUATION = "infinite-valuation"
NULLABLE_COLLECTION = "nullable-collection"
EPSILON_CYCLE = "epsilon-cycle"
UNREACHABLE = "unreachable"


def expr_valuation(e: Expr, val: dict):
    """Valuation of an expression node given valuations of the classes."""
    if isinstance(e, Epsilon):
        return 0
    if isinstance(e, Atom):
        return 1
    if isinstance(e, ClassRef):
        return val[e.name]
    if isinstance(e, Union):
        return min(expr_valuation(b, val) for b in e.branches)
    if isinstance(e, Prod):
        return sum(expr_valuation(f, val) for f in e.factors)
    if isinstance(e, COLLECTIONS):
        a = e.restr.min_card
        if a == 0:
            return 0
        return a * expr_valuation(e.arg, val)
    raise TypeError(f"not an expression: {e!r}")


class Valuation(dict):
    """Class name -> least structure size (``math.inf`` for empty classes)."""

    def of(self, e: Expr):
        return expr_valuation(e, self)


def compute_valuation(sys: SpecSystem) -> Valuation:
    """Least fixpoint of the valuation equations, iterated from all-infinity.

    Each sweep can only lower values; the system is stable after at most
    ``len(defs) + 2`` sweeps, and anything still infinite then has no
    structure of any size.
    """
    val = Valuation((name, INF) for name in sys.names)
    for _ in range(len(sys) + 2):
        changed = False
        for name, e in sys.defs:
            v = expr_valuation(e, val)
            if v < val[name]:
                val[name] = v
                changed = True
        if not changed:
            break
    return val


@dataclass(frozen=True)
class Diagnostic:
    level: str
    cls: str
    kind: str
    message: str

    def render(self) -> str:
        return f"{self.level} class {self.cls}: {self.message}"

    def __str__(self):
        return self.render()


@dataclass
class AnalysisReport:
    valuation: Valuation
    diagnostics: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(d.level == ERROR for d in self.diagnostics)

    @property
    def errors(self) -> list:
        return [d for d in self.diagnostics if d.level == ERROR]

    @property
    def warnings(self) -> list:
        return [d for d in self.diagnostics if d.level == WARNING]

    def kinds(self) -> set:
        return {d.kind for d in self.diagnostics}

    def render_lines(self) -> list:
        return [d.render() for d in self.diagnostics]


def _zero_weight_refs(e: Expr, val: Valuation) -> set:
    """Classes that can fill the whole size of ``e`` (no other part consumes size)."""
    out = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, ClassRef):
            out.add(x.name)
        elif isinstance(x, Union):
            stack.extend(x.branches)
        elif isinstance(x, Prod):
            vs = [val.of(f) for f in x.factors]
            for i, f in enumerate(x.factors):
                if all(v == 0 for j, v in enumerate(vs) if j != i):
                    stack.append(f)
        elif isinstance(x, COLLECTIONS):
            # a single component may carry the entire size
            r = x.restr
            if r.min_card <= 1 and (r.max_card is None or r.max_card >= 1):
                stack.append(x.arg)
    return out


def check_well_founded(sys: SpecSystem) -> AnalysisReport:
    val = compute_valuation(sys)
    report = AnalysisReport(val)
    diags = report.diagnostics
    reachable = sys.reachable()

    for name in reachable:
        if val[name] == INF:
            diags.append(Diagnostic(ERROR, name, INFINITE_VALUATION,
                                    "infinite valuation (no structure of any size)"))

    for name in reachable:
        for x in walk(sys[name]):
            if isinstance(x, COLLECTIONS) and val.of(x.arg) < 1:
                kind = type(x).__name__
                diags.append(Diagnostic(ERROR, name, NULLABLE_COLLECTION,
                                        f"collection over class admitting size 0 ({kind})"))

    graph = {name: _zero_weight_refs(sys[name], val) & set(reachable) for name in reachable}
    try:
        tuple(TopologicalSorter(graph).static_order())
    except CycleError as exc:
        cycle = exc.args[1]
        # CycleError lists the path with the start node repeated at the end
        path = " -> ".join(cycle[::-1])
        for name in dict.fromkeys(cycle):
            size = val[name]
            diags.append(Diagnostic(
                ERROR, name, EPSILON_CYCLE,
                f"epsilon-cycle {path} (infinitely many structures of size {size}; "
                "possibly conservative)"))

    for name in sys.names:
        if name not in reachable:
            diags.append(Diagnostic(WARNING, name, UNREACHABLE,
                                    f"class {name} is unreachable from root {sys.root}"))
    return report
