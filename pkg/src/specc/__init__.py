"""Counting, enumeration and random generation for decomposable combinatorial classes."""

from .analyzer import AnalysisReport, check_well_founded, compute_valuation
from .counter import count, count_labeled, series
from .dsl import parse, parse_system, render_system
from .enumerator import (
    format_structure,
    iterate,
    list_structures,
    parse_structure,
    random_structure,
    rank,
    unrank,
)
from .errors import (
    AnalysisError,
    EmptyError,
    InsufficientTermsError,
    MembershipError,
    ModeError,
    ParseError,
    RangeError,
    SpeccError,
    TableLimitError,
    UnsupportedError,
    ValidationError,
)
from .grammar import (
    Atom,
    ClassRef,
    Cycle,
    Epsilon,
    MSet,
    Prod,
    PSet,
    Restriction,
    Seq,
    SpecSystem,
    Union,
    build_system,
    member_of,
    size_of,
)
from .recurrence import Recurrence, guess_recurrence, recurrence_for, verify

__version__ = "0.1.0"
