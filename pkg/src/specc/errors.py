"""Exception hierarchy shared by every stage of the compiler."""

from __future__ import annotations


class SpeccError(Exception):
    """Base class for all errors raised by specc."""


class ValidationError(SpeccError):
    """A system failed structural validation.

    ``violations`` holds ``(class_name, message)`` pairs, one per problem found.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(f"class {name}: {msg}" for name, msg in self.violations)
        super().__init__(lines or "invalid system")


class ParseError(SpeccError):
    """The grammar text could not be parsed; carries diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class AnalysisError(SpeccError):
    def __init__(self, report):
        self.report = report
        super().__init__("\n".join(report.render_lines()) or "system rejected")


class ModeError(SpeccError):
    pass


class RangeError(SpeccError, IndexError):
    pass


class UnsupportedError(SpeccError, NotImplementedError):
    pass


class EmptyError(SpeccError):
    pass


class MembershipError(SpeccError, ValueError):
    pass


class InsufficientTermsError(SpeccError, ValueError):
    pass


class TableLimitError(SpeccError, MemoryError):
    """Counting tables grew past the configured memory cap."""


class SealedTableError(SpeccError):
    pass
