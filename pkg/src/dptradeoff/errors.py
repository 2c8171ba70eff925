"""Typed error hierarchy shared by the analysis engine, the HTTP service and the CLI.

Every error carries a short machine-readable ``code`` so that the service can
emit structured bodies and the CLI can map failures onto exit codes without
string matching.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"


class ConfigurationError(EngineError, ValueError):
    """A mechanism, scenario or request is structurally invalid."""

    code = "configuration"


class DomainError(EngineError, ValueError):
    """A numeric argument lies outside the documented domain."""

    code = "domain"


class IndeterminateUpdateError(EngineError, ArithmeticError):
    """The Bayes update is 0/0 and no posterior is defined."""

    code = "indeterminate-update"


class NotAnalyzedError(EngineError):
    """Risk boundedness is unknown and the numeric probe was inconclusive."""

    code = "not-analyzed"


class NumericOverflowError(EngineError, ArithmeticError):
    """A probe or solver overflowed without a usable monotone trend."""

    code = "numeric-overflow"


class InfeasibleError(EngineError):
    """No parameter value can satisfy the requested constraint."""

    code = "infeasible"


class BracketExpansionError(InfeasibleError):
    """A monotone solver exhausted its bracket expansion range."""

    code = "bracket-expansion"


class UnsatisfiableTargetError(InfeasibleError):
    """A risk or power target is impossible for the requested family."""

    code = "unsatisfiable-target"
