"""Structured warnings and error types shared across the package.

Several formulas in this package are only meaningful in an asymptotic
regime (large color counts); outside it they degenerate rather than
become wrong, so operations emit a :class:`RegimeWarning` carrying a
stable machine-readable ``code`` instead of failing.  The CLI collects
these codes into its ``warnings`` output array.
"""

from __future__ import annotations

import warnings

__all__ = [
    "RegimeWarning",
    "BudgetError",
    "ProjectionError",
    "warn_regime",
]


class RegimeWarning(UserWarning):
    """Warning emitted when inputs fall outside a formula's intended regime.

    Attributes
    ----------
    code:
        Short stable identifier (e.g. ``"kappa-window-clamped"``) suitable
        for machine consumption.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class BudgetError(RuntimeError):
    """Raised when an exhaustive computation would exceed its state budget."""


class ProjectionError(ValueError):
    """Raised when an iterative projection fails to converge.

    Carries the final ``residual`` (worst row/column sum deviation).
    """

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


def warn_regime(code: str, message: str, stacklevel: int = 3) -> None:
    """Emit a :class:`RegimeWarning` with a machine-readable code."""
    warnings.warn(RegimeWarning(code, message), stacklevel=stacklevel)
