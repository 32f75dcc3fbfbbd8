"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class HelmFdsError(Exception):
    """Base class for every error raised by :mod:`helmfds`."""


class DomainError(HelmFdsError, ValueError):
    """Argument outside the domain of a special function."""


class SingularPointError(HelmFdsError, ValueError):
    """A kernel was evaluated at coincident source and target points."""


class OverlapError(HelmFdsError, ValueError):
    """Inclusions of a layout intersect or touch."""


class ConfigError(HelmFdsError, ValueError):
    """Invalid user configuration."""


class DimensionError(HelmFdsError, ValueError):
    """Array dimensions do not match the factorization or system."""


class SizeCapExceeded(HelmFdsError, MemoryError):
    """A dense solve would exceed the configured size or memory cap."""


class FactorizationError(HelmFdsError, ArithmeticError):
    """Dense LU factorization hit an exactly zero pivot.

    Attributes
    ----------
    pivot : int
        Zero-based index of the offending pivot.
    """

    def __init__(self, message, pivot):
        super().__init__(message)
        self.pivot = pivot


class SingularProjection(HelmFdsError, ArithmeticError):
    """The projected matrix ``R A^{-1} L`` of a cell could not be inverted.

    Attributes
    ----------
    cell : object
        Identifier of the cell, ``(level, index)``.
    cond : float
        Condition-number estimate of ``R A^{-1} L``.
    """

    def __init__(self, message, cell, cond):
        super().__init__(message)
        self.cell = cell
        self.cond = cond


class ProxyGeometryError(HelmFdsError, ValueError):
    """A proxy circle intersects the geometry it is meant to enclose."""


class ConvergenceError(HelmFdsError, ArithmeticError):
    """A series failed to reach its truncation tolerance."""
