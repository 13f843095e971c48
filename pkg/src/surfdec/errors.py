"""Exception hierarchy for surfdec."""

from __future__ import annotations


class SurfdecError(Exception):
    """Base class for all errors raised by this package."""


class InvalidDistanceError(SurfdecError, ValueError):
    pass


class GeometryError(SurfdecError, ValueError):
    """A defect rectangle is out of bounds, misaligned or overlapping."""


class UnsupportedGeometryError(SurfdecError, ValueError):
    pass


class InvalidProbabilityError(SurfdecError, ValueError):
    pass


class ShapeError(SurfdecError, ValueError):
    pass


class ArchitectureError(SurfdecError, ValueError):
    pass


class TrainingDivergenceError(SurfdecError, ArithmeticError):
    pass


class CanonicalizationDivergenceError(SurfdecError, RuntimeError):
    pass


class WeightFormatError(SurfdecError, ValueError):
    pass


class ContractViolationError(SurfdecError, ValueError):
    pass


class ConfigError(SurfdecError, ValueError):
    """Malformed line-oriented config or board-spec file.

    The message carries ``source:line`` so CLI users can find the problem.
    """

    def __init__(self, message: str, source: str = "<string>", line: int | None = None):
        self.source = source
        self.line = line
        where = source if line is None else f"{source}:{line}"
        super().__init__(f"{where}: {message}")
