"""Exception hierarchy shared by models, engine and the command line."""
from __future__ import annotations

from typing import Any, Optional


class PolarsepError(Exception):
    """Base class for every error raised by polarsep."""


class ShapeError(PolarsepError, ValueError):
    """Wrong matrix dimension, mismatched operands or non-Hermitian input."""


class InvalidVectorError(PolarsepError, ValueError):
    """Polarization vector with (numerically) zero norm."""


class InvalidStateError(PolarsepError, ValueError):
    """Matrix is not a density matrix (trace or positivity)."""


class ParameterRangeError(PolarsepError, ValueError):
    """Parameter outside its admissible range."""


class InvalidBehaviorError(PolarsepError, ValueError):
    """Probability table with negative entries or broken normalization."""


class TomographyError(PolarsepError):
    """Base class for reconstruction failures."""


class NotTomographicallyCompleteError(TomographyError):
    """The measured directions do not span the 2x2 Hermitian matrices."""


class InconsistentStatisticsError(TomographyError):
    """Reconstruction is too far from any physical state."""


class ModelInconsistentError(PolarsepError):
    """Axiom model whose conditionals disagree with its post-selection ensembles."""


class PremiseViolation(PolarsepError):
    """Post-selected states do not average back to the subensemble polarization."""

    def __init__(self, message: str, context: Optional[dict[str, Any]] = None):
        super().__init__(message)
        self.context = context or {}


class InputError(PolarsepError):
    """Malformed input file. Carries the file, the offending field and the line."""

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        field: Optional[str] = None,
        line: Optional[int] = None,
    ):
        self.path = path
        self.field = field
        self.line = line
        where = path or "<input>"
        if line is not None:
            where = f"{where}:{line}"
        if field:
            where = f"{where} [{field}]"
        super().__init__(f"{where}: {message}")
