"""Exception hierarchy shared by the library and the CLI."""

from typing import Any, Optional

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONVERGENCE = 3
EXIT_CHECK_FAILED = 4


class BMVError(Exception):
    """Base class for all bmv errors."""

    exit_code = 1

    def __init__(self, message: str, stage: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.stage = stage

    def with_stage(self, stage: str) -> "BMVError":
        """Attach the pipeline stage the error came from (keeps an existing one)."""
        if self.stage is None:
            self.stage = stage
        return self

    def __str__(self) -> str:
        if self.stage:
            return f"[{self.stage}] {self.message}"
        return self.message


class InputError(BMVError, ValueError):
    """Invalid user input: matrices, files or parameters."""

    exit_code = EXIT_INPUT


class DimensionError(InputError):
    pass


class HermitianError(InputError):
    def __init__(self, message: str, deviation: float, stage: Optional[str] = None):
        super().__init__(message, stage)
        self.deviation = deviation


class ParameterError(InputError):
    pass


class PreconditionError(InputError):
    pass


class MatrixFormatError(InputError):
    """Matrix JSON that cannot be parsed; carries the parse location when known."""

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[int] = None,
    ):
        location = ""
        if path:
            location = f"{path}"
            if line is not None:
                location += f":{line}:{column}"
            location += ": "
        super().__init__(f"{location}{message}")
        self.path = path
        self.line = line
        self.column = column


class NumericError(BMVError, ArithmeticError):
    """A numerical stage failed to converge or to meet its tolerance."""

    exit_code = EXIT_CONVERGENCE


class EigenSolverError(NumericError):
    def __init__(self, message: str, node: Any = None, stage: Optional[str] = None):
        super().__init__(message, stage)
        self.node = node


class TrackingError(NumericError):
    def __init__(self, message: str, arc: tuple = (), stage: Optional[str] = None):
        super().__init__(message, stage)
        self.arc = arc


class MonodromyError(NumericError):
    pass


class LabelingError(NumericError):
    pass


class RadiusSearchError(NumericError):
    def __init__(self, message: str, attempts: list, stage: Optional[str] = None):
        super().__init__(message, stage)
        self.attempts = attempts


class AccuracyError(NumericError):
    def __init__(self, message: str, trace: Optional[list] = None, stage: Optional[str] = None):
        super().__init__(message, stage)
        self.trace = trace or []


class DomainError(InputError):
    """Evaluation point outside the domain of the formula."""
