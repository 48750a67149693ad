"""Exception hierarchy shared by every refill component.

Each class carries the process exit code the CLI reports for it.
"""

from typing import ClassVar


class RefillError(Exception):
    exit_code: ClassVar[int] = 1


class ConfigurationError(RefillError, ValueError):
    """Invalid configuration, flag combination or tensor shape."""

    exit_code: ClassVar[int] = 2


class GraphParseError(RefillError, ValueError):
    exit_code: ClassVar[int] = 3

    def __init__(self, message: str, line_number: int | None = None) -> None:
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class InvalidInstanceError(RefillError, ValueError):
    """The instance is empty or otherwise unusable."""

    exit_code: ClassVar[int] = 3


class CheckpointError(RefillError, ValueError):
    exit_code: ClassVar[int] = 3


class ContractViolationError(RefillError, ValueError):
    """A caller broke a precondition (bad vertex, bad permutation, bad action)."""

    exit_code: ClassVar[int] = 4


class InvalidVertexError(ContractViolationError):
    pass


class InvalidPermutationError(ContractViolationError):
    pass


class InvalidActionError(ContractViolationError):
    pass


class NoVerticesError(ContractViolationError):
    pass


class InstanceTooLargeError(RefillError, ValueError):
    exit_code: ClassVar[int] = 5


class NonFiniteLossError(RefillError, ArithmeticError):
    exit_code: ClassVar[int] = 6

    def __init__(self, message: str, diagnostics: dict[str, float]) -> None:
        self.diagnostics = diagnostics
        details = ", ".join(f"{k}={v!r}" for k, v in sorted(diagnostics.items()))
        super().__init__(f"{message} ({details})")
