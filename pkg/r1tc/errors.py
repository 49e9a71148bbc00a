"""Exceptions raised by the completion library."""

from typing import Any, Optional


class R1tcError(ValueError):
    """Base class for library errors."""


class TensorFormatError(R1tcError):
    """Malformed tensor file content."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class EmptyTensorError(R1tcError):
    """The tensor has no observed entries."""

    def __init__(self) -> None:
        super().__init__("no observed entries")


class ZeroTensorError(R1tcError):
    """Every observed entry is zero, so no anchor can normalize the factors."""

    def __init__(self) -> None:
        super().__init__("all-zero")


class SdpDimensionError(R1tcError):
    """Inconsistent shapes in an SDP problem."""


class CompletionDeferred(R1tcError):
    """A method could not decide the instance; the caller may fall back to another method.

    Attributes:
        reason: Short tag such as "not_strong", "zero_edge" or "disconnected"
        detail: Optional payload (nullspace dimension, solver status, ...)
    """

    def __init__(self, reason: str, message: str = "", detail: Any = None):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {message}" if message else reason)


class RankFailure(CompletionDeferred):
    """The nuclear-norm relaxation returned a matrix of numerical rank above one."""

    def __init__(self, outcome: Any):
        self.outcome = outcome
        super().__init__(
            "rank_failure",
            f"numerical rank {outcome.numerical_rank}",
            detail=outcome.numerical_rank,
        )
