# footage/exceptions.py
"""
Error hierarchy shared by every stage of the fast-forward pipeline.

Each class carries the process exit code the CLI reports for it:
container/IO problems 2, invariant violations 3, infeasible rate plans 4,
everything else 1.
"""
from __future__ import annotations

from typing import Any, Optional


class FastForwardError(Exception):
    exit_code = 1


# ---------- container / IO ----------


class ContainerError(FastForwardError):
    exit_code = 2


class BadMagic(ContainerError):
    pass


class VersionUnsupported(ContainerError):
    pass


class TruncatedSection(ContainerError):
    pass


class IoFailure(ContainerError):
    pass


class InvariantViolation(FastForwardError):
    """A record broke one of its invariants; names the frame and field."""

    exit_code = 3

    def __init__(self, message: str, *, frame: Optional[int] = None, field: Optional[str] = None):
        self.frame = frame
        self.field = field
        where = []
        if frame is not None:
            where.append(f"frame {frame}")
        if field:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")


# ---------- numeric preconditions ----------


class DimensionMismatch(FastForwardError):
    pass


class OutOfRangeInput(FastForwardError):
    pass


class EmptyProfile(FastForwardError):
    pass


class InfeasibleRates(FastForwardError):
    """The target speed-up is unreachable inside the rate bounds.

    ``plan`` holds the best-effort RatePlan (every segment clamped).
    """

    exit_code = 4

    def __init__(self, message: str, plan: Any = None):
        super().__init__(message)
        self.plan = plan


class TooFewFrames(FastForwardError):
    pass


class TooFewSegments(FastForwardError):
    pass


class NoInteriorFrame(FastForwardError):
    pass


class IndexOutOfRange(FastForwardError):
    pass


class BinCountMismatch(FastForwardError):
    pass


class InvalidSpec(FastForwardError):
    pass


class TooLarge(FastForwardError):
    pass
