"""Exception hierarchy. Each class carries the CLI exit code it maps to."""

from __future__ import annotations


class SatQosError(Exception):
    exit_code = 1


class PlanValidationError(SatQosError):
    """Raised for invalid configuration; ``paths`` lists the offending keys."""

    exit_code = 2

    def __init__(self, message: str, paths: list[str] | None = None):
        super().__init__(message)
        self.paths = list(paths or [])


class DomainError(SatQosError, ValueError):
    """A formula was evaluated outside its domain."""


class LinkInfeasibleError(DomainError):
    pass


class NoContactError(SatQosError):
    pass


class ClusterError(SatQosError):
    pass


class SchedulingError(ClusterError):
    pass


class AggregationError(SatQosError):
    exit_code = 3

    def __init__(self, message: str, run_ids: list[str] | None = None):
        super().__init__(message)
        self.run_ids = list(run_ids or [])


class UsageError(SatQosError):
    exit_code = 64
