"""Error hierarchy and the CLI exit-code contract.

Every error path maps to exactly one exit code:

    0  success
    2  configuration / precondition errors
    3  convergence failures (fixed point, Newton, Picard)
    4  solver breakdown (density band exit, overflow guard, singular system)
    5  domain errors (nonpositive temperature, density or mass fraction)
    6  schema errors in saved state files
"""
from __future__ import annotations

from typing import Any, List, Optional, Tuple


class MixSteadyError(Exception):
    """Base class for all mixsteady errors."""

    exit_code: int = 1

    def __init__(self, message: str = "") -> None:
        super().__init__(message)
        self.message = message
        self.stage: Optional[Tuple[float, float]] = None
        # partial construction report, attached when a continuation stage fails
        self.report: Any = None

    def annotate(self, lam: float, delta: float) -> MixSteadyError:
        """Attach the continuation stage (lambda, delta) the error came from."""
        if self.stage is None:
            self.stage = (lam, delta)
        return self

    def __str__(self) -> str:
        if self.stage is not None:
            return f"{self.message} [lambda={self.stage[0]:g}, delta={self.stage[1]:g}]"
        return self.message


# -- configuration (exit 2) --


class ConfigError(MixSteadyError):
    exit_code = 2


class ConfigParseError(ConfigError):
    """YAML could not be parsed."""

    def __init__(self, message: str, line: int = 0, column: int = 0) -> None:
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ConfigValidationError(ConfigError):
    """One or more config values violate their constraints.

    ``violations`` holds every (field, constraint) pair, not only the first.
    """

    def __init__(self, violations: List[Tuple[str, str]]) -> None:
        lines = "; ".join(f"{f}: {c}" for f, c in violations)
        super().__init__(f"{len(violations)} config violation(s): {lines}")
        self.violations = violations

    def fields(self) -> List[str]:
        return [f for f, _ in self.violations]


class PreconditionError(ConfigError):
    """Run refused before any solve (e.g. M below the configured minimum)."""


# -- convergence (exit 3) --


class ConvergenceError(MixSteadyError):
    exit_code = 3


class NonConvergence(ConvergenceError):
    """Residual stagnated above tolerance."""


class MaxIterations(ConvergenceError):
    """Iteration cap reached."""


# -- solver breakdown (exit 4) --


class SolverBreakdown(MixSteadyError):
    exit_code = 4


class DensityExit(SolverBreakdown):
    """M + r left the admissible band (M/2, 3M/2)."""


class OverflowGuard(SolverBreakdown):
    """An exponent argument exceeded the guard; signals blow-up."""


class SingularLinearSystem(SolverBreakdown):
    """Sparse factorization failed or produced non-finite values."""


# -- domain (exit 5) --


class DomainError(MixSteadyError):
    """Closure evaluated outside its domain (theta, rho*Y_k must be > 0)."""

    exit_code = 5

    def __init__(self, message: str, node: Optional[Tuple[int, ...]] = None) -> None:
        if node is not None:
            message = f"{message} at node {node}"
        super().__init__(message)
        self.node = node


# -- files (exit 6) --


class SchemaError(MixSteadyError):
    """Saved field or manifest does not match the expected schema."""

    exit_code = 6
