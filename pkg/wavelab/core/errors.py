"""Exception hierarchy for the wave laboratory."""
from typing import List, Optional


class WaveLabError(Exception):
    """Base class for all laboratory errors."""


class DomainError(WaveLabError, ValueError):
    """An operation was called outside its mathematical domain."""


class EligibilityError(DomainError):
    """A theorem hypothesis does not hold for the supplied parameters."""

    def __init__(self, violated: str):
        super().__init__(f"{violated} violated")
        self.violated = violated


class ConfigError(WaveLabError):
    """Configuration could not be parsed or validated.

    Carries every violation found, not only the first one.
    """

    def __init__(self, violations: List[str], line: Optional[int] = None):
        self.violations = list(violations)
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + "; ".join(self.violations))


class StabilityError(ConfigError):
    """Time step exceeds the reference integrator's stability bound."""

    def __init__(self, dt: float, limit: float):
        super().__init__([f"dt = {dt:g} exceeds stability limit {limit:g}"])
        self.dt = dt
        self.limit = limit


class PropagationError(WaveLabError):
    """Non-finite forcing encountered while evaluating a Duhamel integral."""

    def __init__(self, node: int, time: float):
        super().__init__(f"non-finite forcing at quadrature node {node} (tau = {time:g})")
        self.node = node
        self.time = time


class DivergenceError(WaveLabError):
    """A Picard iterate (or a reference time step) became non-finite."""

    def __init__(self, iteration: int, what: str = "iterate"):
        super().__init__(f"{what} {iteration} is not finite")
        self.iteration = iteration
