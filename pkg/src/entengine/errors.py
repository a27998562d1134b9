"""Exception types shared by all engine modules."""


class EngineError(Exception):
    """Base class for every error raised by this library."""


class DomainError(EngineError, ValueError):
    """A parameter or input lies outside its admissible physical domain."""


class UnsupportedAnalytic(EngineError):
    """No closed form exists for this configuration; use the numeric path."""


class DegenerateSteadyState(EngineError):
    """The generator has no unique steady state (singular linear system)."""

    def __init__(self, message: str, null_space_dimension: int):
        super().__init__(message)
        self.null_space_dimension = null_space_dimension


class IntegrationError(EngineError):
    """The adaptive integrator could not advance (step-size underflow)."""


class SpecError(EngineError, ValueError):
    """A sweep or optimization specification is malformed or infeasible."""


class FlatObjective(EngineError):
    """The search objective is constant over the bracket; no maximizer exists."""
