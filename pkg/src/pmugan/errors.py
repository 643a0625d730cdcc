"""Exception types shared across the package."""


class PmuGanError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(PmuGanError, ValueError):
    """A configuration value is missing, inconsistent, or out of range."""


class IntegrationDivergedError(PmuGanError, RuntimeError):
    """Numerical integration produced a non-finite state."""

    def __init__(self, step: int, message: str | None = None):
        self.step = step
        super().__init__(message or f"integration diverged at step {step}")


class TrainingDivergedError(PmuGanError, RuntimeError):
    """A training loss became non-finite."""

    def __init__(self, iteration: int, message: str | None = None):
        self.iteration = iteration
        super().__init__(message or f"training diverged at iteration {iteration}")


class DegenerateTrajectoryError(PmuGanError, ValueError):
    """A trajectory carries too little variation to identify a model from."""


class FlatProfileError(PmuGanError, ValueError):
    """A profile has zero range, so range-normalized errors are undefined."""
