"""Exception types shared across the package."""


class LcoError(Exception):
    """Base class for errors raised by this package."""


class InvalidSpanError(LcoError, ValueError):
    """Averaging span is empty, reversed, or otherwise unusable."""


class StepConvergenceError(LcoError):
    """Inner pseudo-time iteration failed to converge on a physical step."""

    def __init__(self, step, iterations, residual_norm):
        self.step = step
        self.iterations = iterations
        self.residual_norm = residual_norm
        super().__init__(
            f"step {step}: inner iteration stalled after {iterations} iterations "
            f"(residual norm {residual_norm:.3e})"
        )


class AdjointDivergenceError(LcoError):
    """Adjoint fixed-point iteration failed to contract on a step."""

    def __init__(self, step, iterations, residual_norm, contraction):
        self.step = step
        self.iterations = iterations
        self.residual_norm = residual_norm
        self.contraction = contraction
        super().__init__(
            f"adjoint step {step}: no convergence after {iterations} iterations "
            f"(residual norm {residual_norm:.3e}, contraction estimate {contraction:.3f})"
        )


class PeriodUndetectableError(LcoError):
    """Too few mean crossings to estimate an oscillation period."""


class DegenerateFitError(LcoError):
    """Not enough usable points above the noise floor for a slope fit."""


class ConfigError(LcoError):
    """Run configuration is missing, malformed, or contains unknown keys."""
