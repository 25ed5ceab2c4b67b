"""Windowed time averaging and design sensitivities of limit-cycle
oscillations, with tangent and adjoint gradients of an implicit BDF2
solver and a projected-gradient design loop on top.
"""

__version__ = "0.1.0"

from .adjoint import AdjointMode, AdjointSweep, adjoint_seed, adjoint_step, adjoint_sweep
from .analysis import (ConvergenceStudy, DivergenceDiagnostic, convergence_study,
                       divergence_diagnostic, endpoint_shift_robustness,
                       windowed_average)
from .errors import (AdjointDivergenceError, ConfigError, DegenerateFitError,
                     InvalidSpanError, LcoError, PeriodUndetectableError,
                     StepConvergenceError)
from .models import (AnalyticSignal, AnalyticSignalModel, DesignVector,
                     ForcedOscillator, OutputKind, VanDerPol)
from .optim import DesignHistory, DesignProblem, DesignRecord, evaluate_design, optimize
from .primal import (PseudoTimeConfig, TimeGrid, Trajectory, advance_physical_step,
                     estimate_period, extended_residual, pseudo_time_step,
                     simulate, step_coefficients)
from .tangent import (TangentTrajectory, tangent_step, tangent_sweep,
                      windowed_tangent_sensitivity)
from .windows import (DiscreteWeights, NormalizationMode, Window,
                      bump_normalization, discrete_weights, window_value)

__all__ = [
    "__version__",
    "AdjointMode", "AdjointSweep", "adjoint_seed", "adjoint_step", "adjoint_sweep",
    "ConvergenceStudy", "DivergenceDiagnostic", "convergence_study",
    "divergence_diagnostic", "endpoint_shift_robustness", "windowed_average",
    "AdjointDivergenceError", "ConfigError", "DegenerateFitError",
    "InvalidSpanError", "LcoError", "PeriodUndetectableError",
    "StepConvergenceError",
    "AnalyticSignal", "AnalyticSignalModel", "DesignVector", "ForcedOscillator",
    "OutputKind", "VanDerPol",
    "DesignHistory", "DesignProblem", "DesignRecord", "evaluate_design", "optimize",
    "PseudoTimeConfig", "TimeGrid", "Trajectory", "advance_physical_step",
    "estimate_period", "extended_residual", "pseudo_time_step", "simulate",
    "step_coefficients",
    "TangentTrajectory", "tangent_step", "tangent_sweep",
    "windowed_tangent_sensitivity",
    "DiscreteWeights", "NormalizationMode", "Window", "bump_normalization",
    "discrete_weights", "window_value",
]
