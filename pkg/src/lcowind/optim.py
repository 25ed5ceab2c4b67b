"""Projected-gradient design loop driven by windowed adjoint gradients.

The constrained problem min J_w(sigma) subject to C_w(sigma) >= bound and
box bounds is handled with a quadratic penalty on the constraint and exact
projection onto the box.  Gradients come from the discrete adjoint, so the
cost per iteration is independent of the number of design variables.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .adjoint import AdjointMode, adjoint_sweep
from .errors import LcoError
from .models import DesignVector
from .primal import PseudoTimeConfig, TimeGrid, simulate
from .windows import NormalizationMode, Window, discrete_weights

__all__ = ["DesignProblem", "DesignRecord", "DesignHistory",
           "evaluate_design", "optimize"]


@dataclass(frozen=True)
class DesignProblem:
    """A windowed-average design problem over one dynamical model.

    The objective is the windowed average of the objective model's output;
    the optional constraint requires the constraint model's windowed
    average to stay at or above `bound`.  Both use the same window kind.
    The constraint model must share the objective model's dynamics; only
    the recorded output differs.
    """

    objective_model: object
    design: DesignVector
    grid: TimeGrid
    kind: Window = Window.BUMP
    constraint_model: object | None = None
    bound: float = 0.0
    relaxation: float = 0.1
    max_iterations: int = 100
    pseudo: PseudoTimeConfig = field(default_factory=PseudoTimeConfig)
    normalization: NormalizationMode = NormalizationMode.PAPER_FAITHFUL
    adjoint_mode: AdjointMode = AdjointMode.FIXED_POINT
    penalty: float = 100.0
    grad_tolerance: float = 1e-8
    max_backtracks: int = 30

    def __post_init__(self):
        if not 0.0 < self.relaxation <= 1.0:
            raise ValueError("relaxation factor must lie in (0, 1]")
        if self.constraint_model is not None and not math.isfinite(self.bound):
            raise ValueError("constraint bound must be finite")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.penalty <= 0.0:
            raise ValueError("penalty coefficient must be positive")


@dataclass
class DesignRecord:
    iteration: int
    sigma: np.ndarray
    objective: float
    constraint: float
    feasible: bool
    merit: float
    grad_norm: float       # norm of the projected gradient step
    step_size: float       # accepted line-search step, 0.0 when none taken
    penalty: float


@dataclass
class DesignHistory:
    records: list[DesignRecord]
    final_design: np.ndarray
    converged: bool
    line_search_failed: bool
    iterations: int
    evaluations: int
    message: str


def _windowed_value(outputs, problem: DesignProblem) -> float:
    weights = discrete_weights(problem.kind, problem.grid.n_transient,
                               problem.grid.n_steps, problem.normalization)
    tail = outputs[problem.grid.n_transient:problem.grid.n_steps + 1]
    return float(weights.values @ tail / weights.span)


def evaluate_design(problem: DesignProblem, sigma):
    """Objective, constraint, and their relaxed adjoint gradients at sigma.

    Returns (J_w, C_w, grad_J, grad_C) with both gradients scaled by the
    problem's relaxation factor.  With no constraint model, C_w is +inf
    and grad_C is zero.  Solver failures are re-raised with the offending
    design attached as a `design_iterate` attribute.
    """
    values = np.asarray(getattr(sigma, "values", sigma), dtype=float)
    try:
        traj = simulate(problem.objective_model, values, problem.grid,
                        problem.pseudo)
        sweep = adjoint_sweep(problem.objective_model, values, traj,
                              problem.kind, problem.pseudo,
                              problem.adjoint_mode, problem.normalization)
        objective = _windowed_value(traj.outputs, problem)
        grad_obj = problem.relaxation * sweep.design_derivative

        if problem.constraint_model is None:
            grad_con = np.zeros_like(grad_obj)
            return objective, math.inf, grad_obj, grad_con

        con_outputs = np.array([
            problem.constraint_model.output_value(traj.states[n], values)
            for n in range(traj.n_steps + 1)])
        con_sweep = adjoint_sweep(problem.constraint_model, values, traj,
                                  problem.kind, problem.pseudo,
                                  problem.adjoint_mode, problem.normalization)
        constraint = _windowed_value(con_outputs, problem)
        grad_con = problem.relaxation * con_sweep.design_derivative
        return objective, constraint, grad_obj, grad_con
    except LcoError as exc:
        exc.design_iterate = values.copy()
        raise


def _merit_and_gradient(problem, objective, constraint, grad_obj, grad_con,
                        penalty):
    if problem.constraint_model is None:
        return objective, grad_obj
    violation = max(0.0, problem.bound - constraint)
    merit = objective + penalty * violation ** 2
    grad = grad_obj - 2.0 * penalty * violation * grad_con
    return merit, grad


def optimize(problem: DesignProblem, sigma0=None) -> DesignHistory:
    """Projected-gradient descent on the penalized windowed objective.

    Each iteration takes a backtracking step along the negative merit
    gradient, projecting every candidate onto the box.  Stops when the
    projected-gradient step drops below the tolerance, the iteration
    budget runs out, or the line search stalls (reported as a flag, not
    an exception).  The penalty doubles after three consecutive
    infeasible iterates.
    """
    design = problem.design
    sigma = design.project(np.asarray(
        getattr(sigma0, "values", sigma0 if sigma0 is not None else design.values),
        dtype=float))

    records: list[DesignRecord] = []
    penalty = problem.penalty
    infeasible_streak = 0
    evaluations = 0
    converged = False
    failed = False
    message = "iteration budget exhausted"

    objective, constraint, grad_obj, grad_con = evaluate_design(problem, sigma)
    evaluations += 1

    for iteration in range(1, problem.max_iterations + 1):
        merit, grad = _merit_and_gradient(problem, objective, constraint,
                                          grad_obj, grad_con, penalty)
        projected_step = sigma - design.project(sigma - grad)
        grad_norm = float(np.linalg.norm(projected_step))
        feasible = problem.constraint_model is None or constraint >= problem.bound

        record = DesignRecord(iteration=iteration, sigma=sigma.copy(),
                              objective=objective, constraint=constraint,
                              feasible=feasible, merit=merit,
                              grad_norm=grad_norm, step_size=0.0,
                              penalty=penalty)
        records.append(record)

        if grad_norm < problem.grad_tolerance:
            converged = True
            message = "projected gradient below tolerance"
            break

        if not feasible:
            infeasible_streak += 1
            if infeasible_streak >= 3:
                penalty *= 2.0
                infeasible_streak = 0
        else:
            infeasible_streak = 0

        step = 1.0
        accepted = False
        for _ in range(problem.max_backtracks + 1):
            candidate = design.project(sigma - step * grad)
            cand_eval = evaluate_design(problem, candidate)
            evaluations += 1
            cand_merit, _ = _merit_and_gradient(problem, cand_eval[0],
                                                cand_eval[1], cand_eval[2],
                                                cand_eval[3], penalty)
            decrease = float(grad @ (sigma - candidate))
            if cand_merit <= merit - 1e-4 * decrease:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            failed = True
            message = "line search failed to find descent"
            break

        record.step_size = step
        sigma = candidate
        objective, constraint, grad_obj, grad_con = cand_eval

    return DesignHistory(records=records, final_design=sigma.copy(),
                         converged=converged, line_search_failed=failed,
                         iterations=len(records), evaluations=evaluations,
                         message=message)
