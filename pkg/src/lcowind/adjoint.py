"""Discrete adjoint of the implicit BDF2 march with windowed objectives.

The adjoint variables satisfy a backward recurrence whose per-step equation
can be solved either by the same pseudo-time fixed-point iteration the
primal uses (transposed), or by a direct dense solve of the equivalent
linear system.  Both give identical design derivatives; the fixed-point
route additionally reports its contraction factor per step, which stays
below one whenever the primal inner iteration converged.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import AdjointDivergenceError
from .primal import PseudoTimeConfig, Trajectory, step_coefficients
from .windows import NormalizationMode, Window, discrete_weights

__all__ = ["AdjointMode", "AdjointSweep", "adjoint_seed", "adjoint_step",
           "adjoint_sweep"]


class AdjointMode(enum.Enum):
    FIXED_POINT = "fixed-point"
    DIRECT = "direct"

    @classmethod
    def from_name(cls, name: str) -> "AdjointMode":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown adjoint mode {name!r}; expected one of: {valid}") from None


@dataclass
class AdjointSweep:
    """Adjoint states, seeds, and diagnostics of one reverse sweep."""

    adjoint_states: np.ndarray        # (n_steps + 1, d_u); slot 0 unused
    seeds: np.ndarray                 # (n_steps + 1, d_u)
    design_derivative: np.ndarray     # (n_design,)
    running_design_derivative: np.ndarray  # (n_steps + 1, n_design), tail sums
    inner_iterations: np.ndarray      # (n_steps + 1,) int
    residual_norms: np.ndarray        # (n_steps + 1,)
    contraction_estimates: np.ndarray  # (n_steps + 1,)


def adjoint_seed(model, sigma, n: int, u_n, kind: Window, n_transient: int,
                 n_final: int,
                 mode: NormalizationMode = NormalizationMode.PAPER_FAITHFUL) -> np.ndarray:
    """Objective seeding of the adjoint equation at step n.

    Zero before the transient cutoff; otherwise the discrete window weight
    at step n, scaled by the averaging span, times the output gradient.
    """
    if n < n_transient:
        return np.zeros(model.d_u)
    weights = discrete_weights(kind, n_transient, n_final, mode)
    omega = weights.values[n - n_transient] / weights.span
    return omega * model.output_state_gradient(u_n, sigma)


def _step_matrices(model, sigma, dt, n, u_n, inv_dtau, t):
    alpha = step_coefficients(n, dt)[0]
    a_mat = alpha * np.eye(model.d_u) + model.jacobian_state(u_n, sigma, t)
    m_mat = a_mat + inv_dtau * np.eye(model.d_u)
    return a_mat, m_mat


def _downstream_rhs(model, sigma, dt, n, n_total, states, ubar_np1, ubar_np2,
                    inv_dtau, seed):
    """Right-hand side of the step-n adjoint equation from later steps."""
    rhs = seed.astype(float).copy()
    if n + 1 <= n_total:
        beta_np1 = step_coefficients(n + 1, dt)[1]
        _, m_np1 = _step_matrices(model, sigma, dt, n + 1, states[n + 1],
                                  inv_dtau, (n + 1) * dt)
        rhs -= beta_np1 * np.linalg.solve(m_np1.T, ubar_np1)
    if n + 2 <= n_total:
        delta_np2 = step_coefficients(n + 2, dt)[2]
        _, m_np2 = _step_matrices(model, sigma, dt, n + 2, states[n + 2],
                                  inv_dtau, (n + 2) * dt)
        rhs -= delta_np2 * np.linalg.solve(m_np2.T, ubar_np2)
    return rhs


def adjoint_step(model, sigma, dt, n, n_total, states, ubar_guess, ubar_np1,
                 ubar_np2, seed, inv_dtau, tol, max_inner,
                 mode: AdjointMode = AdjointMode.FIXED_POINT):
    """Solve the adjoint equation of one physical step.

    Returns (ubar_n, iterations, residual norm, contraction estimate).
    """
    a_mat, m_mat = _step_matrices(model, sigma, dt, n, states[n], inv_dtau, n * dt)
    rhs = _downstream_rhs(model, sigma, dt, n, n_total, states, ubar_np1,
                          ubar_np2, inv_dtau, seed)

    if inv_dtau == 0.0:
        # Newton limit: the iteration matrix vanishes at the converged state
        ubar = rhs if mode is AdjointMode.FIXED_POINT \
            else m_mat.T @ np.linalg.solve(a_mat.T, rhs)
        return ubar, 1, 0.0, 0.0

    iter_matrix = (np.eye(model.d_u) - np.linalg.solve(m_mat, a_mat)).T
    contraction = float(np.linalg.norm(iter_matrix, 2))

    if mode is AdjointMode.DIRECT:
        ubar = m_mat.T @ np.linalg.solve(a_mat.T, rhs)
        residual = float(np.linalg.norm(iter_matrix @ ubar + rhs - ubar))
        return ubar, 0, residual, contraction

    ubar = np.asarray(ubar_guess, dtype=float).copy()
    previous_residual = math.inf
    for iteration in range(1, max_inner + 1):
        updated = iter_matrix @ ubar + rhs
        residual = float(np.linalg.norm(updated - ubar))
        ubar = updated
        if residual <= tol:
            return ubar, iteration, residual, contraction
        if residual > previous_residual * 10.0 and residual > 1.0:
            raise AdjointDivergenceError(n, iteration, residual, contraction)
        previous_residual = residual
    raise AdjointDivergenceError(n, max_inner, previous_residual, contraction)


def adjoint_sweep(model, sigma, traj: Trajectory, kind: Window,
                  cfg: PseudoTimeConfig | None = None,
                  mode: AdjointMode = AdjointMode.FIXED_POINT,
                  normalization: NormalizationMode = NormalizationMode.PAPER_FAITHFUL,
                  tol: float | None = None) -> AdjointSweep:
    """March the adjoint from the final step to the first and accumulate
    the design derivative of the windowed objective.

    All primal states are held in memory, so no recomputation is needed.
    """
    cfg = cfg or PseudoTimeConfig()
    tol = cfg.tol if tol is None else tol
    grid = traj.grid
    n_total = grid.n_steps
    n_tr = grid.n_transient
    dt = grid.dt
    n_design = model.n_design
    states = traj.states

    weights = discrete_weights(kind, n_tr, n_total, normalization)
    span = weights.span

    ubar = np.zeros((n_total + 1, model.d_u))
    seeds = np.zeros((n_total + 1, model.d_u))
    running = np.zeros((n_total + 1, n_design))
    inner = np.zeros(n_total + 1, dtype=int)
    norms = np.zeros(n_total + 1)
    contractions = np.zeros(n_total + 1)

    for n in range(n_tr, n_total + 1):
        omega = weights.values[n - n_tr] / span
        seeds[n] = omega * model.output_state_gradient(states[n], sigma)

    total = np.zeros(n_design)
    for n in range(n_total, 0, -1):
        ubar_np1 = ubar[n + 1] if n + 1 <= n_total else np.zeros(model.d_u)
        ubar_np2 = ubar[n + 2] if n + 2 <= n_total else np.zeros(model.d_u)
        # warm start from the downstream adjoint state
        ubar[n], inner[n], norms[n], contractions[n] = adjoint_step(
            model, sigma, dt, n, n_total, states, ubar_np1, ubar_np1, ubar_np2,
            seeds[n], cfg.inv_dtau, tol, cfg.max_inner, mode)

        _, m_mat = _step_matrices(model, sigma, dt, n, states[n], cfg.inv_dtau,
                                  n * dt)
        lam = np.linalg.solve(m_mat.T, ubar[n])
        total = total - lam @ model.jacobian_design(states[n], sigma, n * dt)
        if n >= n_tr:
            omega = weights.values[n - n_tr] / span
            total = total + omega * model.output_design_gradient(states[n], sigma)
        running[n] = total

    running[0] = total  # step 0 carries no constraint and zero weight
    return AdjointSweep(adjoint_states=ubar, seeds=seeds, design_derivative=total,
                        running_design_derivative=running, inner_iterations=inner,
                        residual_norms=norms, contraction_estimates=contractions)
