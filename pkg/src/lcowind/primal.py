"""Implicit BDF2 time marching driven by a pseudo-time inner iteration.

Each physical step solves the extended residual equation R*(u^n) = 0 by
implicit-Euler pseudo-time smoothing of the linearized update; an infinite
pseudo-time step reduces the update to a plain Newton step.  The first
physical step is bootstrapped with BDF1 since no second history level
exists yet.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSpanError, PeriodUndetectableError, StepConvergenceError

__all__ = [
    "TimeGrid",
    "PseudoTimeConfig",
    "Trajectory",
    "step_coefficients",
    "extended_residual",
    "pseudo_time_step",
    "advance_physical_step",
    "simulate",
    "estimate_period",
]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform physical time grid with a transient cutoff.

    Steps run n = 0..n_steps; windowed averaging uses steps
    n_transient..n_steps.
    """

    dt: float
    n_steps: int
    n_transient: int = 0

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.n_steps < 1:
            raise ValueError("need at least one physical step")
        if not 0 <= self.n_transient < self.n_steps:
            raise InvalidSpanError(
                f"transient cutoff {self.n_transient} must lie in [0, {self.n_steps})")

    @property
    def span_steps(self) -> int:
        return self.n_steps - self.n_transient

    @property
    def averaging_span(self) -> float:
        return self.span_steps * self.dt

    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt


@dataclass(frozen=True)
class PseudoTimeConfig:
    """Inner iteration controls.

    dtau = inf selects the Newton limit of the pseudo-time update.  A step
    whose residual norm stays above tol after max_inner iterations raises
    StepConvergenceError unless allow_unconverged is set, in which case the
    step is flagged and the march continues.
    """

    dtau: float = math.inf
    tol: float = 1e-12
    max_inner: int = 50
    allow_unconverged: bool = False

    def __post_init__(self):
        if self.dtau <= 0.0:
            raise ValueError("dtau must be positive (inf selects Newton)")
        if self.tol <= 0.0 or self.max_inner < 1:
            raise ValueError("tolerance and max_inner must be positive")

    @property
    def inv_dtau(self) -> float:
        return 0.0 if math.isinf(self.dtau) else 1.0 / self.dtau


@dataclass
class Trajectory:
    """States and per-step diagnostics of one forward solve."""

    grid: TimeGrid
    states: np.ndarray             # (n_steps + 1, d_u)
    outputs: np.ndarray            # (n_steps + 1,)
    inner_iterations: np.ndarray   # (n_steps + 1,) int
    residual_norms: np.ndarray     # (n_steps + 1,)
    converged: np.ndarray          # (n_steps + 1,) bool

    @property
    def n_steps(self) -> int:
        return self.grid.n_steps


def step_coefficients(n: int, dt: float) -> tuple[float, float, float]:
    """Multipliers (alpha, beta, delta) of (u^n, u^{n-1}, u^{n-2}) at step n.

    Step 1 has no u^{-1} history and uses BDF1; all later steps use BDF2.
    """
    if n < 1:
        raise ValueError("physical steps start at n = 1")
    if n == 1:
        return 1.0 / dt, -1.0 / dt, 0.0
    return 1.5 / dt, -2.0 / dt, 0.5 / dt


def extended_residual(model, u_n, u_nm1, u_nm2, sigma, dt, t=0.0) -> np.ndarray:
    """BDF2 extended residual at the candidate state u_n."""
    u_n = np.asarray(u_n, dtype=float)
    return (1.5 / dt) * u_n + model.residual(u_n, sigma, t) \
        - (2.0 / dt) * np.asarray(u_nm1, dtype=float) \
        + (0.5 / dt) * np.asarray(u_nm2, dtype=float)


def _coefficient_residual(model, u_n, u_nm1, u_nm2, sigma, coeffs, t) -> np.ndarray:
    alpha, beta, delta = coeffs
    return alpha * u_n + model.residual(u_n, sigma, t) + beta * u_nm1 + delta * u_nm2


def pseudo_time_step(model, u_p, u_nm1, u_nm2, sigma, dt, t=0.0,
                     dtau=math.inf, coeffs=None) -> np.ndarray:
    """One linearized implicit-Euler update of the inner iteration."""
    if coeffs is None:
        coeffs = (1.5 / dt, -2.0 / dt, 0.5 / dt)
    u_p = np.asarray(u_p, dtype=float)
    residual = _coefficient_residual(model, u_p, u_nm1, u_nm2, sigma, coeffs, t)
    alpha = coeffs[0]
    system = alpha * np.eye(model.d_u) + model.jacobian_state(u_p, sigma, t)
    if not math.isinf(dtau):
        system = system + (1.0 / dtau) * np.eye(model.d_u)
    return u_p - np.linalg.solve(system, residual)


def advance_physical_step(model, u_nm1, u_nm2, sigma, dt, t, cfg: PseudoTimeConfig,
                          coeffs) -> tuple[np.ndarray, int, float, bool]:
    """Drive the inner iteration at one physical step until R* is below tol.

    Returns (state, inner iterations used, final residual norm, converged).
    """
    u_nm1 = np.asarray(u_nm1, dtype=float)
    u_nm2 = np.asarray(u_nm2, dtype=float)
    u = u_nm1.copy()  # warm start from the previous physical state
    norm = float(np.linalg.norm(
        _coefficient_residual(model, u, u_nm1, u_nm2, sigma, coeffs, t)))
    iterations = 0
    while norm > cfg.tol and iterations < cfg.max_inner:
        u = pseudo_time_step(model, u, u_nm1, u_nm2, sigma, dt, t,
                             dtau=cfg.dtau, coeffs=coeffs)
        norm = float(np.linalg.norm(
            _coefficient_residual(model, u, u_nm1, u_nm2, sigma, coeffs, t)))
        iterations += 1
    return u, iterations, norm, norm <= cfg.tol


def simulate(model, sigma, grid: TimeGrid,
             cfg: PseudoTimeConfig | None = None) -> Trajectory:
    """March the model over the grid and record states and outputs."""
    cfg = cfg or PseudoTimeConfig()
    n_total = grid.n_steps
    states = np.empty((n_total + 1, model.d_u))
    outputs = np.empty(n_total + 1)
    inner = np.zeros(n_total + 1, dtype=int)
    norms = np.zeros(n_total + 1)
    flags = np.ones(n_total + 1, dtype=bool)

    u0 = model.initial_state(sigma)
    states[0] = u0
    outputs[0] = model.output_value(u0, sigma)

    for n in range(1, n_total + 1):
        coeffs = step_coefficients(n, grid.dt)
        u_nm1 = states[n - 1]
        u_nm2 = states[n - 2] if n >= 2 else states[0]
        t_n = n * grid.dt
        u, its, norm, ok = advance_physical_step(
            model, u_nm1, u_nm2, sigma, grid.dt, t_n, cfg, coeffs)
        if not ok:
            if not cfg.allow_unconverged:
                raise StepConvergenceError(n, its, norm)
            warnings.warn(f"step {n} left unconverged (residual {norm:.3e})",
                          RuntimeWarning, stacklevel=2)
        states[n] = u
        outputs[n] = model.output_value(u, sigma)
        inner[n] = its
        norms[n] = norm
        flags[n] = ok

    return Trajectory(grid=grid, states=states, outputs=outputs,
                      inner_iterations=inner, residual_norms=norms, converged=flags)


def estimate_period(outputs, n_transient: int, dt: float) -> tuple[float, float]:
    """Estimate the oscillation period from post-transient outputs.

    Uses the mean spacing of upward crossings of the post-transient mean,
    with linear interpolation between samples.  Returns (period, span in
    periods) where the span is (len - 1 - n_transient) * dt / period.
    """
    outputs = np.asarray(outputs, dtype=float)
    tail = outputs[n_transient:]
    if len(tail) < 3:
        raise PeriodUndetectableError("too few samples after the transient cutoff")
    mean = tail.mean()
    below = tail[:-1] < mean
    at_or_above = tail[1:] >= mean
    idx = np.nonzero(below & at_or_above)[0]
    if len(idx) < 2:
        raise PeriodUndetectableError(
            f"found {len(idx)} upward mean crossings, need at least 2")
    frac = (mean - tail[idx]) / (tail[idx + 1] - tail[idx])
    crossings = (n_transient + idx + frac) * dt
    period = float(np.diff(crossings).mean())
    span = (len(outputs) - 1 - n_transient) * dt
    return period, span / period
