"""Tests for the implicit time marching core."""

import math
from dataclasses import dataclass

import numpy as np
import pytest

from lcowind.errors import (InvalidSpanError, PeriodUndetectableError,
                            StepConvergenceError)
from lcowind.models import (AnalyticSignal, AnalyticSignalModel, OutputKind,
                            VanDerPol)
from lcowind.primal import (PseudoTimeConfig, TimeGrid, advance_physical_step,
                            estimate_period, extended_residual,
                            pseudo_time_step, simulate, step_coefficients)

# independent reference for the mu = 1 limit-cycle period, computed once with
# scipy.integrate.solve_ivp (rtol 1e-11) and event-based crossing detection
VDP_PERIOD_MU1 = 6.6632868593152805


@dataclass(frozen=True)
class LinearModel:
    """du/dt + A u + c = 0 with constant A, c; one exact inner solve."""

    matrix: np.ndarray
    offset: np.ndarray

    name = "linear"
    d_u = 2
    n_design = 1

    def initial_state(self, sigma=None):
        return np.array([1.0, -1.0])

    def residual(self, u, sigma, t=0.0):
        return self.matrix @ np.asarray(u, float) + self.offset

    def jacobian_state(self, u, sigma, t=0.0):
        return self.matrix

    def jacobian_design(self, u, sigma, t=0.0):
        return np.zeros((2, 1))

    def output_value(self, u, sigma):
        return float(u[0])

    def output_state_gradient(self, u, sigma):
        return np.array([1.0, 0.0])

    def output_design_gradient(self, u, sigma):
        return np.zeros(1)


def test_step_coefficients_values():
    dt = 0.25
    assert step_coefficients(1, dt) == (1.0 / dt, -1.0 / dt, 0.0)
    for n in (2, 3, 17):
        assert step_coefficients(n, dt) == (1.5 / dt, -2.0 / dt, 0.5 / dt)
    with pytest.raises(ValueError, match="start at n = 1"):
        step_coefficients(0, dt)


def test_extended_residual_hand_reference():
    model = VanDerPol()
    sigma = np.array([1.3])
    dt = 0.1
    u_n = np.array([0.4, -0.6])
    u_nm1 = np.array([0.3, -0.5])
    u_nm2 = np.array([0.2, -0.4])
    expected = 1.5 / dt * u_n + model.residual(u_n, sigma) \
        - 2.0 / dt * u_nm1 + 0.5 / dt * u_nm2
    got = extended_residual(model, u_n, u_nm1, u_nm2, sigma, dt)
    assert np.allclose(got, expected, rtol=1e-14, atol=1e-14)


def test_newton_step_solves_linear_model_exactly():
    # one dtau = inf update must land on the exact BDF2 root of a linear model
    model = LinearModel(matrix=np.array([[2.0, 0.3], [-0.1, 1.5]]),
                        offset=np.array([0.2, -0.4]))
    sigma = np.array([0.0])
    dt = 0.1
    u_nm1 = np.array([1.0, -1.0])
    u_nm2 = np.array([0.9, -0.8])
    u = pseudo_time_step(model, u_nm1, u_nm1, u_nm2, sigma, dt)
    # hand solve: (1.5/dt I + A) u = 2/dt u_nm1 - 0.5/dt u_nm2 - c
    lhs = 1.5 / dt * np.eye(2) + model.matrix
    rhs = 2.0 / dt * u_nm1 - 0.5 / dt * u_nm2 - model.offset
    assert np.allclose(u, np.linalg.solve(lhs, rhs), rtol=1e-13, atol=1e-13)
    assert np.linalg.norm(extended_residual(model, u, u_nm1, u_nm2, sigma, dt)) < 1e-12


def test_finite_dtau_converges_to_same_root():
    model = LinearModel(matrix=np.array([[2.0, 0.3], [-0.1, 1.5]]),
                        offset=np.array([0.2, -0.4]))
    sigma = np.array([0.0])
    dt = 0.1
    coeffs = step_coefficients(2, dt)
    cfg = PseudoTimeConfig(dtau=0.5, tol=1e-13, max_inner=200)
    u, its, norm, ok = advance_physical_step(
        model, np.array([1.0, -1.0]), np.array([0.9, -0.8]), sigma, dt, 0.2,
        cfg, coeffs)
    assert ok and its > 1
    lhs = 1.5 / dt * np.eye(2) + model.matrix
    rhs = 2.0 / dt * np.array([1.0, -1.0]) - 0.5 / dt * np.array([0.9, -0.8]) - model.offset
    assert np.allclose(u, np.linalg.solve(lhs, rhs), rtol=1e-11, atol=1e-11)


def test_bdf_recurrence_holds_along_trajectory():
    model = VanDerPol(output=OutputKind.FIRST_STATE)
    sigma = np.array([1.0])
    grid = TimeGrid(dt=0.05, n_steps=60, n_transient=10)
    traj = simulate(model, sigma, grid)
    # step 1 satisfies the BDF1 relation
    alpha, beta, _ = step_coefficients(1, grid.dt)
    r1 = alpha * traj.states[1] + model.residual(traj.states[1], sigma, grid.dt) \
        + beta * traj.states[0]
    assert np.linalg.norm(r1) < 1e-11
    # every later step satisfies the BDF2 relation at its own time
    for n in range(2, grid.n_steps + 1):
        r = extended_residual(model, traj.states[n], traj.states[n - 1],
                              traj.states[n - 2], sigma, grid.dt, n * grid.dt)
        assert np.linalg.norm(r) < 1e-11
    assert traj.converged.all()
    assert traj.n_steps == 60
    assert len(traj.outputs) == 61


def test_second_order_accuracy_on_harmonic_model():
    sig = AnalyticSignal(a0=0.0, a1=np.array([0.0]), amplitude=1.0, base_period=1.0)
    model = AnalyticSignalModel(signal=sig)
    sigma = np.array([0.0])
    t_end = 2.0
    dts = [0.02, 0.01, 0.005, 0.0025]
    errs = []
    for dt in dts:
        grid = TimeGrid(dt=dt, n_steps=round(t_end / dt), n_transient=0)
        traj = simulate(model, sigma, grid)
        exact = np.array([math.sin(2 * math.pi * t_end), math.cos(2 * math.pi * t_end)])
        errs.append(np.linalg.norm(traj.states[-1] - exact))
    order = np.polyfit(np.log(dts), np.log(errs), 1)[0]
    assert 1.9 < order < 2.1


def test_van_der_pol_period_matches_reference():
    model = VanDerPol(output=OutputKind.FIRST_STATE)
    grid = TimeGrid(dt=0.01, n_steps=4000, n_transient=1000)
    traj = simulate(model, np.array([1.0]), grid)
    period, span = estimate_period(traj.outputs, grid.n_transient, grid.dt)
    assert period == pytest.approx(VDP_PERIOD_MU1, rel=0.01)
    assert span == pytest.approx((4000 - 1000) * 0.01 / period, rel=1e-12)


def test_estimate_period_pure_sine():
    dt = 0.002
    t = np.arange(0, 2001) * dt
    outputs = 0.7 + 0.4 * np.sin(2 * np.pi * t / 0.83)
    period, span = estimate_period(outputs, 100, dt)
    assert period == pytest.approx(0.83, rel=1e-3)
    assert span > 0


def test_estimate_period_failure_modes():
    with pytest.raises(PeriodUndetectableError, match="too few samples"):
        estimate_period(np.zeros(10), 8, 0.1)
    # a constant tail never crosses its own mean
    with pytest.raises(PeriodUndetectableError, match="upward mean crossings"):
        estimate_period(np.ones(500), 10, 0.1)


def test_stalled_step_raises_with_context():
    model = VanDerPol()
    grid = TimeGrid(dt=0.2, n_steps=20, n_transient=0)
    cfg = PseudoTimeConfig(dtau=1e-3, tol=1e-14, max_inner=1)
    with pytest.raises(StepConvergenceError) as excinfo:
        simulate(model, np.array([1.0]), grid, cfg)
    assert excinfo.value.step == 1
    assert excinfo.value.iterations == 1
    assert excinfo.value.residual_norm > 0


def test_allow_unconverged_warns_and_flags():
    model = VanDerPol()
    grid = TimeGrid(dt=0.2, n_steps=3, n_transient=0)
    cfg = PseudoTimeConfig(dtau=1e-3, tol=1e-14, max_inner=1, allow_unconverged=True)
    with pytest.warns(RuntimeWarning, match="left unconverged"):
        traj = simulate(model, np.array([1.0]), grid, cfg)
    assert not traj.converged[1:].any()
    assert traj.inner_iterations[1] == 1


def test_simulation_is_deterministic():
    model = VanDerPol(output=OutputKind.FIRST_STATE_SQUARED)
    grid = TimeGrid(dt=0.05, n_steps=200, n_transient=50)
    a = simulate(model, np.array([1.0]), grid)
    b = simulate(model, np.array([1.0]), grid)
    assert np.array_equal(a.states, b.states)
    assert np.array_equal(a.outputs, b.outputs)


def test_grid_and_pseudo_config_validation():
    with pytest.raises(ValueError, match="dt must be positive"):
        TimeGrid(dt=0.0, n_steps=10, n_transient=0)
    with pytest.raises(ValueError, match="at least one physical step"):
        TimeGrid(dt=0.1, n_steps=0, n_transient=0)
    with pytest.raises(InvalidSpanError):
        TimeGrid(dt=0.1, n_steps=10, n_transient=10)
    with pytest.raises(InvalidSpanError):
        TimeGrid(dt=0.1, n_steps=10, n_transient=-1)
    with pytest.raises(ValueError, match="dtau must be positive"):
        PseudoTimeConfig(dtau=0.0)
    with pytest.raises(ValueError, match="must be positive"):
        PseudoTimeConfig(tol=-1.0)
    grid = TimeGrid(dt=0.1, n_steps=10, n_transient=4)
    assert grid.span_steps == 6
    assert grid.averaging_span == pytest.approx(0.6)
    assert np.allclose(grid.times(), np.arange(11) * 0.1)
    # Newton is the default inner mode
    assert PseudoTimeConfig().inv_dtau == 0.0
    assert PseudoTimeConfig(dtau=2.0).inv_dtau == 0.5
