"""Tests for the discrete adjoint sweep and its diagnostics."""

from dataclasses import dataclass

import numpy as np
import pytest

from lcowind.adjoint import AdjointMode, adjoint_seed, adjoint_sweep
from lcowind.analysis import windowed_average
from lcowind.errors import AdjointDivergenceError
from lcowind.models import AnalyticSignal, AnalyticSignalModel, OutputKind, VanDerPol
from lcowind.primal import PseudoTimeConfig, TimeGrid, simulate
from lcowind.tangent import tangent_sweep, windowed_tangent_sensitivity
from lcowind.windows import Window, discrete_weights


@dataclass(frozen=True)
class StiffDecayModel:
    """One-dimensional du/dt - 10 u = 0; linear, so Newton converges in one solve."""

    name = "stiff-decay"
    d_u = 1
    n_design = 1

    def initial_state(self, sigma=None):
        return np.array([1.0])

    def residual(self, u, sigma, t=0.0):
        return np.array([-10.0 * u[0]])

    def jacobian_state(self, u, sigma, t=0.0):
        return np.array([[-10.0]])

    def jacobian_design(self, u, sigma, t=0.0):
        return np.array([[1.0]])

    def output_value(self, u, sigma):
        return float(u[0])

    def output_state_gradient(self, u, sigma):
        return np.array([1.0])

    def output_design_gradient(self, u, sigma):
        return np.zeros(1)


def make_vdp_setup(n_steps=300, n_transient=60, cfg=None):
    model = VanDerPol(output=OutputKind.FIRST_STATE_SQUARED)
    sigma = np.array([1.0])
    grid = TimeGrid(dt=0.05, n_steps=n_steps, n_transient=n_transient)
    return model, sigma, simulate(model, sigma, grid, cfg)


def test_seed_zero_before_cutoff_and_at_endpoints():
    model, sigma, traj = make_vdp_setup(n_steps=40, n_transient=10)
    u = traj.states[5]
    assert np.all(adjoint_seed(model, sigma, 5, u, Window.HANN, 10, 40) == 0.0)
    # window endpoints carry zero weight
    assert np.all(adjoint_seed(model, sigma, 10, traj.states[10], Window.HANN, 10, 40) == 0.0)
    assert np.all(adjoint_seed(model, sigma, 40, traj.states[40], Window.HANN, 10, 40) == 0.0)


def test_seed_interior_value():
    model, sigma, traj = make_vdp_setup(n_steps=40, n_transient=10)
    n = 25
    weights = discrete_weights(Window.HANN, 10, 40)
    omega = weights.values[n - 10] / 30
    expected = omega * model.output_state_gradient(traj.states[n], sigma)
    assert np.allclose(adjoint_seed(model, sigma, n, traj.states[n], Window.HANN, 10, 40),
                       expected, rtol=1e-15)


@pytest.mark.parametrize("window", list(Window))
def test_adjoint_equals_tangent_sensitivity(window):
    # discrete duality: both routes differentiate the same finite sum, so
    # they must agree to roundoff, not merely to discretization error
    model, sigma, traj = make_vdp_setup()
    tangent = tangent_sweep(model, sigma, traj)
    t_val = windowed_tangent_sensitivity(tangent, window, 60, 300)
    a_val = adjoint_sweep(model, sigma, traj, window).design_derivative
    assert a_val[0] == pytest.approx(t_val[0], rel=1e-12)


def test_adjoint_matches_finite_differences():
    model, sigma, traj = make_vdp_setup()
    grid = traj.grid
    h = 1e-6

    def objective(mu):
        tr = simulate(model, np.array([mu]), grid)
        return windowed_average(tr.outputs, Window.HANN, 60, 300)

    fd = (objective(1.0 + h) - objective(1.0 - h)) / (2 * h)
    a_val = adjoint_sweep(model, sigma, traj, Window.HANN).design_derivative[0]
    assert a_val == pytest.approx(fd, rel=1e-6)


def test_fixed_point_and_direct_modes_agree():
    cfg = PseudoTimeConfig(dtau=1.0, tol=1e-13, max_inner=200)
    model, sigma, traj = make_vdp_setup(cfg=cfg)
    fp = adjoint_sweep(model, sigma, traj, Window.HANN, cfg=cfg, tol=5e-15)
    direct = adjoint_sweep(model, sigma, traj, Window.HANN, cfg=cfg,
                           mode=AdjointMode.DIRECT, tol=5e-15)
    assert fp.design_derivative[0] == pytest.approx(direct.design_derivative[0],
                                                    rel=1e-10)
    # the fixed point iterates, the direct mode solves outright
    assert fp.inner_iterations[1:].min() >= 1
    assert np.all(direct.inner_iterations[1:] == 0)
    # contraction stays below one whenever the primal inner loop converged
    assert fp.contraction_estimates[1:].max() < 1.0
    assert fp.contraction_estimates[1:].max() > 0.0


def test_newton_limit_shortcut():
    model, sigma, traj = make_vdp_setup(n_steps=60, n_transient=10)
    sweep = adjoint_sweep(model, sigma, traj, Window.HANN)
    assert np.all(sweep.inner_iterations[1:] == 1)
    assert np.all(sweep.residual_norms == 0.0)
    assert np.all(sweep.contraction_estimates == 0.0)


def test_single_step_span_gives_exact_zero():
    # a one-step span touches only the two window endpoints, both zero, so
    # nothing seeds the adjoint and the derivative is exactly zero
    sig = AnalyticSignal(a0=1.0, a1=np.array([0.5]), amplitude=0.3)
    model = AnalyticSignalModel(signal=sig)
    sigma = np.array([0.2])
    grid = TimeGrid(dt=0.05, n_steps=6, n_transient=5)
    traj = simulate(model, sigma, grid)
    sweep = adjoint_sweep(model, sigma, traj, Window.HANN)
    assert np.all(sweep.seeds == 0.0)
    assert np.all(sweep.adjoint_states == 0.0)
    assert np.all(sweep.design_derivative == 0.0)


def test_divergent_fixed_point_raises():
    # dt = 1 makes A = 1.5 - 10 = -8.5; with dtau = 0.2 the shifted matrix is
    # -3.5 and the iteration factor 1 - A/M has magnitude about 1.43
    model = StiffDecayModel()
    sigma = np.array([0.0])
    grid = TimeGrid(dt=1.0, n_steps=4, n_transient=1)
    traj = simulate(model, sigma, grid)
    bad = PseudoTimeConfig(dtau=0.2, tol=1e-12, max_inner=40)
    with pytest.raises(AdjointDivergenceError) as excinfo:
        adjoint_sweep(model, sigma, traj, Window.HANN, cfg=bad)
    assert excinfo.value.contraction > 1.0
    assert excinfo.value.iterations == 40


def test_running_derivative_terminates_at_total():
    model, sigma, traj = make_vdp_setup(n_steps=80, n_transient=20)
    sweep = adjoint_sweep(model, sigma, traj, Window.BUMP)
    assert np.array_equal(sweep.running_design_derivative[1],
                          sweep.design_derivative)
    assert np.array_equal(sweep.running_design_derivative[0],
                          sweep.running_design_derivative[1])
    # tail sums change monotonically in index only where seeds are active;
    # the pre-transient entries still move through the design Jacobian term
    assert sweep.running_design_derivative.shape == (81, 1)


def test_mode_from_name():
    assert AdjointMode.from_name("direct") is AdjointMode.DIRECT
    assert AdjointMode.from_name(" Fixed-Point ") is AdjointMode.FIXED_POINT
    with pytest.raises(ValueError, match="unknown adjoint mode"):
        AdjointMode.from_name("reverse")
