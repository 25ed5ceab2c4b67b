"""Oscillator models and the closed-form analytic test signal.

Every ODE model describes dynamics in the form du/dt + R(u, sigma, t) = 0
and exposes the residual R, its state Jacobian, its design derivative, and
an instantaneous scalar output g(u, sigma).  The analytic signal provides
exact values for the limit average and its design derivative, which makes
it the ground truth for convergence and consistency checks.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DesignVector",
    "OutputKind",
    "AnalyticSignal",
    "AnalyticSignalModel",
    "VanDerPol",
    "ForcedOscillator",
]


@dataclass(frozen=True)
class DesignVector:
    """Design values with componentwise box bounds."""

    values: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        values = np.atleast_1d(np.asarray(self.values, dtype=float))
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if values.shape != lower.shape or values.shape != upper.shape:
            raise ValueError("design values and bounds must have matching shapes")
        if np.any(lower > upper):
            raise ValueError("lower bounds exceed upper bounds")
        if np.any(values < lower) or np.any(values > upper):
            raise ValueError("design values violate box bounds")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n_design(self) -> int:
        return len(self.values)

    def project(self, raw: np.ndarray) -> np.ndarray:
        """Clip a raw design proposal back into the box."""
        return np.clip(np.asarray(raw, dtype=float), self.lower, self.upper)

    def replace_values(self, values: np.ndarray) -> "DesignVector":
        return DesignVector(values=np.asarray(values, dtype=float),
                            lower=self.lower, upper=self.upper)


class OutputKind(enum.Enum):
    """Instantaneous output recorded along a trajectory."""

    FIRST_STATE = "x"
    FIRST_STATE_SQUARED = "x2"

    @classmethod
    def from_name(cls, name: str) -> "OutputKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown output {name!r}; expected one of: {valid}") from None


def _check_state(u, d_u):
    u = np.asarray(u, dtype=float)
    if u.shape != (d_u,):
        raise ValueError(f"state must have shape ({d_u},), got {u.shape}")
    return u


def _sigma_values(sigma) -> np.ndarray:
    values = getattr(sigma, "values", sigma)
    return np.atleast_1d(np.asarray(values, dtype=float))


@dataclass(frozen=True)
class AnalyticSignal:
    """Closed-form oscillating signal g(t, sigma) = a(sigma) + b sin(2 pi t / T(sigma)).

    The mean map is a(sigma) = a0 + a1 . sigma + quad * |sigma - quad_center|^2
    and the period is T(sigma) = base_period * (1 + sigma_1).  The limit of the
    windowed time average is a(sigma) and its design derivative is the mean
    gradient, independent of the period map.

    growth_rate > 0 multiplies the period-induced part of the instantaneous
    design derivative by exp(growth_rate * t), modelling sensitivities whose
    amplitude diverges in time.
    """

    a0: float = 1.0
    a1: np.ndarray = field(default_factory=lambda: np.array([0.5]))
    amplitude: float = 0.5
    base_period: float = 1.0
    growth_rate: float = 0.0
    quad: float = 0.0
    quad_center: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "a1", np.atleast_1d(np.asarray(self.a1, dtype=float)))
        if self.quad_center is not None:
            center = np.atleast_1d(np.asarray(self.quad_center, dtype=float))
            if center.shape != self.a1.shape:
                raise ValueError("quad_center must match a1 in shape")
            object.__setattr__(self, "quad_center", center)
        if self.base_period <= 0.0:
            raise ValueError("base_period must be positive")

    @property
    def n_design(self) -> int:
        return len(self.a1)

    def mean(self, sigma) -> float:
        sigma = _sigma_values(sigma)
        value = self.a0 + float(self.a1 @ sigma)
        if self.quad != 0.0:
            center = self.quad_center if self.quad_center is not None else np.zeros_like(sigma)
            value += self.quad * float(((sigma - center) ** 2).sum())
        return value

    def mean_design_gradient(self, sigma) -> np.ndarray:
        sigma = _sigma_values(sigma)
        grad = self.a1.copy()
        if self.quad != 0.0:
            center = self.quad_center if self.quad_center is not None else np.zeros_like(sigma)
            grad = grad + 2.0 * self.quad * (sigma - center)
        return grad

    def period(self, sigma) -> float:
        sigma = _sigma_values(sigma)
        period = self.base_period * (1.0 + sigma[0])
        if period <= 0.0:
            raise ValueError("design drives the period non-positive")
        return period

    def output(self, t, sigma):
        """Signal value at time t (scalar or array)."""
        period = self.period(sigma)
        return self.mean(sigma) + self.amplitude * np.sin(2.0 * np.pi * np.asarray(t, float) / period)

    def output_design_derivative(self, t, sigma) -> np.ndarray:
        """Instantaneous derivative of the signal w.r.t. each design component.

        Shape (n_design,) for scalar t, (len(t), n_design) for array t.
        """
        sigma = _sigma_values(sigma)
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        period = self.period(sigma)
        grad_mean = self.mean_design_gradient(sigma)
        out = np.tile(grad_mean, (len(t_arr), 1))
        # only the first design component moves the period
        phase = 2.0 * np.pi * t_arr / period
        period_term = -self.amplitude * np.cos(phase) * (2.0 * np.pi * t_arr / period ** 2) \
            * self.base_period
        if self.growth_rate != 0.0:
            period_term = period_term * np.exp(self.growth_rate * t_arr)
        out[:, 0] += period_term
        if np.isscalar(t) or np.asarray(t).ndim == 0:
            return out[0]
        return out


@dataclass(frozen=True)
class AnalyticSignalModel:
    """Harmonic-oscillator realization of an AnalyticSignal.

    States (y, z) trace y(t) = b sin(Omega t) with Omega = 2 pi / T(sigma);
    the recorded output a(sigma) + y reproduces the analytic signal, so the
    full solve/differentiate pipeline can be checked against exact values.
    """

    signal: AnalyticSignal = field(default_factory=AnalyticSignal)

    name = "analytic-signal"
    d_u = 2

    @property
    def n_design(self) -> int:
        return self.signal.n_design

    def initial_state(self, sigma=None) -> np.ndarray:
        return np.array([0.0, self.signal.amplitude])

    def _omega(self, sigma) -> float:
        return 2.0 * np.pi / self.signal.period(sigma)

    def residual(self, u, sigma, t=0.0) -> np.ndarray:
        u = _check_state(u, self.d_u)
        omega = self._omega(sigma)
        return np.array([-omega * u[1], omega * u[0]])

    def jacobian_state(self, u, sigma, t=0.0) -> np.ndarray:
        omega = self._omega(sigma)
        return np.array([[0.0, -omega], [omega, 0.0]])

    def jacobian_design(self, u, sigma, t=0.0) -> np.ndarray:
        u = _check_state(u, self.d_u)
        sigma = _sigma_values(sigma)
        period = self.signal.period(sigma)
        # dOmega/dsigma_1 through T(sigma) = T0 (1 + sigma_1)
        domega = -2.0 * np.pi * self.signal.base_period / period ** 2
        jac = np.zeros((self.d_u, len(sigma)))
        jac[0, 0] = -domega * u[1]
        jac[1, 0] = domega * u[0]
        return jac

    def output_value(self, u, sigma) -> float:
        u = _check_state(u, self.d_u)
        return self.signal.mean(sigma) + u[0]

    def output_state_gradient(self, u, sigma) -> np.ndarray:
        return np.array([1.0, 0.0])

    def output_design_gradient(self, u, sigma) -> np.ndarray:
        return self.signal.mean_design_gradient(sigma)


@dataclass(frozen=True)
class VanDerPol:
    """Van der Pol oscillator; the single design variable is the damping mu.

    Residual convention du/dt + R = 0 with R = (-v, -mu (1 - x^2) v + x),
    which gives the classical x'' - mu (1 - x^2) x' + x = 0 limit cycle.
    """

    output: OutputKind = OutputKind.FIRST_STATE

    name = "van-der-pol"
    d_u = 2
    n_design = 1

    def initial_state(self, sigma=None) -> np.ndarray:
        # close to the limit cycle for every mu in the design box
        return np.array([2.0, 0.0])

    def residual(self, u, sigma, t=0.0) -> np.ndarray:
        u = _check_state(u, self.d_u)
        mu = _sigma_values(sigma)[0]
        x, v = u
        return np.array([-v, -mu * (1.0 - x * x) * v + x])

    def jacobian_state(self, u, sigma, t=0.0) -> np.ndarray:
        u = _check_state(u, self.d_u)
        mu = _sigma_values(sigma)[0]
        x, v = u
        return np.array([
            [0.0, -1.0],
            [2.0 * mu * x * v + 1.0, -mu * (1.0 - x * x)],
        ])

    def jacobian_design(self, u, sigma, t=0.0) -> np.ndarray:
        u = _check_state(u, self.d_u)
        x, v = u
        return np.array([[0.0], [-(1.0 - x * x) * v]])

    def output_value(self, u, sigma) -> float:
        u = _check_state(u, self.d_u)
        if self.output is OutputKind.FIRST_STATE:
            return float(u[0])
        return float(u[0] * u[0])

    def output_state_gradient(self, u, sigma) -> np.ndarray:
        u = _check_state(u, self.d_u)
        if self.output is OutputKind.FIRST_STATE:
            return np.array([1.0, 0.0])
        return np.array([2.0 * u[0], 0.0])

    def output_design_gradient(self, u, sigma) -> np.ndarray:
        return np.zeros(self.n_design)


@dataclass(frozen=True)
class ForcedOscillator:
    """Damped linear oscillator driven at a fixed angular frequency.

    x'' + c x' + k x = forcing * sin(omega t), with stiffness and damping
    scaled by the design variable: k = stiffness0 (1 + sigma_1) and
    c = damping0 (1 + sigma_1).  The post-transient response period 2 pi /
    omega does not depend on the design, only amplitude and phase do.
    """

    omega: float = 2.0 * np.pi
    stiffness0: float = 55.0
    damping0: float = 0.5
    forcing: float = 10.0
    output: OutputKind = OutputKind.FIRST_STATE

    name = "forced-oscillator"
    d_u = 2
    n_design = 1

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.omega

    def initial_state(self, sigma=None) -> np.ndarray:
        return np.array([0.0, 0.0])

    def _coefficients(self, sigma):
        s = _sigma_values(sigma)[0]
        return self.stiffness0 * (1.0 + s), self.damping0 * (1.0 + s)

    def residual(self, u, sigma, t=0.0) -> np.ndarray:
        u = _check_state(u, self.d_u)
        k, c = self._coefficients(sigma)
        x, v = u
        return np.array([-v, c * v + k * x - self.forcing * math.sin(self.omega * t)])

    def jacobian_state(self, u, sigma, t=0.0) -> np.ndarray:
        k, c = self._coefficients(sigma)
        return np.array([[0.0, -1.0], [k, c]])

    def jacobian_design(self, u, sigma, t=0.0) -> np.ndarray:
        u = _check_state(u, self.d_u)
        x, v = u
        return np.array([[0.0], [self.damping0 * v + self.stiffness0 * x]])

    def output_value(self, u, sigma) -> float:
        u = _check_state(u, self.d_u)
        if self.output is OutputKind.FIRST_STATE:
            return float(u[0])
        return float(u[0] * u[0])

    def output_state_gradient(self, u, sigma) -> np.ndarray:
        u = _check_state(u, self.d_u)
        if self.output is OutputKind.FIRST_STATE:
            return np.array([1.0, 0.0])
        return np.array([2.0 * u[0], 0.0])

    def output_design_gradient(self, u, sigma) -> np.ndarray:
        return np.zeros(self.n_design)

    # steady-state closed forms, used as ground truth in tests
    def steady_amplitude(self, sigma) -> float:
        k, c = self._coefficients(sigma)
        denom = (k - self.omega ** 2) ** 2 + (c * self.omega) ** 2
        return self.forcing / math.sqrt(denom)

    def steady_mean_square(self, sigma) -> float:
        """Period average of x^2 once the transient has decayed."""
        amp = self.steady_amplitude(sigma)
        return 0.5 * amp * amp

    def steady_mean_square_design_gradient(self, sigma) -> np.ndarray:
        k, c = self._coefficients(sigma)
        denom = (k - self.omega ** 2) ** 2 + (c * self.omega) ** 2
        ddenom = 2.0 * (k - self.omega ** 2) * self.stiffness0 \
            + 2.0 * c * self.omega ** 2 * self.damping0
        return np.array([-0.5 * self.forcing ** 2 * ddenom / denom ** 2])
