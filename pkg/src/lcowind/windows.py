"""Averaging windows of increasing smoothness and their discrete weights.

All windows are supported on the open interval (0, 1), integrate to one,
and are symmetric about s = 1/2.  Smoother windows buy faster convergence
of windowed time averages toward the underlying periodic limit value.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import InvalidSpanError

__all__ = [
    "Window",
    "NormalizationMode",
    "DiscreteWeights",
    "window_value",
    "bump_normalization",
    "discrete_weights",
]

_INF = math.inf

# (smoothness class, average order, sensitivity order) per window.
# smoothness -1 marks the piecewise-constant case.
_ORDER_TABLE = {
    "square": (-1, 1, 0),
    "hann": (1, 3, 2),
    "hann-square": (3, 5, 4),
    "bump": (_INF, _INF, _INF),
}


class Window(enum.Enum):
    """Window selector, ordered from least to most smooth."""

    SQUARE = "square"
    HANN = "hann"
    HANN_SQUARE = "hann-square"
    BUMP = "bump"

    @classmethod
    def from_name(cls, name: str) -> "Window":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(w.value for w in cls)
            raise ValueError(f"unknown window {name!r}; expected one of: {valid}") from None

    @property
    def smoothness(self) -> float:
        return _ORDER_TABLE[self.value][0]

    @property
    def order_average(self) -> float:
        """Convergence order of the windowed average in period count."""
        return _ORDER_TABLE[self.value][1]

    @property
    def order_sensitivity(self) -> float:
        """Convergence order of the windowed design sensitivity in period count."""
        return _ORDER_TABLE[self.value][2]

    @property
    def bump_norm(self) -> float:
        if self is not Window.BUMP:
            raise AttributeError("bump_norm is only defined for the bump window")
        return bump_normalization()


class NormalizationMode(enum.Enum):
    """How discrete weights are scaled over a span of N - n_tr steps.

    PAPER_FAITHFUL keeps the raw samples w((n - n_tr)/(N - n_tr)) and the
    1/(N - n_tr) divisor, so a constant signal is reproduced only up to an
    O(1/span) bias for the square window.  RENORMALIZED rescales the weight
    vector so it sums exactly to the span, making constants exact.
    """

    PAPER_FAITHFUL = "paper-faithful"
    RENORMALIZED = "renormalized"

    @classmethod
    def from_name(cls, name: str) -> "NormalizationMode":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown normalization {name!r}; expected one of: {valid}") from None


def _bump_quadrature(rel_tol: float) -> float:
    """Integral of exp(-1/(s - s^2)) over (0, 1) by adaptive quadrature."""
    # scipy rejects pure-relative tolerances below ~50 eps
    rel = max(rel_tol, 60.0 * np.finfo(float).eps)
    value, estimate = quad(lambda s: math.exp(-1.0 / (s - s * s)), 0.0, 1.0,
                           epsabs=0.0, epsrel=rel, limit=200)
    if not math.isfinite(value) or estimate > 10.0 * rel * abs(value):
        raise RuntimeError("bump normalization quadrature did not converge")
    return value


@functools.lru_cache(maxsize=1)
def bump_normalization() -> float:
    """Normalization constant of the bump window, computed once per process."""
    return _bump_quadrature(1e-12)


def window_value(kind: Window, s):
    """Evaluate a window at s (scalar or array).  Zero outside (0, 1)."""
    arr = np.asarray(s, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.zeros_like(arr)
    inside = (arr > 0.0) & (arr < 1.0)
    si = arr[inside]
    if kind is Window.SQUARE:
        out[inside] = 1.0
    elif kind is Window.HANN:
        out[inside] = 1.0 - np.cos(2.0 * np.pi * si)
    elif kind is Window.HANN_SQUARE:
        out[inside] = (2.0 / 3.0) * (1.0 - np.cos(2.0 * np.pi * si)) ** 2
    elif kind is Window.BUMP:
        out[inside] = np.exp(-1.0 / (si - si * si)) / bump_normalization()
    else:
        raise TypeError(f"not a Window: {kind!r}")
    if scalar:
        return float(out[0])
    return out


@dataclass(frozen=True)
class DiscreteWeights:
    """Window samples over an averaging span of ``span`` steps.

    ``values[i]`` weights step n_tr + i; the vector has span + 1 entries and
    both endpoint weights vanish for every window kind.
    """

    kind: Window
    mode: NormalizationMode
    values: np.ndarray

    @property
    def span(self) -> int:
        return len(self.values) - 1


def discrete_weights(kind: Window, n_tr: int, n_final: int,
                     mode: NormalizationMode = NormalizationMode.PAPER_FAITHFUL) -> DiscreteWeights:
    """Sample a window over steps n_tr..n_final inclusive."""
    span = n_final - n_tr
    if span <= 0:
        raise InvalidSpanError(f"averaging span must be positive, got n_tr={n_tr}, N={n_final}")
    s = np.arange(span + 1, dtype=float) / span
    values = window_value(kind, s)
    if mode is NormalizationMode.RENORMALIZED:
        total = values.sum()
        if total <= 0.0:
            raise InvalidSpanError(
                f"span of {span} steps leaves no interior weight to renormalize")
        values = values * (span / total)
    return DiscreteWeights(kind=kind, mode=mode, values=values)
