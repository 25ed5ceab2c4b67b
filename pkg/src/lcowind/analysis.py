"""Windowed averaging of recorded series and convergence-order studies.

The study helpers work on plain time series, so the same code measures
average convergence (pass the output series) and sensitivity convergence
(pass the sensitivity series).  Spans are measured in periods of the
underlying oscillation; the period is estimated from the series itself
unless the caller supplies it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFitError, InvalidSpanError
from .primal import estimate_period
from .windows import NormalizationMode, Window, discrete_weights

__all__ = ["ConvergenceStudy", "DivergenceDiagnostic", "windowed_average",
           "convergence_study", "endpoint_shift_robustness",
           "divergence_diagnostic"]

# Spans land a quarter period past each requested count.  Whole-period
# spans are degenerate for the trigonometric windows: their weighted
# averages of any periodic signal are then exact to machine precision,
# which leaves nothing to fit a convergence order on.  The quarter point
# keeps every window's leading error term active at once.
DEFAULT_SPAN_OFFSET = 0.25

# End step for the self-computed reference when no closed form is given.
REFERENCE_PERIOD_COUNT = 300.0

NOISE_FLOOR_FACTOR = 100.0


def windowed_average(outputs, kind: Window, n_tr: int, n_final: int,
                     mode: NormalizationMode = NormalizationMode.PAPER_FAITHFUL) -> float:
    """Discrete windowed time average of a recorded series."""
    series = np.asarray(outputs, dtype=float)
    if series.ndim != 1:
        raise ValueError("outputs must be a one-dimensional series")
    if n_final > series.size - 1:
        raise InvalidSpanError(
            f"final step {n_final} exceeds recorded length {series.size - 1}")
    weights = discrete_weights(kind, n_tr, n_final, mode)
    return float(weights.values @ series[n_tr:n_final + 1] / weights.span)


@dataclass
class ConvergenceStudy:
    """Windowed values and errors over a list of span lengths."""

    kind: Window
    requested_k: np.ndarray     # strictly increasing period counts
    realized_k: np.ndarray      # spans actually used, in measured periods
    end_steps: np.ndarray       # final step index per entry
    values: np.ndarray          # windowed averages
    errors: np.ndarray          # |value - reference|
    reference: float
    reference_source: str       # "closed-form" or "bump@k=..."
    period: float
    slope: float | None         # positive decay order, None if not fitted
    fit_residual: float | None  # rms log-space misfit of the line
    fit_mask: np.ndarray        # entries used by the fit
    noise_floor: float


@dataclass
class DivergenceDiagnostic:
    """Windowed values over growing spans, with growth flags."""

    kind: Window
    requested_k: np.ndarray
    end_steps: np.ndarray
    values: np.ndarray
    growth_flags: np.ndarray    # bool, entry exceeds the running magnitude
    any_growth: bool


def _end_steps(k_list, n_tr, dt, period, span_offset, length):
    ks = np.asarray(list(k_list), dtype=float)
    if ks.size == 0:
        raise InvalidSpanError("empty span list")
    if np.any(np.diff(ks) <= 0.0):
        raise InvalidSpanError("span list must be strictly increasing")
    ends = n_tr + np.rint((ks + span_offset) * period / dt).astype(int)
    if ends[-1] > length - 1:
        raise InvalidSpanError(
            f"series of length {length} too short for {ks[-1]:g} periods "
            f"(needs step {ends[-1]})")
    if ends[0] <= n_tr:
        raise InvalidSpanError("smallest span rounds to zero steps")
    realized = (ends - n_tr) * dt / period
    return ks, ends, realized


def _fit_loglog(requested_k, errors, noise_floor):
    mask = errors > noise_floor
    if int(mask.sum()) < 2:
        return None, None, mask
    x = np.log(requested_k[mask])
    y = np.log(errors[mask])
    coeffs, residuals, *_ = np.polyfit(x, y, 1, full=True)
    rms = float(np.sqrt(residuals[0] / x.size)) if residuals.size else 0.0
    return float(-coeffs[0]), rms, mask


def convergence_study(series, kind: Window, n_tr: int, dt: float, k_list,
                      reference: float | None = None,
                      period: float | None = None,
                      span_offset: float = DEFAULT_SPAN_OFFSET,
                      mode: NormalizationMode = NormalizationMode.PAPER_FAITHFUL) -> ConvergenceStudy:
    """Windowed averages against span length, with a fitted decay order.

    The positive `slope` means the error shrinks like span^(-slope).  The
    fit uses the requested period counts and drops entries whose error
    sits at the floating-point noise floor of the reference.  A study
    whose spans all sit at that floor has no fittable order and raises;
    single-entry studies skip the fit instead.
    """
    data = np.asarray(series, dtype=float)
    if period is None:
        period, _ = estimate_period(data, n_tr, dt)
    ks, ends, realized = _end_steps(k_list, n_tr, dt, period, span_offset,
                                    data.size)

    if reference is None:
        ref_end = n_tr + int(round((REFERENCE_PERIOD_COUNT + span_offset)
                                   * period / dt))
        ref_end = min(ref_end, data.size - 1)
        if ref_end < ends[-1]:
            raise InvalidSpanError(
                "series too short to compute a reference beyond the largest span")
        ref_k = (ref_end - n_tr) * dt / period
        reference = windowed_average(data, Window.BUMP, n_tr, ref_end, mode)
        reference_source = f"bump@k={ref_k:.6g}"
    else:
        reference = float(reference)
        reference_source = "closed-form"

    values = np.array([windowed_average(data, kind, n_tr, int(end), mode)
                       for end in ends])
    errors = np.abs(values - reference)

    scale = abs(reference)
    if scale == 0.0:
        scale = float(np.max(np.abs(values))) or 1.0
    noise_floor = NOISE_FLOOR_FACTOR * np.finfo(float).eps * scale

    slope, fit_residual, fit_mask = _fit_loglog(ks, errors, noise_floor)
    if slope is None and ks.size >= 2:
        raise DegenerateFitError(
            f"{kind.value}: fewer than two spans above the noise floor "
            f"{noise_floor:.3e}; nothing to fit")

    return ConvergenceStudy(kind=kind, requested_k=ks, realized_k=realized,
                            end_steps=ends, values=values, errors=errors,
                            reference=reference,
                            reference_source=reference_source, period=period,
                            slope=slope, fit_residual=fit_residual,
                            fit_mask=fit_mask, noise_floor=noise_floor)


def endpoint_shift_robustness(sensitivity_fn, kind: Window, n_tr: int,
                              n_final: int, shift: int) -> float:
    """Relative change of a sensitivity vector when the averaging endpoint
    moves by `shift` steps.

    `sensitivity_fn(kind, n_tr, n_final)` must return the sensitivity
    vector for that window and span.
    """
    baseline = np.asarray(sensitivity_fn(kind, n_tr, n_final), dtype=float)
    shifted = np.asarray(sensitivity_fn(kind, n_tr, n_final + shift),
                         dtype=float)
    norm = float(np.linalg.norm(baseline))
    if norm == 0.0:
        raise ValueError("baseline sensitivity vector has zero norm")
    return float(np.linalg.norm(shifted - baseline) / norm)


def divergence_diagnostic(series, kind: Window, n_tr: int, dt: float, k_list,
                          period: float | None = None,
                          span_offset: float = DEFAULT_SPAN_OFFSET,
                          growth_margin: float = 1e-3,
                          mode: NormalizationMode = NormalizationMode.PAPER_FAITHFUL) -> DivergenceDiagnostic:
    """Windowed values over growing spans without any convergence claim.

    An entry is flagged when its magnitude exceeds the running maximum of
    all earlier entries by more than the growth margin, the signature of a
    diverging windowed quantity.
    """
    data = np.asarray(series, dtype=float)
    if period is None:
        period, _ = estimate_period(data, n_tr, dt)
    ks, ends, _ = _end_steps(k_list, n_tr, dt, period, span_offset, data.size)

    values = np.array([windowed_average(data, kind, n_tr, int(end), mode)
                       for end in ends])
    flags = np.zeros(ks.size, dtype=bool)
    running = abs(values[0])
    for i in range(1, ks.size):
        magnitude = abs(values[i])
        flags[i] = magnitude > running * (1.0 + growth_margin)
        running = max(running, magnitude)
    return DivergenceDiagnostic(kind=kind, requested_k=ks, end_steps=ends,
                                values=values, growth_flags=flags,
                                any_growth=bool(flags.any()))
