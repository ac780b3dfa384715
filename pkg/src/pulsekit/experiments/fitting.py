"""Least-squares fits shared by the calibration routines."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize

__all__ = [
    "FitResult",
    "lorentzian",
    "fit_lorentzian",
    "fit_rabi",
    "fit_exponential_decay",
    "fit_damped_cosine",
    "fit_rb_decay",
]


@dataclass
class FitResult:
    """Parameter estimates with 1-sigma errors from the fit covariance.

    ``data`` optionally carries the fitted (x, y) points for reports.
    """

    params: dict[str, float]
    errors: dict[str, float]
    residual: float
    success: bool
    data: dict[str, list[float]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "params": dict(self.params),
            "errors": dict(self.errors),
            "residual": self.residual,
            "success": self.success,
        }


def _run_fit(
    model: Callable,
    x: np.ndarray,
    y: np.ndarray,
    p0: Sequence[float],
    names: Sequence[str],
    bounds=(-np.inf, np.inf),
) -> FitResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    try:
        popt, pcov = optimize.curve_fit(model, x, y, p0=p0, bounds=bounds, maxfev=20000)
    except (RuntimeError, ValueError):
        return FitResult(
            params={n: float(v) for n, v in zip(names, p0)},
            errors={n: float("nan") for n in names},
            residual=float("inf"),
            success=False,
        )
    residual = float(np.sqrt(np.mean((model(x, *popt) - y) ** 2)))
    perr = np.sqrt(np.abs(np.diag(pcov)))
    return FitResult(
        params={n: float(v) for n, v in zip(names, popt)},
        errors={n: float(e) for n, e in zip(names, perr)},
        residual=residual,
        success=True,
    )


def lorentzian(x, amplitude, center, width, offset):
    half = width / 2
    return offset + amplitude * half**2 / ((x - center) ** 2 + half**2)


def fit_lorentzian(x, y, dip: Optional[bool] = None) -> FitResult:
    """Peak or dip fit; flags failure when no significant feature exists.

    Params: amplitude, center, width, offset.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    offset0 = float(np.median(y))
    if dip is None:
        dip = abs(np.min(y) - offset0) > abs(np.max(y) - offset0)
    extremum = int(np.argmin(y)) if dip else int(np.argmax(y))
    amplitude0 = float(y[extremum] - offset0)
    span = float(x.max() - x.min())
    p0 = [amplitude0, float(x[extremum]), span / 10, offset0]
    bounds = ([-np.inf, x.min(), 0, -np.inf], [np.inf, x.max(), 10 * span, np.inf])
    result = _run_fit(lorentzian, x, y, p0, ["amplitude", "center", "width", "offset"], bounds)
    if result.success:
        noise = max(result.residual, 1e-12)
        contrast = abs(result.params["amplitude"])
        if contrast < 4 * noise or result.params["width"] > 2 * span:
            result.success = False
    return result


def _dominant_frequency(x: np.ndarray, y: np.ndarray) -> float:
    """Coarse oscillation frequency from the FFT on a uniform-ish grid."""
    step = float(np.mean(np.diff(x)))
    spectrum = np.abs(np.fft.rfft(y - np.mean(y)))
    freqs = np.fft.rfftfreq(len(y), d=step)
    if len(spectrum) < 2:
        return 0.0
    return float(freqs[1 + int(np.argmax(spectrum[1:]))])


def fit_rabi(amplitudes, probabilities) -> FitResult:
    """P(a) = offset - visibility/2 * cos(pi a / pi_amplitude).

    Params: pi_amplitude, visibility, offset.
    """

    def model(a, pi_amplitude, visibility, offset):
        return offset - visibility / 2 * np.cos(np.pi * a / pi_amplitude)

    amplitudes = np.asarray(amplitudes, dtype=float)
    probabilities = np.asarray(probabilities, dtype=float)
    f0 = _dominant_frequency(amplitudes, probabilities)
    pi_amp0 = 1 / (2 * f0) if f0 > 0 else float(amplitudes.max())
    p0 = [pi_amp0, float(probabilities.max() - probabilities.min()), float(np.mean(probabilities))]
    span = float(amplitudes.max() - amplitudes.min())
    bounds = ([1e-6, 0, -1], [10 * span, 2, 2])
    return _run_fit(model, amplitudes, probabilities, p0, ["pi_amplitude", "visibility", "offset"], bounds)


def fit_exponential_decay(times, values) -> FitResult:
    """y = offset + amplitude * exp(-t / tau).  Params: tau, amplitude, offset."""

    def model(t, tau, amplitude, offset):
        return offset + amplitude * np.exp(-t / tau)

    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    offset0 = float(values[-1])
    amplitude0 = float(values[0] - offset0)
    tau0 = float(max(times.max() / 3, np.min(times[times > 0], initial=1.0)))
    p0 = [tau0, amplitude0, offset0]
    bounds = ([1e-9, -2, -2], [np.inf, 2, 2])
    return _run_fit(model, times, values, p0, ["tau", "amplitude", "offset"], bounds)


def fit_damped_cosine(times, values) -> FitResult:
    """y = offset + amplitude * exp(-t/tau) * cos(2 pi f t + phase).

    Params: frequency, tau, amplitude, offset, phase.  Times in ns give
    frequency in 1/ns.
    """

    def model(t, frequency, tau, amplitude, offset, phase):
        return offset + amplitude * np.exp(-t / tau) * np.cos(2 * np.pi * frequency * t + phase)

    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    f0 = _dominant_frequency(times, values)
    span = float(times.max() - times.min())
    p0 = [
        f0 if f0 > 0 else 1 / (2 * max(span, 1.0)),
        span,
        float((values.max() - values.min()) / 2),
        float(np.mean(values)),
        0.0,
    ]
    bounds = ([0, 1e-9, 0, -2, -2 * np.pi], [np.inf, np.inf, 2, 2, 2 * np.pi])
    return _run_fit(
        model, times, values, p0, ["frequency", "tau", "amplitude", "offset", "phase"], bounds
    )


def fit_rb_decay(depths, survival) -> FitResult:
    """Survival(m) = A p^m + B.

    Initialization: B from the longest-depth mean, A from the shortest
    minus B, p from a log-linear regression on (survival - B).
    Params: A, p, B.
    """

    def model(m, amplitude, decay, offset):
        return amplitude * decay**m + offset

    depths = np.asarray(depths, dtype=float)
    survival = np.asarray(survival, dtype=float)
    offset0 = float(survival[-1])
    amplitude0 = float(survival[0] - offset0)
    shifted = survival - offset0
    positive = shifted > 1e-6
    if np.count_nonzero(positive) >= 2 and amplitude0 > 0:
        slope = np.polyfit(depths[positive], np.log(shifted[positive]), 1)[0]
        p0_decay = float(np.clip(np.exp(slope), 1e-6, 1.0))
    else:
        p0_decay = 0.99
    p0 = [amplitude0 if amplitude0 != 0 else 0.5, p0_decay, offset0]
    bounds = ([-2, 1e-9, -1], [2, 1.0, 2])
    return _run_fit(model, depths, survival, p0, ["A", "p", "B"], bounds)
