"""Calibration, benchmarking and entanglement experiments.

:func:`run_experiment` is the registry used by the CLI: it snapshots
the platform parameters, runs the named routine, and emits a JSON-ready
report {routine, inputs, fit, updated_parameters} plus the raw swept
points for CSV output.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from ..platform import Platform, dump_parameters
from .calibration import (
    ClassificationOutcome,
    qubit_spectroscopy,
    rabi_amplitude,
    ramsey_detuned,
    resonator_spectroscopy,
    single_shot_classification,
    t1,
    t2,
)
from .chsh import ChshOutcome, MitigationMatrix, chsh, readout_mitigation_matrix, singlet_circuit
from .fitting import FitResult
from .rb import RBOutcome, standard_rb

__all__ = [
    "resonator_spectroscopy",
    "qubit_spectroscopy",
    "rabi_amplitude",
    "ramsey_detuned",
    "t1",
    "t2",
    "single_shot_classification",
    "standard_rb",
    "readout_mitigation_matrix",
    "chsh",
    "singlet_circuit",
    "FitResult",
    "RBOutcome",
    "ChshOutcome",
    "MitigationMatrix",
    "ClassificationOutcome",
    "EXPERIMENTS",
    "run_experiment",
]


def _flatten(tree: dict, prefix: str = "") -> dict[str, object]:
    flat = {}
    for key, value in tree.items():
        path = f"{prefix}.{key}" if prefix else str(key)
        if isinstance(value, dict):
            flat.update(_flatten(value, path))
        else:
            flat[path] = value
    return flat


def _parameter_diff(before: dict, after: dict) -> dict[str, object]:
    flat_before = _flatten(before)
    flat_after = _flatten(after)
    return {
        path: value
        for path, value in flat_after.items()
        if flat_before.get(path) != value
    }


def _run_resonator_spectroscopy(platform, qubit, seed, **kw):
    return resonator_spectroscopy(
        platform,
        qubit,
        span=float(kw.get("span", 20e6)),
        n_points=int(kw.get("points", 100)),
        nshots=int(kw.get("shots", 4096)),
    )


def _run_qubit_spectroscopy(platform, qubit, seed, **kw):
    return qubit_spectroscopy(
        platform,
        qubit,
        span=float(kw.get("span", 4e6)),
        n_points=int(kw.get("points", 300)),
        nshots=int(kw.get("shots", 4096)),
    )


def _run_rabi(platform, qubit, seed, **kw):
    return rabi_amplitude(
        platform,
        qubit,
        amplitude_range=(0.0, float(kw.get("max_amplitude", 1.0))),
        n_points=int(kw.get("points", 75)),
        nshots=int(kw.get("shots", 4096)),
    )


def _default_delays(platform, qubit, scale, points):
    upper = int(scale)
    return [int(round(t)) for t in np.linspace(0, upper, points)]


def _run_ramsey(platform, qubit, seed, **kw):
    delays = kw.get("delays")
    if delays is None:
        delays = _default_delays(platform, qubit, kw.get("max_delay", 10_000), int(kw.get("points", 40)))
    return ramsey_detuned(
        platform,
        qubit,
        delays,
        artificial_detuning=float(kw.get("detuning", 0.5e6)),
        nshots=int(kw.get("shots", 4096)),
    )


def _run_t1(platform, qubit, seed, **kw):
    delays = kw.get("delays")
    if delays is None:
        delays = _default_delays(
            platform, qubit, kw.get("max_delay", 3 * platform.qubits[qubit].t1), int(kw.get("points", 30))
        )
    return t1(platform, qubit, delays, nshots=int(kw.get("shots", 4096)))


def _run_t2(platform, qubit, seed, **kw):
    delays = kw.get("delays")
    if delays is None:
        delays = _default_delays(
            platform, qubit, kw.get("max_delay", 2 * platform.qubits[qubit].t2), int(kw.get("points", 30))
        )
    return t2(platform, qubit, delays, nshots=int(kw.get("shots", 4096)))


def _run_classification(platform, qubit, seed, **kw):
    return single_shot_classification(platform, qubit, nshots=int(kw.get("shots", 10_000)))


def _run_rb(platform, qubit, seed, **kw):
    depths = kw.get("depths") or [1, 2, 4, 8, 16, 32, 64, 128, 256, 512]
    return standard_rb(
        platform,
        qubit,
        depths=[int(d) for d in depths],
        n_sequences=int(kw.get("sequences", 64)),
        nshots=int(kw.get("shots", 1024)),
        seed=seed,
        n_bootstrap=int(kw.get("bootstrap", 1000)),
    )


EXPERIMENTS = {
    "resonator_spectroscopy": _run_resonator_spectroscopy,
    "qubit_spectroscopy": _run_qubit_spectroscopy,
    "rabi_amplitude": _run_rabi,
    "ramsey_detuned": _run_ramsey,
    "t1": _run_t1,
    "t2": _run_t2,
    "single_shot_classification": _run_classification,
    "standard_rb": _run_rb,
}


def run_experiment(
    platform: Platform, name: str, qubit: int = 0, seed: int = 0, **kwargs
) -> tuple[dict, dict[str, list[float]]]:
    """Run a named routine and return (report, raw points).

    The report carries the routine name, its inputs, the fit (or
    outcome) and the platform parameters the run updated.
    """
    if name not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}")
    before = dump_parameters(platform)
    outcome = EXPERIMENTS[name](platform, qubit, seed, **kwargs)
    after = dump_parameters(platform)

    if isinstance(outcome, FitResult):
        fit_payload = outcome.to_dict()
        points = dict(outcome.data)
        success = outcome.success
    elif isinstance(outcome, RBOutcome):
        fit_payload = outcome.to_dict()
        points = {
            "depth": [float(d) for d in outcome.depths],
            "survival": [float(v) for v in outcome.survival.mean(axis=1)],
        }
        success = outcome.fit.success
    elif isinstance(outcome, ClassificationOutcome):
        fit_payload = outcome.to_dict()
        points = {}
        success = True
    else:
        raise TypeError(f"unexpected outcome type {type(outcome)!r}")

    report = {
        "routine": name,
        "inputs": {"qubit": qubit, "seed": seed, **{k: _json_safe(v) for k, v in kwargs.items()}},
        "fit": fit_payload,
        "success": success,
        "updated_parameters": _parameter_diff(before, after),
    }
    return report, points


def _json_safe(value):
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value
