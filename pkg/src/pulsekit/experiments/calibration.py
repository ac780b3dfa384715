"""Single-qubit calibration routines.

Each routine drives the platform through the pulse API, fits the
response, and updates the corresponding platform parameter when the fit
succeeds; on failure the platform is left untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..acquisition import (
    AcquisitionType,
    AveragingMode,
    Discriminator,
    ExecutionOptions,
)
from ..platform import Platform
from ..pulses import Pulse, PulseKind, PulseSequence, Rectangular, envelope_area_factor
from ..sweeper import Parameter, Sweeper
from .fitting import (
    FitResult,
    fit_damped_cosine,
    fit_exponential_decay,
    fit_lorentzian,
    fit_rabi,
)

__all__ = [
    "resonator_spectroscopy",
    "qubit_spectroscopy",
    "rabi_amplitude",
    "ramsey_detuned",
    "t1",
    "t2",
    "single_shot_classification",
    "ClassificationOutcome",
    "SPECTROSCOPY_RELAXATION_NS",
    "DEFAULT_RELAXATION_NS",
]

SPECTROSCOPY_RELAXATION_NS = 5_000
DEFAULT_RELAXATION_NS = 300_000
DEFAULT_NSHOTS = 4096


def _readout_pulse(platform: Platform, qubit: int, start: int = 0, acquisition_id: int = 0) -> Pulse:
    q = platform.qubits[qubit]
    return Pulse(
        kind=PulseKind.READOUT,
        start=start,
        duration=q.readout_pulse.duration,
        amplitude=q.readout_pulse.amplitude,
        frequency=q.readout_frequency,
        relative_phase=0.0,
        shape=Rectangular(),
        channel=q.channels["readout"],
        qubit=qubit,
        acquisition_id=acquisition_id,
    )


def _drive_pulse(
    platform: Platform,
    qubit: int,
    start: int,
    area_fraction: float = 1.0,
    relative_phase: float = 0.0,
) -> Pulse:
    q = platform.qubits[qubit]
    return Pulse(
        kind=PulseKind.DRIVE,
        start=start,
        duration=q.pi_pulse.duration,
        amplitude=q.pi_pulse.amplitude * area_fraction,
        frequency=q.drive_frequency,
        relative_phase=relative_phase,
        shape=q.pi_pulse.shape,
        channel=q.channels["drive"],
        qubit=qubit,
    )


def _probabilities(result) -> np.ndarray:
    return np.asarray(result.values, dtype=float)


def resonator_spectroscopy(
    platform: Platform,
    qubit: int,
    span: float,
    n_points: int,
    nshots: int = DEFAULT_NSHOTS,
) -> FitResult:
    """Sweep the readout pulse frequency and fit the resonance dip.

    Updates the qubit's readout frequency on success.
    """
    if n_points < 5:
        raise ValueError("resonator spectroscopy needs at least 5 points")
    q = platform.qubits[qubit]
    readout = _readout_pulse(platform, qubit)
    center = q.readout_frequency
    frequencies = np.linspace(center - span / 2, center + span / 2, n_points)
    sweeper = Sweeper(Parameter.FREQUENCY, tuple(frequencies), (readout,))
    options = ExecutionOptions(
        nshots=nshots,
        relaxation_time=SPECTROSCOPY_RELAXATION_NS,
        acquisition=AcquisitionType.INTEGRATED,
        averaging=AveragingMode.CYCLIC,
    )
    result = platform.sweep(PulseSequence((readout,)), [sweeper], options)
    magnitude = np.abs(result[0].values)
    fit = fit_lorentzian(frequencies, magnitude, dip=True)
    fit.data = {"frequency_hz": list(map(float, frequencies)), "magnitude": list(map(float, magnitude))}
    if fit.success:
        platform.qubits[qubit].readout_frequency = fit.params["center"]
    return fit


def qubit_spectroscopy(
    platform: Platform,
    qubit: int,
    span: float,
    n_points: int,
    nshots: int = DEFAULT_NSHOTS,
    drive_duration: int = 2000,
    drive_amplitude: float | None = None,
) -> FitResult:
    """Two-tone spectroscopy: swept drive tone, then measure.

    The default drive amplitude matches the calibrated pi-pulse area
    over ``drive_duration`` so the on-resonance response peaks near 1.
    Updates the drive frequency on success.
    """
    if n_points < 5:
        raise ValueError("qubit spectroscopy needs at least 5 points")
    q = platform.qubits[qubit]
    if drive_amplitude is None:
        pi_area = q.pi_pulse.amplitude * q.pi_pulse.duration * envelope_area_factor(q.pi_pulse.shape)
        drive_amplitude = min(1.0, pi_area / drive_duration)
    drive = Pulse(
        kind=PulseKind.DRIVE,
        start=0,
        duration=drive_duration,
        amplitude=drive_amplitude,
        frequency=q.drive_frequency,
        relative_phase=0.0,
        shape=Rectangular(),
        channel=q.channels["drive"],
        qubit=qubit,
    )
    readout = _readout_pulse(platform, qubit, start=drive_duration)
    frequencies = np.linspace(
        q.drive_frequency - span / 2, q.drive_frequency + span / 2, n_points
    )
    sweeper = Sweeper(Parameter.FREQUENCY, tuple(frequencies), (drive,))
    options = ExecutionOptions(
        nshots=nshots,
        relaxation_time=SPECTROSCOPY_RELAXATION_NS,
        acquisition=AcquisitionType.CLASSIFIED,
        averaging=AveragingMode.CYCLIC,
    )
    result = platform.sweep(PulseSequence((drive, readout)), [sweeper], options)
    probabilities = _probabilities(result[0])
    fit = fit_lorentzian(frequencies, probabilities, dip=False)
    fit.data = {"frequency_hz": list(map(float, frequencies)), "p1": list(map(float, probabilities))}
    if fit.success:
        platform.qubits[qubit].drive_frequency = fit.params["center"]
    return fit


def rabi_amplitude(
    platform: Platform,
    qubit: int,
    amplitude_range: tuple[float, float] = (0.0, 1.0),
    n_points: int = 75,
    nshots: int = DEFAULT_NSHOTS,
) -> FitResult:
    """Sweep the drive amplitude and fit the Rabi oscillation.

    Updates pi_pulse.amplitude to the fitted pi amplitude on success.
    """
    if n_points < 5:
        raise ValueError("rabi needs at least 5 points")
    q = platform.qubits[qubit]
    drive = _drive_pulse(platform, qubit, start=0)
    readout = _readout_pulse(platform, qubit, start=q.pi_pulse.duration)
    amplitudes = np.linspace(amplitude_range[0], amplitude_range[1], n_points)
    sweeper = Sweeper(Parameter.AMPLITUDE, tuple(amplitudes), (drive,))
    options = ExecutionOptions(
        nshots=nshots,
        relaxation_time=DEFAULT_RELAXATION_NS,
        acquisition=AcquisitionType.CLASSIFIED,
        averaging=AveragingMode.CYCLIC,
    )
    result = platform.sweep(PulseSequence((drive, readout)), [sweeper], options)
    probabilities = _probabilities(result[0])
    fit = fit_rabi(amplitudes, probabilities)
    fit.data = {"amplitude": list(map(float, amplitudes)), "p1": list(map(float, probabilities))}
    if fit.success and not 0 < fit.params["pi_amplitude"] <= 1:
        fit.success = False
    if fit.success:
        platform.qubits[qubit].pi_pulse.amplitude = fit.params["pi_amplitude"]
    return fit


def _half_pi_pair_sequence(
    platform: Platform, qubit: int, delay: int, second_phase: float
) -> PulseSequence:
    q = platform.qubits[qubit]
    duration = q.pi_pulse.duration
    first = _drive_pulse(platform, qubit, start=0, area_fraction=0.5)
    second = _drive_pulse(
        platform, qubit, start=duration + delay, area_fraction=0.5, relative_phase=second_phase
    )
    readout = _readout_pulse(platform, qubit, start=2 * duration + delay)
    return PulseSequence((first, second, readout))


def ramsey_detuned(
    platform: Platform,
    qubit: int,
    delays,
    artificial_detuning: float,
    nshots: int = DEFAULT_NSHOTS,
) -> FitResult:
    """Two pi/2 pulses with a delay-dependent phase on the second one.

    Fits a damped cosine; the fitted oscillation frequency minus the
    artificial detuning is the true drive-frequency offset, which is
    subtracted from the qubit's drive frequency on success.  Also
    reports t2_star (ns).
    """
    delays = [int(d) for d in delays]
    if len(set(delays)) < 3:
        raise ValueError("ramsey needs at least 3 distinct delays")
    sequences = [
        _half_pi_pair_sequence(
            platform, qubit, d, second_phase=2 * math.pi * artificial_detuning * d * 1e-9
        )
        for d in delays
    ]
    options = ExecutionOptions(
        nshots=nshots,
        relaxation_time=DEFAULT_RELAXATION_NS,
        acquisition=AcquisitionType.CLASSIFIED,
        averaging=AveragingMode.CYCLIC,
    )
    results = platform.execute_batch(sequences, options)
    probabilities = np.array([float(r[0].values) for r in results])
    fit = fit_damped_cosine(np.array(delays, dtype=float), probabilities)
    fit.data = {"delay_ns": [float(d) for d in delays], "p1": list(map(float, probabilities))}
    if fit.success:
        frequency_hz = fit.params["frequency"] * 1e9
        offset = frequency_hz - artificial_detuning
        fit.params["frequency_offset_hz"] = offset
        fit.params["t2_star_ns"] = fit.params["tau"]
        platform.qubits[qubit].drive_frequency -= offset
    return fit


def t1(platform: Platform, qubit: int, delays, nshots: int = DEFAULT_NSHOTS) -> FitResult:
    """Excite, wait, measure: exponential fit of the decay; updates T1."""
    delays = [int(d) for d in delays]
    if len(set(delays)) < 3:
        raise ValueError("t1 needs at least 3 distinct delays")
    q = platform.qubits[qubit]
    drive = _drive_pulse(platform, qubit, start=0)
    readout = _readout_pulse(platform, qubit, start=q.pi_pulse.duration)
    starts = tuple(q.pi_pulse.duration + d for d in delays)
    sweeper = Sweeper(Parameter.START, starts, (readout,))
    options = ExecutionOptions(
        nshots=nshots,
        relaxation_time=DEFAULT_RELAXATION_NS,
        acquisition=AcquisitionType.CLASSIFIED,
        averaging=AveragingMode.CYCLIC,
    )
    result = platform.sweep(PulseSequence((drive, readout)), [sweeper], options)
    probabilities = _probabilities(result[0])
    fit = fit_exponential_decay(np.array(delays, dtype=float), probabilities)
    fit.data = {"delay_ns": [float(d) for d in delays], "p1": list(map(float, probabilities))}
    if fit.success and fit.params["tau"] <= 0:
        fit.success = False
    if fit.success:
        fit.params["t1_ns"] = fit.params["tau"]
        platform.qubits[qubit].t1 = fit.params["tau"]
    return fit


def t2(platform: Platform, qubit: int, delays, nshots: int = DEFAULT_NSHOTS) -> FitResult:
    """Ramsey without the artificial phase; exponential fit of the
    coherence envelope at resonance; updates T2."""
    delays = [int(d) for d in delays]
    if len(set(delays)) < 3:
        raise ValueError("t2 needs at least 3 distinct delays")
    sequences = [
        _half_pi_pair_sequence(platform, qubit, d, second_phase=0.0) for d in delays
    ]
    options = ExecutionOptions(
        nshots=nshots,
        relaxation_time=DEFAULT_RELAXATION_NS,
        acquisition=AcquisitionType.CLASSIFIED,
        averaging=AveragingMode.CYCLIC,
    )
    results = platform.execute_batch(sequences, options)
    probabilities = np.array([float(r[0].values) for r in results])
    fit = fit_exponential_decay(np.array(delays, dtype=float), probabilities)
    fit.data = {"delay_ns": [float(d) for d in delays], "p1": list(map(float, probabilities))}
    if fit.success and (fit.params["tau"] <= 0 or fit.params["amplitude"] < 0.05):
        fit.success = False
    if fit.success:
        fit.params["t2_ns"] = fit.params["tau"]
        platform.qubits[qubit].t2 = fit.params["tau"]
    return fit


@dataclass
class ClassificationOutcome:
    discriminator: Discriminator
    assignment_fidelity: float
    epsilon01: float
    epsilon10: float

    def to_dict(self) -> dict:
        return {
            "discriminator": self.discriminator.to_dict(),
            "assignment_fidelity": self.assignment_fidelity,
            "epsilon01": self.epsilon01,
            "epsilon10": self.epsilon10,
        }


def single_shot_classification(
    platform: Platform, qubit: int, nshots: int = 10_000
) -> ClassificationOutcome:
    """Measure IQ clouds for prepared 0 and 1 and fit the discriminator.

    Stores the rotation/threshold discriminant in the platform and
    returns it with the assignment fidelity 1 - (e01 + e10) / 2.
    """
    q = platform.qubits[qubit]
    ground = PulseSequence((_readout_pulse(platform, qubit),))
    excited = PulseSequence(
        (
            _drive_pulse(platform, qubit, start=0),
            _readout_pulse(platform, qubit, start=q.pi_pulse.duration),
        )
    )
    options = ExecutionOptions(
        nshots=nshots,
        relaxation_time=DEFAULT_RELAXATION_NS,
        acquisition=AcquisitionType.INTEGRATED,
        averaging=AveragingMode.SINGLESHOT,
    )
    cloud0, cloud1 = (
        res[0].values for res in platform.execute_batch([ground, excited], options)
    )
    mean0 = complex(np.mean(cloud0))
    mean1 = complex(np.mean(cloud1))
    rotation = math.atan2((mean1 - mean0).imag, (mean1 - mean0).real)
    projected0 = (cloud0 * np.exp(-1j * rotation)).real
    projected1 = (cloud1 * np.exp(-1j * rotation)).real
    threshold = (float(np.mean(projected0)) + float(np.mean(projected1))) / 2
    epsilon01 = float(np.mean(projected0 > threshold))
    epsilon10 = float(np.mean(projected1 <= threshold))
    discriminator = Discriminator(
        rotation=rotation, threshold=threshold, mean0=mean0, mean1=mean1
    )
    platform.qubits[qubit].classification = discriminator
    return ClassificationOutcome(
        discriminator=discriminator,
        assignment_fidelity=1 - (epsilon01 + epsilon10) / 2,
        epsilon01=epsilon01,
        epsilon10=epsilon10,
    )
