"""Execution-time benchmark harness.

The ideal time of a run is nshots x sum_i (T_sequence,i + T_relaxation)
over the sweep points or sequences; the emulator adds a simulated
instrument overhead (a constant plus a per-point compile cost), so that
real ~= T_inst + ideal.  Two timing modes exist: "synthetic" composes
real deterministically from the simulated overhead (asserted in CI),
"wallclock" additionally executes the workload and adds measured host
time (informative only).
"""

from __future__ import annotations

import csv
import io
import math
import statistics
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .acquisition import AcquisitionType, AveragingMode, ExecutionOptions
from .compiler import compile_circuit
from .experiments.calibration import (
    DEFAULT_RELAXATION_NS,
    SPECTROSCOPY_RELAXATION_NS,
    _drive_pulse,
    _half_pi_pair_sequence,
    _readout_pulse,
)
from .experiments.rb import CLIFFORD_TABLE, _clifford_circuit
from .platform import Platform
from .pulses import PulseSequence
from .sweeper import Parameter, Sweeper

__all__ = ["BenchmarkRecord", "SUITE", "run_benchmark", "scaling_study", "records_to_csv"]

NSHOTS = 4096


@dataclass
class BenchmarkRecord:
    """One benchmark row; real >= ideal whenever the simulated overhead
    is non-negative."""

    routine: str
    n_points: int
    nshots: int
    relaxation_ns: int
    ideal_ns: int
    instrument_overhead_ns: int
    software_ns: int
    real_ns: int
    backend: str
    mode: str

    @property
    def ratio(self) -> float:
        return self.real_ns / self.ideal_ns if self.ideal_ns else math.inf

    def to_dict(self) -> dict:
        return {
            "routine": self.routine,
            "n_points": self.n_points,
            "nshots": self.nshots,
            "relaxation_ns": self.relaxation_ns,
            "ideal_s": self.ideal_ns / 1e9,
            "real_s": self.real_ns / 1e9,
            "ratio": self.ratio,
            "instrument_overhead_s": self.instrument_overhead_ns / 1e9,
            "software_s": self.software_ns / 1e9,
            "backend": self.backend,
            "mode": self.mode,
        }


@dataclass
class _Workload:
    """Executable unit: one swept sequence or a list of fixed sequences."""

    style: str  # "sweep" | "batch" | "loop"
    options: ExecutionOptions
    sequence: Optional[PulseSequence] = None
    sweepers: tuple[Sweeper, ...] = ()
    sequences: list[PulseSequence] = field(default_factory=list)

    @property
    def n_points(self) -> int:
        if self.style == "sweep":
            points = 1
            for sweeper in self.sweepers:
                points *= len(sweeper)
            return points
        return len(self.sequences)


def _spectroscopy_workload(platform: Platform, qubit: int, n_points: int) -> _Workload:
    readout = _readout_pulse(platform, qubit)
    center = platform.qubits[qubit].readout_frequency
    frequencies = np.linspace(center - 10e6, center + 10e6, n_points)
    return _Workload(
        style="sweep",
        sequence=PulseSequence((readout,)),
        sweepers=(Sweeper(Parameter.FREQUENCY, tuple(frequencies), (readout,)),),
        options=ExecutionOptions(
            nshots=NSHOTS,
            relaxation_time=SPECTROSCOPY_RELAXATION_NS,
            acquisition=AcquisitionType.INTEGRATED,
            averaging=AveragingMode.CYCLIC,
        ),
    )


def _qubit_spectroscopy_workload(platform: Platform, qubit: int, n_points: int = 300) -> _Workload:
    q = platform.qubits[qubit]
    drive = _drive_pulse(platform, qubit, start=0)
    readout = _readout_pulse(platform, qubit, start=q.pi_pulse.duration)
    frequencies = np.linspace(q.drive_frequency - 2e6, q.drive_frequency + 2e6, n_points)
    return _Workload(
        style="sweep",
        sequence=PulseSequence((drive, readout)),
        sweepers=(Sweeper(Parameter.FREQUENCY, tuple(frequencies), (drive,)),),
        options=ExecutionOptions(
            nshots=NSHOTS,
            relaxation_time=SPECTROSCOPY_RELAXATION_NS,
            acquisition=AcquisitionType.CLASSIFIED,
            averaging=AveragingMode.CYCLIC,
        ),
    )


def _rabi_workload(platform: Platform, qubit: int, n_points: int = 75) -> _Workload:
    q = platform.qubits[qubit]
    drive = _drive_pulse(platform, qubit, start=0)
    readout = _readout_pulse(platform, qubit, start=q.pi_pulse.duration)
    amplitudes = np.linspace(0.0, 1.0, n_points)
    return _Workload(
        style="sweep",
        sequence=PulseSequence((drive, readout)),
        sweepers=(Sweeper(Parameter.AMPLITUDE, tuple(amplitudes), (drive,)),),
        options=ExecutionOptions(
            nshots=NSHOTS,
            relaxation_time=DEFAULT_RELAXATION_NS,
            acquisition=AcquisitionType.CLASSIFIED,
            averaging=AveragingMode.CYCLIC,
        ),
    )


def _ramsey_workload(platform: Platform, qubit: int, n_points: int = 30) -> _Workload:
    delays = np.linspace(0, 10_000, n_points).astype(int)
    sequences = [
        _half_pi_pair_sequence(
            platform, qubit, int(d), second_phase=2 * math.pi * 0.5e6 * int(d) * 1e-9
        )
        for d in delays
    ]
    return _Workload(
        style="batch",
        sequences=sequences,
        options=ExecutionOptions(
            nshots=NSHOTS,
            relaxation_time=DEFAULT_RELAXATION_NS,
            acquisition=AcquisitionType.CLASSIFIED,
            averaging=AveragingMode.CYCLIC,
        ),
    )


def _t1_workload(platform: Platform, qubit: int, n_points: int = 30) -> _Workload:
    q = platform.qubits[qubit]
    drive = _drive_pulse(platform, qubit, start=0)
    readout = _readout_pulse(platform, qubit, start=q.pi_pulse.duration)
    delays = np.linspace(0, 3 * q.t1, n_points).astype(int)
    starts = tuple(int(q.pi_pulse.duration + d) for d in delays)
    return _Workload(
        style="sweep",
        sequence=PulseSequence((drive, readout)),
        sweepers=(Sweeper(Parameter.START, starts, (readout,)),),
        options=ExecutionOptions(
            nshots=NSHOTS,
            relaxation_time=DEFAULT_RELAXATION_NS,
            acquisition=AcquisitionType.CLASSIFIED,
            averaging=AveragingMode.CYCLIC,
        ),
    )


def _t2_workload(platform: Platform, qubit: int, n_points: int = 30) -> _Workload:
    q = platform.qubits[qubit]
    delays = np.linspace(0, 2 * q.t2, n_points).astype(int)
    sequences = [
        _half_pi_pair_sequence(platform, qubit, int(d), second_phase=0.0) for d in delays
    ]
    return _Workload(
        style="batch",
        sequences=sequences,
        options=ExecutionOptions(
            nshots=NSHOTS,
            relaxation_time=DEFAULT_RELAXATION_NS,
            acquisition=AcquisitionType.CLASSIFIED,
            averaging=AveragingMode.CYCLIC,
        ),
    )


def _classification_workload(platform: Platform, qubit: int, n_points: int = 2) -> _Workload:
    q = platform.qubits[qubit]
    ground = PulseSequence((_readout_pulse(platform, qubit),))
    excited = PulseSequence(
        (
            _drive_pulse(platform, qubit, start=0),
            _readout_pulse(platform, qubit, start=q.pi_pulse.duration),
        )
    )
    return _Workload(
        style="batch",
        sequences=[ground, excited],
        options=ExecutionOptions(
            nshots=NSHOTS,
            relaxation_time=DEFAULT_RELAXATION_NS,
            acquisition=AcquisitionType.INTEGRATED,
            averaging=AveragingMode.SINGLESHOT,
        ),
    )


def _rb_circuits(platform: Platform, qubit: int, n_circuits: int, depth: int, seed: int):
    rng = np.random.default_rng(seed)
    sequences = []
    for _ in range(n_circuits):
        indices = rng.integers(0, len(CLIFFORD_TABLE), size=depth)
        circuit = _clifford_circuit(qubit, indices, qubit + 1)
        sequences.append(compile_circuit(circuit, platform)[0])
    return sequences


def _rb_workload(platform: Platform, qubit: int, seed: int = 0) -> _Workload:
    # multiple random sequences instead of a parameter sweep
    depths = (1, 2, 4, 8, 16, 32, 64, 128)
    n_sequences = 8
    rng = np.random.default_rng(seed)
    sequences = []
    for depth in depths:
        for _ in range(n_sequences):
            indices = rng.integers(0, len(CLIFFORD_TABLE), size=depth)
            sequences.append(compile_circuit(_clifford_circuit(qubit, indices, qubit + 1), platform)[0])
    return _Workload(
        style="loop",
        sequences=sequences,
        options=ExecutionOptions(
            nshots=NSHOTS,
            relaxation_time=DEFAULT_RELAXATION_NS,
            acquisition=AcquisitionType.CLASSIFIED,
            averaging=AveragingMode.CYCLIC,
        ),
    )


SUITE: dict[str, Callable[[Platform, int], _Workload]] = {
    "resonator_spectroscopy_20": lambda p, q: _spectroscopy_workload(p, q, 20),
    "resonator_spectroscopy_100": lambda p, q: _spectroscopy_workload(p, q, 100),
    "qubit_spectroscopy": _qubit_spectroscopy_workload,
    "rabi_amplitude": _rabi_workload,
    "ramsey_detuned": _ramsey_workload,
    "t1": _t1_workload,
    "t2": _t2_workload,
    "single_shot_classification": _classification_workload,
    "standard_rb": _rb_workload,
}


def _workload_timing(platform: Platform, workload: _Workload) -> tuple[int, int]:
    """(ideal_ns, instrument_overhead_ns) from the controller's model."""
    controller = platform.controller
    if workload.style == "sweep":
        timing = controller.timing(workload.sequence, workload.options, workload.sweepers)
        return timing["ideal_ns"], timing["instrument_overhead_ns"]
    timings = [controller.timing(seq, workload.options, ()) for seq in workload.sequences]
    ideal = sum(t["ideal_ns"] for t in timings)
    qpu = controller.qpu
    n = len(workload.sequences)
    if workload.style == "batch":
        overhead = qpu.instrument_overhead_ns + qpu.per_point_overhead_ns * n
    else:  # loop: one round trip per sequence
        overhead = n * (qpu.instrument_overhead_ns + qpu.per_point_overhead_ns)
    return ideal, overhead


def _execute_workload(platform: Platform, workload: _Workload):
    if workload.style == "sweep":
        platform.sweep(workload.sequence, list(workload.sweepers), workload.options)
    elif workload.style == "batch":
        platform.execute_batch(workload.sequences, workload.options)
    else:
        for seq in workload.sequences:
            platform.execute_sequence(seq, workload.options)


def _measure(platform: Platform, workload: _Workload, routine: str, mode: str,
             repetitions: int) -> BenchmarkRecord:
    ideal_ns, overhead_ns = _workload_timing(platform, workload)
    software_samples = []
    for _ in range(max(1, repetitions)):
        if mode == "wallclock":
            start = time.perf_counter()
            _execute_workload(platform, workload)
            software_samples.append(int((time.perf_counter() - start) * 1e9))
        else:
            software_samples.append(0)
    software_ns = int(statistics.median(software_samples))
    return BenchmarkRecord(
        routine=routine,
        n_points=workload.n_points,
        nshots=workload.options.nshots,
        relaxation_ns=workload.options.relaxation_time,
        ideal_ns=ideal_ns,
        instrument_overhead_ns=overhead_ns,
        software_ns=software_ns,
        real_ns=ideal_ns + overhead_ns + software_ns,
        backend=platform.name,
        mode=mode,
    )


def run_benchmark(
    platform: Platform,
    suite: Sequence[str] = ("all",),
    repetitions: int = 1,
    mode: str = "synthetic",
) -> list[BenchmarkRecord]:
    """Run the named routines and report ideal/real/ratio per routine."""
    if mode not in ("synthetic", "wallclock"):
        raise ValueError(f"unknown timing mode {mode!r}")
    names = list(SUITE) if "all" in suite else list(suite)
    records = []
    for name in names:
        if name not in SUITE:
            raise ValueError(f"unknown routine {name!r}; choose from {sorted(SUITE)}")
        workload = SUITE[name](platform, 0)
        records.append(_measure(platform, workload, name, mode, repetitions))
    return records


def scaling_study(
    platform: Platform,
    routine: str,
    point_counts: Sequence[int],
    mode: str = "synthetic",
    qubit: int = 0,
    seed: int = 0,
) -> list[BenchmarkRecord]:
    """Rerun a routine at several sweep sizes (or circuit counts).

    ``circuits`` executes RB-generated random circuits as one batch;
    ``circuits_looped`` runs them one controller round trip each.
    """
    if not point_counts:
        raise ValueError("point_counts must not be empty")
    builders: dict[str, Callable[[int], _Workload]] = {
        "resonator_spectroscopy": lambda n: _spectroscopy_workload(platform, qubit, n),
        "qubit_spectroscopy": lambda n: _qubit_spectroscopy_workload(platform, qubit, n),
        "rabi_amplitude": lambda n: _rabi_workload(platform, qubit, n),
        "ramsey_detuned": lambda n: _ramsey_workload(platform, qubit, n),
        "t1": lambda n: _t1_workload(platform, qubit, n),
        "t2": lambda n: _t2_workload(platform, qubit, n),
        "circuits": lambda n: _Workload(
            style="batch",
            sequences=_rb_circuits(platform, qubit, n, depth=10, seed=seed),
            options=ExecutionOptions(
                nshots=NSHOTS,
                relaxation_time=DEFAULT_RELAXATION_NS,
                acquisition=AcquisitionType.CLASSIFIED,
                averaging=AveragingMode.CYCLIC,
            ),
        ),
        "circuits_looped": lambda n: _Workload(
            style="loop",
            sequences=_rb_circuits(platform, qubit, n, depth=10, seed=seed),
            options=ExecutionOptions(
                nshots=NSHOTS,
                relaxation_time=DEFAULT_RELAXATION_NS,
                acquisition=AcquisitionType.CLASSIFIED,
                averaging=AveragingMode.CYCLIC,
            ),
        ),
    }
    if routine not in builders:
        raise ValueError(f"unknown scaling routine {routine!r}; choose from {sorted(builders)}")
    records = []
    for n in point_counts:
        workload = builders[routine](int(n))
        records.append(_measure(platform, workload, f"{routine}[{n}]", mode, 1))
    return records


def records_to_csv(records: Sequence[BenchmarkRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    header = [
        "routine", "backend", "mode", "n_points", "nshots", "relaxation_ns",
        "ideal_s", "real_s", "ratio", "instrument_overhead_s", "software_s",
    ]
    writer.writerow(header)
    for record in records:
        row = record.to_dict()
        writer.writerow([row[key] if key in row else "" for key in header])
    return buffer.getvalue()
