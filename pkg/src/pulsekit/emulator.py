"""Virtual-transmon controller: a deterministic physics model that turns
pulse sequences into realistic acquisition data.

Model summary: drive pulses rotate the qubit per the generalized Rabi
formula (area calibrated against the coupling constant, detuning via
frame-exact phase bookkeeping); idle gaps apply amplitude damping (T1)
and pure dephasing (from T2); flux pulses matching a pair's activation
apply a conditional phase; readout samples the Born rule and emits IQ
points from per-state blobs scaled by the resonator response
S21(f) = 1 - (kappa/2) / (kappa/2 + i (f - f_r -+ chi)).

All randomness comes from a counter-based Philox generator keyed by the
QPU seed and the canonical serialization of the executed (substituted)
sequence, so results are reproducible and independent of scheduling:
a sweep equals a loop over substituted sequences, and a batch equals a
map of single executions, bit for bit.
"""

from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import json

import numpy as np

from .acquisition import (
    AcquisitionData,
    AcquisitionType,
    AveragingMode,
    ExecutionOptions,
    ResultSet,
)
from .platform import CAPABILITIES, Controller, Qubit
from .pulses import PulseKind, PulseSequence, envelope_area_factor
from .sweeper import Sweeper, substitute_point, sweep_shape

log = logging.getLogger(__name__)

__all__ = [
    "VirtualQubit",
    "PairActivation",
    "VirtualQPU",
    "EmulatorController",
    "EmState",
    "pulse_to_rotation",
    "ideal_time_ns",
    "timing_model",
]

_TWO_PI_NS = 2 * math.pi * 1e-9  # Hz -> rad/ns


@dataclass
class VirtualQubit:
    """Ground-truth parameters of one emulated transmon."""

    resonator_frequency: float
    kappa: float
    qubit_frequency: float
    rabi_coupling: float  # rad per (amplitude x ns) of rectangular drive
    chi: float = 0.0
    t1: float = math.inf
    t2: float = math.inf
    iq_mean0: complex = 0j
    iq_mean1: complex = 1 + 0j
    iq_sigma: float = 0.0
    epsilon01: float = 0.0
    epsilon10: float = 0.0
    pulse_depolarizing: float = 0.0

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.iq_sigma < 0:
            raise ValueError("iq_sigma must be non-negative")
        for eps in (self.epsilon01, self.epsilon10):
            if not 0 <= eps < 0.5:
                raise ValueError("assignment errors must lie in [0, 0.5)")
        if self.t2 > 2 * self.t1:
            raise ValueError("T2 must not exceed 2 T1")
        if not 0 <= self.pulse_depolarizing < 1:
            raise ValueError("pulse_depolarizing must lie in [0, 1)")

    @property
    def dephasing_rate(self) -> float:
        """Pure dephasing rate 1/T_phi = 1/T2 - 1/(2 T1), clipped at 0."""
        inv_t1 = 0.0 if math.isinf(self.t1) else 1.0 / self.t1
        inv_t2 = 0.0 if math.isinf(self.t2) else 1.0 / self.t2
        return max(0.0, inv_t2 - inv_t1 / 2)

    def s21(self, frequency: float, state: int) -> complex:
        """Resonator transmission for the dressed resonance of ``state``."""
        shift = self.chi if state == 0 else -self.chi
        detuning = frequency - self.resonator_frequency - shift
        half_kappa = self.kappa / 2
        return 1 - half_kappa / (half_kappa + 1j * detuning)

    def blob(self, state: int) -> complex:
        return self.iq_mean0 if state == 0 else self.iq_mean1


@dataclass
class PairActivation:
    """Flux-pulse (amplitude, duration) that triggers a conditional phase."""

    qubits: tuple[int, int]
    flux_amplitude: float
    duration: int
    conditional_phase: float = math.pi

    def __post_init__(self):
        a, b = self.qubits
        self.qubits = (min(a, b), max(a, b))

    def matches(self, amplitude: float, duration: int) -> bool:
        tolerance = 0.01 * abs(self.flux_amplitude)
        return abs(amplitude - self.flux_amplitude) <= tolerance and duration == self.duration


def _complex_from(value) -> complex:
    if isinstance(value, (list, tuple)):
        return complex(value[0], value[1])
    return complex(value)


@dataclass
class VirtualQPU:
    """Full ground truth of the emulated chip plus timing constants."""

    qubits: dict[int, VirtualQubit]
    pairs: dict[tuple[int, int], PairActivation] = field(default_factory=dict)
    seed: int = 0
    instrument_overhead_ns: int = 2_000_000_000
    per_point_overhead_ns: int = 5_000_000

    @classmethod
    def from_dict(cls, data: dict) -> "VirtualQPU":
        qubits = {}
        for key, raw in data["qubits"].items():
            qubits[int(key)] = VirtualQubit(
                resonator_frequency=float(raw["resonator_frequency"]),
                kappa=float(raw["kappa"]),
                chi=float(raw.get("chi", 0.0)),
                qubit_frequency=float(raw["qubit_frequency"]),
                rabi_coupling=float(raw["rabi_coupling"]),
                t1=math.inf if raw.get("t1") is None else float(raw["t1"]),
                t2=math.inf if raw.get("t2") is None else float(raw["t2"]),
                iq_mean0=_complex_from(raw.get("iq_mean0", [0.0, 0.0])),
                iq_mean1=_complex_from(raw.get("iq_mean1", [1.0, 0.0])),
                iq_sigma=float(raw.get("iq_sigma", 0.0)),
                epsilon01=float(raw.get("epsilon01", 0.0)),
                epsilon10=float(raw.get("epsilon10", 0.0)),
                pulse_depolarizing=float(raw.get("pulse_depolarizing", 0.0)),
            )
        pairs = {}
        for key, raw in data.get("pairs", {}).items():
            a, b = sorted(int(q) for q in key.split("-"))
            pairs[(a, b)] = PairActivation(
                qubits=(a, b),
                flux_amplitude=float(raw["flux_amplitude"]),
                duration=int(raw["duration"]),
                conditional_phase=float(raw.get("conditional_phase", math.pi)),
            )
        return cls(
            qubits=qubits,
            pairs=pairs,
            seed=int(data.get("seed", 0)),
            instrument_overhead_ns=int(data.get("instrument_overhead_ns", 2_000_000_000)),
            per_point_overhead_ns=int(data.get("per_point_overhead_ns", 5_000_000)),
        )

    def to_dict(self) -> dict:
        def qubit_entry(q: VirtualQubit) -> dict:
            return {
                "resonator_frequency": q.resonator_frequency,
                "kappa": q.kappa,
                "chi": q.chi,
                "qubit_frequency": q.qubit_frequency,
                "rabi_coupling": q.rabi_coupling,
                "t1": None if math.isinf(q.t1) else q.t1,
                "t2": None if math.isinf(q.t2) else q.t2,
                "iq_mean0": [q.iq_mean0.real, q.iq_mean0.imag],
                "iq_mean1": [q.iq_mean1.real, q.iq_mean1.imag],
                "iq_sigma": q.iq_sigma,
                "epsilon01": q.epsilon01,
                "epsilon10": q.epsilon10,
                "pulse_depolarizing": q.pulse_depolarizing,
            }

        return {
            "seed": self.seed,
            "instrument_overhead_ns": self.instrument_overhead_ns,
            "per_point_overhead_ns": self.per_point_overhead_ns,
            "qubits": {str(k): qubit_entry(q) for k, q in sorted(self.qubits.items())},
            "pairs": {
                f"{a}-{b}": {
                    "flux_amplitude": act.flux_amplitude,
                    "duration": act.duration,
                    "conditional_phase": act.conditional_phase,
                }
                for (a, b), act in sorted(self.pairs.items())
            },
        }

    @classmethod
    def load(cls, path) -> "VirtualQPU":
        with open(Path(path)) as handle:
            return cls.from_dict(json.load(handle))

    def save(self, path):
        with open(Path(path), "w") as handle:
            json.dump(self.to_dict(), handle, indent=2, sort_keys=True)
            handle.write("\n")

    def pair_for(self, qubit: int) -> list[PairActivation]:
        return [act for act in self.pairs.values() if qubit in act.qubits]


def pulse_to_rotation(pulse, qubit: VirtualQubit) -> tuple[float, float]:
    """(axis phase, on-resonance angle) of a drive pulse.

    The angle is the coupling constant times the pulse area
    (amplitude x duration x envelope area factor).
    """
    if pulse.kind is not PulseKind.DRIVE:
        raise ValueError("rotation is defined for drive pulses only")
    if pulse.duration <= 0:
        raise ValueError("zero-duration pulse")
    angle = qubit.rabi_coupling * pulse.amplitude * pulse.duration * envelope_area_factor(
        pulse.shape
    )
    return (pulse.relative_phase, angle)


def _rz_matrix(angle: float) -> np.ndarray:
    return np.array(
        [[np.exp(-1j * angle / 2), 0], [0, np.exp(1j * angle / 2)]], dtype=complex
    )


def _drive_unitary(omega: float, delta: float, phi: float, duration: float, start: float) -> np.ndarray:
    """Frame-exact unitary of a drive segment starting at absolute time
    ``start`` in the qubit's rotating frame."""
    effective = math.hypot(omega, delta)
    if effective == 0.0:
        core = np.eye(2, dtype=complex)
    else:
        angle = effective * duration
        nx = omega * math.cos(phi) / effective
        ny = omega * math.sin(phi) / effective
        nz = -delta / effective
        sigma = np.array(
            [[nz, nx - 1j * ny], [nx + 1j * ny, -nz]], dtype=complex
        )
        core = math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * sigma
    if delta == 0.0:
        return core
    pre = _rz_matrix(-delta * start)
    post = _rz_matrix(delta * (start + duration))
    return post @ core @ pre


class EmState:
    """Trajectory state over the touched qubits, vectorized over shots.

    Amplitudes stay collapsed to one row until the first stochastic
    event; the norm of every row is one within 1e-10.
    """

    def __init__(self, qubits: Sequence[int], nshots: int):
        self.qubits = tuple(sorted(qubits))
        self.nshots = nshots
        self.dim = 2 ** len(self.qubits)
        self.amplitudes = np.zeros((1, self.dim), dtype=complex)
        self.amplitudes[:, 0] = 1.0
        self.busy = {q: 0 for q in self.qubits}

    @property
    def expanded(self) -> bool:
        return self.amplitudes.shape[0] == self.nshots

    def expand(self):
        if not self.expanded:
            self.amplitudes = np.repeat(self.amplitudes, self.nshots, axis=0)

    def axis(self, qubit: int) -> int:
        return 1 + self.qubits.index(qubit)

    def _tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((-1,) + (2,) * len(self.qubits))

    def apply_single(self, matrix: np.ndarray, qubit: int, rows: Optional[np.ndarray] = None):
        tensor = self._tensor()
        if rows is not None:
            sub = np.moveaxis(tensor[rows], self.axis(qubit), -1)
            tensor[rows] = np.moveaxis(sub @ matrix.T, -1, self.axis(qubit))
        else:
            moved = np.moveaxis(tensor, self.axis(qubit), -1)
            tensor = np.moveaxis(moved @ matrix.T, -1, self.axis(qubit))
        self.amplitudes = tensor.reshape(-1, self.dim)

    def apply_conditional_phase(self, qubit_a: int, qubit_b: int, phase: float):
        tensor = self._tensor()
        index = [slice(None)] * tensor.ndim
        index[self.axis(qubit_a)] = 1
        index[self.axis(qubit_b)] = 1
        tensor[tuple(index)] *= np.exp(1j * phase)
        self.amplitudes = tensor.reshape(-1, self.dim)

    def excited_population(self, qubit: int) -> np.ndarray:
        moved = np.moveaxis(self._tensor(), self.axis(qubit), -1)
        return np.sum(np.abs(moved[..., 1]) ** 2, axis=tuple(range(1, moved.ndim - 1)))

    def norms(self) -> np.ndarray:
        return np.sqrt(np.sum(np.abs(self.amplitudes) ** 2, axis=1))

    def damp(self, qubit: int, gamma: float, uniforms: np.ndarray):
        """Amplitude-damping trajectory step: jump with p = gamma * P1."""
        p1 = self.excited_population(qubit)
        jump = uniforms < gamma * p1
        moved = np.moveaxis(self._tensor(), self.axis(qubit), -1)
        flat = moved.reshape(moved.shape[0], -1, 2)
        if np.any(jump):
            lowered = np.zeros_like(flat[jump])
            lowered[:, :, 0] = flat[jump][:, :, 1]
            flat[jump] = lowered
        keep = ~jump
        if np.any(keep):
            flat[keep, :, 1] *= math.sqrt(1 - gamma)
        norms = np.sqrt(np.sum(np.abs(flat) ** 2, axis=(1, 2)))
        flat /= norms[:, None, None]
        moved = flat.reshape(moved.shape)
        self.amplitudes = np.moveaxis(moved, -1, self.axis(qubit)).reshape(-1, self.dim)

    def dephase(self, qubit: int, probability: float, uniforms: np.ndarray):
        flip = uniforms < probability
        if np.any(flip):
            moved = np.moveaxis(self._tensor(), self.axis(qubit), -1)
            moved[flip, ..., 1] *= -1
            self.amplitudes = np.moveaxis(moved, -1, self.axis(qubit)).reshape(-1, self.dim)

    def measure(self, qubit: int, uniforms: np.ndarray) -> np.ndarray:
        """Sample the Born rule per shot and project."""
        p1 = self.excited_population(qubit)
        outcome = (uniforms < p1).astype(np.int8)
        moved = np.moveaxis(self._tensor(), self.axis(qubit), -1)
        flat = moved.reshape(moved.shape[0], -1, 2)
        mask = np.zeros((flat.shape[0], 1, 2))
        mask[np.arange(flat.shape[0]), 0, outcome] = 1.0
        flat = flat * mask
        norms = np.sqrt(np.sum(np.abs(flat) ** 2, axis=(1, 2)))
        flat = flat / norms[:, None, None]
        moved = flat.reshape(moved.shape)
        self.amplitudes = np.moveaxis(moved, -1, self.axis(qubit)).reshape(-1, self.dim)
        return outcome


_PAULIS = {
    0: np.array([[0, 1], [1, 0]], dtype=complex),
    1: np.array([[0, -1j], [1j, 0]], dtype=complex),
    2: np.array([[1, 0], [0, -1]], dtype=complex),
}


def _sequence_key(seed: int, seq: PulseSequence) -> int:
    payload = seed.to_bytes(8, "little", signed=True) + seq.to_jsonl().encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=16).digest(), "little")


def ideal_time_ns(durations_ns: Sequence[int], nshots: int, relaxation_ns: int) -> int:
    """Lower-bound execution time: nshots x sum(T_sequence + T_relaxation)."""
    return int(nshots * sum(int(d) + int(relaxation_ns) for d in durations_ns))


def timing_model(
    qpu: VirtualQPU,
    seq: PulseSequence,
    options: ExecutionOptions,
    sweepers: Sequence[Sweeper] = (),
) -> dict:
    """Ideal time plus the simulated instrument overhead for this run."""
    shape = sweep_shape(sweepers)
    durations = [
        substitute_point(seq, sweepers, indices).duration
        for indices in np.ndindex(shape or ())
    ]
    relaxation = 0 if options.fast_reset else options.relaxation_time
    n_points = len(durations)
    return {
        "ideal_ns": ideal_time_ns(durations, options.nshots, relaxation),
        "instrument_overhead_ns": int(
            qpu.instrument_overhead_ns + qpu.per_point_overhead_ns * n_points
        ),
        "n_points": n_points,
    }


class EmulatorController(Controller):
    """The single Controller implementation, backed by a VirtualQPU."""

    capabilities = CAPABILITIES

    def __init__(self, instrument_id: str, address: str, qpu: VirtualQPU, n_ports: int = 32,
                 sampling_rate: float = 1.0):
        super().__init__(instrument_id, address, n_ports=n_ports)
        self.qpu = qpu
        self.sampling_rate = sampling_rate

    # -- Controller interface -------------------------------------------------

    def play(self, seq, options, sweepers, qubits) -> ResultSet:
        shape = sweep_shape(sweepers)
        acquisitions = [p.acquisition_id for p in seq.readout_pulses]
        if not acquisitions:
            return ResultSet({})
        collected: dict[int, list[np.ndarray]] = {acq: [] for acq in acquisitions}
        for indices in np.ndindex(shape or ()):
            substituted = substitute_point(seq, sweepers, indices)
            point = self._execute_point(substituted, options, qubits)
            for acq in acquisitions:
                collected[acq].append(point[acq])
        results = {}
        for acq in acquisitions:
            blocks = collected[acq]
            lengths = {b.shape for b in blocks}
            if len(lengths) > 1:
                raise ValueError(
                    "raw acquisition with swept readout duration produces ragged arrays"
                )
            values = np.stack(blocks).reshape(shape + blocks[0].shape)
            if options.averaging is AveragingMode.CYCLIC:
                values = np.mean(values, axis=len(shape))
            results[acq] = AcquisitionData(
                values=values,
                acquisition=options.acquisition,
                averaging=options.averaging,
                sweep_shape=shape,
            )
        return ResultSet(results)

    def play_batch(self, seqs, options, qubits) -> list[ResultSet]:
        return [self.play(seq, options, (), qubits) for seq in seqs]

    def timing(self, seq, options, sweepers) -> dict:
        return timing_model(self.qpu, seq, options, sweepers)

    # -- physics ---------------------------------------------------------------

    def _virtual_qubit(self, qubit: int) -> VirtualQubit:
        if qubit not in self.qpu.qubits:
            raise ValueError(f"qubit {qubit} is not defined on the virtual QPU")
        return self.qpu.qubits[qubit]

    def _touched_qubits(self, seq: PulseSequence) -> list[int]:
        touched = set()
        for pulse in seq:
            touched.add(pulse.qubit)
            if pulse.kind is PulseKind.FLUX:
                activation = self._match_flux(pulse)
                if activation is not None:
                    touched.update(activation.qubits)
        return sorted(touched)

    def _match_flux(self, pulse) -> Optional[PairActivation]:
        activations = self.qpu.pair_for(pulse.qubit)
        if not activations:
            raise ValueError(f"flux pulse on qubit {pulse.qubit} with no pair definition")
        for activation in activations:
            if activation.matches(pulse.amplitude, pulse.duration):
                return activation
        log.debug(
            "flux pulse on qubit %s (amplitude %s, duration %s) matches no CZ activation",
            pulse.qubit, pulse.amplitude, pulse.duration,
        )
        return None

    def _advance(self, state: EmState, qubit: int, time: int, rng, nshots: int):
        """Apply idle decay channels over the gap up to ``time``."""
        gap = time - state.busy[qubit]
        if gap <= 0:
            state.busy[qubit] = max(state.busy[qubit], time)
            return
        vq = self._virtual_qubit(qubit)
        gamma = 0.0 if math.isinf(vq.t1) else 1 - math.exp(-gap / vq.t1)
        if gamma > 0:
            state.expand()
            state.damp(qubit, gamma, rng.random(nshots))
        rate = vq.dephasing_rate
        if rate > 0:
            probability = (1 - math.exp(-gap * rate)) / 2
            state.expand()
            state.dephase(qubit, probability, rng.random(nshots))
        state.busy[qubit] = time

    def _depolarize(self, state: EmState, qubit: int, rate: float, rng, nshots: int):
        if rate <= 0:
            return
        state.expand()
        uniforms = rng.random(nshots)
        errors = uniforms < rate
        if not np.any(errors):
            return
        kinds = np.minimum((uniforms[errors] / rate * 3).astype(int), 2)
        rows = np.flatnonzero(errors)
        for kind, pauli in _PAULIS.items():
            subset = rows[kinds == kind]
            if subset.size:
                state.apply_single(pauli, qubit, rows=subset)

    def _execute_point(self, seq: PulseSequence, options: ExecutionOptions, qubits) -> dict:
        nshots = options.nshots
        rng = np.random.Generator(np.random.Philox(key=_sequence_key(self.qpu.seed, seq)))
        touched = self._touched_qubits(seq)
        state = EmState(touched, nshots)
        out: dict[int, np.ndarray] = {}

        for pulse in seq:
            if pulse.kind is PulseKind.DRIVE:
                vq = self._virtual_qubit(pulse.qubit)
                self._advance(state, pulse.qubit, pulse.start, rng, nshots)
                phi, angle = pulse_to_rotation(pulse, vq)
                omega = angle / pulse.duration
                delta = _TWO_PI_NS * (pulse.frequency - vq.qubit_frequency)
                unitary = _drive_unitary(omega, delta, phi, pulse.duration, pulse.start)
                state.apply_single(unitary, pulse.qubit)
                self._depolarize(state, pulse.qubit, vq.pulse_depolarizing, rng, nshots)
                state.busy[pulse.qubit] = pulse.finish
            elif pulse.kind is PulseKind.FLUX:
                activation = self._match_flux(pulse)
                if activation is None:
                    continue
                a, b = activation.qubits
                self._advance(state, a, pulse.start, rng, nshots)
                self._advance(state, b, pulse.start, rng, nshots)
                state.apply_conditional_phase(a, b, activation.conditional_phase)
                state.busy[a] = pulse.finish
                state.busy[b] = pulse.finish
            else:  # readout
                out[pulse.acquisition_id] = self._readout(
                    state, pulse, options, qubits, rng, nshots
                )
        return out

    def _readout(self, state: EmState, pulse, options, qubits, rng, nshots) -> np.ndarray:
        vq = self._virtual_qubit(pulse.qubit)
        calibration: Qubit = qubits[pulse.qubit]
        self._advance(state, pulse.qubit, pulse.start, rng, nshots)
        drift = np.max(np.abs(state.norms() - 1.0))
        if drift > 1e-8:
            raise RuntimeError(f"state norm drifted by {drift}")
        state.expand()
        outcome = state.measure(pulse.qubit, rng.random(nshots))
        state.busy[pulse.qubit] = pulse.finish

        # assignment-error overrides flip the reported state before IQ synthesis
        reported = outcome.copy()
        if vq.epsilon01 > 0 or vq.epsilon10 > 0:
            uniforms = rng.random(nshots)
            reported[(outcome == 0) & (uniforms < vq.epsilon01)] = 1
            reported[(outcome == 1) & (uniforms < vq.epsilon10)] = 0

        reference = vq.s21(calibration.readout_frequency, 0), vq.s21(
            calibration.readout_frequency, 1
        )
        response = np.empty(nshots, dtype=complex)
        for bit in (0, 1):
            ref = reference[bit]
            if abs(ref) < 1e-6:
                ref = 1e-6
            response[reported == bit] = vq.s21(pulse.frequency, bit) / ref
        blobs = np.where(reported == 0, vq.iq_mean0, vq.iq_mean1)
        iq = blobs * response
        if vq.iq_sigma > 0:
            noise = rng.standard_normal(nshots) + 1j * rng.standard_normal(nshots)
            iq = iq + vq.iq_sigma * noise

        if options.acquisition is AcquisitionType.INTEGRATED:
            return iq
        if options.acquisition is AcquisitionType.CLASSIFIED:
            disc = calibration.classification
            if disc is None:
                raise ValueError(
                    f"qubit {pulse.qubit} has no classification calibration"
                )
            rotated = iq * np.exp(-1j * disc.rotation)
            return (rotated.real > disc.threshold).astype(np.int8)
        # raw: synthesize the modulated tone explicitly
        n_samples = int(round(pulse.duration * self.sampling_rate))
        t_seconds = np.arange(n_samples) / self.sampling_rate * 1e-9
        carrier = np.exp(2j * np.pi * pulse.frequency * t_seconds)
        return iq[:, None] * carrier[None, :]
