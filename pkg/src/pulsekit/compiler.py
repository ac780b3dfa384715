"""Lower native-gate circuits to pulse sequences.

Native set: U3 / RX(+-pi/2) / X / Z / RZ single-qubit gates, CZ on
calibrated pairs, and terminal measurements.  Z rotations are virtual:
they accumulate in a per-qubit phase ledger and shift the phase of
subsequent drive pulses by minus the accumulated angle.  U3(theta, phi,
lam) lowers to the ZXZXZ identity

    RZ(phi + pi) . RX(pi/2) . RZ(theta - pi) . RX(pi/2) . RZ(lam)

so it costs exactly two pi/2 pulses.  Pulse start times are rounded up
to the platform timing granularity (default 4 ns).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .circuits import Circuit, Gate
from .platform import Platform, Qubit
from .pulses import Pulse, PulseKind, PulseSequence, Rectangular

__all__ = ["CompilationError", "compile_circuit"]

_HALF_PI = math.pi / 2


class CompilationError(ValueError):
    """Gate outside the native set or missing calibration."""


def _wrap(angle: float) -> float:
    """Map to (-pi, pi] to keep ledger phases bounded."""
    return -math.remainder(-angle, 2 * math.pi)


class _Lowering:
    def __init__(self, platform: Platform):
        self.platform = platform
        self.granularity = getattr(platform, "granularity_ns", 4)
        self.ready: dict[int, int] = {}
        self.ledger: dict[int, float] = {}
        self.pulses: list[Pulse] = []
        self.acquisitions: dict[int, int] = {}

    def _align(self, time: int) -> int:
        g = self.granularity
        return -(-time // g) * g

    def _qubit(self, qubit_id: int) -> Qubit:
        if qubit_id not in self.platform.qubits:
            raise CompilationError(f"qubit {qubit_id} is not calibrated on this platform")
        return self.platform.qubits[qubit_id]

    def drive(self, qubit_id: int, axis_phase: float, area_fraction: float):
        qubit = self._qubit(qubit_id)
        if "drive" not in qubit.channels:
            raise CompilationError(f"qubit {qubit_id} has no drive channel")
        start = self._align(self.ready.get(qubit_id, 0))
        phase = _wrap(axis_phase - self.ledger.get(qubit_id, 0.0))
        self.pulses.append(
            Pulse(
                kind=PulseKind.DRIVE,
                start=start,
                duration=qubit.pi_pulse.duration,
                amplitude=qubit.pi_pulse.amplitude * area_fraction,
                frequency=qubit.drive_frequency,
                relative_phase=phase,
                shape=qubit.pi_pulse.shape,
                channel=qubit.channels["drive"],
                qubit=qubit_id,
            )
        )
        self.ready[qubit_id] = start + qubit.pi_pulse.duration

    def shift(self, qubit_id: int, angle: float):
        self.ledger[qubit_id] = _wrap(self.ledger.get(qubit_id, 0.0) + angle)

    def cz(self, a: int, b: int):
        pair = self.platform.pair(a, b)
        if pair.cz is None:
            raise CompilationError(f"pair {pair.qubits} has no CZ calibration")
        low = pair.qubits[0]
        qubit = self._qubit(low)
        if "flux" not in qubit.channels:
            raise CompilationError(f"qubit {low} has no flux channel")
        start = self._align(max(self.ready.get(a, 0), self.ready.get(b, 0)))
        self.pulses.append(
            Pulse(
                kind=PulseKind.FLUX,
                start=start,
                duration=pair.cz.duration,
                amplitude=pair.cz.flux_amplitude,
                frequency=0.0,
                relative_phase=0.0,
                shape=Rectangular(),
                channel=qubit.channels["flux"],
                qubit=low,
            )
        )
        finish = start + pair.cz.duration
        self.ready[a] = finish
        self.ready[b] = finish
        for q, correction in pair.cz.phase_corrections.items():
            self.shift(q, correction)

    def measure(self, qubit_ids: tuple[int, ...]):
        start = self._align(max(self.ready.get(q, 0) for q in qubit_ids))
        for qubit_id in qubit_ids:
            qubit = self._qubit(qubit_id)
            acquisition_id = len(self.acquisitions)
            self.pulses.append(
                Pulse(
                    kind=PulseKind.READOUT,
                    start=start,
                    duration=qubit.readout_pulse.duration,
                    amplitude=qubit.readout_pulse.amplitude,
                    frequency=qubit.readout_frequency,
                    relative_phase=0.0,
                    shape=Rectangular(),
                    channel=qubit.channels["readout"],
                    qubit=qubit_id,
                    acquisition_id=acquisition_id,
                )
            )
            self.acquisitions[acquisition_id] = qubit_id
            self.ready[qubit_id] = start + qubit.readout_pulse.duration

    def gate(self, gate: Gate):
        name = gate.name
        if name == "rz":
            self.shift(gate.qubits[0], gate.params[0])
        elif name == "z":
            self.shift(gate.qubits[0], math.pi)
        elif name == "x":
            self.drive(gate.qubits[0], 0.0, 1.0)
        elif name == "rx":
            theta = gate.params[0]
            if abs(theta - _HALF_PI) < 1e-9:
                self.drive(gate.qubits[0], 0.0, 0.5)
            elif abs(theta + _HALF_PI) < 1e-9:
                self.drive(gate.qubits[0], math.pi, 0.5)
            else:
                raise CompilationError(
                    f"rx is only calibrated for +-pi/2, got {theta}"
                )
        elif name == "u3":
            theta, phi, lam = gate.params
            q = gate.qubits[0]
            self.shift(q, lam)
            self.drive(q, 0.0, 0.5)
            self.shift(q, theta - math.pi)
            self.drive(q, 0.0, 0.5)
            self.shift(q, phi + math.pi)
        elif name == "cz":
            self.cz(*gate.qubits)
        elif name == "m":
            self.measure(gate.qubits)
        else:
            raise CompilationError(f"gate {name!r} is not native to this platform")


def compile_circuit(circuit: Circuit, platform: Platform) -> tuple[PulseSequence, dict[int, int]]:
    """Lower a native circuit to pulses.

    Returns the sequence and the measurement map from acquisition id to
    measured qubit.  Circuit wire indices are physical platform qubit
    ids.
    """
    lowering = _Lowering(platform)
    for gate in circuit.gates:
        lowering.gate(gate)
    return PulseSequence(tuple(lowering.pulses)), lowering.acquisitions
