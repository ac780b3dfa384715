"""CHSH inequality experiment with optional readout error mitigation.

The entangled state is the singlet (|01> - |10>)/sqrt(2).  Measurement
settings are equatorial-plane angles a = 0, a' = pi/2 on the first
qubit and b = theta, b' = theta + pi/2 on the second, implemented as a
virtual Z rotation followed by an RX(pi/2)-based basis change before
measurement, and

    S = E(a, b) - E(a, b') + E(a', b) + E(a', b').

For the singlet the ideal correlator is E(alpha, beta) =
-cos(alpha - beta), so S(theta) = -2 (cos theta + sin theta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..acquisition import AcquisitionType, AveragingMode, ExecutionOptions
from ..circuits import Circuit, Gate
from ..compiler import compile_circuit
from ..platform import Platform

__all__ = [
    "MitigationMatrix",
    "readout_mitigation_matrix",
    "ChshOutcome",
    "chsh",
    "singlet_circuit",
]

_HALF_PI = math.pi / 2


@dataclass
class MitigationMatrix:
    """Column-stochastic confusion matrix M[observed][prepared] and its inverse."""

    qubits: tuple[int, ...]
    matrix: np.ndarray
    inverse: np.ndarray

    def mitigate(self, probabilities: np.ndarray) -> np.ndarray:
        """Invert the confusion, clip negatives, renormalize."""
        corrected = self.inverse @ np.asarray(probabilities, dtype=float)
        corrected = np.clip(corrected, 0.0, None)
        total = corrected.sum()
        if total <= 0:
            return np.full_like(corrected, 1 / len(corrected))
        return corrected / total


def readout_mitigation_matrix(
    platform: Platform,
    qubits: Sequence[int],
    nshots: int = 4096,
    relaxation_time: int = 300_000,
) -> MitigationMatrix:
    """Prepare every computational basis state and record the confusion.

    The first qubit in ``qubits`` is the most significant bit.
    """
    qubits = tuple(qubits)
    n = len(qubits)
    dim = 2**n
    width = max(qubits) + 1
    options = ExecutionOptions(
        nshots=nshots,
        relaxation_time=relaxation_time,
        acquisition=AcquisitionType.CLASSIFIED,
        averaging=AveragingMode.SINGLESHOT,
    )
    circuits = []
    for prepared in range(dim):
        circuit = Circuit(width)
        for position, qubit in enumerate(qubits):
            if (prepared >> (n - 1 - position)) & 1:
                circuit.add(Gate("x", (qubit,)))
        circuit.add(Gate("m", qubits))
        circuits.append(circuit)
    compiled = [compile_circuit(c, platform) for c in circuits]
    results = platform.execute_batch([seq for seq, _ in compiled], options)

    matrix = np.zeros((dim, dim))
    for prepared, ((_, acq_map), result) in enumerate(zip(compiled, results)):
        qubit_to_acq = {q: acq for acq, q in acq_map.items()}
        observed = np.zeros(nshots, dtype=int)
        for position, qubit in enumerate(qubits):
            bits = np.asarray(result[qubit_to_acq[qubit]].values, dtype=int)
            observed |= bits << (n - 1 - position)
        counts = np.bincount(observed, minlength=dim)
        matrix[:, prepared] = counts / nshots
    if np.linalg.cond(matrix) > 1e6:
        raise ValueError("confusion matrix is numerically singular")
    return MitigationMatrix(qubits=qubits, matrix=matrix, inverse=np.linalg.inv(matrix))


def singlet_circuit(qubit_a: int, qubit_b: int, width: int) -> Circuit:
    """Native-gate preparation of (|01> - |10>)/sqrt(2) on the pair."""
    circuit = Circuit(width)
    circuit.add(Gate("u3", (qubit_a,), (_HALF_PI, 0.0, 0.0)))  # RY(pi/2)
    circuit.add(Gate("x", (qubit_b,)))
    circuit.add(Gate("cz", (qubit_a, qubit_b)))
    # CNOT a -> b as H CZ H
    circuit.add(Gate("u3", (qubit_b,), (_HALF_PI, 0.0, math.pi)))
    circuit.add(Gate("cz", (qubit_a, qubit_b)))
    circuit.add(Gate("u3", (qubit_b,), (_HALF_PI, 0.0, math.pi)))
    return circuit


def _basis_rotation(circuit: Circuit, qubit: int, angle: float):
    """Map the equatorial observable at ``angle`` onto Z before measuring."""
    circuit.add(Gate("rz", (qubit,), (-angle,)))
    circuit.add(Gate("u3", (qubit,), (-_HALF_PI, 0.0, 0.0)))  # RY(-pi/2)


@dataclass
class ChshOutcome:
    thetas: list[float]
    s_bare: list[float]
    s_mitigated: Optional[list[float]]

    def to_dict(self) -> dict:
        return {
            "thetas": list(self.thetas),
            "s_bare": list(self.s_bare),
            "s_mitigated": None if self.s_mitigated is None else list(self.s_mitigated),
        }


def _expectation(probabilities: np.ndarray) -> float:
    signs = np.array([1.0, -1.0, -1.0, 1.0])  # (-1)^(x xor y) over 00,01,10,11
    return float(signs @ probabilities)


def chsh(
    platform: Platform,
    pair: tuple[int, int],
    thetas: Sequence[float],
    use_mitigation: bool = False,
    nshots: int = 4096,
    relaxation_time: int = 300_000,
) -> ChshOutcome:
    """Measure S(theta) on the singlet for each relative angle theta."""
    qubit_a, qubit_b = pair
    pair_cal = platform.pair(qubit_a, qubit_b)
    if pair_cal.cz is None:
        raise ValueError(f"pair {pair_cal.qubits} has no CZ calibration")
    mitigation = (
        readout_mitigation_matrix(platform, (qubit_a, qubit_b), nshots, relaxation_time)
        if use_mitigation
        else None
    )
    width = max(qubit_a, qubit_b) + 1
    settings = []
    for theta in thetas:
        for alpha in (0.0, _HALF_PI):
            for beta in (theta, theta + _HALF_PI):
                settings.append((alpha, beta))

    compiled = []
    for alpha, beta in settings:
        circuit = singlet_circuit(qubit_a, qubit_b, width)
        _basis_rotation(circuit, qubit_a, alpha)
        _basis_rotation(circuit, qubit_b, beta)
        circuit.add(Gate("m", (qubit_a, qubit_b)))
        compiled.append(compile_circuit(circuit, platform))

    options = ExecutionOptions(
        nshots=nshots,
        relaxation_time=relaxation_time,
        acquisition=AcquisitionType.CLASSIFIED,
        averaging=AveragingMode.SINGLESHOT,
    )
    results = platform.execute_batch([seq for seq, _ in compiled], options)

    expectations_bare = []
    expectations_mitigated = []
    for (_, acq_map), result in zip(compiled, results):
        qubit_to_acq = {q: acq for acq, q in acq_map.items()}
        bits_a = np.asarray(result[qubit_to_acq[qubit_a]].values, dtype=int)
        bits_b = np.asarray(result[qubit_to_acq[qubit_b]].values, dtype=int)
        joint = (bits_a << 1) | bits_b
        probabilities = np.bincount(joint, minlength=4) / nshots
        expectations_bare.append(_expectation(probabilities))
        if mitigation is not None:
            expectations_mitigated.append(_expectation(mitigation.mitigate(probabilities)))

    def s_values(expectations: list[float]) -> list[float]:
        out = []
        for i in range(len(thetas)):
            e_ab, e_abp, e_apb, e_apbp = expectations[4 * i : 4 * i + 4]
            out.append(e_ab - e_abp + e_apb + e_apbp)
        return out

    return ChshOutcome(
        thetas=[float(t) for t in thetas],
        s_bare=s_values(expectations_bare),
        s_mitigated=s_values(expectations_mitigated) if mitigation is not None else None,
    )
