"""Standard randomized benchmarking with the 24-element Clifford group.

Each Clifford is compiled to a minimal native form (virtual RZ plus at
most one physical X90 or X180 pulse), so fusion is never applied across
Clifford boundaries.  The survival probability is the relative
frequency of classified 0 after the sequence plus its exact inverse.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from ..acquisition import AcquisitionType, AveragingMode, ExecutionOptions
from ..circuits import Circuit, Gate
from ..compiler import compile_circuit
from ..platform import Platform
from .fitting import FitResult, fit_rb_decay

__all__ = [
    "Clifford",
    "CLIFFORD_TABLE",
    "RBOutcome",
    "standard_rb",
    "verify_clifford_closure",
    "inverse_index",
    "clifford_pulse_counts",
    "decay_per_clifford",
    "pulse_error_for_decay",
    "PI2_PULSES_PER_CLIFFORD",
]

# average pi/2 pulses per Clifford in the standard atomic-gate count,
# used to derive the pi/2-pulse fidelity from the average gate fidelity
PI2_PULSES_PER_CLIFFORD = 1.875

_HALF_PI = math.pi / 2

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _rotation(axis: tuple[float, float, float], angle: float) -> np.ndarray:
    norm = math.sqrt(sum(c * c for c in axis))
    nx, ny, nz = (c / norm for c in axis)
    sigma = nx * _X + ny * _Y + nz * _Z
    return math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * sigma


def _axis_angle_list() -> list[tuple[tuple[float, float, float], float]]:
    entries: list[tuple[tuple[float, float, float], float]] = [((0.0, 0.0, 1.0), 0.0)]
    for axis in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
        for angle in (_HALF_PI, -_HALF_PI, math.pi):
            entries.append((axis, angle))
    for axis in ((1, 1, 1), (1, 1, -1), (1, -1, 1), (1, -1, -1)):
        for angle in (2 * math.pi / 3, -2 * math.pi / 3):
            entries.append((axis, angle))
    for axis in ((1, 1, 0), (1, -1, 0), (1, 0, 1), (1, 0, -1), (0, 1, 1), (0, 1, -1)):
        entries.append((axis, math.pi))
    return entries


def _same_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    return abs(abs(np.trace(a.conj().T @ b)) - 2) < tol


def _gate_matrix(name: str, params: tuple[float, ...]) -> np.ndarray:
    if name == "rz":
        theta = params[0]
        return np.array([[cmath.exp(-1j * theta / 2), 0], [0, cmath.exp(1j * theta / 2)]])
    if name == "rx":
        theta = params[0]
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        return np.array([[c, -1j * s], [-1j * s, c]])
    if name == "x":
        return _X
    raise ValueError(name)


def _native_form(matrix: np.ndarray) -> tuple[tuple[str, tuple[float, ...]], ...]:
    """Minimal RZ / RX(pi/2) / X sequence equal to ``matrix`` up to phase."""
    det = np.linalg.det(matrix)
    m = matrix / cmath.sqrt(det)
    if abs(m[1, 0]) < 1e-9:  # diagonal: a virtual Z rotation
        lam = -2 * cmath.phase(m[0, 0])
        gates: tuple = () if abs(lam) < 1e-12 else (("rz", (lam,)),)
    elif abs(m[0, 0]) < 1e-9:  # pi rotation about an equatorial axis
        alpha = cmath.phase(m[1, 0]) - cmath.phase(m[0, 1])
        gates = (("x", ()), ("rz", (alpha,)))
        gates = tuple(g for g in gates if g[0] != "rz" or abs(g[1][0]) > 1e-12)
    else:  # one X90 with virtual Z on both sides
        sum_ab = -2 * cmath.phase(m[0, 0])
        diff_ab = 2 * (cmath.phase(m[1, 0]) + _HALF_PI)
        a = (sum_ab + diff_ab) / 2
        b = (sum_ab - diff_ab) / 2
        gates = tuple(
            g
            for g in (("rz", (b,)), ("rx", (_HALF_PI,)), ("rz", (a,)))
            if g[0] != "rz" or abs(g[1][0]) > 1e-12
        )
    composed = np.eye(2, dtype=complex)
    for name, params in gates:
        composed = _gate_matrix(name, params) @ composed
    if not _same_up_to_phase(composed, matrix):
        raise AssertionError("native decomposition failed to reproduce the Clifford")
    return gates


@dataclass(frozen=True)
class Clifford:
    index: int
    matrix: np.ndarray
    gates: tuple[tuple[str, tuple[float, ...]], ...]

    @property
    def n_pulses(self) -> int:
        return sum(1 for name, _ in self.gates if name in ("rx", "x"))


def _build_table() -> tuple[Clifford, ...]:
    table = []
    for index, (axis, angle) in enumerate(_axis_angle_list()):
        matrix = _rotation(axis, angle)
        table.append(Clifford(index=index, matrix=matrix, gates=_native_form(matrix)))
    return tuple(table)


CLIFFORD_TABLE: tuple[Clifford, ...] = _build_table()


def verify_clifford_closure() -> bool:
    """Exhaustive check that products and inverses stay in the table."""
    for left in CLIFFORD_TABLE:
        for right in CLIFFORD_TABLE:
            product = left.matrix @ right.matrix
            if not any(_same_up_to_phase(c.matrix, product) for c in CLIFFORD_TABLE):
                return False
        inverse = CLIFFORD_TABLE[inverse_index(left.matrix)]
        if not _same_up_to_phase(inverse.matrix @ left.matrix, np.eye(2)):
            return False
    return True


def inverse_index(matrix: np.ndarray) -> int:
    """Table index of the inverse of an arbitrary Clifford product."""
    target = matrix.conj().T
    for clifford in CLIFFORD_TABLE:
        if _same_up_to_phase(clifford.matrix, target):
            return clifford.index
    raise ValueError("matrix is not an element of the Clifford table")


def clifford_pulse_counts() -> list[int]:
    return [c.n_pulses for c in CLIFFORD_TABLE]


def decay_per_clifford(pulse_error: float) -> float:
    """Expected RB decay per Clifford for a per-pulse Pauli error rate."""
    depolarizing_eigenvalue = 1 - 4 * pulse_error / 3
    counts = clifford_pulse_counts()
    return float(np.mean([depolarizing_eigenvalue**n for n in counts]))


def pulse_error_for_decay(target_decay: float) -> float:
    """Invert :func:`decay_per_clifford` by bisection."""
    low, high = 0.0, 0.74
    for _ in range(200):
        mid = (low + high) / 2
        if decay_per_clifford(mid) > target_decay:
            low = mid
        else:
            high = mid
    return (low + high) / 2


@dataclass
class RBOutcome:
    depths: list[int]
    survival: np.ndarray  # (n_depths, n_sequences)
    fit: FitResult
    average_gate_fidelity: float
    pi2_fidelity: float
    bootstrap_errors: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "depths": list(self.depths),
            "survival_mean": [float(v) for v in self.survival.mean(axis=1)],
            "fit": self.fit.to_dict(),
            "average_gate_fidelity": self.average_gate_fidelity,
            "pi2_fidelity": self.pi2_fidelity,
            "bootstrap_errors": dict(self.bootstrap_errors),
        }


def _clifford_circuit(qubit: int, indices, width: int) -> Circuit:
    circuit = Circuit(width)
    net = np.eye(2, dtype=complex)
    for index in indices:
        clifford = CLIFFORD_TABLE[int(index)]
        net = clifford.matrix @ net
        for name, params in clifford.gates:
            circuit.add(Gate(name, (qubit,), params))
    recovery = CLIFFORD_TABLE[inverse_index(net)]
    for name, params in recovery.gates:
        circuit.add(Gate(name, (qubit,), params))
    circuit.add(Gate("m", (qubit,)))
    return circuit


def _bootstrap(depths, survival, nshots, n_samples, rng) -> dict[str, float]:
    """Semi-parametric bootstrap: binomial draws with parameters resampled
    from the empirical per-depth frequency distributions."""
    n_depths, n_sequences = survival.shape
    estimates: dict[str, list[float]] = {"A": [], "p": [], "B": []}
    for _ in range(n_samples):
        means = np.empty(n_depths)
        for d in range(n_depths):
            params = survival[d, rng.integers(0, n_sequences, size=n_sequences)]
            draws = rng.binomial(nshots, np.clip(params, 0, 1)) / nshots
            means[d] = draws.mean()
        fit = fit_rb_decay(np.asarray(depths, dtype=float), means)
        if fit.success:
            for key in estimates:
                estimates[key].append(fit.params[key])
    errors = {key: float(np.std(values)) for key, values in estimates.items()}
    errors["average_gate_fidelity"] = errors["p"] / 2
    errors["pi2_fidelity"] = errors["p"] / 2 / PI2_PULSES_PER_CLIFFORD
    return errors


def standard_rb(
    platform: Platform,
    qubit: int,
    depths,
    n_sequences: int,
    nshots: int,
    seed: int,
    relaxation_time: int = 300_000,
    n_bootstrap: int = 1000,
) -> RBOutcome:
    """Run single-qubit standard RB and fit A p^m + B.

    The average gate fidelity is 1 - (1 - p) / 2 and the pi/2-pulse
    fidelity follows from the 1.875 average pulses per Clifford.
    """
    depths = [int(m) for m in depths]
    if not depths:
        raise ValueError("depths must not be empty")
    rng = np.random.default_rng(seed)
    width = qubit + 1
    circuits = []
    for depth in depths:
        for _ in range(n_sequences):
            indices = rng.integers(0, len(CLIFFORD_TABLE), size=depth)
            circuits.append(_clifford_circuit(qubit, indices, width))
    sequences = [compile_circuit(c, platform)[0] for c in circuits]
    options = ExecutionOptions(
        nshots=nshots,
        relaxation_time=relaxation_time,
        acquisition=AcquisitionType.CLASSIFIED,
        averaging=AveragingMode.CYCLIC,
    )
    results = platform.execute_batch(sequences, options)
    survival = np.empty((len(depths), n_sequences))
    for i, result in enumerate(results):
        d, s = divmod(i, n_sequences)
        survival[d, s] = 1.0 - float(result[0].values)

    fit = fit_rb_decay(np.asarray(depths, dtype=float), survival.mean(axis=1))
    if not fit.success:
        raise RuntimeError("RB decay fit diverged")
    p = fit.params["p"]
    fidelity = 1 - (1 - p) / 2
    pi2_fidelity = 1 - (1 - fidelity) / PI2_PULSES_PER_CLIFFORD
    bootstrap_rng = np.random.default_rng((seed, 0xB007))
    errors = _bootstrap(depths, survival, nshots, n_bootstrap, bootstrap_rng)
    return RBOutcome(
        depths=depths,
        survival=survival,
        fit=fit,
        average_gate_fidelity=fidelity,
        pi2_fidelity=pi2_fidelity,
        bootstrap_errors=errors,
    )
