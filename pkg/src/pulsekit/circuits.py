"""Minimal gate-level circuit IR and a dense-unitary test oracle.

Basis-state convention: qubit 0 is the most significant bit of the
computational index.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

import numpy as np

__all__ = [
    "Gate",
    "Circuit",
    "unitary_of",
    "align_global_phase",
    "equal_up_to_global_phase",
    "qft_circuit",
    "random_cnot_circuit",
    "GATE_SPECS",
    "ONE_QUBIT_GATES",
    "TWO_QUBIT_GATES",
]

# name -> (n_qubits, n_params); "m" is variadic and handled separately
GATE_SPECS: dict[str, tuple[int, int]] = {
    "h": (1, 0),
    "x": (1, 0),
    "y": (1, 0),
    "z": (1, 0),
    "rx": (1, 1),
    "ry": (1, 1),
    "rz": (1, 1),
    "u3": (1, 3),
    "cnot": (2, 0),
    "cz": (2, 0),
    "swap": (2, 0),
    "iswap": (2, 0),
}
ONE_QUBIT_GATES = frozenset(g for g, (n, _) in GATE_SPECS.items() if n == 1)
TWO_QUBIT_GATES = frozenset(g for g, (n, _) in GATE_SPECS.items() if n == 2)


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.name == "m":
            if not self.qubits:
                raise ValueError("measurement needs at least one qubit")
            if self.params:
                raise ValueError("measurement takes no parameters")
        elif self.name in GATE_SPECS:
            n_qubits, n_params = GATE_SPECS[self.name]
            if len(self.qubits) != n_qubits:
                raise ValueError(f"{self.name} acts on {n_qubits} qubits, got {self.qubits}")
            if len(self.params) != n_params:
                raise ValueError(f"{self.name} takes {n_params} parameters, got {self.params}")
        else:
            raise ValueError(f"unknown gate {self.name!r}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"gate operands must be distinct, got {self.qubits}")

    @property
    def is_measurement(self) -> bool:
        return self.name == "m"

    def to_dict(self) -> dict:
        return {"name": self.name, "qubits": list(self.qubits), "params": list(self.params)}

    @classmethod
    def from_dict(cls, data: dict) -> "Gate":
        return cls(data["name"], tuple(data["qubits"]), tuple(data.get("params", ())))


@dataclass
class Circuit:
    """Ordered gate list on ``n_qubits`` wires; measurements are terminal."""

    n_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("circuit needs at least one qubit")
        gates, self.gates = list(self.gates), []
        for gate in gates:
            self.add(gate)

    def add(self, gate: Gate) -> "Circuit":
        for q in gate.qubits:
            if not 0 <= q < self.n_qubits:
                raise ValueError(f"qubit {q} outside circuit of width {self.n_qubits}")
            if q in self._measured:
                raise ValueError(f"qubit {q} already measured; measurements are terminal")
        if gate.is_measurement:
            self._measured.update(gate.qubits)
        self.gates.append(gate)
        return self

    @property
    def _measured(self) -> set[int]:
        measured = self.__dict__.setdefault("_measured_set", set())
        return measured

    @property
    def measurements(self) -> list[Gate]:
        return [g for g in self.gates if g.is_measurement]

    def without_measurements(self) -> "Circuit":
        return Circuit(self.n_qubits, [g for g in self.gates if not g.is_measurement])

    def two_qubit_gates(self) -> list[Gate]:
        return [g for g in self.gates if len(g.qubits) == 2 and not g.is_measurement]

    def count(self, name: str) -> int:
        return sum(1 for g in self.gates if g.name == name)

    def __iter__(self) -> Iterator[Gate]:
        return iter(self.gates)

    def __len__(self) -> int:
        return len(self.gates)

    def to_json(self) -> str:
        """Serialize as a JSON list of gate records."""
        return json.dumps([g.to_dict() for g in self.gates])

    @classmethod
    def from_json(cls, text: str, n_qubits: Optional[int] = None) -> "Circuit":
        """Parse a JSON gate list (or {n_qubits, gates} object)."""
        data = json.loads(text)
        if isinstance(data, dict):
            gates = [Gate.from_dict(g) for g in data["gates"]]
            n_qubits = n_qubits or int(data["n_qubits"])
        else:
            gates = [Gate.from_dict(g) for g in data]
        if n_qubits is None:
            n_qubits = max((max(g.qubits) for g in gates), default=0) + 1
        return cls(n_qubits, gates)


def _rx(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def _ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-1j * theta / 2), 0], [0, np.exp(1j * theta / 2)]], dtype=complex)


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    """U3 in the fixed convention RZ(phi) RX(-pi/2) RZ(theta) RX(pi/2) RZ(lam).

    Algebraically equal to RZ(phi) RY(theta) RZ(lam), a special-unitary
    matrix.
    """
    return _rz(phi) @ _ry(theta) @ _rz(lam)


_SQ2 = 1 / math.sqrt(2)
_FIXED_1Q = {
    "h": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_FIXED_2Q = {
    "cnot": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "cz": np.diag([1, 1, 1, -1]).astype(complex),
    "swap": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
    "iswap": np.array(
        [[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}


def gate_matrix(gate: Gate) -> np.ndarray:
    """Dense matrix of a non-measurement gate in its own qubit space."""
    if gate.name in _FIXED_1Q:
        return _FIXED_1Q[gate.name]
    if gate.name in _FIXED_2Q:
        return _FIXED_2Q[gate.name]
    if gate.name == "rx":
        return _rx(gate.params[0])
    if gate.name == "ry":
        return _ry(gate.params[0])
    if gate.name == "rz":
        return _rz(gate.params[0])
    if gate.name == "u3":
        return u3_matrix(*gate.params)
    raise ValueError(f"no matrix for gate {gate.name!r}")


def apply_gate(state: np.ndarray, matrix: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Apply a k-qubit matrix to axes ``qubits`` of a [2]*n (+batch) tensor."""
    k = len(qubits)
    operator = matrix.reshape((2,) * (2 * k))
    moved = np.moveaxis(state, qubits, range(k))
    out = np.tensordot(operator, moved, axes=(list(range(k, 2 * k)), list(range(k))))
    return np.moveaxis(out, range(k), qubits)


def unitary_of(circuit: Circuit) -> np.ndarray:
    """Dense unitary by direct gate multiplication; measurements ignored.

    Limited to 10 qubits.
    """
    n = circuit.n_qubits
    if n > 10:
        raise ValueError(f"unitary oracle limited to 10 qubits, got {n}")
    dim = 2**n
    unitary = np.eye(dim, dtype=complex).reshape([2] * n + [dim])
    for gate in circuit.gates:
        if gate.is_measurement:
            continue
        unitary = apply_gate(unitary, gate_matrix(gate), gate.qubits, n)
    return unitary.reshape(dim, dim)


def align_global_phase(matrix: np.ndarray, reference_index: Optional[int] = None) -> np.ndarray:
    """Divide by the phase of the largest-magnitude element."""
    flat = matrix.reshape(-1)
    idx = int(np.argmax(np.abs(flat))) if reference_index is None else reference_index
    pivot = flat[idx]
    if abs(pivot) == 0:
        return matrix
    return matrix * (abs(pivot) / pivot)


def equal_up_to_global_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    """Compare matrices after aligning both at a's largest element."""
    if a.shape != b.shape:
        return False
    idx = int(np.argmax(np.abs(a.reshape(-1))))
    return bool(
        np.allclose(
            align_global_phase(a, idx), align_global_phase(b, idx), atol=tol, rtol=0
        )
    )


def qft_circuit(n: int) -> Circuit:
    """Quantum Fourier transform: Hadamards, controlled phases, final swaps.

    Controlled phases are emitted in expanded form (RZ + CNOT); the
    resulting unitary equals the normalized DFT matrix up to a global
    phase.
    """
    if n < 1:
        raise ValueError("qft needs at least one qubit")
    circuit = Circuit(n)
    for i in range(n):
        circuit.add(Gate("h", (i,)))
        for j in range(i + 1, n):
            theta = math.pi / 2 ** (j - i)
            # controlled-phase(theta) with control j, target i
            circuit.add(Gate("rz", (j,), (theta / 2,)))
            circuit.add(Gate("rz", (i,), (theta / 2,)))
            circuit.add(Gate("cnot", (j, i)))
            circuit.add(Gate("rz", (i,), (-theta / 2,)))
            circuit.add(Gate("cnot", (j, i)))
    for i in range(n // 2):
        circuit.add(Gate("swap", (i, n - 1 - i)))
    return circuit


def dft_matrix(n_qubits: int) -> np.ndarray:
    """Normalized DFT matrix, the oracle for :func:`qft_circuit`."""
    dim = 2**n_qubits
    omega = np.exp(2j * np.pi / dim)
    j, k = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    return omega ** (j * k) / math.sqrt(dim)


def random_cnot_circuit(n_qubits: int, n_cnots: int, seed: int) -> Circuit:
    """CNOTs on uniformly random distinct wire pairs, seeded."""
    if n_qubits < 2:
        raise ValueError("random CNOT circuits need at least 2 qubits")
    rng = np.random.default_rng(seed)
    circuit = Circuit(n_qubits)
    for _ in range(n_cnots):
        a, b = rng.choice(n_qubits, size=2, replace=False)
        circuit.add(Gate("cnot", (int(a), int(b))))
    return circuit
