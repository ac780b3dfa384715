"""Native-gate unrolling and single-qubit fusion.

Two-qubit natives are CZ and/or iSWAP.  Single-qubit output is limited
to what the pulse compiler accepts: U3, RZ (any angle), RX(+-pi/2), X
and Z.  Consecutive single-qubit gates on a wire fuse into one U3 in
the fixed convention RZ(phi) RX(-pi/2) RZ(theta) RX(pi/2) RZ(lam).
"""

from __future__ import annotations

import cmath
import math
from typing import Iterable

import numpy as np

from ..circuits import Circuit, Gate, gate_matrix, u3_matrix

__all__ = ["unroll", "NATIVE_SETS", "u3_angles"]

NATIVE_SETS = ("cz", "iswap", "both")

_HALF_PI = math.pi / 2


def _is(value: float, target: float, tol: float = 1e-12) -> bool:
    return abs(value - target) < tol


def _native_two_qubit(natives: frozenset[str]) -> frozenset[str]:
    if natives == frozenset({"cz"}) or natives == frozenset({"iswap"}):
        return natives
    if natives in (frozenset({"cz", "iswap"}), frozenset({"both"})):
        return frozenset({"cz", "iswap"})
    raise ValueError(f"natives must be cz, iswap or both, got {set(natives)}")


def _expand(gate: Gate, natives: frozenset[str]) -> list[Gate]:
    """One decomposition step; returns [gate] when already native."""
    name, qubits, params = gate.name, gate.qubits, gate.params
    if name == "m" or name in ("u3", "rz", "z", "x"):
        return [gate]
    if name == "rx":
        theta = params[0]
        if _is(theta, _HALF_PI) or _is(theta, -_HALF_PI):
            return [gate]
        if _is(abs(theta), math.pi):
            return [Gate("x", qubits)]
        if _is(theta, 0.0):
            return []
        return [Gate("u3", qubits, (theta, -_HALF_PI, _HALF_PI))]
    if name == "ry":
        return [Gate("u3", qubits, (params[0], 0.0, 0.0))]
    if name == "h":
        return [Gate("u3", qubits, (_HALF_PI, 0.0, math.pi))]
    if name == "y":
        return [Gate("u3", qubits, (math.pi, 0.0, 0.0))]

    a, b = qubits if len(qubits) == 2 else (qubits[0], None)
    if name == "cz":
        if "cz" in natives:
            return [gate]
        # two iSWAPs plus single-qubit corrections
        return [
            Gate("rx", (a,), (_HALF_PI,)),
            Gate("rz", (b,), (-_HALF_PI,)),
            Gate("iswap", (a, b)),
            Gate("rx", (b,), (_HALF_PI,)),
            Gate("iswap", (a, b)),
            Gate("rz", (a,), (-_HALF_PI,)),
            Gate("h", (a,)),
            Gate("z", (b,)),
        ]
    if name == "iswap":
        if "iswap" in natives:
            return [gate]
        return [
            Gate("rz", (a,), (_HALF_PI,)),
            Gate("rz", (b,), (_HALF_PI,)),
            Gate("h", (a,)),
            Gate("cnot", (a, b)),
            Gate("cnot", (b, a)),
            Gate("h", (b,)),
        ]
    if name == "cnot":
        return [Gate("h", (b,)), Gate("cz", (a, b)), Gate("h", (b,))]
    if name == "swap":
        if "iswap" in natives:
            # one iSWAP plus one CZ (CZ recurses when iSWAP-only)
            return [
                Gate("rz", (a,), (-_HALF_PI,)),
                Gate("rz", (b,), (-_HALF_PI,)),
                Gate("cz", (a, b)),
                Gate("iswap", (a, b)),
            ]
        return [Gate("cnot", (a, b)), Gate("cnot", (b, a)), Gate("cnot", (a, b))]
    raise ValueError(f"no decomposition for gate {name!r}")


def u3_angles(matrix: np.ndarray) -> tuple[float, float, float]:
    """ZYZ angles of a 2x2 unitary, valid up to global phase."""
    det = np.linalg.det(matrix)
    m = matrix / cmath.sqrt(det)
    theta = 2 * math.atan2(abs(m[1, 0]), abs(m[0, 0]))
    if abs(m[1, 0]) < 1e-12:
        return (0.0, 0.0, -2 * cmath.phase(m[0, 0]))
    if abs(m[0, 0]) < 1e-12:
        return (math.pi, 2 * cmath.phase(m[1, 0]), 0.0)
    phi = cmath.phase(m[1, 0]) - cmath.phase(m[0, 0])
    lam = -cmath.phase(m[1, 0]) - cmath.phase(m[0, 0])
    return (theta, phi, lam)


def _fuse(gates: list[Gate]) -> list[Gate]:
    """Collapse runs of >= 2 single-qubit gates per wire into one U3."""
    pending: dict[int, list[Gate]] = {}
    out: list[Gate] = []

    def flush(qubit: int):
        run = pending.pop(qubit, [])
        if not run:
            return
        if len(run) == 1:
            out.append(run[0])
            return
        matrix = np.eye(2, dtype=complex)
        for gate in run:
            matrix = gate_matrix(gate) @ matrix
        out.append(Gate("u3", (qubit,), u3_angles(matrix)))

    for gate in gates:
        if len(gate.qubits) == 1 and not gate.is_measurement:
            pending.setdefault(gate.qubits[0], []).append(gate)
        else:
            for q in sorted(gate.qubits):
                flush(q)
            out.append(gate)
    for q in sorted(pending):
        flush(q)
    return out


def unroll(circuit: Circuit, natives="cz") -> Circuit:
    """Recursively decompose into native gates and fuse single-qubit runs.

    ``natives`` selects the two-qubit basis: "cz", "iswap" or "both".
    The output unitary equals the input up to a global phase.
    """
    if isinstance(natives, str):
        natives = frozenset({natives})
    native_set = _native_two_qubit(frozenset(natives))
    gates = list(circuit.gates)
    while True:
        expanded: list[Gate] = []
        changed = False
        for gate in gates:
            step = _expand(gate, native_set)
            if len(step) != 1 or step[0] is not gate:
                changed = True
            expanded.extend(step)
        gates = expanded
        if not changed:
            break
    return Circuit(circuit.n_qubits, _fuse(gates))
