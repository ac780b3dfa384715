"""Circuit transpilation: placement, routing, unrolling and the
CNOT-overhead metric used by the routing benchmark."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..circuits import Circuit, Gate, equal_up_to_global_phase, unitary_of
from ..connectivity import Connectivity
from .placement import (
    Custom,
    Layout,
    RandomGreedy,
    ReverseTraversal,
    SubgraphIsomorphism,
    Trivial,
    executable_prefix,
    place,
)
from .routing import Sabre, ShortestPaths, StarRouter, route
from .unroller import unroll, u3_angles

__all__ = [
    "Layout",
    "Trivial",
    "Custom",
    "RandomGreedy",
    "SubgraphIsomorphism",
    "ReverseTraversal",
    "ShortestPaths",
    "Sabre",
    "StarRouter",
    "place",
    "route",
    "unroll",
    "u3_angles",
    "executable_prefix",
    "transpile",
    "TranspileResult",
    "cnot_overhead",
    "cnot_count",
    "star_layout",
    "is_adjacency_legal",
    "routed_equivalent",
]

# CNOT cost of each two-qubit gate kind
_CNOT_WEIGHT = {"cnot": 1, "cz": 1, "swap": 3, "iswap": 2}


def cnot_count(circuit: Circuit) -> int:
    """Two-qubit gate count in CNOT equivalents (SWAP=3, iSWAP=2)."""
    return sum(_CNOT_WEIGHT[g.name] for g in circuit.two_qubit_gates())


def cnot_overhead(original: Circuit, routed: Circuit) -> float:
    """CNOT count of the routed circuit over the original's."""
    base = cnot_count(original)
    if base == 0:
        raise ValueError("original circuit has no CNOT-equivalent gates")
    return cnot_count(routed) / base


@dataclass(frozen=True)
class TranspileResult:
    circuit: Circuit
    initial_layout: Layout
    final_layout: Layout
    overhead: float


def transpile(
    circuit: Circuit,
    conn: Connectivity,
    placer=Trivial(),
    router=Sabre(),
    natives="cz",
) -> TranspileResult:
    """Full pipeline: place, route, then unroll to native gates."""
    initial = place(circuit, conn, placer)
    routed, final = route(circuit, conn, initial, router)
    overhead = (
        cnot_overhead(circuit, routed) if cnot_count(circuit) > 0 else 1.0
    )
    return TranspileResult(
        circuit=unroll(routed, natives),
        initial_layout=initial.completed(conn.n_qubits),
        final_layout=final,
        overhead=overhead,
    )


def star_layout(circuit: Circuit, conn: Connectivity) -> Layout:
    """Built-in placer of the star baseline: busiest logical at the centre."""
    degrees = {v: len(conn.neighbors(v)) for v in range(conn.n_qubits)}
    center = max(degrees, key=lambda v: (degrees[v], -v))
    activity = {l: 0 for l in range(circuit.n_qubits)}
    for gate in circuit.two_qubit_gates():
        for q in gate.qubits:
            activity[q] += 1
    busiest = max(activity, key=lambda l: (activity[l], -l))
    others = [l for l in range(circuit.n_qubits) if l != busiest]
    free = [p for p in range(conn.n_qubits) if p != center]
    mapping = [0] * circuit.n_qubits
    mapping[busiest] = center
    for l, p in zip(others, free):
        mapping[l] = p
    return Layout(tuple(mapping))


def is_adjacency_legal(circuit: Circuit, conn: Connectivity) -> bool:
    """Every two-qubit gate acts on an edge of the device graph."""
    return all(conn.are_connected(*g.qubits) for g in circuit.two_qubit_gates())


def _layout_permutation(layout: Layout, n: int) -> np.ndarray:
    """Matrix mapping a logical-basis state onto the physical register."""
    complete = layout.completed(n)
    matrix = np.zeros((2**n, 2**n), dtype=complex)
    for logical_index in range(2**n):
        bits = [(logical_index >> (n - 1 - l)) & 1 for l in range(n)]
        physical_index = 0
        for l, bit in enumerate(bits):
            physical_index |= bit << (n - 1 - complete[l])
        matrix[physical_index, logical_index] = 1.0
    return matrix


def routed_equivalent(
    original: Circuit,
    routed: Circuit,
    initial_layout: Layout,
    final_layout: Layout,
    tol: float = 1e-9,
) -> bool:
    """Oracle check: routed == P_final (original x I) P_initial^T up to phase."""
    n = routed.n_qubits
    extended = Circuit(n, original.without_measurements().gates)
    lhs = unitary_of(routed) @ _layout_permutation(initial_layout, n)
    rhs = _layout_permutation(final_layout, n) @ unitary_of(extended)
    return equal_up_to_global_phase(lhs, rhs, tol)
