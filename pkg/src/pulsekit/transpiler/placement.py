"""Initial logical-to-physical qubit placement strategies."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..circuits import Circuit
from ..connectivity import Connectivity

__all__ = [
    "Layout",
    "Trivial",
    "Custom",
    "RandomGreedy",
    "SubgraphIsomorphism",
    "ReverseTraversal",
    "place",
    "executable_prefix",
]


@dataclass(frozen=True)
class Layout:
    """Bijection logical -> physical; index is the logical qubit."""

    mapping: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "mapping", tuple(int(p) for p in self.mapping))
        if len(set(self.mapping)) != len(self.mapping):
            raise ValueError(f"layout is not injective: {self.mapping}")

    def __getitem__(self, logical: int) -> int:
        return self.mapping[logical]

    def __len__(self) -> int:
        return len(self.mapping)

    def completed(self, n_physical: int) -> "Layout":
        """Extend to a full permutation, ancilla wires in ascending order."""
        if len(self.mapping) > n_physical:
            raise ValueError("layout larger than device")
        free = [p for p in range(n_physical) if p not in set(self.mapping)]
        return Layout(self.mapping + tuple(free))

    def physical_to_logical(self) -> dict[int, int]:
        return {p: l for l, p in enumerate(self.mapping)}


def _interactions(circuit: Circuit) -> list[tuple[int, int]]:
    return [g.qubits for g in circuit.two_qubit_gates()]


def executable_prefix(circuit: Circuit, conn: Connectivity, layout: Layout) -> int:
    """Number of two-qubit gates executable in order before a SWAP is forced."""
    count = 0
    for a, b in _interactions(circuit):
        if not conn.are_connected(layout[a], layout[b]):
            break
        count += 1
    return count


@dataclass(frozen=True)
class Trivial:
    """Identity mapping."""


@dataclass(frozen=True)
class Custom:
    """User-provided logical -> physical map."""

    mapping: tuple[int, ...]


@dataclass(frozen=True)
class RandomGreedy:
    """Best of k seeded random layouts by executable-prefix length."""

    k: int = 100
    seed: int = 0


@dataclass(frozen=True)
class SubgraphIsomorphism:
    """Greedy embedding maximizing the executable interaction prefix."""


@dataclass(frozen=True)
class ReverseTraversal:
    """Alternating forward/backward routing passes starting from trivial."""

    passes: int = 3
    router: object = None  # defaults to lookahead SABRE, see place()


def place(circuit: Circuit, conn: Connectivity, strategy) -> Layout:
    """Choose an initial layout for the circuit on the device."""
    width = circuit.n_qubits
    if width > conn.n_qubits:
        raise ValueError(
            f"circuit width {width} exceeds device size {conn.n_qubits}"
        )
    if isinstance(strategy, Trivial):
        return Layout(tuple(range(width)))
    if isinstance(strategy, Custom):
        layout = Layout(strategy.mapping)
        if len(layout) != width:
            raise ValueError(
                f"custom layout covers {len(layout)} qubits, circuit has {width}"
            )
        for p in layout.mapping:
            if not 0 <= p < conn.n_qubits:
                raise ValueError(f"physical qubit {p} outside device")
        return layout
    if isinstance(strategy, RandomGreedy):
        return _random_greedy(circuit, conn, strategy)
    if isinstance(strategy, SubgraphIsomorphism):
        return _subgraph_isomorphism(circuit, conn)
    if isinstance(strategy, ReverseTraversal):
        return _reverse_traversal(circuit, conn, strategy)
    raise TypeError(f"unknown placement strategy {strategy!r}")


def _random_greedy(circuit: Circuit, conn: Connectivity, strategy: RandomGreedy) -> Layout:
    rng = np.random.default_rng(strategy.seed)
    width = circuit.n_qubits
    best, best_cost = None, -1
    for _ in range(strategy.k):
        candidate = Layout(tuple(int(p) for p in rng.permutation(conn.n_qubits)[:width]))
        cost = executable_prefix(circuit, conn, candidate)
        if cost > best_cost:
            best, best_cost = candidate, cost
    return best


def _subgraph_isomorphism(circuit: Circuit, conn: Connectivity) -> Layout:
    width = circuit.n_qubits
    interactions = _interactions(circuit)
    degree = {v: len(conn.neighbors(v)) for v in range(conn.n_qubits)}
    activity = {l: 0 for l in range(width)}
    for a, b in interactions:
        activity[a] += 1
        activity[b] += 1

    mapping: dict[int, int] = {}
    used: set[int] = set()

    def free_neighbors(physical: int) -> list[int]:
        return [v for v in conn.neighbors(physical) if v not in used]

    def assign(logical: int, physical: int):
        mapping[logical] = physical
        used.add(physical)

    for a, b in interactions:
        if a in mapping and b in mapping:
            if not conn.are_connected(mapping[a], mapping[b]):
                break
            continue
        if a not in mapping and b not in mapping:
            if not mapping:
                # busier logical goes to the highest-degree vertex
                first, second = (a, b) if activity[a] >= activity[b] else (b, a)
                anchor = max(range(conn.n_qubits), key=lambda v: (degree[v], -v))
                options = free_neighbors(anchor)
                if not options:
                    break
                assign(first, anchor)
                assign(second, max(options, key=lambda v: (degree[v], -v)))
            else:
                free_edges = [
                    e for e in sorted(conn.edges) if e[0] not in used and e[1] not in used
                ]
                if not free_edges:
                    break
                v, w = max(free_edges, key=lambda e: (degree[e[0]] + degree[e[1]], -e[0], -e[1]))
                first, second = (a, b) if activity[a] >= activity[b] else (b, a)
                if degree[w] > degree[v]:
                    v, w = w, v
                assign(first, v)
                assign(second, w)
            continue
        mapped, unmapped = (a, b) if a in mapping else (b, a)
        options = free_neighbors(mapping[mapped])
        if not options:
            break
        assign(unmapped, max(options, key=lambda v: (degree[v], -v)))

    remaining_logical = [l for l in range(width) if l not in mapping]
    remaining_physical = [p for p in range(conn.n_qubits) if p not in used]
    for l, p in zip(remaining_logical, remaining_physical):
        mapping[l] = p
    return Layout(tuple(mapping[l] for l in range(width)))


def _reverse_traversal(circuit: Circuit, conn: Connectivity, strategy: ReverseTraversal) -> Layout:
    from .routing import Sabre, route

    router = strategy.router if strategy.router is not None else Sabre(lookahead=True)
    body = circuit.without_measurements()
    reversed_circuit = Circuit(body.n_qubits, list(reversed(body.gates)))
    layout = Layout(tuple(range(circuit.n_qubits)))
    for _ in range(strategy.passes):
        _, final = route(body, conn, layout, router)
        _, layout = route(reversed_circuit, conn, final, router)
        layout = Layout(layout.mapping[: circuit.n_qubits])
    return layout
