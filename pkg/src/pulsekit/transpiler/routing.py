"""SWAP-insertion routing: shortest-paths, SABRE and the star baseline."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..circuits import Circuit, Gate
from ..connectivity import Connectivity
from .placement import Layout

__all__ = ["ShortestPaths", "Sabre", "StarRouter", "route"]


@dataclass(frozen=True)
class ShortestPaths:
    """Move one operand along a shortest path; ties favor the path that
    keeps the most of the following two-qubit gates executable."""


@dataclass(frozen=True)
class Sabre:
    """Heuristic swap search scored on front-layer plus lookahead distances."""

    lookahead: bool = True
    window: int = 20
    weight: float = 0.5


@dataclass(frozen=True)
class StarRouter:
    """Star-connectivity baseline: swap the centre qubit based on the
    successive gate.  Only valid on star graphs."""


class _Mapping:
    """Mutable logical<->physical bijection over the full device."""

    def __init__(self, layout: Layout, n_physical: int):
        complete = layout.completed(n_physical)
        self.l2p = list(complete.mapping)
        self.p2l = [0] * n_physical
        for l, p in enumerate(self.l2p):
            self.p2l[p] = l

    def swap_physical(self, pa: int, pb: int):
        la, lb = self.p2l[pa], self.p2l[pb]
        self.p2l[pa], self.p2l[pb] = lb, la
        self.l2p[la], self.l2p[lb] = pb, pa

    def layout(self) -> Layout:
        return Layout(tuple(self.l2p))


def _split_measurements(circuit: Circuit) -> tuple[list[Gate], list[Gate]]:
    body = [g for g in circuit.gates if not g.is_measurement]
    measurements = [g for g in circuit.gates if g.is_measurement]
    return body, measurements


def route(
    circuit: Circuit, conn: Connectivity, layout: Layout, algorithm
) -> tuple[Circuit, Layout]:
    """Insert SWAPs so every two-qubit gate acts on adjacent physical qubits.

    Returns the routed circuit on the full device width together with
    the final (complete) logical-to-physical layout.  Measurements are
    re-emitted at the end through the final layout.
    """
    if not conn.is_connected_graph():
        raise ValueError("routing requires a connected device graph")
    if circuit.n_qubits > conn.n_qubits:
        raise ValueError("circuit wider than device")
    body, measurements = _split_measurements(circuit)
    mapping = _Mapping(layout, conn.n_qubits)
    routed = Circuit(conn.n_qubits)

    if isinstance(algorithm, ShortestPaths):
        _route_shortest_paths(body, conn, mapping, routed)
    elif isinstance(algorithm, Sabre):
        _route_sabre(body, conn, mapping, routed, algorithm)
    elif isinstance(algorithm, StarRouter):
        _route_star(body, conn, mapping, routed)
    else:
        raise TypeError(f"unknown routing algorithm {algorithm!r}")

    for gate in measurements:
        routed.add(Gate("m", tuple(mapping.l2p[q] for q in gate.qubits)))
    return routed, mapping.layout()


def _emit_mapped(routed: Circuit, gate: Gate, mapping: _Mapping):
    routed.add(Gate(gate.name, tuple(mapping.l2p[q] for q in gate.qubits), gate.params))


def _route_shortest_paths(body, conn, mapping, routed):
    remaining = [g.qubits for g in body if len(g.qubits) == 2]
    seen_2q = 0
    for gate in body:
        if len(gate.qubits) == 1:
            _emit_mapped(routed, gate, mapping)
            continue
        seen_2q += 1
        a, b = gate.qubits
        pa, pb = mapping.l2p[a], mapping.l2p[b]
        if not conn.are_connected(pa, pb):
            path = _best_path(conn, pa, pb, remaining[seen_2q:], mapping)
            for i in range(len(path) - 2):
                routed.add(Gate("swap", (path[i], path[i + 1])))
                mapping.swap_physical(path[i], path[i + 1])
        _emit_mapped(routed, gate, mapping)


def _best_path(conn, pa, pb, following, mapping):
    """Shortest path whose swaps keep the longest following prefix executable."""
    paths = conn.shortest_paths(pa, pb)
    best, best_score = None, -1
    for path in paths:
        l2p = list(mapping.l2p)
        p2l = list(mapping.p2l)
        for i in range(len(path) - 2):
            la, lb = p2l[path[i]], p2l[path[i + 1]]
            p2l[path[i]], p2l[path[i + 1]] = lb, la
            l2p[la], l2p[lb] = path[i + 1], path[i]
        score = 0
        for qa, qb in following:
            if not conn.are_connected(l2p[qa], l2p[qb]):
                break
            score += 1
        if score > best_score:
            best, best_score = path, score
    return best


def _build_dependencies(body: list[Gate]):
    """Wire-order DAG: each gate depends on the previous gate per wire."""
    last: dict[int, int] = {}
    preds: list[set[int]] = []
    succs: list[set[int]] = [set() for _ in body]
    for i, gate in enumerate(body):
        pred = set()
        for q in gate.qubits:
            if q in last:
                pred.add(last[q])
            last[q] = i
        preds.append(pred)
        for p in pred:
            succs[p].add(i)
    return preds, succs


def _route_sabre(body, conn, mapping, routed, options: Sabre):
    preds, succs = _build_dependencies(body)
    indegree = [len(p) for p in preds]
    ready = sorted(i for i, d in enumerate(indegree) if d == 0)
    done: set[int] = set()
    dist = conn.distances()
    weight = options.weight if options.lookahead else 0.0
    last_swap: Optional[tuple[int, int]] = None
    stall = 0

    def finish(i: int):
        done.add(i)
        for s in sorted(succs[i]):
            indegree[s] -= 1
            if indegree[s] == 0:
                ready.append(s)

    while ready:
        progress = False
        for i in sorted(ready):
            gate = body[i]
            if len(gate.qubits) == 1 or conn.are_connected(
                mapping.l2p[gate.qubits[0]], mapping.l2p[gate.qubits[1]]
            ):
                _emit_mapped(routed, gate, mapping)
                ready.remove(i)
                finish(i)
                progress = True
        if progress:
            stall = 0
            last_swap = None
            continue
        if not ready:
            break

        front = [body[i].qubits for i in sorted(ready)]
        extended = []
        if weight > 0:
            for i in range(len(body)):
                if i in done or i in ready:
                    continue
                if len(body[i].qubits) == 2:
                    extended.append(body[i].qubits)
                    if len(extended) >= options.window:
                        break

        if stall > 4 * conn.n_qubits:
            # safety valve against oscillation: force a shortest-path move
            a, b = front[0]
            path = conn.shortest_paths(mapping.l2p[a], mapping.l2p[b])[0]
            for i in range(len(path) - 2):
                routed.add(Gate("swap", (path[i], path[i + 1])))
                mapping.swap_physical(path[i], path[i + 1])
            stall = 0
            continue

        candidates = set()
        for a, b in front:
            for p in (mapping.l2p[a], mapping.l2p[b]):
                for nb in conn.neighbors(p):
                    candidates.add((min(p, nb), max(p, nb)))
        scored = []
        for swap in sorted(candidates):
            l2p = list(mapping.l2p)
            la, lb = mapping.p2l[swap[0]], mapping.p2l[swap[1]]
            l2p[la], l2p[lb] = swap[1], swap[0]
            cost = sum(dist[l2p[a]][l2p[b]] for a, b in front)
            cost += weight * sum(dist[l2p[a]][l2p[b]] for a, b in extended)
            scored.append((cost, swap))
        scored.sort()
        chosen = scored[0][1]
        if chosen == last_swap and len(scored) > 1:
            chosen = scored[1][1]
        routed.add(Gate("swap", chosen))
        mapping.swap_physical(*chosen)
        last_swap = chosen
        stall += 1


def _route_star(body, conn, mapping, routed):
    degrees = {v: len(conn.neighbors(v)) for v in range(conn.n_qubits)}
    center = max(degrees, key=lambda v: (degrees[v], -v))
    if degrees[center] != conn.n_qubits - 1:
        raise ValueError("star router requires a star-connectivity device")
    two_qubit_stream = [g.qubits for g in body if len(g.qubits) == 2]
    seen_2q = 0
    for gate in body:
        if len(gate.qubits) == 1:
            _emit_mapped(routed, gate, mapping)
            continue
        seen_2q += 1
        a, b = gate.qubits
        pa, pb = mapping.l2p[a], mapping.l2p[b]
        if center not in (pa, pb):
            # move to the centre whichever operand the successive gate reuses
            following = two_qubit_stream[seen_2q] if seen_2q < len(two_qubit_stream) else ()
            move = a if a in following else b if b in following else a
            routed.add(Gate("swap", (center, mapping.l2p[move])))
            mapping.swap_physical(center, mapping.l2p[move])
        _emit_mapped(routed, gate, mapping)
