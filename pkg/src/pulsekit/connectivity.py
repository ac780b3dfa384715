"""Undirected device connectivity graph with the few ops routing needs."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

__all__ = ["Connectivity", "star_connectivity", "line_connectivity"]


@dataclass(frozen=True)
class Connectivity:
    """Physical-qubit adjacency; vertices are 0..n_qubits-1."""

    n_qubits: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        normalized = frozenset(
            (min(a, b), max(a, b)) for a, b in self.edges
        )
        object.__setattr__(self, "edges", normalized)
        for a, b in normalized:
            if a == b:
                raise ValueError(f"self loop on qubit {a}")
            if not (0 <= a < self.n_qubits and 0 <= b < self.n_qubits):
                raise ValueError(f"edge ({a}, {b}) outside device of size {self.n_qubits}")

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], n_qubits: int | None = None) -> "Connectivity":
        edge_list = [(int(a), int(b)) for a, b in edges]
        if n_qubits is None:
            n_qubits = max((max(e) for e in edge_list), default=-1) + 1
        return cls(n_qubits, frozenset(edge_list))

    def neighbors(self, vertex: int) -> list[int]:
        out = [b for a, b in self.edges if a == vertex]
        out += [a for a, b in self.edges if b == vertex]
        return sorted(out)

    def are_connected(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def is_connected_graph(self) -> bool:
        if self.n_qubits == 0:
            return True
        seen = {0}
        frontier = deque([0])
        while frontier:
            v = frontier.popleft()
            for w in self.neighbors(v):
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        return len(seen) == self.n_qubits

    def distances(self) -> list[list[float]]:
        """All-pairs hop distances by BFS; inf for disconnected pairs."""
        dist = [[float("inf")] * self.n_qubits for _ in range(self.n_qubits)]
        for source in range(self.n_qubits):
            dist[source][source] = 0
            frontier = deque([source])
            while frontier:
                v = frontier.popleft()
                for w in self.neighbors(v):
                    if dist[source][w] == float("inf"):
                        dist[source][w] = dist[source][v] + 1
                        frontier.append(w)
        return dist

    def shortest_paths(self, a: int, b: int) -> list[list[int]]:
        """All shortest vertex paths from a to b, lexicographically sorted."""
        dist = self.distances()
        if dist[a][b] == float("inf"):
            return []
        paths: list[list[int]] = []

        def extend(path: list[int]):
            v = path[-1]
            if v == b:
                paths.append(path)
                return
            for w in self.neighbors(v):
                if dist[w][b] == dist[v][b] - 1:
                    extend(path + [w])

        extend([a])
        return sorted(paths)

    def to_dict(self) -> dict:
        return {"n_qubits": self.n_qubits, "edges": sorted(list(e) for e in self.edges)}

    @classmethod
    def from_dict(cls, data: dict) -> "Connectivity":
        return cls.from_edges(data["edges"], n_qubits=data.get("n_qubits"))

    @classmethod
    def from_json_file(cls, path) -> "Connectivity":
        with open(path) as handle:
            return cls.from_dict(json.load(handle))


def star_connectivity(n_qubits: int = 5, center: int = 0) -> Connectivity:
    edges = [(center, q) for q in range(n_qubits) if q != center]
    return Connectivity.from_edges(edges, n_qubits=n_qubits)


def line_connectivity(n_qubits: int) -> Connectivity:
    return Connectivity.from_edges([(q, q + 1) for q in range(n_qubits - 1)], n_qubits=n_qubits)
