import itertools
import math

import numpy as np
import pytest

from pulsekit.circuits import (
    Circuit,
    Gate,
    equal_up_to_global_phase,
    random_cnot_circuit,
    unitary_of,
)
from pulsekit.connectivity import Connectivity, line_connectivity, star_connectivity
from pulsekit.transpiler import (
    Custom,
    Layout,
    RandomGreedy,
    ReverseTraversal,
    Sabre,
    ShortestPaths,
    StarRouter,
    SubgraphIsomorphism,
    Trivial,
    cnot_count,
    cnot_overhead,
    executable_prefix,
    is_adjacency_legal,
    place,
    route,
    routed_equivalent,
    star_layout,
    transpile,
    unroll,
)

STAR = star_connectivity(5)
LINE = line_connectivity(5)


def brute_force_min_swaps(conn, circuit, layout):
    """Oracle: BFS over layouts, counting the fewest SWAPs that make every
    two-qubit gate executable in order."""
    from collections import deque

    interactions = [g.qubits for g in circuit.two_qubit_gates()]
    start = tuple(layout.completed(conn.n_qubits).mapping)
    frontier = deque([(start, 0, 0)])  # mapping, gate index, swaps
    seen = {(start, 0)}
    while frontier:
        mapping, index, swaps = frontier.popleft()
        while index < len(interactions) and conn.are_connected(
            mapping[interactions[index][0]], mapping[interactions[index][1]]
        ):
            index += 1
        if index == len(interactions):
            return swaps
        for a, b in conn.edges:
            new = list(mapping)
            la = new.index(a)
            lb = new.index(b)
            new[la], new[lb] = b, a
            key = (tuple(new), index)
            if key not in seen:
                seen.add(key)
                frontier.append((tuple(new), index, swaps + 1))
    raise AssertionError("unreachable for connected graphs")


class TestPlacement:
    def test_trivial_identity(self):
        layout = place(Circuit(4), STAR, Trivial())
        assert layout.mapping == (0, 1, 2, 3)

    def test_custom_validated(self):
        layout = place(Circuit(3), STAR, Custom((2, 0, 1)))
        assert layout.mapping == (2, 0, 1)
        with pytest.raises(ValueError):
            place(Circuit(3), STAR, Custom((0, 0, 1)))
        with pytest.raises(ValueError):
            place(Circuit(3), STAR, Custom((0, 1)))

    def test_width_exceeds_device(self):
        with pytest.raises(ValueError):
            place(Circuit(6), STAR, Trivial())

    def test_random_greedy_deterministic(self):
        circuit = random_cnot_circuit(5, 20, seed=0)
        a = place(circuit, STAR, RandomGreedy(k=1, seed=11))
        b = place(circuit, STAR, RandomGreedy(k=1, seed=11))
        assert a == b

    def test_random_greedy_improves_prefix(self):
        circuit = random_cnot_circuit(5, 20, seed=2)
        trivial_cost = executable_prefix(circuit, STAR, place(circuit, STAR, Trivial()))
        greedy = place(circuit, STAR, RandomGreedy(k=100, seed=0))
        assert executable_prefix(circuit, STAR, greedy) >= trivial_cost

    def test_subgraph_isomorphism_path(self):
        circuit = Circuit(3, [Gate("cz", (0, 1)), Gate("cz", (1, 2))])
        conn = line_connectivity(3)
        layout = place(circuit, conn, SubgraphIsomorphism())
        assert executable_prefix(circuit, conn, layout) == 2

    def test_subgraph_isomorphism_star(self):
        # hub-and-spoke interactions embed exactly on the star
        circuit = Circuit(5, [Gate("cz", (2, q)) for q in (0, 1, 3, 4)])
        layout = place(circuit, STAR, SubgraphIsomorphism())
        assert executable_prefix(circuit, STAR, layout) == 4

    def test_reverse_traversal_runs(self):
        circuit = random_cnot_circuit(5, 20, seed=5)
        layout = place(circuit, STAR, ReverseTraversal(passes=2))
        assert sorted(layout.mapping) == [0, 1, 2, 3, 4]


class TestRouting:
    @pytest.mark.parametrize("router", [ShortestPaths(), Sabre(lookahead=False), Sabre()])
    def test_adjacent_circuit_untouched(self, router):
        circuit = Circuit(5, [Gate("cnot", (0, 1)), Gate("cnot", (0, 2))])
        routed, final = route(circuit, STAR, place(circuit, STAR, Trivial()), router)
        assert [g.name for g in routed] == ["cnot", "cnot"]
        assert cnot_overhead(circuit, routed) == 1.0
        assert final.mapping == tuple(range(5))

    def test_star_single_leaf_pair_cnot(self):
        # brute force says one SWAP suffices; overhead is (1 + 3) / 1 = 4
        circuit = Circuit(5, [Gate("cnot", (1, 2))])
        layout = place(circuit, STAR, Trivial())
        assert brute_force_min_swaps(STAR, circuit, layout) == 1
        routed, final = route(circuit, STAR, layout, ShortestPaths())
        assert routed.count("swap") == 1
        assert cnot_overhead(circuit, routed) == 4.0
        assert routed_equivalent(circuit, routed, layout, final)

    @pytest.mark.parametrize("conn", [STAR, LINE])
    @pytest.mark.parametrize("router", [ShortestPaths(), Sabre(lookahead=False), Sabre()])
    def test_soundness_and_equivalence(self, conn, router):
        for seed in range(10):
            circuit = random_cnot_circuit(5, 20, seed=seed)
            layout = place(circuit, conn, Trivial())
            routed, final = route(circuit, conn, layout, router)
            assert is_adjacency_legal(routed, conn)
            assert set(g.name for g in routed) <= {"cnot", "swap"}
            assert routed_equivalent(circuit, routed, layout, final)

    def test_disconnected_graph_rejected(self):
        conn = Connectivity.from_edges([(0, 1), (2, 3)], n_qubits=4)
        circuit = Circuit(4, [Gate("cnot", (0, 3))])
        with pytest.raises(ValueError, match="connected"):
            route(circuit, conn, place(circuit, conn, Trivial()), Sabre())

    def test_measurements_remapped(self):
        circuit = Circuit(3, [Gate("cnot", (1, 2)), Gate("m", (1, 2))])
        layout = place(circuit, STAR, Trivial())
        routed, final = route(circuit, STAR, layout, ShortestPaths())
        measurement = routed.gates[-1]
        assert measurement.name == "m"
        assert set(measurement.qubits) == {final[1], final[2]}

    def test_star_router_baseline(self):
        circuit = random_cnot_circuit(5, 30, seed=4)
        layout = star_layout(circuit, STAR)
        routed, final = route(circuit, STAR, layout, StarRouter())
        assert is_adjacency_legal(routed, STAR)
        assert routed_equivalent(circuit, routed, layout, final)

    def test_star_router_requires_star(self):
        circuit = random_cnot_circuit(5, 5, seed=0)
        with pytest.raises(ValueError, match="star"):
            route(circuit, LINE, place(circuit, LINE, Trivial()), StarRouter())


class TestUnroller:
    @pytest.mark.parametrize("natives,n_two_qubit", [("cz", 1), ("iswap", 2), ("both", 1)])
    def test_cnot_counts(self, natives, n_two_qubit):
        unrolled = unroll(Circuit(2, [Gate("cnot", (0, 1))]), natives)
        assert len(unrolled.two_qubit_gates()) == n_two_qubit

    def test_swap_is_three_cz(self):
        unrolled = unroll(Circuit(2, [Gate("swap", (0, 1))]), "cz")
        assert unrolled.count("cz") == 3

    def test_swap_two_gates_with_both(self):
        unrolled = unroll(Circuit(2, [Gate("swap", (0, 1))]), "both")
        assert len(unrolled.two_qubit_gates()) == 2

    @pytest.mark.parametrize("natives", ["cz", "iswap", "both"])
    @pytest.mark.parametrize(
        "gate",
        [
            Gate("cnot", (0, 1)), Gate("cz", (0, 1)), Gate("swap", (0, 1)),
            Gate("iswap", (0, 1)), Gate("h", (0,)), Gate("y", (1,)),
            Gate("ry", (0,), (0.73,)), Gate("rx", (1,), (1.1,)),
            Gate("u3", (0,), (0.4, -0.9, 2.2)),
        ],
    )
    def test_unitary_preserved(self, natives, gate):
        circuit = Circuit(2, [gate])
        unrolled = unroll(circuit, natives)
        assert equal_up_to_global_phase(unitary_of(circuit), unitary_of(unrolled), tol=1e-9)

    def test_native_single_qubit_set(self):
        circuit = random_cnot_circuit(4, 10, seed=7)
        circuit.add(Gate("h", (0,)))
        circuit.add(Gate("ry", (1,), (0.3,)))
        unrolled = unroll(circuit, "cz")
        allowed = {"u3", "rx", "rz", "x", "z", "cz", "m"}
        assert {g.name for g in unrolled} <= allowed
        for gate in unrolled:
            if gate.name == "rx":
                assert abs(abs(gate.params[0]) - math.pi / 2) < 1e-9

    def test_rz_fusion_single_u3(self):
        circuit = Circuit(1, [Gate("rz", (0,), (0.5,)), Gate("rz", (0,), (0.7,))])
        fused = unroll(circuit, "cz")
        assert len(fused) == 1
        gate = fused.gates[0]
        assert gate.name == "u3"
        assert gate.params[0] == pytest.approx(0.0, abs=1e-12)
        total = gate.params[1] + gate.params[2]
        assert total == pytest.approx(1.2, abs=1e-12)

    def test_fusion_collapses_runs(self):
        circuit = Circuit(1, [Gate("h", (0,)), Gate("x", (0,)), Gate("rz", (0,), (0.3,))])
        fused = unroll(circuit, "cz")
        assert len(fused) == 1
        assert fused.gates[0].name == "u3"
        assert equal_up_to_global_phase(unitary_of(circuit), unitary_of(fused), tol=1e-12)

    def test_fusion_idempotent(self):
        circuit = random_cnot_circuit(3, 8, seed=1)
        circuit.add(Gate("h", (0,)))
        circuit.add(Gate("rz", (0,), (0.4,)))
        circuit.add(Gate("ry", (2,), (1.0,)))
        once = unroll(circuit, "cz")
        twice = unroll(once, "cz")
        assert once.gates == twice.gates

    def test_measurement_passthrough(self):
        circuit = Circuit(2, [Gate("cnot", (0, 1)), Gate("m", (0, 1))])
        unrolled = unroll(circuit, "cz")
        assert unrolled.gates[-1].name == "m"


class TestOverhead:
    def test_no_swaps_ratio_one(self):
        circuit = Circuit(2, [Gate("cnot", (0, 1))])
        assert cnot_overhead(circuit, circuit) == 1.0

    def test_swap_counts_three(self):
        original = Circuit(2, [Gate("cnot", (0, 1))])
        routed = Circuit(2, [Gate("swap", (0, 1)), Gate("cnot", (0, 1))])
        assert cnot_overhead(original, routed) == 4.0

    def test_arithmetic(self):
        original = random_cnot_circuit(5, 10, seed=0)
        routed = Circuit(5, original.gates + [Gate("swap", (0, 1))] * 4)
        assert cnot_overhead(original, routed) == pytest.approx(2.2)

    def test_zero_cnots_rejected(self):
        with pytest.raises(ValueError):
            cnot_overhead(Circuit(2, [Gate("h", (0,))]), Circuit(2))


class TestPipeline:
    def test_transpile_end_to_end(self):
        circuit = random_cnot_circuit(4, 12, seed=9)
        result = transpile(circuit, STAR, placer=Trivial(), router=Sabre(), natives="cz")
        assert is_adjacency_legal(result.circuit, STAR)
        assert routed_equivalent(circuit, result.circuit, result.initial_layout, result.final_layout)
        assert result.overhead >= 1.0

    def test_fig4_ordering_small(self):
        # lookahead SABRE beats (or ties) shortest paths on the star, 10 seeds
        means = {}
        for label, router in (("sp", ShortestPaths()), ("la", Sabre(lookahead=True))):
            overheads = []
            for seed in range(10):
                circuit = random_cnot_circuit(5, 20, seed=seed)
                layout = place(circuit, STAR, Trivial())
                routed, _ = route(circuit, STAR, layout, router)
                overheads.append(cnot_overhead(circuit, routed))
            means[label] = np.mean(overheads)
        assert means["la"] <= means["sp"]

    def test_qft5_transpiles(self):
        from pulsekit.circuits import qft_circuit

        circuit = qft_circuit(5)
        result = transpile(circuit, STAR, router=Sabre(), natives="cz")
        assert is_adjacency_legal(result.circuit, STAR)
        assert routed_equivalent(circuit, result.circuit, result.initial_layout, result.final_layout)
