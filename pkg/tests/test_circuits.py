import math

import numpy as np
import pytest

from pulsekit.circuits import (
    Circuit,
    Gate,
    dft_matrix,
    equal_up_to_global_phase,
    gate_matrix,
    qft_circuit,
    random_cnot_circuit,
    u3_matrix,
    unitary_of,
)


class TestGateValidation:
    def test_unknown_gate(self):
        with pytest.raises(ValueError):
            Gate("toffoli", (0, 1, 2))

    def test_arity(self):
        with pytest.raises(ValueError):
            Gate("cnot", (0,))
        with pytest.raises(ValueError):
            Gate("rx", (0,))

    def test_distinct_operands(self):
        with pytest.raises(ValueError):
            Gate("cnot", (1, 1))

    def test_out_of_range_operand(self):
        with pytest.raises(ValueError):
            Circuit(2).add(Gate("x", (2,)))

    def test_measurement_terminal(self):
        circuit = Circuit(2)
        circuit.add(Gate("m", (0,)))
        circuit.add(Gate("x", (1,)))  # other wires stay usable
        with pytest.raises(ValueError, match="terminal"):
            circuit.add(Gate("x", (0,)))


class TestUnitaryOracle:
    def test_empty_is_identity(self):
        assert np.allclose(unitary_of(Circuit(2)), np.eye(4))

    def test_x_matrix(self):
        u = unitary_of(Circuit(1, [Gate("x", (0,))]))
        assert np.allclose(u, [[0, 1], [1, 0]])

    def test_cnot_control_is_first_operand(self):
        u = unitary_of(Circuit(2, [Gate("cnot", (0, 1))]))
        # |10> -> |11> with qubit 0 as most significant bit
        state = u @ np.array([0, 0, 1, 0])
        assert np.allclose(state, [0, 0, 0, 1])

    def test_gate_order_is_time_order(self):
        circuit = Circuit(1, [Gate("x", (0,)), Gate("z", (0,))])
        assert np.allclose(unitary_of(circuit), gate_matrix(Gate("z", (0,))) @ gate_matrix(Gate("x", (0,))))

    def test_u3_convention_product(self):
        theta, phi, lam = 0.7, -1.2, 2.1
        explicit = (
            gate_matrix(Gate("rz", (0,), (phi,)))
            @ gate_matrix(Gate("rx", (0,), (-math.pi / 2,)))
            @ gate_matrix(Gate("rz", (0,), (theta,)))
            @ gate_matrix(Gate("rx", (0,), (math.pi / 2,)))
            @ gate_matrix(Gate("rz", (0,), (lam,)))
        )
        assert np.allclose(u3_matrix(theta, phi, lam), explicit, atol=1e-12)

    def test_width_limit(self):
        with pytest.raises(ValueError):
            unitary_of(Circuit(11))

    def test_measurements_ignored(self):
        with_m = Circuit(1, [Gate("x", (0,)), Gate("m", (0,))])
        assert np.allclose(unitary_of(with_m), unitary_of(Circuit(1, [Gate("x", (0,))])))


class TestPhaseAlignment:
    def test_equal_up_to_phase(self):
        u = unitary_of(qft_circuit(2))
        assert equal_up_to_global_phase(u, np.exp(1j * 0.7) * u)
        assert not equal_up_to_global_phase(u, np.eye(4, dtype=complex))


class TestQft:
    def test_single_qubit_is_hadamard(self):
        circuit = qft_circuit(1)
        assert [g.name for g in circuit] == ["h"]

    def test_two_qubit_matches_dft(self):
        u = unitary_of(qft_circuit(2))
        assert equal_up_to_global_phase(u, dft_matrix(2), tol=1e-10)

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_matches_dft(self, n):
        assert equal_up_to_global_phase(unitary_of(qft_circuit(n)), dft_matrix(n), tol=1e-9)

    def test_zero_width_rejected(self):
        with pytest.raises(ValueError):
            qft_circuit(0)


class TestRandomCircuits:
    def test_seeded_determinism(self):
        a = random_cnot_circuit(5, 100, seed=3)
        b = random_cnot_circuit(5, 100, seed=3)
        assert a.gates == b.gates

    def test_zero_gates(self):
        assert len(random_cnot_circuit(5, 0, seed=0)) == 0

    def test_distinct_wires(self):
        circuit = random_cnot_circuit(5, 100, seed=1)
        assert all(g.qubits[0] != g.qubits[1] for g in circuit)
        assert all(g.name == "cnot" for g in circuit)

    def test_width_validation(self):
        with pytest.raises(ValueError):
            random_cnot_circuit(1, 5, seed=0)


class TestSerialization:
    def test_round_trip(self):
        circuit = Circuit(3, [Gate("h", (0,)), Gate("cnot", (0, 2)), Gate("m", (0, 2))])
        restored = Circuit.from_json(circuit.to_json())
        assert restored.gates == circuit.gates
        assert restored.n_qubits == 3

    def test_bare_list_format(self):
        import json

        payload = json.loads(Circuit(2, [Gate("cz", (0, 1))]).to_json())
        assert isinstance(payload, list)
        assert payload[0] == {"name": "cz", "qubits": [0, 1], "params": []}
