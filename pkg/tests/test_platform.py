import copy
import json
import math

import numpy as np
import pytest

from pulsekit.acquisition import AcquisitionType, AveragingMode, ExecutionOptions
from pulsekit.platform import (
    PlatformError,
    build_platform,
    dump_parameters,
    load_platform,
    serialize_parameters,
    update_parameter,
)
from pulsekit.pulses import Pulse, PulseKind, PulseSequence, Rectangular

from conftest import PLATFORM_PATH, QPU_PATH


def one_qubit_config():
    qpu = {
        "seed": 1,
        "qubits": {
            "0": {
                "resonator_frequency": 7.0e9,
                "kappa": 2e6,
                "chi": 0.3e6,
                "qubit_frequency": 4.5e9,
                "rabi_coupling": 0.4,
                "t1": None,
                "t2": None,
                "iq_mean0": [1.0, 0.0],
                "iq_mean1": [-1.0, 0.0],
                "iq_sigma": 0.0,
            }
        },
        "pairs": {},
    }
    return {
        "name": "single",
        "sampling_rate": 1.0,
        "instruments": [
            {"id": "emu", "kind": "emulator", "address": "emulator://0", "ports": 4, "qpu": qpu}
        ],
        "channels": [
            {"name": "ro", "port": ["emu", 0]},
            {"name": "fb", "port": ["emu", 1]},
            {"name": "dr", "port": ["emu", 2]},
        ],
        "qubits": [
            {"id": 0, "channels": {"readout": "ro", "feedback": "fb", "drive": "dr"}}
        ],
        "pairs": [],
        "parameters": {
            "qubits": {
                "0": {
                    "bare_frequency": 4.5e9,
                    "drive_frequency": 4.5e9,
                    "readout_frequency": 7.0e9,
                    "t1": 30000.0,
                    "t2": 40000.0,
                    "pi_pulse": {"amplitude": 0.4, "duration": 40, "shape": "gaussian(5)"},
                    "readout_pulse": {"amplitude": 0.1, "duration": 2000},
                    "classification": {
                        "rotation": math.pi,
                        "threshold": 0.0,
                        "mean_iq0": [1.0, 0.0],
                        "mean_iq1": [-1.0, 0.0],
                    },
                }
            },
            "pairs": {},
        },
    }


class TestBuild:
    def test_one_qubit(self):
        platform = build_platform(one_qubit_config())
        assert len(platform.qubits) == 1
        assert len(platform.pairs) == 0
        assert platform.topology.edges == frozenset()

    def test_star_topology(self, platform):
        assert platform.topology.edges == frozenset({(0, 1), (0, 2), (0, 3), (0, 4)})
        assert platform.topology.n_qubits == 5

    def test_nonexistent_port_names_channel(self):
        config = one_qubit_config()
        config["channels"][2] = {"name": "dr", "port": ["emu", 99]}
        with pytest.raises(PlatformError, match="dr"):
            build_platform(config)

    def test_unknown_instrument_in_channel(self):
        config = one_qubit_config()
        config["channels"].append({"name": "fl", "port": ["nope", 0]})
        with pytest.raises(PlatformError, match="nope"):
            build_platform(config)

    def test_qubit_without_readout(self):
        config = one_qubit_config()
        config["qubits"][0]["channels"] = {"drive": "dr"}
        with pytest.raises(PlatformError, match="readout"):
            build_platform(config)

    def test_pair_with_unknown_qubit(self):
        config = one_qubit_config()
        config["pairs"] = [[0, 7]]
        config["parameters"]["pairs"]["0-7"] = {
            "cz": {"flux_amplitude": 0.2, "duration": 80, "phase_corrections": {}}
        }
        with pytest.raises(PlatformError, match="unknown qubit"):
            build_platform(config)

    def test_t2_bound_validated(self):
        config = one_qubit_config()
        config["parameters"]["qubits"]["0"]["t2"] = 100000.0
        with pytest.raises(PlatformError, match="T2"):
            build_platform(config)

    def test_local_oscillator_settings_stored(self, platform):
        lo = platform.instruments["twpa_pump"]
        assert lo.settings["frequency"] == pytest.approx(6.2e9)

    def test_exactly_one_controller(self):
        config = one_qubit_config()
        config["instruments"].append(dict(config["instruments"][0], id="emu2"))
        with pytest.raises(PlatformError, match="controller"):
            build_platform(config)


class TestParameters:
    def test_dump_load_fixpoint(self, platform):
        first = serialize_parameters(platform)
        config = json.loads(PLATFORM_PATH.read_text())
        config["parameters"] = json.loads(first)
        rebuilt = build_platform(config, base_dir=PLATFORM_PATH.parent)
        assert serialize_parameters(rebuilt) == first

    def test_dump_matches_shipped_file(self, platform):
        # golden-file comparison modulo key order
        shipped = json.loads(PLATFORM_PATH.read_text())["parameters"]
        assert dump_parameters(platform) == shipped

    def test_update_reflected_in_dump(self, platform):
        update_parameter(platform, 0, "t1", 31000.0)
        assert platform.qubits[0].t1 == 31000.0
        assert dump_parameters(platform)["qubits"]["0"]["t1"] == 31000.0

    def test_update_nested_leaf(self, platform):
        update_parameter(platform, 0, "pi_pulse.amplitude", 0.37)
        assert platform.qubits[0].pi_pulse.amplitude == 0.37

    def test_unknown_path_rejected(self, platform):
        with pytest.raises(PlatformError, match="t3"):
            update_parameter(platform, 0, "t3", 1.0)
        with pytest.raises(PlatformError):
            update_parameter(platform, 99, "t1", 1.0)

    def test_compiler_uses_updated_amplitude(self, platform):
        from pulsekit.circuits import Circuit, Gate
        from pulsekit.compiler import compile_circuit

        update_parameter(platform, 0, "pi_pulse.amplitude", 0.25)
        seq, _ = compile_circuit(Circuit(1, [Gate("x", (0,))]), platform)
        assert seq[0].amplitude == 0.25


class TestExecutionSurface:
    def test_empty_sequence_empty_results(self, platform):
        result = platform.execute_sequence(PulseSequence(), ExecutionOptions(nshots=100))
        assert len(result) == 0

    def test_unknown_channel_rejected(self, platform):
        pulse = Pulse(PulseKind.READOUT, 0, 100, 0.1, 7e9, 0.0, Rectangular(), "ghost", 0,
                      acquisition_id=0)
        with pytest.raises(PlatformError, match="ghost"):
            platform.execute_sequence(PulseSequence((pulse,)), ExecutionOptions())

    def test_batch_of_empty_sequences(self, platform):
        results = platform.execute_batch([PulseSequence()] * 3, ExecutionOptions(nshots=10))
        assert len(results) == 3
        assert all(len(r) == 0 for r in results)

    def test_too_many_sweepers(self, platform):
        from pulsekit.sweeper import Parameter, Sweeper

        q = platform.qubits[0]
        ro = Pulse(PulseKind.READOUT, 0, 2000, 0.1, q.readout_frequency, 0.0, Rectangular(),
                   q.channels["readout"], 0, acquisition_id=0)
        seq = PulseSequence((ro,))
        sweepers = [Sweeper(Parameter.FREQUENCY, (7e9,), (ro,))] * 3
        with pytest.raises(ValueError, match="at most 2"):
            platform.sweep(seq, sweepers, ExecutionOptions())

    def test_sweeper_pulse_membership(self, platform):
        from pulsekit.sweeper import Parameter, Sweeper

        q = platform.qubits[0]
        ro = Pulse(PulseKind.READOUT, 0, 2000, 0.1, q.readout_frequency, 0.0, Rectangular(),
                   q.channels["readout"], 0, acquisition_id=0)
        other = Pulse(PulseKind.READOUT, 0, 2000, 0.1, q.readout_frequency, 0.0, Rectangular(),
                      q.channels["readout"], 0, acquisition_id=0)
        with pytest.raises(ValueError, match="not in the sequence"):
            platform.sweep(PulseSequence((ro,)),
                           [Sweeper(Parameter.FREQUENCY, (7e9,), (other,))],
                           ExecutionOptions())
