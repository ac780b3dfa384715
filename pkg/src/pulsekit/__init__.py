"""Pulse-level quantum control toolkit with a virtual-transmon backend."""

from .acquisition import (
    AcquisitionType,
    AveragingMode,
    Discriminator,
    ExecutionOptions,
    ResultSet,
    average,
    classify,
    demodulate_integrate,
)
from .circuits import Circuit, Gate, qft_circuit, random_cnot_circuit, unitary_of
from .compiler import compile_circuit
from .connectivity import Connectivity, line_connectivity, star_connectivity
from .emulator import EmulatorController, VirtualQPU, VirtualQubit, timing_model
from .platform import (
    Platform,
    Qubit,
    QubitPair,
    build_platform,
    dump_parameters,
    load_platform,
    update_parameter,
)
from .pulses import (
    Drag,
    Gaussian,
    Pulse,
    PulseKind,
    PulseSequence,
    Rectangular,
    Waveform,
    render_envelope,
)
from .sweeper import Parameter, Sweeper

__version__ = "0.1.0"
