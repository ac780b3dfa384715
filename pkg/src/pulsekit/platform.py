"""The platform object graph: qubits, pairs, channels, instruments.

A platform is built from a JSON-compatible config with top-level keys
``name, instruments, channels, qubits, pairs, parameters``.  The first
four describe static wiring; ``parameters`` holds the dynamic
calibration data that experiments update and that round-trips through
:func:`dump_parameters`.
"""

from __future__ import annotations

import json
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .acquisition import Discriminator, ExecutionOptions, ResultSet
from .connectivity import Connectivity
from .pulses import EnvelopeShape, PulseSequence, shape_from_string, shape_to_string
from .sweeper import Sweeper, validate_sweepers

log = logging.getLogger(__name__)

__all__ = [
    "ChannelRole",
    "Port",
    "Channel",
    "Instrument",
    "Controller",
    "LocalOscillator",
    "PiPulseConfig",
    "ReadoutPulseConfig",
    "CzConfig",
    "Qubit",
    "QubitPair",
    "Platform",
    "PlatformError",
    "ExecutionError",
    "build_platform",
    "load_platform",
    "dump_parameters",
    "update_parameter",
]

CHANNEL_ROLES = ("readout", "feedback", "drive", "flux", "twpa")

# feature flags a controller may advertise
CAPABILITIES = frozenset(
    {
        "arbitrary_pulse_sequences",
        "multiplexed_readout",
        "hardware_classification",
        "fast_reset",
        "device_simulation",
        "rts_frequency",
        "rts_amplitude",
        "rts_duration",
        "rts_start",
        "rts_relative_phase",
        "rts_2d",
        "sequence_unrolling",
        "hardware_averaging",
        "singleshot",
        "integrated_acquisition",
        "classified_acquisition",
        "raw_waveform_acquisition",
    }
)


class PlatformError(ValueError):
    """Invalid platform configuration or request."""


class ExecutionError(RuntimeError):
    """Controller failure, annotated with the instrument id."""


@dataclass(frozen=True)
class Port:
    instrument: str
    index: int


@dataclass(frozen=True)
class Channel:
    name: str
    port: Port


class Instrument(ABC):
    """Connected lab equipment; non-controllers only expose settings."""

    def __init__(self, instrument_id: str, address: str, n_ports: int = 1):
        self.id = instrument_id
        self.address = address
        self.n_ports = n_ports

    capabilities: frozenset[str] = frozenset()


class Controller(Instrument):
    """Instrument with waveform generators: can play, sweep and acquire."""

    @abstractmethod
    def play(
        self,
        seq: PulseSequence,
        options: ExecutionOptions,
        sweepers: Sequence[Sweeper],
        qubits: dict[int, "Qubit"],
    ) -> ResultSet:
        ...

    @abstractmethod
    def play_batch(
        self,
        seqs: Sequence[PulseSequence],
        options: ExecutionOptions,
        qubits: dict[int, "Qubit"],
    ) -> list[ResultSet]:
        ...

    @abstractmethod
    def timing(
        self,
        seq: PulseSequence,
        options: ExecutionOptions,
        sweepers: Sequence[Sweeper],
    ) -> dict:
        ...


class LocalOscillator(Instrument):
    """Settings-only instrument (e.g. a TWPA pump)."""

    def __init__(self, instrument_id: str, address: str, settings: Optional[dict] = None):
        super().__init__(instrument_id, address, n_ports=1)
        self.settings = dict(settings or {})


@dataclass
class PiPulseConfig:
    amplitude: float
    duration: int
    shape: EnvelopeShape


@dataclass
class ReadoutPulseConfig:
    amplitude: float
    duration: int


@dataclass
class CzConfig:
    flux_amplitude: float
    duration: int
    phase_corrections: dict[int, float] = field(default_factory=dict)


@dataclass
class Qubit:
    """Calibrated parameters and channel wiring of one physical qubit."""

    id: int
    bare_frequency: float
    drive_frequency: float
    readout_frequency: float
    t1: float
    t2: float
    pi_pulse: PiPulseConfig
    readout_pulse: ReadoutPulseConfig
    classification: Optional[Discriminator] = None
    channels: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.t1 <= 0 or self.t2 <= 0:
            raise PlatformError(f"qubit {self.id}: T1 and T2 must be positive")
        if self.t2 > 2 * self.t1:
            raise PlatformError(f"qubit {self.id}: T2 must not exceed 2 T1")
        for role in self.channels:
            if role not in CHANNEL_ROLES:
                raise PlatformError(f"qubit {self.id}: unknown channel role {role!r}")


@dataclass
class QubitPair:
    """Unordered neighbouring qubit pair with its two-qubit calibration."""

    qubits: tuple[int, int]
    cz: Optional[CzConfig] = None

    def __post_init__(self):
        a, b = self.qubits
        if a == b:
            raise PlatformError(f"pair qubits must differ, got ({a}, {b})")
        self.qubits = (min(a, b), max(a, b))


@dataclass
class Platform:
    """Orchestration root tying qubits, channels and instruments together."""

    name: str
    qubits: dict[int, Qubit]
    pairs: dict[tuple[int, int], QubitPair]
    channels: dict[str, Channel]
    instruments: dict[str, Instrument]
    sampling_rate: float = 1.0
    granularity_ns: int = 4

    def __post_init__(self):
        controllers = [i for i in self.instruments.values() if isinstance(i, Controller)]
        if len(controllers) != 1:
            raise PlatformError(
                f"platform needs exactly one controller, found {len(controllers)}"
            )
        self._controller = controllers[0]
        for channel in self.channels.values():
            instrument = self.instruments.get(channel.port.instrument)
            if instrument is None:
                raise PlatformError(
                    f"channel {channel.name!r} references unknown instrument "
                    f"{channel.port.instrument!r}"
                )
            if not 0 <= channel.port.index < instrument.n_ports:
                raise PlatformError(
                    f"channel {channel.name!r} references nonexistent port "
                    f"{channel.port.index} of {instrument.id!r}"
                )
        for qubit in self.qubits.values():
            if "readout" not in qubit.channels:
                raise PlatformError(f"qubit {qubit.id} has no readout channel")
            for role, channel_name in qubit.channels.items():
                if channel_name not in self.channels:
                    raise PlatformError(
                        f"qubit {qubit.id} role {role!r} references unknown channel "
                        f"{channel_name!r}"
                    )
        for pair in self.pairs.values():
            for q in pair.qubits:
                if q not in self.qubits:
                    raise PlatformError(f"pair {pair.qubits} references unknown qubit {q}")

    @property
    def controller(self) -> Controller:
        return self._controller

    @property
    def topology(self) -> Connectivity:
        """Device graph; the edge set is exactly the pair set."""
        n = max(self.qubits) + 1 if self.qubits else 0
        return Connectivity.from_edges(self.pairs.keys(), n_qubits=n)

    def pair(self, a: int, b: int) -> QubitPair:
        key = (min(a, b), max(a, b))
        if key not in self.pairs:
            raise PlatformError(f"no pair calibration for qubits {key}")
        return self.pairs[key]

    def _validate_sequence(self, seq: PulseSequence):
        for pulse in seq:
            if pulse.channel not in self.channels:
                raise PlatformError(f"pulse channel {pulse.channel!r} does not exist")
            if pulse.qubit not in self.qubits:
                raise PlatformError(f"pulse qubit {pulse.qubit} does not exist")

    def execute_sequence(self, seq: PulseSequence, options: ExecutionOptions) -> ResultSet:
        """Run one sequence on the designated controller."""
        self._validate_sequence(seq)
        try:
            return self._controller.play(seq, options, (), self.qubits)
        except (ValueError, RuntimeError) as exc:
            raise ExecutionError(f"instrument {self._controller.id!r}: {exc}") from exc

    def execute_batch(
        self, seqs: Sequence[PulseSequence], options: ExecutionOptions
    ) -> list[ResultSet]:
        """Run several sequences in one controller round trip."""
        for seq in seqs:
            self._validate_sequence(seq)
        try:
            return self._controller.play_batch(list(seqs), options, self.qubits)
        except (ValueError, RuntimeError) as exc:
            raise ExecutionError(f"instrument {self._controller.id!r}: {exc}") from exc

    def sweep(
        self,
        seq: PulseSequence,
        sweepers: Sequence[Sweeper],
        options: ExecutionOptions,
    ) -> ResultSet:
        """Run with up to two nested real-time parameter scans."""
        self._validate_sequence(seq)
        validate_sweepers(seq, sweepers)
        for sweeper in sweepers:
            flag = f"rts_{sweeper.parameter.value}"
            if flag not in self._controller.capabilities:
                raise PlatformError(
                    f"controller {self._controller.id!r} does not support {flag}"
                )
        try:
            return self._controller.play(seq, options, tuple(sweepers), self.qubits)
        except (ValueError, RuntimeError) as exc:
            raise ExecutionError(f"instrument {self._controller.id!r}: {exc}") from exc


def _parse_qubit(qubit_id: int, wiring: dict, params: dict) -> Qubit:
    classification = params.get("classification")
    return Qubit(
        id=qubit_id,
        bare_frequency=float(params["bare_frequency"]),
        drive_frequency=float(params["drive_frequency"]),
        readout_frequency=float(params["readout_frequency"]),
        t1=float(params["t1"]),
        t2=float(params["t2"]),
        pi_pulse=PiPulseConfig(
            amplitude=float(params["pi_pulse"]["amplitude"]),
            duration=int(params["pi_pulse"]["duration"]),
            shape=shape_from_string(params["pi_pulse"]["shape"]),
        ),
        readout_pulse=ReadoutPulseConfig(
            amplitude=float(params["readout_pulse"]["amplitude"]),
            duration=int(params["readout_pulse"]["duration"]),
        ),
        classification=None if classification is None else Discriminator.from_dict(classification),
        channels=dict(wiring.get("channels", {})),
    )


def build_platform(config: dict, base_dir: Optional[Path] = None) -> Platform:
    """Create a platform from config: instruments, channels, qubits, pairs."""
    from .emulator import EmulatorController, VirtualQPU  # avoid import cycle

    base_dir = Path(base_dir) if base_dir is not None else Path.cwd()

    instruments: dict[str, Instrument] = {}
    for entry in config.get("instruments", []):
        kind = entry.get("kind")
        if kind == "emulator":
            qpu_ref = entry["qpu"]
            if isinstance(qpu_ref, dict):
                qpu = VirtualQPU.from_dict(qpu_ref)
            else:
                qpu = VirtualQPU.load(base_dir / qpu_ref)
            instruments[entry["id"]] = EmulatorController(
                entry["id"], entry.get("address", "emulator://0"), qpu,
                n_ports=int(entry.get("ports", 32)),
            )
        elif kind == "local_oscillator":
            instruments[entry["id"]] = LocalOscillator(
                entry["id"], entry.get("address", ""), entry.get("settings")
            )
        else:
            raise PlatformError(f"unknown instrument kind {kind!r}")

    channels = {
        entry["name"]: Channel(entry["name"], Port(entry["port"][0], int(entry["port"][1])))
        for entry in config.get("channels", [])
    }

    parameters = config.get("parameters", {})
    qubit_params = parameters.get("qubits", {})
    qubits: dict[int, Qubit] = {}
    for wiring in config.get("qubits", []):
        qubit_id = int(wiring["id"])
        params = qubit_params.get(str(qubit_id))
        if params is None:
            raise PlatformError(f"no parameters for qubit {qubit_id}")
        qubits[qubit_id] = _parse_qubit(qubit_id, wiring, params)

    pair_params = parameters.get("pairs", {})
    pairs: dict[tuple[int, int], QubitPair] = {}
    for raw in config.get("pairs", []):
        a, b = sorted(int(q) for q in raw)
        key = f"{a}-{b}"
        cz = None
        if key in pair_params and "cz" in pair_params[key]:
            cz_raw = pair_params[key]["cz"]
            cz = CzConfig(
                flux_amplitude=float(cz_raw["flux_amplitude"]),
                duration=int(cz_raw["duration"]),
                phase_corrections={
                    int(q): float(v) for q, v in cz_raw.get("phase_corrections", {}).items()
                },
            )
        pairs[(a, b)] = QubitPair((a, b), cz=cz)

    platform = Platform(
        name=config.get("name", "platform"),
        qubits=qubits,
        pairs=pairs,
        channels=channels,
        instruments=instruments,
        sampling_rate=float(config.get("sampling_rate", 1.0)),
        granularity_ns=int(config.get("granularity", 4)),
    )
    for instrument in instruments.values():
        if hasattr(instrument, "sampling_rate"):
            instrument.sampling_rate = platform.sampling_rate
    return platform


def load_platform(path) -> Platform:
    """Build a platform from a config file path."""
    path = Path(path)
    with open(path) as handle:
        config = json.load(handle)
    return build_platform(config, base_dir=path.parent)


def dump_parameters(platform: Platform) -> dict:
    """Dynamic calibration as a JSON-compatible dict with stable ordering."""
    qubits = {}
    for qubit_id in sorted(platform.qubits):
        qubit = platform.qubits[qubit_id]
        entry = {
            "bare_frequency": qubit.bare_frequency,
            "drive_frequency": qubit.drive_frequency,
            "readout_frequency": qubit.readout_frequency,
            "t1": qubit.t1,
            "t2": qubit.t2,
            "pi_pulse": {
                "amplitude": qubit.pi_pulse.amplitude,
                "duration": qubit.pi_pulse.duration,
                "shape": shape_to_string(qubit.pi_pulse.shape),
            },
            "readout_pulse": {
                "amplitude": qubit.readout_pulse.amplitude,
                "duration": qubit.readout_pulse.duration,
            },
            "classification": None
            if qubit.classification is None
            else qubit.classification.to_dict(),
        }
        qubits[str(qubit_id)] = entry
    pairs = {}
    for key in sorted(platform.pairs):
        pair = platform.pairs[key]
        if pair.cz is not None:
            pairs[f"{key[0]}-{key[1]}"] = {
                "cz": {
                    "flux_amplitude": pair.cz.flux_amplitude,
                    "duration": pair.cz.duration,
                    "phase_corrections": {
                        str(q): v for q, v in sorted(pair.cz.phase_corrections.items())
                    },
                }
            }
        else:
            pairs[f"{key[0]}-{key[1]}"] = {}
    return {"qubits": qubits, "pairs": pairs}


def serialize_parameters(platform: Platform) -> str:
    return json.dumps(dump_parameters(platform), sort_keys=True, indent=2) + "\n"


def update_parameter(platform: Platform, qubit_id: int, path: str, value) -> Platform:
    """Set one calibration leaf addressed by a dotted path, e.g.
    ``pi_pulse.amplitude``; returns the platform for chaining."""
    if qubit_id not in platform.qubits:
        raise PlatformError(f"unknown qubit {qubit_id}")
    target = platform.qubits[qubit_id]
    parts = path.split(".")
    for part in parts[:-1]:
        if not hasattr(target, part):
            raise PlatformError(f"unknown parameter path {path!r}")
        target = getattr(target, part)
    leaf = parts[-1]
    if not hasattr(target, leaf):
        raise PlatformError(f"unknown parameter path {path!r}")
    if leaf == "shape" and isinstance(value, str):
        value = shape_from_string(value)
    try:
        setattr(target, leaf, value)
    except AttributeError as exc:
        raise PlatformError(f"parameter {path!r} is not writable: {exc}") from exc
    return platform
