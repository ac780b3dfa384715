"""Pulses, envelope shapes and scheduled pulse sequences.

Time is integer nanoseconds, amplitudes are normalized to full scale
[-1, 1] and sampling rates are in gigasamples per second (samples per
nanosecond).  All objects are immutable values.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Iterator, Optional, Union

import numpy as np

__all__ = [
    "PulseKind",
    "Waveform",
    "Rectangular",
    "Gaussian",
    "Drag",
    "EnvelopeShape",
    "Pulse",
    "PulseSequence",
    "render_envelope",
    "envelope_area_factor",
    "pulse_area",
    "shape_to_string",
    "shape_from_string",
]


class PulseKind(Enum):
    """Operation mode of a pulse: qubit readout, drive or flux bias."""

    DRIVE = "drive"
    READOUT = "readout"
    FLUX = "flux"


@dataclass(frozen=True)
class Waveform:
    """Discretized envelope samples; i is the real part, q the imaginary."""

    samples: np.ndarray
    sampling_rate: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def i(self) -> np.ndarray:
        return self.samples.real

    @property
    def q(self) -> np.ndarray:
        return self.samples.imag

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class Rectangular:
    """Constant envelope."""

    def render(self, amplitude: float, duration: float, sampling_rate: float) -> np.ndarray:
        n = int(round(duration * sampling_rate))
        return np.full(n, amplitude, dtype=np.complex128)

    def area_factor(self) -> float:
        return 1.0


@dataclass(frozen=True)
class Gaussian:
    """Gaussian envelope with sigma = duration / rel_sigma."""

    rel_sigma: float = 5.0

    def __post_init__(self):
        if self.rel_sigma <= 0:
            raise ValueError(f"rel_sigma must be positive, got {self.rel_sigma}")

    def _profile(self, duration: float, sampling_rate: float) -> np.ndarray:
        n = int(round(duration * sampling_rate))
        t = np.arange(n) / sampling_rate
        sigma = duration / self.rel_sigma
        raw = np.exp(-((t - duration / 2) ** 2) / (2 * sigma**2))
        return raw / raw.max()

    def render(self, amplitude: float, duration: float, sampling_rate: float) -> np.ndarray:
        return (amplitude * self._profile(duration, sampling_rate)).astype(np.complex128)

    def area_factor(self) -> float:
        # closed form of (1/d) * integral of exp(-(t-d/2)^2 / (2 sigma^2))
        r = self.rel_sigma
        return math.sqrt(2 * math.pi) / r * math.erf(r / (2 * math.sqrt(2)))


@dataclass(frozen=True)
class Drag:
    """Gaussian i component plus derivative q component scaled by beta."""

    rel_sigma: float = 5.0
    beta: float = 0.0

    def __post_init__(self):
        if self.rel_sigma <= 0:
            raise ValueError(f"rel_sigma must be positive, got {self.rel_sigma}")

    def render(self, amplitude: float, duration: float, sampling_rate: float) -> np.ndarray:
        gaussian = Gaussian(self.rel_sigma)
        i = amplitude * gaussian._profile(duration, sampling_rate)
        n = len(i)
        t = np.arange(n) / sampling_rate
        sigma = duration / self.rel_sigma
        # analytic d/dt of the gaussian profile, in 1/ns
        q = self.beta * (-(t - duration / 2) / sigma**2) * i
        return i + 1j * q

    def area_factor(self) -> float:
        return Gaussian(self.rel_sigma).area_factor()


EnvelopeShape = Union[Rectangular, Gaussian, Drag]

_SHAPE_RE = re.compile(r"^\s*(\w+)\s*(?:\(([^)]*)\))?\s*$")


def shape_to_string(shape: EnvelopeShape) -> str:
    if isinstance(shape, Rectangular):
        return "rectangular"
    if isinstance(shape, Gaussian):
        return f"gaussian({shape.rel_sigma:g})"
    if isinstance(shape, Drag):
        return f"drag({shape.rel_sigma:g}, {shape.beta:g})"
    raise TypeError(f"unknown envelope shape {shape!r}")


def shape_from_string(text: str) -> EnvelopeShape:
    match = _SHAPE_RE.match(text)
    if match is None:
        raise ValueError(f"cannot parse envelope shape {text!r}")
    name = match.group(1).lower()
    args = [float(x) for x in match.group(2).split(",")] if match.group(2) else []
    if name == "rectangular":
        if args:
            raise ValueError("rectangular takes no parameters")
        return Rectangular()
    if name == "gaussian":
        return Gaussian(*args)
    if name == "drag":
        return Drag(*args)
    raise ValueError(f"unknown envelope shape {text!r}")


def render_envelope(
    shape: EnvelopeShape, amplitude: float, duration: float, sampling_rate: float
) -> Waveform:
    """Discretize an envelope at the given rate.

    Samples are taken at t = k / sampling_rate and the peak of the i
    component is normalized to |amplitude|.
    """
    if duration <= 0:
        raise ValueError(f"duration must be positive, got {duration}")
    if sampling_rate <= 0:
        raise ValueError(f"sampling_rate must be positive, got {sampling_rate}")
    return Waveform(shape.render(amplitude, duration, sampling_rate), sampling_rate)


def envelope_area_factor(shape: EnvelopeShape) -> float:
    """Mean of the normalized envelope over its duration (1 for rectangular)."""
    return shape.area_factor()


@dataclass(frozen=True)
class Pulse:
    """A timed waveform event on a named channel.

    Readout pulses must carry an acquisition id; drive and flux pulses
    must not.
    """

    kind: PulseKind
    start: int
    duration: int
    amplitude: float
    frequency: float
    relative_phase: float
    shape: EnvelopeShape
    channel: str
    qubit: int
    acquisition_id: Optional[int] = None

    def __post_init__(self):
        if self.start < 0:
            raise ValueError(f"start must be >= 0, got {self.start}")
        if self.duration <= 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")
        if abs(self.amplitude) > 1:
            raise ValueError(f"|amplitude| must be <= 1, got {self.amplitude}")
        if self.kind is PulseKind.READOUT and self.acquisition_id is None:
            raise ValueError("readout pulses require an acquisition_id")
        if self.kind is not PulseKind.READOUT and self.acquisition_id is not None:
            raise ValueError(f"{self.kind.value} pulses cannot carry an acquisition_id")

    @property
    def finish(self) -> int:
        return self.start + self.duration

    def envelope(self, sampling_rate: float = 1.0) -> Waveform:
        return render_envelope(self.shape, self.amplitude, self.duration, sampling_rate)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "start": self.start,
            "duration": self.duration,
            "amplitude": self.amplitude,
            "frequency": self.frequency,
            "relative_phase": self.relative_phase,
            "shape": shape_to_string(self.shape),
            "channel": self.channel,
            "qubit": self.qubit,
            "acquisition_id": self.acquisition_id,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Pulse":
        return cls(
            kind=PulseKind(data["kind"]),
            start=int(data["start"]),
            duration=int(data["duration"]),
            amplitude=float(data["amplitude"]),
            frequency=float(data["frequency"]),
            relative_phase=float(data["relative_phase"]),
            shape=shape_from_string(data["shape"]),
            channel=str(data["channel"]),
            qubit=int(data["qubit"]),
            acquisition_id=None if data.get("acquisition_id") is None else int(data["acquisition_id"]),
        )


def pulse_area(pulse: Pulse) -> float:
    """Integrated drive area: amplitude x duration x envelope area factor."""
    return pulse.amplitude * pulse.duration * envelope_area_factor(pulse.shape)


def _sort_key(pulse: Pulse):
    return (pulse.start, pulse.channel)


@dataclass(frozen=True)
class PulseSequence:
    """Pulses sorted by (start, channel); overlap is permitted.

    Two readout pulses may overlap on the same channel only if their
    frequencies differ (multiplexed readout), and acquisition ids must
    be unique within the sequence.
    """

    pulses: tuple[Pulse, ...] = ()

    def __post_init__(self):
        ordered = tuple(sorted(self.pulses, key=_sort_key))
        object.__setattr__(self, "pulses", ordered)
        self._validate()

    def _validate(self):
        seen_acq: set[int] = set()
        readouts = []
        for p in self.pulses:
            if p.kind is PulseKind.READOUT:
                if p.acquisition_id in seen_acq:
                    raise ValueError(f"duplicate acquisition id {p.acquisition_id}")
                seen_acq.add(p.acquisition_id)
                readouts.append(p)
        for i, a in enumerate(readouts):
            for b in readouts[i + 1 :]:
                if (
                    a.channel == b.channel
                    and a.frequency == b.frequency
                    and a.start < b.finish
                    and b.start < a.finish
                ):
                    raise ValueError(
                        f"overlapping readout pulses on channel {a.channel!r} "
                        f"at the same frequency {a.frequency}"
                    )

    def add(self, *pulses: Pulse) -> "PulseSequence":
        """Return a new sequence with the pulses inserted in sort order."""
        return PulseSequence(self.pulses + tuple(pulses))

    def __iter__(self) -> Iterator[Pulse]:
        return iter(self.pulses)

    def __len__(self) -> int:
        return len(self.pulses)

    def __getitem__(self, item):
        return self.pulses[item]

    @property
    def duration(self) -> int:
        """Maximum finish time over all pulses, 0 for an empty sequence."""
        return max((p.finish for p in self.pulses), default=0)

    @property
    def channels(self) -> list[str]:
        return sorted({p.channel for p in self.pulses})

    @property
    def qubits(self) -> list[int]:
        return sorted({p.qubit for p in self.pulses})

    @property
    def readout_pulses(self) -> tuple[Pulse, ...]:
        return tuple(p for p in self.pulses if p.kind is PulseKind.READOUT)

    def replace_pulse(self, old: Pulse, new: Pulse) -> "PulseSequence":
        """Substitute a pulse by identity, keeping everything else."""
        out = []
        found = False
        for p in self.pulses:
            if p is old and not found:
                out.append(new)
                found = True
            else:
                out.append(p)
        if not found:
            raise ValueError("pulse is not part of this sequence")
        return PulseSequence(tuple(out))

    def to_jsonl(self) -> str:
        """One JSON object per pulse, one pulse per line."""
        return "\n".join(json.dumps(p.to_dict(), sort_keys=True) for p in self.pulses)

    @classmethod
    def from_jsonl(cls, text: str) -> "PulseSequence":
        pulses = tuple(
            Pulse.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()
        )
        return cls(pulses)


def sequence_add(seq: PulseSequence, pulse: Pulse) -> PulseSequence:
    """Functional form of :meth:`PulseSequence.add`."""
    return seq.add(pulse)


def sequence_duration(seq: PulseSequence) -> int:
    """Functional form of :attr:`PulseSequence.duration`."""
    return seq.duration
