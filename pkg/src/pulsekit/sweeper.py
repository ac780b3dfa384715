"""Declarative real-time parameter scans over pulses in a sequence."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .pulses import Pulse, PulseSequence

__all__ = ["Parameter", "Sweeper", "substitute_point", "sweep_shape"]


class Parameter(Enum):
    FREQUENCY = "frequency"
    AMPLITUDE = "amplitude"
    DURATION = "duration"
    START = "start"
    RELATIVE_PHASE = "relative_phase"


@dataclass(frozen=True)
class Sweeper:
    """One swept pulse parameter, applied to pulses by identity."""

    parameter: Parameter
    values: tuple[float, ...]
    pulses: tuple[Pulse, ...]

    def __post_init__(self):
        if not isinstance(self.parameter, Parameter):
            raise ValueError(f"unsupported sweep parameter {self.parameter!r}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "pulses", tuple(self.pulses))
        if not self.values:
            raise ValueError("sweeper needs at least one value")
        if not self.pulses:
            raise ValueError("sweeper needs at least one target pulse")

    def __len__(self) -> int:
        return len(self.values)


def _with_value(pulse: Pulse, parameter: Parameter, value: float) -> Pulse:
    if parameter in (Parameter.DURATION, Parameter.START):
        return replace(pulse, **{parameter.value: int(round(value))})
    return replace(pulse, **{parameter.value: value})


def sweep_shape(sweepers: Sequence[Sweeper]) -> tuple[int, ...]:
    return tuple(len(s) for s in sweepers)


def validate_sweepers(seq: PulseSequence, sweepers: Sequence[Sweeper]):
    if len(sweepers) > 2:
        raise ValueError(f"at most 2 nested sweepers are supported, got {len(sweepers)}")
    members = {id(p) for p in seq}
    for sweeper in sweepers:
        for pulse in sweeper.pulses:
            if id(pulse) not in members:
                raise ValueError("sweeper references a pulse not in the sequence")


def substitute_point(
    seq: PulseSequence, sweepers: Sequence[Sweeper], indices: Sequence[int]
) -> PulseSequence:
    """Sequence with each sweeper's value at the given grid point applied.

    Sweepers are ordered outermost first; a pulse targeted by several
    sweepers receives all substitutions.
    """
    updates: dict[int, Pulse] = {id(p): p for p in seq}
    for sweeper, index in zip(sweepers, indices):
        value = sweeper.values[index]
        for pulse in sweeper.pulses:
            key = id(pulse)
            updates[key] = _with_value(updates[key], sweeper.parameter, value)
    return PulseSequence(tuple(updates.get(id(p), p) for p in seq))
