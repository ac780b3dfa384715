"""Execution options, acquisition results and format transforms.

Results come in three formats (raw waveform, integrated IQ, classified
bits), each either single shot or averaged over the shot axis.  Arrays
are laid out as ``sweep axes x [shots] x [samples]``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping, Optional, Union

import numpy as np

from .pulses import Waveform

__all__ = [
    "AcquisitionType",
    "AveragingMode",
    "ExecutionOptions",
    "Discriminator",
    "AcquisitionData",
    "ResultSet",
    "demodulate_integrate",
    "classify",
    "average",
]


class AcquisitionType(Enum):
    RAW = "raw"
    INTEGRATED = "integrated"
    CLASSIFIED = "classified"


class AveragingMode(Enum):
    SINGLESHOT = "singleshot"
    CYCLIC = "cyclic"


@dataclass(frozen=True)
class ExecutionOptions:
    """Shot count, relaxation wait and result format for one execution."""

    nshots: int = 1024
    relaxation_time: int = 0
    acquisition: AcquisitionType = AcquisitionType.INTEGRATED
    averaging: AveragingMode = AveragingMode.CYCLIC
    fast_reset: bool = False

    def __post_init__(self):
        if self.nshots < 1:
            raise ValueError(f"nshots must be >= 1, got {self.nshots}")
        if self.relaxation_time < 0:
            raise ValueError(f"relaxation_time must be >= 0, got {self.relaxation_time}")


@dataclass(frozen=True)
class Discriminator:
    """Rotation plus threshold linear discriminant in the IQ plane.

    ``rotation`` aligns the 0 -> 1 blob axis with +I; points whose
    rotated I component exceeds ``threshold`` classify as 1, ties as 0.
    """

    rotation: float
    threshold: float
    mean0: complex = 0j
    mean1: complex = 0j

    def to_dict(self) -> dict:
        return {
            "rotation": self.rotation,
            "threshold": self.threshold,
            "mean_iq0": [self.mean0.real, self.mean0.imag],
            "mean_iq1": [self.mean1.real, self.mean1.imag],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Discriminator":
        return cls(
            rotation=float(data["rotation"]),
            threshold=float(data["threshold"]),
            mean0=complex(data["mean_iq0"][0], data["mean_iq0"][1]),
            mean1=complex(data["mean_iq1"][0], data["mean_iq1"][1]),
        )


@dataclass(frozen=True)
class AcquisitionData:
    """Result array for one acquisition id plus its axis metadata."""

    values: np.ndarray
    acquisition: AcquisitionType
    averaging: AveragingMode
    sweep_shape: tuple[int, ...] = ()

    def __post_init__(self):
        values = np.asarray(self.values)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "sweep_shape", tuple(self.sweep_shape))

    @property
    def is_averaged(self) -> bool:
        return self.averaging is AveragingMode.CYCLIC


class ResultSet(Mapping[int, AcquisitionData]):
    """Acquisition results keyed by acquisition id."""

    def __init__(self, data: Optional[Mapping[int, AcquisitionData]] = None):
        self._data: dict[int, AcquisitionData] = dict(data or {})

    def __getitem__(self, key: int) -> AcquisitionData:
        return self._data[key]

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self._data))

    def __len__(self) -> int:
        return len(self._data)

    def __repr__(self) -> str:
        return f"ResultSet({self._data!r})"

    def to_csv(self) -> str:
        """Columnar dump: acquisition_id, sweep indices, shot, then I/Q or bit.

        Raw results carry an extra ``sample`` column; averaged results
        leave the shot column empty.
        """
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        n_sweep = max((len(d.sweep_shape) for d in self._data.values()), default=0)
        has_raw = any(d.acquisition is AcquisitionType.RAW for d in self._data.values())
        header = ["acquisition_id"] + [f"sweep{k}" for k in range(n_sweep)] + ["shot"]
        if has_raw:
            header.append("sample")
        header += ["i", "q", "bit"]
        writer.writerow(header)
        for acq_id in sorted(self._data):
            data = self._data[acq_id]
            sweep_pad = [""] * (n_sweep - len(data.sweep_shape))
            for index in np.ndindex(data.sweep_shape or ()):
                block = data.values[index]
                for row in _rows_for_point(data, block, has_raw):
                    writer.writerow([acq_id, *index, *sweep_pad, *row])
        return buffer.getvalue()

    def to_json_summary(self) -> dict:
        summary = {}
        for acq_id in sorted(self._data):
            data = self._data[acq_id]
            entry = {
                "acquisition": data.acquisition.value,
                "averaging": data.averaging.value,
                "sweep_shape": list(data.sweep_shape),
                "shape": list(data.values.shape),
            }
            if data.acquisition is AcquisitionType.CLASSIFIED:
                entry["mean"] = float(np.mean(data.values))
            else:
                entry["mean_i"] = float(np.mean(data.values.real))
                entry["mean_q"] = float(np.mean(data.values.imag))
            summary[str(acq_id)] = entry
        return summary


def _rows_for_point(data: AcquisitionData, block: np.ndarray, raw_col: bool):
    """Yield CSV value rows for one sweep point."""
    extra = [""] if raw_col and data.acquisition is not AcquisitionType.RAW else []
    if data.acquisition is AcquisitionType.CLASSIFIED:
        if data.is_averaged:
            yield ["", *extra, "", "", repr(float(block))]
        else:
            for shot, bit in enumerate(np.atleast_1d(block)):
                yield [shot, *extra, "", "", int(bit)]
    elif data.acquisition is AcquisitionType.INTEGRATED:
        if data.is_averaged:
            z = complex(block)
            yield ["", *extra, repr(z.real), repr(z.imag), ""]
        else:
            for shot, z in enumerate(np.atleast_1d(block)):
                yield [shot, *extra, repr(complex(z).real), repr(complex(z).imag), ""]
    else:  # raw
        if data.is_averaged:
            for sample, z in enumerate(np.atleast_1d(block)):
                yield ["", sample, repr(complex(z).real), repr(complex(z).imag), ""]
        else:
            block2d = np.atleast_2d(block)
            for shot in range(block2d.shape[0]):
                for sample, z in enumerate(block2d[shot]):
                    yield [shot, sample, repr(complex(z).real), repr(complex(z).imag), ""]


def demodulate_integrate(raw: Waveform, frequency: float) -> tuple[float, float]:
    """Demodulate at ``frequency`` (Hz) and average over the window.

    The demodulation reference has phase 0 at the window start.
    """
    if len(raw) == 0:
        raise ValueError("cannot demodulate an empty waveform")
    t_seconds = np.arange(len(raw)) / raw.sampling_rate * 1e-9
    z = np.mean(raw.samples * np.exp(-2j * np.pi * frequency * t_seconds))
    return (float(z.real), float(z.imag))


def classify(iq: Union[complex, tuple[float, float]], discriminator: Discriminator) -> int:
    """Rotate the IQ point and threshold its I component; ties give 0."""
    z = complex(iq[0], iq[1]) if isinstance(iq, tuple) else complex(iq)
    rotated = z * np.exp(-1j * discriminator.rotation)
    return int(rotated.real > discriminator.threshold)


def average(results: ResultSet) -> ResultSet:
    """Mean over the shot axis; classified data becomes frequency of 1s."""
    averaged = {}
    for acq_id, data in results.items():
        if data.is_averaged:
            raise ValueError(f"acquisition {acq_id} is already averaged")
        shot_axis = len(data.sweep_shape)
        values = np.mean(data.values, axis=shot_axis)
        averaged[acq_id] = AcquisitionData(
            values=values,
            acquisition=data.acquisition,
            averaging=AveragingMode.CYCLIC,
            sweep_shape=data.sweep_shape,
        )
    return ResultSet(averaged)
