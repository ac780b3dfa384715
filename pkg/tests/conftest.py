import copy
import json
from pathlib import Path

import pytest

from pulsekit.platform import build_platform, load_platform

ROOT = Path(__file__).resolve().parent.parent
PLATFORM_PATH = ROOT / "platforms" / "star5.json"
QPU_PATH = ROOT / "platforms" / "star5_qpu.json"


@pytest.fixture
def platform():
    """Fresh shipped 5-qubit star platform (routines mutate it)."""
    return load_platform(PLATFORM_PATH)


@pytest.fixture
def platform_factory():
    """Builder accepting per-qubit QPU overrides, e.g. {'0': {'t1': None}}."""

    def build(qpu_overrides=None, seed=None):
        with open(PLATFORM_PATH) as handle:
            config = json.load(handle)
        with open(QPU_PATH) as handle:
            qpu = json.load(handle)
        for qubit, overrides in (qpu_overrides or {}).items():
            qpu["qubits"][str(qubit)].update(overrides)
        if seed is not None:
            qpu["seed"] = seed
        config["instruments"][0]["qpu"] = qpu
        return build_platform(config, base_dir=PLATFORM_PATH.parent)

    return build
