import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pulsekit.pulses import (
    Drag,
    Gaussian,
    Pulse,
    PulseKind,
    PulseSequence,
    Rectangular,
    envelope_area_factor,
    render_envelope,
    sequence_add,
    sequence_duration,
    shape_from_string,
    shape_to_string,
)


def drive(start, duration=40, channel="d0", amplitude=0.3, frequency=5e9, qubit=0):
    return Pulse(PulseKind.DRIVE, start, duration, amplitude, frequency, 0.0,
                 Gaussian(5), channel, qubit)


def readout(start, channel="r0", frequency=7e9, acq=0, duration=100):
    return Pulse(PulseKind.READOUT, start, duration, 0.1, frequency, 0.0,
                 Rectangular(), channel, 0, acquisition_id=acq)


class TestEnvelopes:
    def test_rectangular_constant(self):
        wf = render_envelope(Rectangular(), 0.5, 4, 1.0)
        assert np.array_equal(wf.i, [0.5, 0.5, 0.5, 0.5])
        assert np.array_equal(wf.q, [0, 0, 0, 0])

    def test_gaussian_golden_samples(self):
        # closed form: exp(-(t - 20)^2 / (2 * 8^2)) with sigma = 40/5
        wf = render_envelope(Gaussian(5), 1.0, 40, 1.0)
        assert len(wf) == 40
        assert wf.i[20] == pytest.approx(1.0, abs=1e-12)
        assert wf.i[12] == pytest.approx(math.exp(-0.5), abs=1e-12)
        assert wf.i[12] == pytest.approx(0.6065306597126334, abs=1e-12)

    def test_drag_q_vanishes_at_peak(self):
        wf = render_envelope(Drag(5, 0.4), 0.7, 40, 1.0)
        assert wf.q[20] == pytest.approx(0.0, abs=1e-12)
        assert np.max(np.abs(wf.i)) == pytest.approx(0.7, abs=1e-12)

    def test_drag_q_is_derivative_of_i(self):
        wf = render_envelope(Drag(5, 0.4), 1.0, 40, 1.0)
        numeric = np.gradient(wf.i, 1.0)
        assert np.allclose(wf.q[2:-2], 0.4 * numeric[2:-2], atol=5e-3)

    def test_sample_count_follows_rate(self):
        assert len(render_envelope(Rectangular(), 1.0, 10, 2.0)) == 20
        assert len(render_envelope(Gaussian(5), 1.0, 16, 0.5)) == 8

    @pytest.mark.parametrize("shape", [Rectangular(), Gaussian(5), Gaussian(2.5), Drag(5, 0.4)])
    @pytest.mark.parametrize("duration", [17, 40, 101])
    def test_peak_equals_amplitude(self, shape, duration):
        wf = render_envelope(shape, 0.81, duration, 1.0)
        assert np.max(np.abs(wf.i)) == pytest.approx(0.81, abs=1e-12)

    def test_determinism(self):
        a = render_envelope(Drag(5, 0.2), 0.4, 52, 1.0)
        b = render_envelope(Drag(5, 0.2), 0.4, 52, 1.0)
        assert np.array_equal(a.samples, b.samples)

    @pytest.mark.parametrize("duration,rate", [(0, 1.0), (-4, 1.0), (4, 0.0), (4, -1.0)])
    def test_invalid_arguments(self, duration, rate):
        with pytest.raises(ValueError):
            render_envelope(Rectangular(), 1.0, duration, rate)

    def test_invalid_rel_sigma(self):
        with pytest.raises(ValueError):
            Gaussian(0)
        with pytest.raises(ValueError):
            Drag(-1, 0.1)

    def test_gaussian_area_factor_matches_quadrature(self):
        # independent oracle: numerical integral of the normalized envelope
        shape = Gaussian(5)
        t = np.linspace(0, 1, 200001)
        sigma = 1 / 5
        profile = np.exp(-((t - 0.5) ** 2) / (2 * sigma**2))
        assert envelope_area_factor(shape) == pytest.approx(np.trapezoid(profile, t), abs=1e-6)


class TestShapeStrings:
    @pytest.mark.parametrize("shape", [Rectangular(), Gaussian(5), Drag(4.5, 0.32)])
    def test_round_trip(self, shape):
        assert shape_from_string(shape_to_string(shape)) == shape

    def test_parse_errors(self):
        with pytest.raises(ValueError):
            shape_from_string("wiggly(3)")
        with pytest.raises(ValueError):
            shape_from_string("rectangular(3)")


class TestPulse:
    def test_finish(self):
        assert drive(10, duration=40).finish == 50

    def test_validation(self):
        with pytest.raises(ValueError):
            drive(-1)
        with pytest.raises(ValueError):
            drive(0, duration=0)
        with pytest.raises(ValueError):
            drive(0, amplitude=1.5)

    def test_readout_requires_acquisition_id(self):
        with pytest.raises(ValueError):
            Pulse(PulseKind.READOUT, 0, 100, 0.1, 7e9, 0.0, Rectangular(), "r0", 0)
        with pytest.raises(ValueError):
            Pulse(PulseKind.DRIVE, 0, 100, 0.1, 7e9, 0.0, Rectangular(), "d0", 0,
                  acquisition_id=3)


class TestSequence:
    def test_empty_duration(self):
        assert sequence_duration(PulseSequence()) == 0

    def test_single_pulse_duration(self):
        assert sequence_duration(PulseSequence((drive(10, duration=40),))) == 50

    def test_add_and_duration(self):
        seq = sequence_add(PulseSequence(), drive(0, duration=40))
        assert seq.duration == 40
        seq = seq.add(drive(20, duration=80, channel="d1", qubit=1))
        assert len(seq) == 2
        assert seq.duration == 100

    def test_overlap_on_other_channel_permitted(self):
        seq = PulseSequence((drive(0, duration=40, channel="a"),
                             drive(20, duration=40, channel="b")))
        assert seq.duration == 60

    def test_multiplexed_readout_accepted(self):
        seq = PulseSequence((readout(0, frequency=7.0e9, acq=0),
                             readout(0, frequency=7.1e9, acq=1)))
        assert len(seq) == 2

    def test_same_frequency_overlapping_readout_rejected(self):
        with pytest.raises(ValueError, match="overlapping readout"):
            PulseSequence((readout(0, acq=0), readout(50, acq=1)))

    def test_duplicate_acquisition_id_rejected(self):
        with pytest.raises(ValueError, match="duplicate acquisition"):
            PulseSequence((readout(0, acq=0), readout(200, acq=0)))

    def test_sorted_by_start_then_channel(self):
        seq = PulseSequence((drive(20, channel="b"), drive(0, channel="z"),
                             drive(20, channel="a")))
        assert [(p.start, p.channel) for p in seq] == [(0, "z"), (20, "a"), (20, "b")]

    @given(st.permutations(list(range(6))))
    @settings(max_examples=30, deadline=None)
    def test_insertion_order_insensitive(self, order):
        pulses = [drive(10 * k, channel=f"c{k % 3}", qubit=k % 3) for k in range(6)]
        reference = PulseSequence(tuple(pulses))
        shuffled = PulseSequence()
        for index in order:
            shuffled = shuffled.add(pulses[index])
        assert shuffled.pulses == reference.pulses

    def test_replace_pulse_by_identity(self):
        first = drive(0)
        second = drive(100)
        seq = PulseSequence((first, second))
        replacement = drive(0, amplitude=0.9)
        out = seq.replace_pulse(first, replacement)
        assert out[0].amplitude == 0.9
        with pytest.raises(ValueError):
            seq.replace_pulse(drive(0), replacement)  # equal but not identical


class TestSerialization:
    def test_jsonl_round_trip(self):
        seq = PulseSequence((drive(0), readout(40)))
        text = seq.to_jsonl()
        assert PulseSequence.from_jsonl(text).pulses == seq.pulses

    def test_field_names(self):
        record = json.loads(PulseSequence((drive(0),)).to_jsonl())
        assert set(record) == {
            "kind", "start", "duration", "amplitude", "frequency",
            "relative_phase", "shape", "channel", "qubit", "acquisition_id",
        }
        assert record["kind"] == "drive"
        assert record["acquisition_id"] is None
