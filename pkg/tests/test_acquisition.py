import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pulsekit.acquisition import (
    AcquisitionData,
    AcquisitionType,
    AveragingMode,
    Discriminator,
    ExecutionOptions,
    ResultSet,
    average,
    classify,
    demodulate_integrate,
)
from pulsekit.pulses import Waveform


def tone(frequency_hz, n_samples, amplitude=1.0, rate=1.0, phase=0.0):
    t = np.arange(n_samples) / rate * 1e-9
    return Waveform(amplitude * np.exp(1j * (2 * np.pi * frequency_hz * t + phase)), rate)


class TestDemodulate:
    def test_constant_tone_recovers_amplitude(self):
        # 1 GHz tone sampled over exactly 100 periods at 10 GS/s
        wf = tone(1e9, 1000, amplitude=0.37, rate=10.0)
        i, q = demodulate_integrate(wf, 1e9)
        assert math.hypot(i, q) == pytest.approx(0.37, abs=1e-9)

    def test_zero_waveform(self):
        wf = Waveform(np.zeros(64), 1.0)
        assert demodulate_integrate(wf, 5e9) == (0.0, 0.0)

    def test_orthogonality_of_offset_tone(self):
        # offset = k / window: 3 extra cycles over a 512 ns window
        window_s = 512e-9
        offset = 3 / window_s
        wf = tone(1e9 + offset, 512, rate=1.0)
        i, q = demodulate_integrate(wf, 1e9)
        assert math.hypot(i, q) == pytest.approx(0.0, abs=1e-9)

    def test_empty_waveform_rejected(self):
        with pytest.raises(ValueError):
            demodulate_integrate(Waveform(np.array([]), 1.0), 1e9)

    @given(st.floats(-2, 2), st.floats(-2, 2))
    @settings(max_examples=30, deadline=None)
    def test_linearity(self, a, b):
        wf1 = tone(1e9, 128, amplitude=1.0)
        wf2 = tone(2e9, 128, amplitude=1.0)
        combined = Waveform(a * wf1.samples + b * wf2.samples, 1.0)
        za = complex(*demodulate_integrate(wf1, 1.5e9))
        zb = complex(*demodulate_integrate(wf2, 1.5e9))
        zc = complex(*demodulate_integrate(combined, 1.5e9))
        assert zc == pytest.approx(a * za + b * zb, abs=1e-12)


class TestClassify:
    disc = Discriminator(rotation=0.3, threshold=0.1,
                         mean0=0.0 + 0j, mean1=np.exp(1j * 0.3) * 0.5)

    def test_state_means(self):
        assert classify(self.disc.mean0, self.disc) == 0
        assert classify(self.disc.mean1, self.disc) == 1

    def test_tie_gives_zero(self):
        point = 0.1 * np.exp(1j * 0.3)  # rotated I lands exactly on the threshold
        assert classify(complex(point), self.disc) == 0

    def test_tuple_input(self):
        assert classify((self.disc.mean1.real, self.disc.mean1.imag), self.disc) == 1

    @given(st.floats(0.1, 50))
    @settings(max_examples=40, deadline=None)
    def test_scale_invariance(self, factor):
        # consistently rescaling IQ, means and threshold preserves the label
        disc = Discriminator(rotation=0.7, threshold=0.2 * factor,
                             mean0=0j, mean1=factor * np.exp(1j * 0.7))
        for z in (0.05 + 0.2j, 0.8 + 0.1j, -0.3 - 0.4j):
            base = classify(complex(z * np.exp(1j * 0.7)),
                            Discriminator(0.7, 0.2, 0j, np.exp(1j * 0.7)))
            scaled = classify(complex(factor * z * np.exp(1j * 0.7)), disc)
            assert base == scaled


class TestAverage:
    def test_classified_bits(self):
        data = AcquisitionData(np.array([0, 1, 1, 1], dtype=np.int8),
                               AcquisitionType.CLASSIFIED, AveragingMode.SINGLESHOT)
        out = average(ResultSet({0: data}))
        assert float(out[0].values) == pytest.approx(0.75)
        assert out[0].averaging is AveragingMode.CYCLIC

    def test_iq_componentwise_mean(self):
        shots = np.array([1 + 1j, 3 - 1j])
        data = AcquisitionData(shots, AcquisitionType.INTEGRATED, AveragingMode.SINGLESHOT)
        out = average(ResultSet({0: data}))
        assert complex(out[0].values) == pytest.approx(2 + 0j)

    def test_already_averaged_rejected(self):
        data = AcquisitionData(np.array(0.5), AcquisitionType.CLASSIFIED, AveragingMode.CYCLIC)
        with pytest.raises(ValueError, match="already averaged"):
            average(ResultSet({0: data}))

    def test_average_then_classify_differs_from_classify_then_average(self):
        # two clusters around the means: averaging first collapses to the
        # midpoint (classified 0 by the tie rule), while classifying each
        # shot first gives probability 0.5
        disc = Discriminator(rotation=0.0, threshold=0.0, mean0=-1 + 0j, mean1=1 + 0j)
        shots = np.array([-1 + 0j, 1 + 0j, -1 + 0j, 1 + 0j])
        classify_then_average = np.mean([classify(complex(z), disc) for z in shots])
        average_then_classify = classify(complex(np.mean(shots)), disc)
        assert classify_then_average == pytest.approx(0.5)
        assert average_then_classify == 0
        assert classify_then_average != average_then_classify

    def test_sweep_axis_preserved(self):
        values = np.arange(12, dtype=float).reshape(3, 4)  # 3 points x 4 shots
        data = AcquisitionData(values, AcquisitionType.CLASSIFIED,
                               AveragingMode.SINGLESHOT, sweep_shape=(3,))
        out = average(ResultSet({0: data}))
        assert out[0].values.shape == (3,)
        assert np.allclose(out[0].values, values.mean(axis=1))


class TestOptions:
    def test_validation(self):
        with pytest.raises(ValueError):
            ExecutionOptions(nshots=0)
        with pytest.raises(ValueError):
            ExecutionOptions(relaxation_time=-1)

    def test_defaults(self):
        options = ExecutionOptions()
        assert options.acquisition is AcquisitionType.INTEGRATED
        assert not options.fast_reset


class TestResultSetSerialization:
    def test_csv_columns_singleshot(self):
        data = AcquisitionData(np.array([0, 1], dtype=np.int8),
                               AcquisitionType.CLASSIFIED, AveragingMode.SINGLESHOT)
        text = ResultSet({0: data}).to_csv()
        lines = text.strip().splitlines()
        assert lines[0] == "acquisition_id,shot,i,q,bit"
        assert lines[1] == "0,0,,,0"
        assert lines[2] == "0,1,,,1"

    def test_csv_sweep_and_iq(self):
        values = np.array([[1 + 2j], [3 + 4j]])  # 2 sweep points x 1 shot
        data = AcquisitionData(values, AcquisitionType.INTEGRATED,
                               AveragingMode.SINGLESHOT, sweep_shape=(2,))
        lines = ResultSet({0: data}).to_csv().strip().splitlines()
        assert lines[0] == "acquisition_id,sweep0,shot,i,q,bit"
        assert lines[1].startswith("0,0,0,1.0,2.0")

    def test_json_summary(self):
        data = AcquisitionData(np.array(0.25), AcquisitionType.CLASSIFIED, AveragingMode.CYCLIC)
        summary = ResultSet({2: data}).to_json_summary()
        assert summary["2"]["mean"] == 0.25
        assert summary["2"]["acquisition"] == "classified"
