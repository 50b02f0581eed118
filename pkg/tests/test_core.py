import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from tfrtools.core import (ComponentTrack, FrequencyGrid, SparseEntries, Signal, Spectrum,
                           TimeFrequencyMap, analytic_signal, fft_frequencies, forward_spectrum,
                           inverse_spectrum, positive_frequency_mask)

TWO_PI = 2 * math.pi

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


class TestSignal:
    def test_times_and_duration(self):
        s = Signal(np.zeros(11), 10.0, t0=2.0)
        assert s.N == 11
        assert s.T == pytest.approx(1.1)  # N / fs
        assert s.times[0] == 2.0 and s.times[-1] == pytest.approx(3.0)

    @pytest.mark.parametrize("samples, fs, msg", [
        ([1.0], 1.0, "at least 2"),
        ([1.0, 2.0], 0.0, "positive"),
        ([1.0, np.nan], 1.0, "non-finite"),
    ])
    def test_validation(self, samples, fs, msg):
        with pytest.raises(ValueError, match=msg):
            Signal(np.array(samples, dtype=float), fs)

    def test_immutable_samples(self):
        s = Signal(np.arange(4.0), 1.0)
        with pytest.raises(ValueError):
            s.samples[0] = 5.0


class TestSpectrum:
    def test_frequency_order(self):
        f = fft_frequencies(8, 8.0)
        assert np.allclose(f / TWO_PI, [0, 1, 2, 3, 4, -3, -2, -1])

    def test_impulse_is_flat(self):
        x = np.zeros(64)
        x[1] = 1.0
        sp = forward_spectrum(Signal(x, 64.0))
        assert np.allclose(np.abs(sp.coefficients), 1.0)

    def test_round_trip_random(self):
        x = np.random.default_rng(0).standard_normal(1024)
        back = inverse_spectrum(forward_spectrum(Signal(x, 3.0)), 3.0)
        assert np.max(np.abs(back.samples - x)) < 1e-12

    def test_cos5_matches_direct_summation(self, oracle):
        ref = oracle["dft_cos5"]
        t = np.arange(100) / 100.0
        X = np.abs(forward_spectrum(Signal(np.cos(TWO_PI * 5 * t), 100.0)).coefficients)
        assert X[5] == pytest.approx(ref["bin5"], rel=1e-12)
        assert X[95] == pytest.approx(ref["bin95"], rel=1e-12)
        assert np.max(np.delete(X, [5, 95])) < 1e-12 * ref["bin5"]

    def test_conjugate_symmetry(self):
        x = np.random.default_rng(1).standard_normal(33)
        c = forward_spectrum(Signal(x, 1.0)).coefficients
        assert np.allclose(c[1:], np.conj(c[1:][::-1]))

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            forward_spectrum(Signal(np.array([]), 1.0))
        with pytest.raises(ValueError, match="empty"):
            inverse_spectrum(Spectrum(np.array([], complex), np.array([]), 0), 1.0)


class TestAnalyticSignal:
    def test_tone(self):
        t = np.arange(1000) / 100.0
        a = analytic_signal(Signal(np.cos(TWO_PI * t), 100.0))
        assert np.max(np.abs(a.values - np.exp(1j * TWO_PI * t))) < 1e-12
        assert abs(a.mean) < 1e-14

    def test_constant(self):
        a = analytic_signal(Signal(np.full(50, 2.5), 1.0))
        assert np.max(np.abs(a.values)) < 1e-13
        assert a.mean == pytest.approx(2.5)

    def test_offset_tone(self):
        t = np.arange(500) / 50.0
        a = analytic_signal(Signal(3.0 + 2.0 * np.cos(TWO_PI * t), 50.0))
        assert np.allclose(np.abs(a.values), 2.0, atol=1e-12)
        assert a.mean == pytest.approx(3.0)

    @settings(max_examples=40, deadline=None)
    @given(arrays(float, st.integers(2, 300), elements=finite))
    def test_identity_and_no_negative_frequencies(self, x):
        a = analytic_signal(Signal(x, 1.0))
        scale = max(1.0, np.max(np.abs(x)))
        assert np.max(np.abs(a.to_signal().samples - x)) <= 1e-12 * scale * len(x) ** 0.5
        X = np.fft.fft(a.values)
        neg = ~(positive_frequency_mask(len(x)) > 0)
        assert np.max(np.abs(X[neg]), initial=0.0) <= 1e-12 * max(np.max(np.abs(X)), 1.0) * len(x)


class TestFrequencyGrid:
    def test_linear_centers(self):
        g = FrequencyGrid.linear(0.5, 2.0, 0.5)
        assert np.array_equal(g.centers, [0.5, 1.0, 1.5, 2.0])

    def test_log_centers(self):
        g = FrequencyGrid.log(TWO_PI, 4 * TWO_PI, 1)
        assert np.allclose(g.centers / TWO_PI, [1, 2, 4], rtol=0, atol=1e-15)

    def test_half_open_cells(self):
        g = FrequencyGrid.linear(0.5, 2.0, 0.5)
        # Cell k is (c_k - w/2, c_k + w/2]; the upper edge belongs to the lower bin.
        assert list(g.bin_of([0.75, 0.75 + 1e-9, 2.25, 2.3, 0.2])) == [0, 1, 3, -1, -1]

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            FrequencyGrid.linear(0.51, 0.52, 0.5)
        with pytest.raises(ValueError):
            FrequencyGrid.log(-1.0, 2.0, 4)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.01, 1.0), st.floats(0.05, 5), st.floats(0.05, 5), st.floats(0.5, 3),
           st.sampled_from(["linear", "log"]))
    def test_overlapping_grids_coincide(self, step, a, b, width, kind):
        if kind == "log":
            step = 1.0 / step
            g1 = FrequencyGrid.log(a, a * 2 ** (width + 2 / step), step)
            g2 = FrequencyGrid.log(b, b * 2 ** (width + 2 / step), step)
        else:
            g1 = FrequencyGrid.linear(a, a + width + 2 * step, step)
            g2 = FrequencyGrid.linear(b, b + width + 2 * step, step)
        common = np.intersect1d(g1.offsets, g2.offsets)
        c1 = dict(zip(g1.offsets, g1.centers))
        c2 = dict(zip(g2.offsets, g2.centers))
        assert all(c1[m] == c2[m] for m in common)
        assert np.all(np.diff(g1.centers) > 0)

    def test_restrict_keeps_anchor(self):
        g = FrequencyGrid.linear(0.1, 10.0, 0.1)
        r = g.restrict(2.0, 3.0)
        assert r.centers[0] == pytest.approx(2.0) and r.centers[-1] == pytest.approx(3.0)
        assert np.intersect1d(np.round(g.centers, 12), np.round(r.centers, 12)).size == r.n_bins


class TestMapsAndTracks:
    def test_sparse_densify(self):
        e = SparseEntries(np.array([0, 1]), np.array([1, 1]), np.array([1 + 0j, 2j]), (2, 3))
        d = e.to_dense()
        assert d[0, 1] == 1 and d[1, 1] == 2j and np.count_nonzero(d) == 2

    def test_map_shape_checked(self):
        g = FrequencyGrid.linear(1.0, 2.0, 0.5)
        with pytest.raises(ValueError):
            TimeFrequencyMap(np.zeros((2, 5), complex), g, 1.0, 0.0, "WFT")
        m = TimeFrequencyMap(np.zeros((3, 5), complex), g, 1.0, 0.0, "WFT")
        assert m.shape == (3, 5) and m.times.size == 5

    def test_track_invariants(self):
        with pytest.raises(ValueError):
            ComponentTrack([2], [3], [4], [0.0])
        with pytest.raises(ValueError):
            ComponentTrack([2], [1], [4], [0.0], amplitude=[-1.0])
        tr = ComponentTrack([2, -1], [1, -1], [3, -1], [0.0, 1.0])
        assert list(tr.present) == [True, False]
