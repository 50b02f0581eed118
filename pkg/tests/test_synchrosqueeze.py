import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import erfc

from tfrtools import kernels as kn, synchrosqueeze as sq, transform as tr
from tfrtools.core import FrequencyGrid, Signal, TimeFrequencyMap

TWO_PI = 2 * math.pi


@pytest.fixture(scope="module")
def tone_ss(gaussian):
    fs, N = 20.0, 2000
    t = np.arange(N) / fs
    nu, A, ph = TWO_PI * 1.0, 1.7, 0.3
    s = Signal(A * np.cos(nu * t + ph), fs)
    ss, src, v = sq.synchrosqueeze(s, gaussian, TWO_PI * 0.5, TWO_PI * 1.5, preprocessed=True,
                                   return_source=True)
    cols = (t >= 3.3) & (t <= t[-1] - 3.3)
    return dict(s=s, t=t, nu=nu, A=A, ph=ph, ss=ss, src=src, v=v, cols=cols)


class TestPhaseVelocity:
    @pytest.mark.parametrize("method", sq.METHODS)
    def test_tone(self, gaussian, method):
        fs, N = 20.0, 1500
        t = np.arange(N) / fs
        nu = TWO_PI * 1.2
        grid = tr.build_grid("WFT", nu - 3, nu + 3, tr.choose_step(gaussian))
        G, dG = tr.compute_wft(Signal(np.cos(nu * t), fs), gaussian, grid, preprocessed=True,
                               derivative=True)
        v = sq.phase_velocity(G, method, dG)
        assert np.nanmax(np.abs(v[:, 70:-70] - nu)) <= 1e-3 * nu

    def test_derivative_kernel_coarse_sampling(self, gaussian):
        fs, N = 5.0, 500
        t = np.arange(N) / fs
        nu = TWO_PI * 1.1
        grid = tr.build_grid("WFT", nu - 3, nu + 3, tr.choose_step(gaussian))
        G, dG = tr.compute_wft(Signal(np.cos(nu * t), fs), gaussian, grid, preprocessed=True,
                               derivative=True)
        v = sq.phase_velocity(G, "derivative_kernel", dG)
        assert np.nanmax(np.abs(v[:, 20:-20] - nu)) <= 1e-9 * nu

    def test_zero_amplitude_undefined(self, gaussian):
        grid = FrequencyGrid.linear(1.0, 2.0, 0.5)
        data = np.zeros((3, 10), complex)
        data[1] = np.exp(1j * np.arange(10) * 0.1)
        m = TimeFrequencyMap(data, grid, 1.0, 0.0, "WFT", gaussian)
        v = sq.phase_velocity(m)
        assert np.all(np.isnan(v[[0, 2]])) and np.allclose(v[1], 0.1)

    def test_needs_derivative_map(self, tone_ss):
        with pytest.raises(ValueError):
            sq.phase_velocity(tone_ss["src"], "derivative_kernel")


class TestWidenedRange:
    def test_gaussian(self, gaussian):
        lo, hi = sq.widened_range(TWO_PI, 2 * TWO_PI, gaussian, eps=0.05)
        xi = kn.epsilon_support_freq(gaussian, 0.05)[1]
        assert (lo, hi) == pytest.approx((TWO_PI - xi, 2 * TWO_PI + xi), rel=1e-14)
        assert xi == pytest.approx(2.0, abs=0.05)

    def test_symmetric(self, gaussian):
        lo, hi = sq.widened_range(3.0, 5.0, gaussian)
        assert 3.0 - lo == pytest.approx(hi - 5.0, rel=1e-14)

    def test_lognorm_multiplicative(self, lognorm):
        from scipy.special import erfinv
        n = math.sqrt(2) * erfinv(1 - 0.05)
        lo, hi = sq.widened_range(2.0, 4.0, lognorm, eps=0.05)
        r = math.exp(2 * n / TWO_PI)
        assert lo == pytest.approx(2.0 / r, rel=1e-9) and hi == pytest.approx(4.0 * r, rel=1e-9)


class TestSqueeze:
    def test_one_bin_per_time_with_amplitude(self, tone_ss):
        D = tone_ss["ss"].dense()[:, tone_ss["cols"]]
        assert np.all(np.count_nonzero(D, axis=0) == 1)
        assert np.max(np.abs(np.abs(D.sum(axis=0)) - tone_ss["A"])) <= 1e-6

    def test_invert_ss_tone(self, tone_ss):
        a = sq.invert_ss(tone_ss["ss"]).values
        t, c = tone_ss["t"], tone_ss["cols"]
        exact = tone_ss["A"] * np.exp(1j * (tone_ss["nu"] * t + tone_ss["ph"]))
        assert np.max(np.abs(a - exact)[c]) <= 1e-6

    def test_empty_band_is_zero(self, tone_ss):
        c = tone_ss["ss"].grid.centers
        a = sq.invert_ss(tone_ss["ss"], band=(c[-2], c[-1]))
        assert np.all(a.values == 0)
        with pytest.raises(ValueError, match="band outside grid"):
            sq.invert_ss(tone_ss["ss"], band=(100.0, 200.0))

    def test_bin_edge_half_open(self, gaussian):
        grid = FrequencyGrid.linear(1.0, 2.0, 0.5)
        data = np.ones((3, 2), complex)
        nu = np.array([[1.25, 1.2500001], [1.5, 1.5], [1.75, 1.76]])
        m = TimeFrequencyMap(data, grid, 1.0, 0.0, "WFT", gaussian)
        D = sq.squeeze(m, nu).dense()
        q = 0.5 / kn.kernel_constants(gaussian).C
        # 1.25 belongs to the 1.0 bin; 1.2500001 to the 1.5 bin.
        assert D[0, 0] == pytest.approx(q) and D[1, 0] == pytest.approx(2 * q)
        assert D[1, 1] == pytest.approx(2 * q) and D[2, 1] == pytest.approx(q)

    def test_conservation_arbitrary_signal(self, gaussian):
        rng = np.random.default_rng(8)
        fs, N = 20.0, 1200
        s = Signal(rng.standard_normal(N), fs)
        src_grid = tr.build_grid("WFT", 2.0, 20.0, tr.choose_step(gaussian))
        G = tr.compute_wft(s, gaussian, src_grid)
        v = sq.phase_velocity(G)
        out = tr.build_grid("WFT", 4.0, 16.0, tr.choose_step(gaussian))
        ss = sq.squeeze(G, v, out)
        kept = np.isfinite(v) & (out.bin_of(np.nan_to_num(v, nan=-1.0)) >= 0)
        expect = np.sum(np.where(kept, G.data, 0), axis=0) * src_grid.weight / kn.kernel_constants(gaussian).C
        got = sq.invert_ss(ss).values
        assert np.max(np.abs(got - expect)) <= 1e-8 * np.max(np.abs(expect))

    def test_sparsity_bound(self, tone_ss):
        ss, src = tone_ss["ss"], tone_ss["src"]
        per_time = np.bincount(ss.data.times, minlength=ss.N)
        assert np.all(per_time <= src.grid.n_bins)

    def test_order_independent(self, gaussian):
        rng = np.random.default_rng(4)
        grid = FrequencyGrid.linear(1.0, 3.0, 0.5)
        n = 400
        vals = rng.standard_normal(n) * 10.0 ** rng.integers(-8, 8, n)
        v = np.full((n, 1), 2.0)
        big = FrequencyGrid.linear(0.5, 0.5 * n, 0.5)
        m = TimeFrequencyMap(vals[:, None].astype(complex), big, 1.0, 0.0, "WFT", gaussian)
        a = sq.squeeze(m, v, grid).data.values
        perm = rng.permutation(n)
        m2 = TimeFrequencyMap(vals[perm][:, None].astype(complex), big, 1.0, 0.0, "WFT", gaussian)
        b = sq.squeeze(m2, v, grid).data.values
        assert a.shape == b.shape == (1,)
        assert abs(a[0] - b[0]) <= 1e-15 * np.sum(np.abs(vals))

    def test_zero_map(self, gaussian):
        grid = FrequencyGrid.linear(1.0, 2.0, 0.5)
        m = TimeFrequencyMap(np.zeros((3, 5), complex), grid, 1.0, 0.0, "WFT", gaussian)
        ss = sq.squeeze(m, sq.phase_velocity(m))
        assert ss.kind == "SWFT" and ss.data.nnz == 0

    def test_threshold_drops_small(self, gaussian):
        s = Signal(np.random.default_rng(3).standard_normal(400), 10.0)
        grid = tr.build_grid("WFT", 1.0, 10.0, 0.3)
        G = tr.compute_wft(s, gaussian, grid, pad_scheme="zero")
        v = sq.phase_velocity(G)
        full = sq.squeeze(G, v)
        cut = sq.squeeze(G, v, threshold=1e-2)
        assert cut.data.nnz < full.data.nnz
        masked = TimeFrequencyMap(np.where(np.abs(G.data) >= 1e-2, G.data, 0), grid, G.fs, G.t0,
                                  "WFT", gaussian)
        assert np.allclose(cut.dense(), sq.squeeze(masked, v).dense(), rtol=0, atol=1e-15)

    def test_two_tone_band_split(self, gaussian):
        fs, N = 20.0, 2000
        t = np.arange(N) / fs
        nu1 = TWO_PI
        for dnu in (2.0, 3.0, 4.0):
            x = np.cos(nu1 * t + 0.3) + np.cos((nu1 + dnu) * t + 1.1)
            ss = sq.synchrosqueeze(Signal(x, fs), gaussian, nu1 - 3, nu1 + dnu + 3, preprocessed=True)
            a = sq.invert_ss(ss, band=(0.0, nu1 + dnu / 2)).values
            err = np.abs(a - np.exp(1j * (nu1 * t + 0.3)))[200:-200]
            bound = erfc(dnu / (2 * math.sqrt(2)))  # 2 |R_g(-dnu/2)|
            assert np.mean(err) <= bound
            assert np.max(err) <= 1.2 * bound

    def test_swt_tone(self, morlet):
        fs, N = 20.0, 2000
        t = np.arange(N) / fs
        nu = TWO_PI * 1.3
        ss = sq.synchrosqueeze(Signal(np.cos(nu * t), fs), morlet, TWO_PI * 0.8, TWO_PI * 2.0,
                               eps=1e-5, preprocessed=True)
        assert ss.kind == "SWT"
        D = ss.dense()[:, 300:-300]
        assert np.all(np.count_nonzero(D, axis=0) == 1)
        # The default 1e-3 support truncation leaves about 1.1e-6 of the Morlet tail outside.
        assert np.max(np.abs(np.abs(D.sum(axis=0)) - 1.0)) <= 1e-6


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_conservation_property(seed):
    g = kn.make_kernel("window", "Gaussian", 1.0)
    rng = np.random.default_rng(seed)
    s = Signal(rng.standard_normal(300), 10.0)
    grid = tr.build_grid("WFT", 1.0, 10.0, 0.3)
    G = tr.compute_wft(s, g, grid, pad_scheme="zero")
    v = sq.phase_velocity(G)
    ss = sq.squeeze(G, v)
    kept = np.isfinite(v) & (grid.bin_of(np.nan_to_num(v, nan=-1.0)) >= 0)
    expect = np.sum(np.where(kept, G.data, 0), axis=0) * grid.weight / kn.kernel_constants(g).C
    assert np.max(np.abs(sq.invert_ss(ss).values - expect)) <= 1e-10 * max(np.max(np.abs(expect)), 1e-300)
