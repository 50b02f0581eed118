"""FFT-based windowed Fourier and wavelet transforms, grid construction and
the inversion formulas.

The windowed Fourier transform is

    G(w, t) = int s+(u) g(u - t) exp(-i w (u - t)) du
            = (1/2pi) int s+^(xi) ghat(w - xi) exp(i xi t) dxi,

and the wavelet transform

    W(w, t) = int s+(u) psi*(w (u - t) / w_psi) (w / w_psi) du
            = (1/2pi) int s+^(xi) conj(psihat(w_psi xi / w)) exp(i xi t) dxi,

where s+ is the positive-frequency part of the signal.  Both are computed
by one inverse FFT per frequency bin on the padded record.
"""

from __future__ import annotations

import math
import os

import numpy as np
import scipy.fft as sfft

from . import kernels as kn
from . import preprocess as pp
from .core import (TWO_PI, AnalyticSignal, FrequencyGrid, PadRecord, Signal, Spectrum,
                   TimeFrequencyMap, fft_frequencies, positive_frequency_mask)

THREADS_ENV = "TFRTOOLS_THREADS"

# Frequency rows are transformed in blocks of at most this many samples.
_BLOCK_SAMPLES = 1 << 22


def fft_workers() -> int:
    """Worker count for the FFTs, read from the TFRTOOLS_THREADS variable."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------

def choose_step(spec: kn.KernelSpec, Nb: int = 10) -> float:
    """Bin width dividing the kernel's 0.5-support in frequency into Nb bins.

    Windows: delta omega = (xi2(0.5) - xi1(0.5)) / Nb.  Wavelets: number of
    voices n_v = Nb log 2 / (log xi2(0.5) - log xi1(0.5)).
    """
    if not Nb > 1:
        raise ValueError("Nb must exceed 1")
    xi1, xi2 = kn.epsilon_support_freq(spec, 0.5)
    if spec.is_wavelet:
        if not xi1 > 0:
            raise ValueError("wavelet 0.5-support must lie on the positive axis")
        return Nb * math.log(2.0) / (math.log(xi2) - math.log(xi1))
    return (xi2 - xi1) / Nb


def grid_kind(kind: str) -> str:
    return "linear" if pp.base_kind(kind) == "WFT" else "log"


def build_grid(kind: str, wmin: float, wmax: float, step: float) -> FrequencyGrid:
    """Signal-independent bins covering [wmin, wmax] (rad/s).

    ``kind`` is a transform kind (WFT, SWFT, WT, SWT) or a grid kind
    ("linear", "log").
    """
    gk = kind if kind in ("linear", "log") else grid_kind(kind)
    if gk == "linear":
        return FrequencyGrid.linear(wmin, wmax, step)
    return FrequencyGrid.log(wmin, wmax, step)


# ---------------------------------------------------------------------------
# Kernel responses at the discrete frequencies
# ---------------------------------------------------------------------------

def _dft_lags(Np: int, dt: float) -> np.ndarray:
    """Lags tau_j = -(j-1) dt for j <= ceil((Np-1)/2), else (Np-j+1) dt."""
    j = np.arange(1, Np + 1)
    first = (Np - 1 + 1) // 2
    return np.where(j <= first, -(j - 1) * dt, (Np - j + 1) * dt)


class _Response:
    """Evaluates ghat(w - xi_j) or conj(psihat(w_psi xi_j / w)) at the
    discrete frequencies xi_j of the padded record.

    Kernels with a given frequency form use it directly.  Otherwise the
    response is the discrete transform of the time form on the wrapped lag
    grid, so the result is exactly periodic in xi with period 2 pi fs.
    """

    def __init__(self, spec: kn.KernelSpec, Np: int, fs: float):
        self.spec = spec
        self.Np = Np
        self.fs = fs
        self.direct = kn._has_original(spec, "freq") or not kn._has_original(spec, "time") and spec.freq_form is not None
        if not self.direct and spec.time_form is None and spec.freq_form is None:
            raise ValueError("kernel has no usable form")
        if not self.direct:
            self.tau = _dft_lags(Np, 1.0 / fs)
        self.wpsi = spec.omega_psi if spec.is_wavelet else None

    def __call__(self, w: float, xi: np.ndarray, idx: np.ndarray) -> np.ndarray:
        """Response at xi[idx] for bin frequency w (xi = all discrete freqs)."""
        spec = self.spec
        if self.direct:
            x = xi[idx]
            if spec.is_wavelet:
                return np.conj(spec.freq(self.wpsi * x / w))
            return spec.freq(w - x)
        dt = 1.0 / self.fs
        if spec.is_wavelet:
            # FFT of psi*(w tau / w_psi) equals (w_psi / w) conj(psihat(w_psi xi / w)).
            seq = np.conj(spec.time(w * self.tau / self.wpsi))
            full = dt * (w / self.wpsi) * sfft.fft(seq, workers=fft_workers())
        else:
            seq = spec.time(self.tau) * np.exp(-1j * w * self.tau)
            full = dt * sfft.fft(seq, workers=fft_workers())
        return full[idx]


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------

def _check_grid(spec: kn.KernelSpec, grid: FrequencyGrid, kind: str, fs: float):
    want_wavelet = pp.base_kind(kind) == "WT"
    if spec.is_wavelet != want_wavelet:
        raise ValueError(f"{kind} needs a {'wavelet' if want_wavelet else 'window'} kernel")
    if grid.kind != grid_kind(kind):
        raise ValueError(f"{kind} needs a {grid_kind(kind)} frequency grid")
    nyq = math.pi * fs
    if grid.centers[-1] > nyq * (1 + 1e-12):
        raise ValueError("maximum frequency exceeds the Nyquist limit: need wmax/2pi <= fs/2")
    if want_wavelet and not grid.centers[0] > 0:
        raise ValueError("wavelet transform needs positive frequencies")


def prepare(s: Signal, spec: kn.KernelSpec, grid: FrequencyGrid, kind: str,
            pad_scheme="predictive", preprocessed: bool = False, eps: float = 0.001,
            filter_band=None, max_padded: int = pp.DEFAULT_MAX_PADDED):
    """Preprocess and pad a signal for a transform over ``grid``.

    Returns (padded signal, plan, filter band used or None).
    """
    band = None
    x = s
    if not preprocessed:
        if filter_band is None:
            filter_band = (float(grid.centers[0]), float(grid.centers[-1]))
        lo = max(0.0, float(filter_band[0]))
        hi = min(float(filter_band[1]), math.pi * s.fs)
        x = pp.detrend(x, 3)
        x = pp.bandpass(x, lo, hi)
        band = (lo, hi)
    if pad_scheme is None or pad_scheme == "none":
        plan = pp.no_padding(s.N)
    else:
        if pad_scheme not in pp.PAD_SCHEMES:
            raise ValueError(f"unknown padding scheme {pad_scheme!r}")
        wmin = float(grid.centers[0])
        plan = pp.pad_plan(spec, kind, s.fs, wmin, eps, s.N, pad_scheme, max_padded)
    padded = pp.pad(x, plan, spec, kind, grid, wmin=float(grid.centers[0]))
    return padded, plan, band


def _engine(padded: Signal, plan: pp.PaddingPlan, spec: kn.KernelSpec, grid: FrequencyGrid,
            derivative: bool = False, positive_only: bool = True) -> tuple:
    """Rows of the transform (and optionally of its time derivative) cropped
    to the original record.  ``positive_only=False`` keeps the negative
    frequencies of the signal; that variant is only a diagnostic."""
    Np = padded.N
    fs = padded.fs
    xi = fft_frequencies(Np, fs)
    S = sfft.fft(padded.samples, workers=fft_workers())
    if positive_only:
        S = S * positive_frequency_mask(Np)
    idx = np.nonzero(S)[0]
    Sn = S[idx]
    resp = _Response(spec, Np, fs)
    centers = grid.centers
    N = plan.N
    out = np.zeros((centers.size, N), dtype=complex)
    dout = np.zeros((centers.size, N), dtype=complex) if derivative else None
    if idx.size == 0:
        return out, dout
    block = max(1, _BLOCK_SAMPLES // Np)
    for start in range(0, centers.size, block):
        rows = range(start, min(start + block, centers.size))
        buf = np.zeros((len(rows), Np), dtype=complex)
        for r, k in enumerate(rows):
            buf[r, idx] = Sn * resp(float(centers[k]), xi, idx)
        c = sfft.ifft(buf, axis=1, workers=fft_workers())
        out[start:start + len(rows)] = c[:, plan.n1:plan.n1 + N]
        if derivative:
            buf[:, idx] *= 1j * xi[idx]
            c = sfft.ifft(buf, axis=1, workers=fft_workers())
            dout[start:start + len(rows)] = c[:, plan.n1:plan.n1 + N]
    return out, dout


def _transform(s: Signal, spec: kn.KernelSpec, grid: FrequencyGrid, kind: str, pad_scheme,
               preprocessed: bool, eps: float, filter_band, derivative: bool,
               max_padded: int):
    _check_grid(spec, grid, kind, s.fs)
    padded, plan, band = prepare(s, spec, grid, kind, pad_scheme, preprocessed, eps,
                                 filter_band, max_padded)
    data, ddata = _engine(padded, plan, spec, grid, derivative)
    meta = {"epsilon": eps, "Np": plan.Np, "preprocessing_applied": not preprocessed,
            "n1_min": plan.n1_min, "n2_min": plan.n2_min}
    tfr = TimeFrequencyMap(data, grid, s.fs, s.t0, pp.base_kind(kind), spec,
                           PadRecord(plan.scheme, plan.n1, plan.n2), band, meta)
    if derivative:
        dtfr = TimeFrequencyMap(ddata, grid, s.fs, s.t0, pp.base_kind(kind), spec,
                                PadRecord(plan.scheme, plan.n1, plan.n2), band,
                                dict(meta, derivative=True))
        return tfr, dtfr
    return tfr


def compute_wft(s: Signal, spec: kn.KernelSpec, grid: FrequencyGrid, pad_scheme="predictive",
                preprocessed: bool = False, eps: float = 0.001, filter_band=None,
                derivative: bool = False, max_padded: int = pp.DEFAULT_MAX_PADDED):
    """Windowed Fourier transform on a linear grid.

    Unless ``preprocessed`` is true the signal is detrended (cubic) and
    band-pass filtered to ``filter_band`` (default: the grid span) first.
    ``pad_scheme`` is one of zero, periodic, symmetric, predictive, or
    None for no padding (a purely cyclic transform).  With ``derivative``
    the time derivative of the map is returned as a second map.
    """
    return _transform(s, spec, grid, "WFT", pad_scheme, preprocessed, eps, filter_band,
                      derivative, max_padded)


def compute_wt(s: Signal, spec: kn.KernelSpec, grid: FrequencyGrid, pad_scheme="predictive",
               preprocessed: bool = False, eps: float = 0.001, filter_band=None,
               derivative: bool = False, max_padded: int = pp.DEFAULT_MAX_PADDED):
    """Wavelet transform on a logarithmic grid; arguments as `compute_wft`.

    Pad counts scale with omega_psi / (lowest grid frequency).
    """
    return _transform(s, spec, grid, "WT", pad_scheme, preprocessed, eps, filter_band,
                      derivative, max_padded)


def compute(s: Signal, spec: kn.KernelSpec, grid: FrequencyGrid, **kw):
    """Dispatch to `compute_wt` or `compute_wft` by kernel kind."""
    return (compute_wt if spec.is_wavelet else compute_wft)(s, spec, grid, **kw)


# ---------------------------------------------------------------------------
# Inversion
# ---------------------------------------------------------------------------

def _rows(tfr: TimeFrequencyMap, band) -> slice:
    if band is None:
        return slice(0, tfr.grid.n_bins)
    return tfr.grid.index_range(float(band[0]), float(band[1]))


def invert_time(tfr: TimeFrequencyMap, band=None) -> AnalyticSignal:
    """Analytic signal by integrating the map over frequency.

    WFT: s^a(t) = C_g^-1 sum_k G(w_k, t) delta omega.
    WT:  s^a(t) = C_psi^-1 sum_k W(w_k, t) log 2 / n_v.
    The mean of the reconstructed signal is reported as zero, since the
    transforms never see the zero-frequency component.
    """
    if tfr.kind not in ("WFT", "WT"):
        raise ValueError("invert_time needs a WFT or WT map")
    consts = kn.kernel_constants(tfr.kernel)
    sl = _rows(tfr, band)
    vals = tfr.data[sl].sum(axis=0) * (tfr.grid.weight / consts.C)
    return AnalyticSignal(vals, 0.0, tfr.fs, tfr.t0)


def invert_freq(tfr: TimeFrequencyMap, omega=None) -> Spectrum:
    """Signal spectrum recovered from the map along time.

    s^(w) = C_tilde^-1 int G(w, t) exp(-i w t) dt at each requested bin
    frequency (default: all bins), with time measured from the first sample
    and the result expressed in discrete-transform units (as
    `forward_spectrum`).  Negative frequencies are filled by conjugation;
    coefficients are ordered positive first, then negative.
    """
    if tfr.kind not in ("WFT", "WT"):
        raise ValueError("invert_freq needs a WFT or WT map")
    grid = tfr.grid
    if omega is None:
        rows = np.arange(grid.n_bins)
    else:
        rows = grid.bin_of(np.atleast_1d(np.asarray(omega, dtype=float)))
        if np.any(rows < 0):
            raise ValueError("frequency outside grid")
    rows = rows[grid.centers[rows] > 0]
    consts = kn.kernel_constants(tfr.kernel)
    w = grid.centers[rows]
    n = np.arange(tfr.N)
    phase = np.exp(-1j * np.outer(w, n) / tfr.fs)
    pos = np.sum(tfr.data[rows] * phase, axis=1) / consts.C_tilde
    coef = np.concatenate([pos, np.conj(pos)])
    freqs = np.concatenate([w, -w])
    return Spectrum(coef, freqs, coef.size)
