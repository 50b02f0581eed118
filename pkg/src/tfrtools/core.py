"""Signal, spectrum, frequency-grid and time-frequency-map data model.

All frequencies inside the library are circular (rad/s); the sampling rate
``fs`` is in Hz.  Objects are immutable after construction: arrays are copied
and flagged read-only so they can be shared between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

TWO_PI = 2.0 * math.pi

# Relative slack used when rounding grid indices, so that a requested edge
# that is an exact multiple of the step (up to rounding) is included.
_GRID_SLACK = 1e-9


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def fft_frequencies(N: int, fs: float) -> np.ndarray:
    """Circular frequencies of an N-point discrete transform in storage order.

    Non-negative frequencies come first, up to index ceil((N-1)/2); for even
    N the Nyquist bin is therefore counted as positive.  The remaining bins
    hold the negative frequencies in increasing order.
    """
    if N < 1:
        raise ValueError("transform length must be positive")
    n = np.arange(N)
    n_pos = (N - 1 + 1) // 2  # ceil((N-1)/2)
    idx = np.where(n <= n_pos, n, n - N)
    return TWO_PI * fs * idx / N


def positive_frequency_mask(N: int) -> np.ndarray:
    """Weights selecting the strictly positive part of an N-point spectrum.

    Interior positive bins get weight 1.  For even N the Nyquist bin is its
    own mirror image, so it gets weight 1/2; this keeps
    ``mean + Re(2 * positive part)`` equal to the original signal.
    """
    mask = np.zeros(N)
    half = (N - 1) // 2
    mask[1:half + 1] = 1.0
    if N % 2 == 0 and N >= 2:
        mask[N // 2] = 0.5
    return mask


# ---------------------------------------------------------------------------
# Signal and spectrum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Signal:
    """Uniformly sampled real time series, t_n = t0 + n / fs."""

    samples: np.ndarray
    fs: float
    t0: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.samples)
        if np.iscomplexobj(x):
            raise ValueError("signal samples must be real")
        x = _frozen(x, float).ravel()
        if x.size == 0:
            raise ValueError("empty signal")
        if x.size < 2:
            raise ValueError("signal needs at least 2 samples")
        if not np.all(np.isfinite(x)):
            raise ValueError("signal contains non-finite samples")
        if not (self.fs > 0 and math.isfinite(self.fs)):
            raise ValueError("sampling frequency must be positive")
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "fs", float(self.fs))
        object.__setattr__(self, "t0", float(self.t0))

    @property
    def N(self) -> int:
        return self.samples.size

    @property
    def dt(self) -> float:
        return 1.0 / self.fs

    @property
    def T(self) -> float:
        """Record duration N / fs."""
        return self.N / self.fs

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.N) / self.fs

    def with_samples(self, samples) -> "Signal":
        return Signal(samples, self.fs, self.t0)


@dataclass(frozen=True)
class Spectrum:
    """Discrete transform of a signal, stored in `fft_frequencies` order."""

    coefficients: np.ndarray
    freqs: np.ndarray
    N: int

    def __post_init__(self):
        c = _frozen(self.coefficients, complex)
        f = _frozen(self.freqs, float)
        if c.shape != f.shape or c.size != self.N:
            raise ValueError("spectrum coefficients and frequencies disagree in length")
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "freqs", f)


def forward_spectrum(s: Signal) -> Spectrum:
    return Spectrum(np.fft.fft(s.samples), fft_frequencies(s.N, s.fs), s.N)


def inverse_spectrum(sp: Spectrum, fs: float, t0: float = 0.0) -> Signal:
    """Inverse transform; the (numerically tiny) imaginary part is dropped."""
    if sp.N == 0:
        raise ValueError("empty spectrum")
    return Signal(np.fft.ifft(sp.coefficients).real, fs, t0)


@dataclass(frozen=True)
class AnalyticSignal:
    """Twice the positive-frequency part of a real signal plus its mean."""

    values: np.ndarray
    mean: float
    fs: float
    t0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, complex))
        object.__setattr__(self, "mean", float(self.mean))

    @property
    def amplitude(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def phase(self) -> np.ndarray:
        return np.unwrap(np.angle(self.values))

    def to_signal(self) -> Signal:
        return Signal(self.mean + self.values.real, self.fs, self.t0)


def analytic_signal(s: Signal) -> AnalyticSignal:
    """s^a = 2 s^+, with the DC bin and all negative frequencies removed."""
    X = np.fft.fft(s.samples)
    values = np.fft.ifft(2.0 * positive_frequency_mask(s.N) * X)
    return AnalyticSignal(values, float(np.mean(s.samples)), s.fs, s.t0)


# ---------------------------------------------------------------------------
# Frequency grids
# ---------------------------------------------------------------------------

def _ceil(x: float) -> int:
    return int(math.ceil(x - _GRID_SLACK * max(1.0, abs(x))))


def _floor(x: float) -> int:
    return int(math.floor(x + _GRID_SLACK * max(1.0, abs(x))))


@dataclass(frozen=True)
class FrequencyGrid:
    """Bin layout anchored independently of any particular signal.

    Linear grids have centers ``(k - k0) * step`` (step = delta omega, rad/s);
    logarithmic grids have centers ``2 pi 2**((k - k0) / step)`` (step = number
    of voices per octave).  ``k`` runs from 1 to ``n_bins``.
    """

    kind: str
    step: float
    k0: int
    n_bins: int

    def __post_init__(self):
        if self.kind not in ("linear", "log"):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if not self.step > 0:
            raise ValueError("grid step must be positive")
        if self.n_bins < 1:
            raise ValueError("empty frequency grid")

    @classmethod
    def linear(cls, wmin: float, wmax: float, dw: float) -> "FrequencyGrid":
        if not dw > 0:
            raise ValueError("frequency step must be positive")
        if not wmax > wmin:
            raise ValueError("need wmin < wmax")
        k0 = 1 - _ceil(wmin / dw)
        n = k0 + _floor(wmax / dw)
        if n < 1:
            raise ValueError("empty frequency grid")
        return cls("linear", float(dw), int(k0), int(n))

    @classmethod
    def log(cls, wmin: float, wmax: float, nv: float) -> "FrequencyGrid":
        if not nv > 0:
            raise ValueError("number of voices must be positive")
        if not (wmin > 0 and wmax > wmin):
            raise ValueError("logarithmic grid needs 0 < wmin < wmax")
        k0 = 1 - _ceil(nv * math.log2(wmin / TWO_PI))
        n = k0 + _floor(nv * math.log2(wmax / TWO_PI))
        if n < 1:
            raise ValueError("empty frequency grid")
        return cls("log", float(nv), int(k0), int(n))

    @property
    def offsets(self) -> np.ndarray:
        """Signal-independent integer positions k - k0."""
        return np.arange(1, self.n_bins + 1) - self.k0

    @property
    def centers(self) -> np.ndarray:
        m = self.offsets
        if self.kind == "linear":
            return m * self.step
        return TWO_PI * np.exp2(m / self.step)

    @property
    def weight(self) -> float:
        """Mid-point integration weight: delta omega, or log(2)/n_v."""
        return self.step if self.kind == "linear" else math.log(2.0) / self.step

    @property
    def log_step(self) -> float:
        return math.log(2.0) / self.step

    def bin_of(self, nu) -> np.ndarray:
        """0-based bin index whose half-open cell (-w/2, +w/2] contains nu.

        Returns -1 where nu falls outside the grid (or is non-positive on a
        logarithmic grid).
        """
        nu = np.asarray(nu, dtype=float)
        first = self.centers[0]
        with np.errstate(invalid="ignore", divide="ignore"):
            if self.kind == "linear":
                x = (nu - first) / self.step
            else:
                x = np.where(nu > 0, np.log(nu / first) / self.log_step, np.nan)
            k = np.ceil(x - 0.5)
        ok = np.isfinite(k) & (k >= 0) & (k < self.n_bins)
        return np.where(ok, np.nan_to_num(k, nan=-1.0), -1).astype(np.int64)

    def restrict(self, wmin: float, wmax: float) -> "FrequencyGrid":
        """Sub-grid of the same anchor whose centers lie in [wmin, wmax]."""
        c = self.centers
        keep = np.nonzero((c >= wmin * (1 - _GRID_SLACK)) & (c <= wmax * (1 + _GRID_SLACK)))[0]
        if keep.size == 0:
            raise ValueError("band outside grid")
        return FrequencyGrid(self.kind, self.step, self.k0 - int(keep[0]), int(keep.size))

    def index_range(self, wmin: float, wmax: float) -> slice:
        c = self.centers
        keep = np.nonzero((c >= wmin) & (c <= wmax))[0]
        if keep.size == 0:
            raise ValueError("band outside grid")
        return slice(int(keep[0]), int(keep[-1]) + 1)

    def describe(self) -> dict:
        return {"kind": self.kind, "step": self.step, "k0": self.k0, "n_bins": self.n_bins}


# ---------------------------------------------------------------------------
# Time-frequency maps and component tracks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PadRecord:
    scheme: str
    n1: int
    n2: int


@dataclass(frozen=True)
class SparseEntries:
    """Coordinate list of nonzero entries, grouped by time then bin."""

    bins: np.ndarray
    times: np.ndarray
    values: np.ndarray
    shape: tuple

    def __post_init__(self):
        b = np.asarray(self.bins, dtype=np.int64)
        t = np.asarray(self.times, dtype=np.int64)
        v = np.asarray(self.values, dtype=complex)
        order = np.lexsort((b, t))
        object.__setattr__(self, "bins", _frozen(b[order], np.int64))
        object.__setattr__(self, "times", _frozen(t[order], np.int64))
        object.__setattr__(self, "values", _frozen(v[order], complex))
        object.__setattr__(self, "shape", tuple(int(d) for d in self.shape))

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=complex)
        np.add.at(out, (self.bins, self.times), self.values)
        return out


KINDS = ("WFT", "WT", "SWFT", "SWT")


@dataclass(frozen=True)
class TimeFrequencyMap:
    """Complex time-frequency representation over grid x time.

    ``data`` is a dense (n_bins, N) array for WFT/WT and a `SparseEntries`
    coordinate list for the synchrosqueezed kinds.
    """

    data: object
    grid: FrequencyGrid
    fs: float
    t0: float
    kind: str
    kernel: object = None
    pad: Optional[PadRecord] = None
    band: Optional[tuple] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown map kind {self.kind!r}")
        if self.kind in ("SWFT", "SWT"):
            if not isinstance(self.data, SparseEntries):
                raise TypeError("synchrosqueezed maps must be stored sparse")
            shape = self.data.shape
        else:
            arr = _frozen(self.data, complex)
            object.__setattr__(self, "data", arr)
            shape = arr.shape
        if len(shape) != 2 or shape[0] != self.grid.n_bins:
            raise ValueError("map dimensions inconsistent with the frequency grid")
        expected_grid = "linear" if self.kind in ("WFT", "SWFT") else "log"
        if self.grid.kind != expected_grid:
            raise ValueError(f"{self.kind} map needs a {expected_grid} grid")

    @property
    def is_sparse(self) -> bool:
        return isinstance(self.data, SparseEntries)

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def N(self) -> int:
        return self.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.N) / self.fs

    @property
    def freqs(self) -> np.ndarray:
        return self.grid.centers

    @property
    def T(self) -> float:
        return self.N / self.fs

    def dense(self) -> np.ndarray:
        return self.data.to_dense() if self.is_sparse else self.data


@dataclass(frozen=True)
class ComponentTrack:
    """Per-time ridge, support and reconstructed parameters of a component.

    Bin indices are 0-based; -1 marks a time where the track is missing.
    Parameters are NaN where undefined.
    """

    ridge: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    times: np.ndarray
    amplitude: Optional[np.ndarray] = None
    phase: Optional[np.ndarray] = None
    frequency: Optional[np.ndarray] = None
    method: Optional[str] = None
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        r = _frozen(self.ridge, np.int64)
        lo = _frozen(self.lower, np.int64)
        hi = _frozen(self.upper, np.int64)
        ok = r >= 0
        if np.any((lo[ok] > r[ok]) | (hi[ok] < r[ok])):
            raise ValueError("ridge must lie inside its support")
        object.__setattr__(self, "ridge", r)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "times", _frozen(self.times, float))
        for name in ("amplitude", "phase", "frequency"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, _frozen(val, float))
        if self.amplitude is not None and np.any(self.amplitude[np.isfinite(self.amplitude)] < 0):
            raise ValueError("amplitude must be non-negative")

    @property
    def present(self) -> np.ndarray:
        return self.ridge >= 0

    def with_estimates(self, amplitude=None, phase=None, frequency=None, method=None,
                       flags=None) -> "ComponentTrack":
        merged = dict(self.flags)
        merged.update(flags or {})
        return ComponentTrack(self.ridge, self.lower, self.upper, self.times,
                              amplitude, phase, frequency, method, merged)
