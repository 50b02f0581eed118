"""Phase velocities of WFT/WT maps and fast sparse synchrosqueezing.

Every coefficient of the source map is moved along frequency to the bin
containing its phase velocity nu(w, t) = d arg TFR / dt, weighted by the
source integration measure C^-1 delta omega (WFT) or C^-1 log 2 / n_v (WT).
Stored values are bin integrals, so a tone of amplitude A gives a single
entry equal to A, and the signal is recovered by a plain sum over bins.
"""

from __future__ import annotations

import math

import numpy as np

from . import kernels as kn
from . import preprocess as pp
from . import transform as tr
from .core import AnalyticSignal, FrequencyGrid, Signal, SparseEntries, TimeFrequencyMap

METHODS = ("finite_difference", "derivative_kernel")

# Coefficients below this fraction of the map maximum have no usable phase.
AMPLITUDE_FLOOR = 1e-10


def _valid(data: np.ndarray, floor: float) -> np.ndarray:
    amp = np.abs(data)
    top = amp.max() if amp.size else 0.0
    if top == 0.0:
        return np.zeros(data.shape, dtype=bool)
    return amp >= floor * top


def phase_velocity(tfr: TimeFrequencyMap, method: str = "finite_difference",
                   derivative: TimeFrequencyMap = None, floor: float = AMPLITUDE_FLOOR) -> np.ndarray:
    """Phase velocity nu(w_k, t_n) in rad/s for every entry of a WFT/WT map.

    finite_difference: the phase unwrapped along time per bin, differenced
    centrally inside the record and one-sidedly at both ends.
    derivative_kernel: Im[dTFR/dt / TFR], with ``derivative`` the map
    computed by `transform.compute_wft`/`compute_wt` with derivative=True.
    Entries whose amplitude is below ``floor`` times the map maximum are NaN.
    """
    if tfr.kind not in ("WFT", "WT"):
        raise ValueError("phase velocity needs a WFT or WT map")
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    data = tfr.data
    ok = _valid(data, floor)
    if method == "finite_difference":
        if tfr.N < 2:
            raise ValueError("finite differences need at least two samples")
        phi = np.unwrap(np.angle(data), axis=1)
        nu = np.empty(phi.shape)
        dt = 1.0 / tfr.fs
        nu[:, 1:-1] = (phi[:, 2:] - phi[:, :-2]) / (2.0 * dt)
        nu[:, 0] = (phi[:, 1] - phi[:, 0]) / dt
        nu[:, -1] = (phi[:, -1] - phi[:, -2]) / dt
    else:
        if derivative is None:
            raise ValueError("derivative_kernel needs the time-derivative map")
        if derivative.shape != tfr.shape:
            raise ValueError("derivative map has a different shape")
        with np.errstate(divide="ignore", invalid="ignore"):
            nu = np.imag(derivative.data / data)
    nu = np.where(ok, nu, np.nan)
    return nu


def widened_range(wmin: float, wmax: float, spec: kn.KernelSpec, kind: str = None,
                  eps: float = 0.001) -> tuple:
    """Frequency range for the source map of a synchrosqueezed transform.

    Components with frequencies in [wmin, wmax] leave their mark on a
    wider band of WFT/WT rows.  Windows: [wmin + xi1(eps), wmax + xi2(eps)].
    Wavelets: [wmin xi1/xi2, wmax xi2/xi1].
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    kind = kind or ("WT" if spec.is_wavelet else "WFT")
    xi1, xi2 = kn.epsilon_support_freq(spec, eps)
    if pp.base_kind(kind) == "WT":
        if not xi1 > 0:
            raise ValueError("widened lower edge is not positive")
        lo, hi = wmin * xi1 / xi2, wmax * xi2 / xi1
        if not lo > 0:
            raise ValueError("widened lower edge is not positive")
        return lo, hi
    return wmin + xi1, wmax + xi2


def _compensated_group_sums(keys: np.ndarray, values: np.ndarray):
    """Sum values sharing a key with Neumaier compensation.

    Returns (unique keys, sums).  Within a group the terms are added in
    their input order, so the result depends only on the input data.
    """
    order = np.argsort(keys, kind="stable")
    k = keys[order]
    v = values[order]
    uniq, start, counts = np.unique(k, return_index=True, return_counts=True)
    total = np.zeros(uniq.size, dtype=complex)
    comp = np.zeros(uniq.size, dtype=complex)
    for j in range(int(counts.max()) if counts.size else 0):
        g = np.nonzero(counts > j)[0]
        x = v[start[g] + j]
        for part in ("real", "imag"):
            s = getattr(total[g], part)
            c = getattr(comp[g], part)
            xp = getattr(x, part)
            t = s + xp
            big = np.abs(s) >= np.abs(xp)
            c = c + np.where(big, (s - t) + xp, (xp - t) + s)
            if part == "real":
                total.real[g] = t
                comp.real[g] = c
            else:
                total.imag[g] = t
                comp.imag[g] = c
    return uniq, total + comp


def squeeze(tfr: TimeFrequencyMap, nu: np.ndarray, out_grid: FrequencyGrid = None,
            constants: kn.KernelConstants = None, threshold: float = None) -> TimeFrequencyMap:
    """Synchrosqueeze a WFT/WT map onto ``out_grid`` (default: its own grid).

    Each coefficient with a defined phase velocity inside the output grid is
    added to the bin whose half-open cell (w_k - w/2, w_k + w/2] holds it,
    multiplied by the source measure over C.  Coefficients with amplitude
    below the optional absolute ``threshold`` are discarded first.
    """
    if tfr.kind not in ("WFT", "WT"):
        raise ValueError("squeeze needs a WFT or WT map")
    out_grid = out_grid or tfr.grid
    if out_grid.kind != tfr.grid.kind:
        raise ValueError("output grid must be of the same kind as the source grid")
    nu = np.asarray(nu, dtype=float)
    if nu.shape != tfr.shape:
        raise ValueError("phase velocity array has a different shape than the map")
    consts = constants or kn.kernel_constants(tfr.kernel)
    C = complex(consts.C)
    if not np.isfinite(C) or C == 0:
        raise ValueError("reconstruction constant must be finite and nonzero")
    q = tfr.grid.weight / C
    data = tfr.data
    keep = np.isfinite(nu)
    if threshold is not None:
        keep &= np.abs(data) >= threshold
    src_bin, time = np.nonzero(keep)
    target = out_grid.bin_of(nu[src_bin, time])
    inside = target >= 0
    src_bin, time, target = src_bin[inside], time[inside], target[inside]
    vals = data[src_bin, time] * q
    # Group by (time, target bin); source bins are visited in increasing
    # order within each group.
    key = time.astype(np.int64) * out_grid.n_bins + target
    uniq, sums = _compensated_group_sums(key, vals)
    nz = sums != 0
    uniq, sums = uniq[nz], sums[nz]
    entries = SparseEntries(uniq % out_grid.n_bins, uniq // out_grid.n_bins, sums,
                            (out_grid.n_bins, tfr.N))
    kind = "SWFT" if tfr.kind == "WFT" else "SWT"
    meta = dict(tfr.meta)
    meta["source_grid"] = tfr.grid.describe()
    return TimeFrequencyMap(entries, out_grid, tfr.fs, tfr.t0, kind, tfr.kernel, tfr.pad,
                            tfr.band, meta)


def invert_ss(ss: TimeFrequencyMap, band=None) -> AnalyticSignal:
    """Analytic signal as the plain sum of a synchrosqueezed map over bins.

    ``band`` = (w_a, w_b) restricts the sum to bins with centers inside it;
    a band reaching no bin of the grid raises, a band with no stored
    entries gives zero.
    """
    if ss.kind not in ("SWFT", "SWT"):
        raise ValueError("invert_ss needs an SWFT or SWT map")
    e = ss.data
    sel = np.ones(e.nnz, dtype=bool)
    if band is not None:
        lo, hi = float(band[0]), float(band[1])
        c = ss.grid.centers
        if hi < lo or hi < c[0] or lo > c[-1]:
            raise ValueError("band outside grid")
        cb = c[e.bins]
        sel = (cb >= lo) & (cb <= hi)
    out = np.zeros(ss.N, dtype=complex)
    np.add.at(out, e.times[sel], e.values[sel])
    return AnalyticSignal(out, 0.0, ss.fs, ss.t0)


def synchrosqueeze(s: Signal, spec: kn.KernelSpec, wmin: float, wmax: float, step: float = None,
                   out_step: float = None, eps: float = 0.001,
                   method: str = "finite_difference", pad_scheme="predictive",
                   preprocessed: bool = False, threshold: float = None,
                   relative_threshold: float = None, return_source: bool = False):
    """SWFT or SWT of a signal on [wmin, wmax] (rad/s), end to end.

    The signal is band-pass filtered to [wmin, wmax] (unless
    ``preprocessed``), the source map is computed on the widened range with
    bin width ``step`` (default from `transform.choose_step`), phase
    velocities are estimated by ``method`` and the result is squeezed onto
    bins of width ``out_step`` (default ``step``) covering [wmin, wmax].
    ``threshold`` (absolute) or ``relative_threshold`` (fraction of the
    source map maximum) discards small source coefficients.
    """
    kind = "WT" if spec.is_wavelet else "WFT"
    step = step or tr.choose_step(spec)
    lo, hi = widened_range(wmin, wmax, spec, kind, eps)
    hi = min(hi, math.pi * s.fs)
    src_grid = tr.build_grid(kind, lo, hi, step)
    out_grid = tr.build_grid(kind, wmin, wmax, out_step or step)
    derivative = method == "derivative_kernel"
    res = tr.compute(s, spec, src_grid, pad_scheme=pad_scheme, preprocessed=preprocessed,
                     filter_band=(max(wmin, 0.0), wmax), derivative=derivative)
    tfr, dtfr = res if derivative else (res, None)
    nu = phase_velocity(tfr, method, dtfr)
    if relative_threshold is not None:
        top = float(np.max(np.abs(tfr.data))) if tfr.data.size else 0.0
        rel = relative_threshold * top
        threshold = rel if threshold is None else max(threshold, rel)
    ss = squeeze(tfr, nu, out_grid, threshold=threshold)
    ss.meta.update({"method": method, "eps_range": eps})
    if return_source:
        return ss, tfr, nu
    return ss
