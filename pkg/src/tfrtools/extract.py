"""Component extraction: time-frequency supports and parameter estimates.

A component is identified at each time by its ridge, the highest amplitude
peak (optionally within a frequency band), and its support, the widest
region around the ridge where the amplitude is nonzero and, for smooth
maps, unimodal.  Amplitude, phase and frequency are then estimated by
integrating over the support (direct), from the peak values with a
quadratic correction for the bin discretization (ridge), or by averaging
the map's phase velocity over the support (hybrid).
"""

from __future__ import annotations

import math

import numpy as np

from . import kernels as kn
from .core import ComponentTrack, TimeFrequencyMap

# Fraction of the column maximum below which a smooth map counts as zero.
SUPPORT_FLOOR = 1e-10
# Denominators smaller than this fraction of their column scale are empty.
EMPTY_FLOOR = 1e-300


def _smooth(tfr: TimeFrequencyMap) -> bool:
    return tfr.kind in ("WFT", "WT")


def _unwrap_present(phase: np.ndarray, present: np.ndarray) -> np.ndarray:
    out = np.full(phase.shape, np.nan)
    if np.any(present):
        out[present] = np.unwrap(phase[present])
    return out


def extract_tfs(tfr: TimeFrequencyMap, band=None, floor: float = SUPPORT_FLOOR) -> ComponentTrack:
    """Ridge and support of one component at every time.

    ``band`` = (w_a, w_b) in rad/s constrains the ridge search; by default
    the global maximum of each column is taken.  The support stops where
    the amplitude drops to zero (below ``floor`` times the column maximum
    for WFT/WT, exactly zero for synchrosqueezed maps) or, for WFT/WT,
    where it starts to rise again.  Columns without any nonzero amplitude
    are marked missing.  Supports reaching the grid edge are flagged in
    ``flags["lower_clamped"]`` and ``flags["upper_clamped"]``.
    """
    amp = np.abs(tfr.dense())
    nb, N = amp.shape
    idx = np.arange(nb)[:, None]
    allowed = np.ones(nb, dtype=bool)
    if band is not None:
        c = tfr.grid.centers
        allowed = (c >= band[0]) & (c <= band[1])
        if not allowed.any():
            raise ValueError("band outside grid")
    masked = np.where(allowed[:, None], amp, -1.0)
    ridge = np.argmax(masked, axis=0)
    peak = masked[ridge, np.arange(N)]
    colmax = amp.max(axis=0)
    present = peak > 0
    if _smooth(tfr):
        thr = floor * colmax
        nonzero = amp > thr[None, :]
        present &= peak > thr
        down_ok = np.zeros_like(nonzero)
        down_ok[:-1] = nonzero[:-1] & (amp[:-1] <= amp[1:])
        up_ok = np.zeros_like(nonzero)
        up_ok[1:] = nonzero[1:] & (amp[1:] <= amp[:-1])
    else:
        nonzero = amp > 0
        down_ok = up_ok = nonzero
    fail_below = (~down_ok) & (idx < ridge[None, :])
    lower = np.max(np.where(fail_below, idx, -1), axis=0) + 1
    fail_above = (~up_ok) & (idx > ridge[None, :])
    upper = np.min(np.where(fail_above, idx, nb), axis=0) - 1
    ridge = np.where(present, ridge, -1)
    lower = np.where(present, lower, -1)
    upper = np.where(present, upper, -1)
    flags = {
        "lower_clamped": present & (lower == 0) & nonzero[0],
        "upper_clamped": present & (upper == nb - 1) & nonzero[nb - 1],
        "band": None if band is None else (float(band[0]), float(band[1])),
    }
    return ComponentTrack(ridge, lower, upper, tfr.times, flags=flags)


def _support_mask(track: ComponentTrack, nb: int) -> np.ndarray:
    idx = np.arange(nb)[:, None]
    return (idx >= track.lower[None, :]) & (idx <= track.upper[None, :]) & track.present[None, :]


def _measure(tfr: TimeFrequencyMap) -> float:
    """Mid-point integration weight per bin (plain sum for squeezed maps)."""
    return tfr.grid.weight if _smooth(tfr) else 1.0


def direct_reconstruct(tfr: TimeFrequencyMap, track: ComponentTrack,
                       constants: kn.KernelConstants = None) -> ComponentTrack:
    """Amplitude, phase and frequency by integration over the support.

    WFT: A e^{i phi} = C^-1 sum G delta omega and
    nu = Re[sum w G / sum G - omega_bar].
    WT: A e^{i phi} = C^-1 sum W log2/n_v and
    nu = Re[(D^-1 sum w W) / (C^-1 sum W)], which needs a finite D.
    SWFT/SWT: A e^{i phi} = sum V and nu = Re[sum w V / sum V]; this
    frequency estimate follows by analogy and is heuristic.
    For WFT/WT the imaginary part of the frequency ratio gives the relative
    amplitude rate, returned as ``flags["amplitude_rate"]`` (1/s).
    """
    Y = tfr.dense()
    nb = Y.shape[0]
    w = tfr.grid.centers[:, None]
    q = _measure(tfr)
    M = _support_mask(track, nb)
    S0 = np.sum(np.where(M, Y, 0.0), axis=0) * q
    S1 = np.sum(np.where(M, Y * w, 0.0), axis=0) * q
    present = track.present.copy()
    empty = present & (np.abs(S0) <= EMPTY_FLOOR)
    ok = present & ~empty
    flags = dict(track.flags)
    flags["empty"] = empty
    if _smooth(tfr):
        consts = constants or kn.kernel_constants(tfr.kernel)
        C = complex(consts.C)
        z = S0 / C
        with np.errstate(divide="ignore", invalid="ignore"):
            if tfr.kind == "WFT":
                ratio = S1 / S0 - consts.omega_bar
            else:
                if consts.D is None or consts.D_infinite or not np.isfinite(complex(consts.D)):
                    raise ValueError("direct wavelet frequency estimate needs a finite D; "
                                     "use hybrid_frequency instead")
                ratio = (S1 / complex(consts.D)) / (S0 / C)
        flags["amplitude_rate"] = np.where(ok, -np.imag(ratio), np.nan)
    else:
        z = S0
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = S1 / S0
    amp = np.where(ok, np.abs(z), np.nan)
    phase = _unwrap_present(np.angle(z), ok)
    nu = np.where(ok, np.real(ratio), np.nan)
    return track.with_estimates(amplitude=amp, phase=phase, frequency=nu, method="direct",
                                flags=flags)


def _quadratic_offset(a1, a2, a3):
    """Vertex offset, in bin units, of the parabola through three values."""
    den = 2.0 * a2 - a1 - a3
    with np.errstate(divide="ignore", invalid="ignore"):
        d = 0.5 * (a3 - a1) / den
    return np.where(den != 0, d, 0.0)


def ridge_reconstruct(tfr: TimeFrequencyMap, track: ComponentTrack) -> ComponentTrack:
    """Parameters from the map values at the ridge.

    WFT: nu = w_p + delta, delta from the three-point quadratic through the
    amplitudes around the peak; A e^{i phi} = 2 G(w_p) / ghat(w_p - nu).
    WT: the same correction on the log-frequency scale and
    A e^{i phi} = 2 W(w_p) / conj(psihat(w_psi nu / w_p)).
    SWFT/SWT: nu = w_p and phi = arg of the ridge value; no amplitude.
    Ridges on the first or last bin are left uncorrected and flagged in
    ``flags["edge"]``.
    """
    Y = tfr.dense()
    nb, N = Y.shape
    present = track.present
    cols = np.arange(N)
    k = np.where(present, track.ridge, 0)
    wp = tfr.grid.centers[k]
    yp = Y[k, cols]
    flags = dict(track.flags)
    edge = present & ((k == 0) | (k == nb - 1))
    flags["edge"] = edge
    if not _smooth(tfr):
        nu = np.where(present, wp, np.nan)
        phase = _unwrap_present(np.angle(yp), present)
        return track.with_estimates(amplitude=None, phase=phase, frequency=nu, method="ridge",
                                    flags=flags)
    amp_map = np.abs(Y)
    inner = present & ~edge
    a1 = amp_map[np.clip(k - 1, 0, nb - 1), cols]
    a2 = amp_map[k, cols]
    a3 = amp_map[np.clip(k + 1, 0, nb - 1), cols]
    d = np.where(inner, _quadratic_offset(a1, a2, a3), 0.0)
    spec = tfr.kernel
    if tfr.kind == "WFT":
        nu = wp + d * tfr.grid.step
        resp = spec.freq(wp - nu)
    else:
        nu = wp * np.exp(d * tfr.grid.log_step)
        resp = np.conj(spec.freq(spec.omega_psi * nu / wp))
    resp = np.asarray(resp, dtype=complex)
    bad = present & (resp == 0)
    if np.any(bad):
        raise ValueError("kernel response vanishes at the corrected ridge frequency")
    with np.errstate(divide="ignore", invalid="ignore"):
        z = 2.0 * yp / resp
    amp = np.where(present, np.abs(z), np.nan)
    phase = _unwrap_present(np.angle(z), present)
    nu = np.where(present, nu, np.nan)
    return track.with_estimates(amplitude=amp, phase=phase, frequency=nu, method="ridge",
                                flags=flags)


def hybrid_frequency(tfr: TimeFrequencyMap, nu_map: np.ndarray, track: ComponentTrack) -> np.ndarray:
    """Frequency as the map-weighted mean of the phase velocity over the support.

    nu = Re[sum nu_G G / sum G] (WFT) or the same with W and the
    log-frequency measure (WT).  Entries with undefined phase velocity are
    left out of both sums.
    """
    if tfr.kind not in ("WFT", "WT"):
        raise ValueError("hybrid estimate needs a WFT or WT map")
    nu_map = np.asarray(nu_map, dtype=float)
    if nu_map.shape != tfr.shape:
        raise ValueError("phase velocity array has a different shape than the map")
    Y = tfr.data
    M = _support_mask(track, Y.shape[0]) & np.isfinite(nu_map)
    num = np.sum(np.where(M, Y * np.nan_to_num(nu_map), 0.0), axis=0)
    den = np.sum(np.where(M, Y, 0.0), axis=0)
    ok = track.present & (np.abs(den) > EMPTY_FLOOR)
    with np.errstate(divide="ignore", invalid="ignore"):
        nu = np.real(num / den)
    return np.where(ok, nu, np.nan)


def hybrid_reconstruct(tfr: TimeFrequencyMap, nu_map: np.ndarray, track: ComponentTrack,
                       constants: kn.KernelConstants = None) -> ComponentTrack:
    """Direct amplitude and phase with the hybrid frequency estimate."""
    consts = constants or kn.kernel_constants(tfr.kernel)
    Y = tfr.data
    M = _support_mask(track, Y.shape[0])
    z = np.sum(np.where(M, Y, 0.0), axis=0) * tfr.grid.weight / complex(consts.C)
    ok = track.present & (np.abs(z) > EMPTY_FLOOR)
    amp = np.where(ok, np.abs(z), np.nan)
    phase = _unwrap_present(np.angle(z), ok)
    nu = hybrid_frequency(tfr, nu_map, track)
    return track.with_estimates(amplitude=amp, phase=phase, frequency=nu, method="hybrid",
                                flags=dict(track.flags))


def reconstruct(tfr: TimeFrequencyMap, track: ComponentTrack, method: str = "direct",
                nu_map: np.ndarray = None) -> ComponentTrack:
    """Dispatch on ``method`` in {direct, ridge, hybrid}."""
    if method == "direct":
        return direct_reconstruct(tfr, track)
    if method == "ridge":
        return ridge_reconstruct(tfr, track)
    if method == "hybrid":
        if nu_map is None:
            raise ValueError("hybrid reconstruction needs the phase velocity map")
        return hybrid_reconstruct(tfr, nu_map, track)
    raise ValueError(f"unknown reconstruction method {method!r}")
