"""Error estimates and validity regions for time-frequency maps.

Boundary errors and cones of influence assume zero padding, for which the
lost part of the kernel integral has a universal form.  The record spans
[0, T] with T = (N - 1) / fs, measured from the first sample.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import kernels as kn
from . import preprocess as pp
from . import transform as tr
from .core import TWO_PI, Signal, TimeFrequencyMap

# Bessel terms with |J_n(r_b)| below this are dropped from the series.
BESSEL_CUTOFF = 1e-12


def _base(kind: str, spec: kn.KernelSpec) -> str:
    if kind is None:
        return "WT" if spec.is_wavelet else "WFT"
    return pp.base_kind(kind)


# ---------------------------------------------------------------------------
# Boundary errors and cones of influence
# ---------------------------------------------------------------------------

def boundary_error(spec: kn.KernelSpec, kind: str, t, T: float, omega=None) -> np.ndarray:
    """Relative boundary error of a zero-padded transform at time(s) t.

    WFT: |P_g(-t)| + |1 - P_g(T - t)|.
    WT: |P_psi(-w t / w_psi)| + |1 - P_psi(w (T - t) / w_psi)|.
    P is the cumulative fraction of the kernel integral in time, so both
    terms are the parts of the kernel falling outside the record.
    """
    base = _base(kind, spec)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > T):
        raise ValueError("times must lie inside [0, T]")
    P = kn.time_cumulative(spec)
    if base == "WT":
        if omega is None:
            raise ValueError("wavelet boundary error needs the frequency omega")
        a = np.asarray(omega, dtype=float) / spec.omega_psi
        left, right = -a * t, a * (T - t)
    else:
        left, right = -t, T - t
    shape = np.broadcast(left, right).shape
    left = np.broadcast_to(left, shape).ravel()
    right = np.broadcast_to(right, shape).ravel()
    out = np.abs(P(left)) + np.abs(1.0 - P(right))
    return np.asarray(out, dtype=float).reshape(shape)


@dataclass(frozen=True)
class Cone:
    """Cone of influence: mask over (bin, time) plus its bounds.

    ``t_start``/``t_end`` are per-bin times (s, absolute) and
    ``freq_range`` the frequency interval (rad/s) inside the cone.
    """

    mask: np.ndarray
    t_start: np.ndarray
    t_end: np.ndarray
    freq_range: tuple
    eps: float

    @property
    def empty(self) -> bool:
        return not bool(self.mask.any())


def _time_trims(spec: kn.KernelSpec, base: str, eps: float, omega: np.ndarray) -> tuple:
    tau1, tau2 = kn.epsilon_support_time(spec, eps)
    if base == "WT":
        scale = spec.omega_psi / omega
        return -tau1 * scale, tau2 * scale
    ones = np.ones_like(omega)
    return -tau1 * ones, tau2 * ones


def _source_range(tfr: TimeFrequencyMap) -> tuple:
    src = tfr.meta.get("source_grid")
    if src is None:
        c = tfr.grid.centers
        return float(c[0]), float(c[-1])
    from .core import FrequencyGrid
    g = FrequencyGrid(src["kind"], src["step"], src["k0"], src["n_bins"])
    c = g.centers
    return float(c[0]), float(c[-1])


def cone_of_influence(tfr: TimeFrequencyMap, eps: float = 0.001) -> Cone:
    """Region of a map where the zero-padding boundary error is at most eps.

    WFT: all frequencies, t in [-tau1, T - tau2].
    WT: per frequency, t in [-w_psi tau1 / w, T - w_psi tau2 / w].
    SWFT: frequencies in [w_min - xi1, w_max - xi2] of the source range,
    with the WFT time trims.
    SWT: frequencies in [w_min w_psi / xi1, w_max w_psi / xi2] of the source
    range, with the WT time trims taken at w xi1 / w_psi.
    The epsilon-supports are used as equalities, which is the conservative
    choice.  An empty cone is returned with a warning.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    spec = tfr.kernel
    if spec is None:
        raise ValueError("map carries no kernel")
    wav = tfr.kind in ("WT", "SWT")
    base = "WT" if wav else "WFT"
    c = tfr.grid.centers
    T = (tfr.N - 1) / tfr.fs
    lo_f, hi_f = -np.inf, np.inf
    w_eval = c
    if tfr.kind in ("SWFT", "SWT"):
        wmin, wmax = _source_range(tfr)
        xi1, xi2 = kn.epsilon_support_freq(spec, eps)
        if tfr.kind == "SWFT":
            lo_f, hi_f = wmin - xi1, wmax - xi2
        else:
            r2 = spec.omega_psi / xi1
            r1 = xi2 / spec.omega_psi
            lo_f, hi_f = wmin * r2, wmax / r1
            w_eval = c / r2
    d1, d2 = _time_trims(spec, base, eps, w_eval)
    t_start = tfr.t0 + d1
    t_end = tfr.t0 + T - d2
    times = tfr.times
    in_f = (c >= lo_f) & (c <= hi_f)
    mask = in_f[:, None] & (times[None, :] >= t_start[:, None]) & (times[None, :] <= t_end[:, None])
    cone = Cone(mask, t_start, t_end, (float(max(lo_f, c[0])), float(min(hi_f, c[-1]))), eps)
    if cone.empty:
        warnings.warn("cone of influence is empty: the signal is too short for this accuracy",
                      RuntimeWarning, stacklevel=2)
    return cone


# ---------------------------------------------------------------------------
# Frequency range limits
# ---------------------------------------------------------------------------

def frequency_limits(spec: kn.KernelSpec, kind: str, T: float, fs: float,
                     eps: float = 0.001) -> dict:
    """Lower and upper frequency limits (rad/s) for a record of length T.

    omega_min_hard: one cycle in the record; omega_min_stat: five cycles;
    omega_min_eps: lowest frequency with any coefficient inside the cone of
    influence (-inf for WFT/SWFT); omega_max: the Nyquist frequency.
    """
    if not (T > 0 and fs > 0):
        raise ValueError("T and fs must be positive")
    kind = kind or ("WT" if spec.is_wavelet else "WFT")
    if kind not in ("WFT", "WT", "SWFT", "SWT"):
        raise ValueError(f"unknown kind {kind!r}")
    out = {"omega_min_hard": TWO_PI / T, "omega_min_stat": TWO_PI * 5.0 / T,
           "omega_min_eps": -math.inf, "omega_max": math.pi * fs}
    if kind in ("WT", "SWT"):
        tau1, tau2 = kn.epsilon_support_time(spec, eps)
        if kind == "WT":
            out["omega_min_eps"] = spec.omega_psi * (tau2 - tau1) / T
        else:
            xi2 = kn.epsilon_support_freq(spec, eps)[1]
            out["omega_min_eps"] = xi2 * (tau2 - tau1) / T
    return out


# ---------------------------------------------------------------------------
# Negative-frequency interference
# ---------------------------------------------------------------------------

def negative_freq_interference(spec: kn.KernelSpec, kind: str, nu=None, omega=None,
                               case: str = "tone", tiny: float = 1e-300) -> np.ndarray:
    """Relative interference from negative frequencies if the full signal
    (rather than its positive part) were transformed.

    tone (frequency nu, evaluated at bin omega):
      WFT |ghat(w + nu) / ghat(w - nu)|,
      WT |psihat(-w_psi nu / w) / psihat(w_psi nu / w)|.
    delta (impulse, at bin omega for the WFT):
      WFT int_w^inf ghat / int ghat, WT int_-inf^0 psihat / int psihat.
    """
    base = _base(kind, spec)
    if case == "tone":
        nu = np.asarray(nu, dtype=float)
        omega = np.asarray(omega, dtype=float)
        if np.any(nu <= 0) or np.any(omega <= 0):
            raise ValueError("nu and omega must be positive")
        if base == "WT":
            x = spec.omega_psi * nu / omega
            num, den = spec.freq(-x), spec.freq(x)
        else:
            num, den = spec.freq(omega + nu), spec.freq(omega - nu)
        num, den = np.abs(num), np.abs(den)
        if np.any(den <= tiny * np.maximum(num, 1.0)):
            raise ValueError("kernel response vanishes at the tone frequency")
        return num / den
    if case == "delta":
        if base == "WT":
            lo, hi = spec.freq_extent()
            if lo >= 0:
                return np.asarray(0.0)
            f = lambda x: np.conj(spec.freq(np.array([x])))[0]
            neg = kn._quad_complex(f, lo, 0.0)
            total = neg + kn._quad_complex(f, 0.0, hi, points=[spec.omega_psi])
            if abs(total) <= tiny:
                raise ValueError("kernel integral vanishes")
            return np.asarray(abs(neg / total))
        omega = np.asarray(omega, dtype=float)
        if np.any(omega <= 0):
            raise ValueError("omega must be positive")
        R = kn.freq_cumulative(spec)
        return np.abs(1.0 - R(omega))
    raise ValueError("case must be 'tone' or 'delta'")


def unfiltered_transform(s: Signal, spec: kn.KernelSpec, grid, pad_scheme="predictive",
                         preprocessed: bool = True, eps: float = 0.001) -> TimeFrequencyMap:
    """Diagnostic WFT/WT of the full signal, negative frequencies included.

    Identical to `transform.compute` except that the signal spectrum is not
    restricted to positive frequencies.  Use only to demonstrate the
    interference that the positive-frequency restriction removes.
    """
    kind = "WT" if spec.is_wavelet else "WFT"
    tr._check_grid(spec, grid, kind, s.fs)
    padded, plan, band = tr.prepare(s, spec, grid, kind, pad_scheme, preprocessed, eps)
    data, _ = tr._engine(padded, plan, spec, grid, positive_only=False)
    from .core import PadRecord
    meta = {"epsilon": eps, "Np": plan.Np, "unfiltered": True,
            "preprocessing_applied": not preprocessed}
    return TimeFrequencyMap(data, grid, s.fs, s.t0, kind, spec,
                            PadRecord(plan.scheme, plan.n1, plan.n2), band, meta)


# ---------------------------------------------------------------------------
# Error of the analytic-signal estimates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnalyticError:
    """Error z - s^a of the analytic estimate for a sinusoidally modulated
    component z = A e^{i phi}.

    ``freqs``/``coefs`` hold the spectral lines of z at frequencies <= 0;
    ``values`` is the error at ``times`` (if requested) and ``relative`` the
    time-averaged <|eps|^2> / <A^2>.
    """

    freqs: np.ndarray
    coefs: np.ndarray
    relative: float
    times: np.ndarray = None
    values: np.ndarray = None


def _bessel_orders(r_b: float) -> np.ndarray:
    if r_b == 0.0:
        return np.array([0])
    n = 0
    while True:
        n += 1
        if n > r_b and abs(special.jv(n, r_b)) < BESSEL_CUTOFF:
            break
    return np.arange(-n + 1, n)


def _lines(am: dict, fm: dict, nu: float, phi: float):
    """Spectral lines (frequency, coefficient) of (1 + r_a cos(.)) e^{i phi(t)}."""
    r_a = float(am.get("r", 0.0))
    nu_a = float(am.get("nu", 0.0))
    ph_a = float(am.get("phi", 0.0))
    r_b = float(fm.get("r", 0.0))
    nu_b = float(fm.get("nu", 0.0))
    ph_b = float(fm.get("phi", 0.0))
    if not 0.0 <= r_a <= 1.0:
        raise ValueError("amplitude modulation depth must lie in [0, 1]")
    if r_b < 0 or nu_a < 0 or nu_b < 0 or not nu > 0:
        raise ValueError("modulation parameters must be non-negative and nu positive")
    if r_b * nu_b > nu:
        raise ValueError("frequency modulation makes the phase non-monotonic (need r_b nu_b <= nu)")
    n = _bessel_orders(r_b) if nu_b > 0 else np.array([0])
    J = special.jv(n, r_b) if nu_b > 0 else np.array([1.0])
    base_f = nu + n * nu_b
    base_c = J * np.exp(1j * (phi + n * ph_b))
    freqs = [base_f]
    coefs = [base_c]
    if r_a > 0:
        freqs += [base_f + nu_a, base_f - nu_a]
        coefs += [0.5 * r_a * base_c * np.exp(1j * ph_a), 0.5 * r_a * base_c * np.exp(-1j * ph_a)]
    f = np.concatenate(freqs)
    c = np.concatenate(coefs)
    return f, c, r_a, nu_a, ph_a


def _merge(f: np.ndarray, c: np.ndarray, scale: float) -> tuple:
    key = np.round(f / (scale * 1e-12)).astype(np.int64)
    uniq, inv = np.unique(key, return_inverse=True)
    sums = np.zeros(uniq.size, dtype=complex)
    np.add.at(sums, inv, c)
    freq = np.zeros(uniq.size)
    np.add.at(freq, inv, f)
    freq /= np.bincount(inv)
    freq[uniq == 0] = 0.0
    return freq, sums


def analytic_error(am: dict, fm: dict, nu: float, phi: float = 0.0, times=None) -> AnalyticError:
    """Error of the analytic amplitude/phase for a modulated component.

    The component is (1 + r_a cos(nu_a t + phi_a)) cos(nu t + phi +
    r_b sin(nu_b t + phi_b)) with ``am`` = {r, nu, phi} and ``fm`` =
    {r, nu, phi}.  Expanding exp(i r_b sin x) in Bessel functions splits
    z = A e^{i phi} into spectral lines; the error is
    eps = <z> + 2 i Im[z^-], where z^- collects the negative lines.
    """
    f, c, r_a, nu_a, ph_a = _lines(am, fm, nu, phi)
    f, c = _merge(f, c, nu)
    sel = f <= 0
    fz, cz = f[sel], c[sel]
    zero = fz == 0
    c0 = complex(cz[zero].sum()) if zero.any() else 0.0
    power = abs(c0) ** 2 + 2.0 * float(np.sum(np.abs(cz[~zero]) ** 2))
    if nu_a > 0:
        mean_a2 = 1.0 + 0.5 * r_a ** 2
    else:
        mean_a2 = (1.0 + r_a * math.cos(ph_a)) ** 2
    values = None
    if times is not None:
        times = np.asarray(times, dtype=float)
        neg = ~zero
        zm = (cz[neg][None, :] * np.exp(1j * fz[neg][None, :] * times[:, None])).sum(axis=1)
        values = c0 + 2j * zm.imag
    return AnalyticError(fz, cz, power / mean_a2, times, values)


def analytic_error_bruteforce(am: dict, fm: dict, nu: float, phi: float = 0.0,
                              fs: float = 200.0, T: float = None) -> tuple:
    """Reference error from the FFT analytic signal of the sampled component.

    All frequencies should be commensurate with 2 pi / T so that the record
    is exactly periodic.  Returns (times, eps values, relative RMS error).
    """
    from .core import analytic_signal
    r_a = float(am.get("r", 0.0))
    nu_a = float(am.get("nu", 0.0))
    ph_a = float(am.get("phi", 0.0))
    r_b = float(fm.get("r", 0.0))
    nu_b = float(fm.get("nu", 0.0))
    ph_b = float(fm.get("phi", 0.0))
    if T is None:
        raise ValueError("record length T is required")
    N = int(round(T * fs))
    t = np.arange(N) / fs
    A = 1.0 + r_a * np.cos(nu_a * t + ph_a)
    ph = nu * t + phi + r_b * np.sin(nu_b * t + ph_b)
    s = Signal(A * np.cos(ph), fs)
    sa = analytic_signal(s).values
    err = A * np.exp(1j * ph) - sa
    return t, err, float(np.mean(np.abs(err) ** 2) / np.mean(A ** 2))
