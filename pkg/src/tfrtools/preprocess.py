"""Detrending, band-pass filtering and padding, including predictive padding
by a weighted sinusoidal forecast.

Time inside the forecasting model runs from 0 at the first sample to
T = (N - 1) / fs at the last one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre
from scipy import optimize, special

from . import kernels as kn
from .core import TWO_PI, Signal, fft_frequencies

PAD_SCHEMES = ("zero", "periodic", "symmetric", "predictive")

# Largest padded length accepted by `pad_plan` unless the caller overrides it
# (2**26 complex samples is 1 GiB per frequency row).
DEFAULT_MAX_PADDED = 2 ** 26


def base_kind(kind: str) -> str:
    """Map a transform kind (WFT, SWFT, WT, SWT) to "WFT" or "WT"."""
    k = kind.upper()
    if k in ("WFT", "SWFT"):
        return "WFT"
    if k in ("WT", "SWT"):
        return "WT"
    raise ValueError(f"unknown transform kind {kind!r}")


# ---------------------------------------------------------------------------
# Trend removal and filtering
# ---------------------------------------------------------------------------

def detrend(s: Signal, order: int = 3) -> Signal:
    """Subtract the least-squares polynomial of the given order.

    The fit uses a Legendre basis on the time axis mapped to [-1, 1], which
    keeps the normal equations well conditioned for any record length.
    """
    if order < 1:
        raise ValueError("detrending order must be at least 1")
    if s.N <= order + 1:
        raise ValueError("signal too short for the requested detrending order")
    x = np.linspace(-1.0, 1.0, s.N)
    coef = legendre.legfit(x, s.samples, order)
    return s.with_samples(s.samples - legendre.legval(x, coef))


def bandpass(s: Signal, wmin: float, wmax: float) -> Signal:
    """Zero all spectral content with |xi| outside [wmin, wmax] (rad/s)."""
    nyq = math.pi * s.fs
    if not (0.0 <= wmin < wmax):
        raise ValueError("need 0 <= wmin < wmax for band-pass filtering")
    if wmax > nyq * (1 + 1e-12):
        raise ValueError("band-pass upper edge exceeds the Nyquist frequency")
    X = np.fft.fft(s.samples)
    xi = np.abs(fft_frequencies(s.N, s.fs))
    keep = (xi >= wmin) & (xi <= wmax)
    if not np.any(keep):
        raise ValueError("empty passband: no discrete frequencies inside the band")
    return s.with_samples(np.fft.ifft(np.where(keep, X, 0.0)).real)


# ---------------------------------------------------------------------------
# Padding plans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PaddingPlan:
    """Pad counts for one transform: Np = N + n1 + n2 is a power of two."""

    scheme: str
    n1: int
    n2: int
    Np: int
    epsilon: float
    n1_min: float = 0.0
    n2_min: float = 0.0

    def __post_init__(self):
        if self.scheme not in PAD_SCHEMES and self.scheme != "none":
            raise ValueError(f"unknown padding scheme {self.scheme!r}")
        if self.n1 < 0 or self.n2 < 0:
            raise ValueError("pad counts must be non-negative")

    @property
    def N(self) -> int:
        return self.Np - self.n1 - self.n2


def _next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def minimal_padding(spec: kn.KernelSpec, kind: str, fs: float, wmin: float = None,
                    eps: float = 0.001) -> tuple:
    """Minimum pad lengths (in samples, not rounded) on each side."""
    tau1, tau2 = kn.epsilon_support_time(spec, eps)
    factor = 1.0
    if base_kind(kind) == "WT":
        if wmin is None or not wmin > 0:
            raise ValueError("wavelet padding needs a positive minimum frequency")
        factor = spec.omega_psi / wmin
    return factor * fs * abs(tau1), factor * fs * abs(tau2)


def pad_plan(spec: kn.KernelSpec, kind: str, fs: float, wmin: float = None,
             eps: float = 0.001, N: int = None, scheme: str = "predictive",
             max_padded: int = DEFAULT_MAX_PADDED) -> PaddingPlan:
    """Pad counts making the implicit periodic continuation negligible.

    The minimum counts fs |tau_{1,2}(eps)| (times omega_psi / wmin for
    wavelets) are rounded up jointly to the next power of two and the extra
    samples are shared between the two sides in the same proportion.
    """
    if N is None or N < 1:
        raise ValueError("pad_plan needs the signal length N")
    if not 0.0 < eps < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    m1, m2 = minimal_padding(spec, kind, fs, wmin, eps)
    need = N + m1 + m2
    if not math.isfinite(need) or need > max_padded:
        raise ValueError(f"required padded length {need:.3g} exceeds the memory cap {max_padded}")
    Np = _next_pow2(int(math.ceil(need - 1e-9)))
    extra = Np - N
    n1 = int(math.floor(extra * m1 / (m1 + m2) + 0.5)) if m1 + m2 > 0 else extra // 2
    n1 = min(max(n1, 0), extra)
    return PaddingPlan(scheme, n1, extra - n1, Np, float(eps), float(m1), float(m2))


def no_padding(N: int) -> PaddingPlan:
    """Plan with no padding at all (pure cyclic transform)."""
    return PaddingPlan("none", 0, 0, N, 0.0)


# ---------------------------------------------------------------------------
# Sinusoidal forecasting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SinusoidModel:
    """a0 + sum_m [a_m cos(w_m t) + b_m sin(w_m t)], with t = 0 at the first
    sample.  ``tones`` holds rows (a_m, b_m, w_m); ``residual`` is the
    weighted mean-square residual of the selected order and ``bic`` the
    criterion value at every evaluated order (starting from M = 0)."""

    M: int
    a0: float
    tones: np.ndarray
    residual: float
    weights: np.ndarray
    fs: float
    bic: tuple = ()
    residuals: tuple = ()
    extra: dict = field(default_factory=dict)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, self.a0)
        for a, b, w in self.tones[: self.M]:
            out = out + a * np.cos(w * t) + b * np.sin(w * t)
        return out


def _fit3(y, w, t, omega):
    """Weighted least-squares fit of q0 + q1 cos(wt) + q2 sin(wt).

    Returns (q, rho) with rho the weighted mean-square residual.
    """
    c, s = np.cos(omega * t), np.sin(omega * t)
    A = np.stack([np.ones_like(t), c, s])
    Aw = A * w
    G = Aw @ A.T
    rhs = Aw @ y
    # Normal equations on the 3-column design; fall back to the minimum-norm
    # solution when they are numerically singular (e.g. omega near 0).
    if np.linalg.cond(G) < 1e12:
        q = np.linalg.solve(G, rhs)
    else:
        q = np.linalg.lstsq(G, rhs, rcond=1e-12)[0]
    r = y - q @ A
    return q, float(np.mean(w * r * r))


def _polish(y, w, t, omega, lo, hi):
    """Joint least-squares refinement of (q0, q1, q2, omega) from the
    bracketed minimum; kept only if it lowers the residual and stays inside
    the bracket.  For noiseless tones this brings the residual down to the
    rounding floor, so no spurious tones are peeled afterwards."""
    q, rho = _fit3(y, w, t, omega)
    sw = np.sqrt(w)

    def res(p):
        return sw * (y - p[0] - p[1] * np.cos(p[3] * t) - p[2] * np.sin(p[3] * t))

    def jac(p):
        c, s = np.cos(p[3] * t), np.sin(p[3] * t)
        d = t * (p[1] * s - p[2] * c)
        return np.stack([-sw, -sw * c, -sw * s, sw * d], axis=1)

    try:
        sol = optimize.least_squares(res, np.r_[q, omega], jac=jac, method="lm",
                                     xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=50)
    except (ValueError, np.linalg.LinAlgError):
        return omega, q, rho
    om = float(sol.x[3])
    if lo <= om <= hi:
        q2, rho2 = _fit3(y, w, t, om)
        if rho2 < rho:
            return om, q2, rho2
    return omega, q, rho


def _bic(N: int, rho: float, M: int) -> float:
    return N * math.log(TWO_PI * rho) + N + (3 * M + 1) * math.log(N)


def forecast(s: Signal, weights=None, Mmax: int = None, accuracy: float = None) -> SinusoidModel:
    """Fit a weighted sum of tones by iterative peeling and select the order
    by the Bayesian information criterion.

    At each step the frequency search starts at the largest discrete
    transform peak of sqrt(w) times the residual and is refined by bounded
    minimization within one transform bin on either side.  ``accuracy`` is
    the frequency tolerance in rad/s (default 1e-6 * 2 pi / T).  Iteration
    stops once two consecutive criterion values exceed the running minimum.
    """
    y = np.asarray(s.samples, dtype=float)
    N = y.size
    t = np.arange(N) / s.fs
    T = (N - 1) / s.fs
    w = np.ones(N) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != y.shape:
        raise ValueError("weights must have the same length as the signal")
    if not np.all(w > 0):
        raise ValueError("weights must be positive")
    cap = (N - 1) // 3
    if Mmax is None:
        Mmax = cap
    if Mmax < 1:
        raise ValueError("Mmax must be at least 1")
    Mmax = min(int(Mmax), cap)
    tol = accuracy if accuracy is not None else 1e-6 * TWO_PI / T

    mean0 = float(np.sum(w * y) / np.sum(w))
    rho0 = float(np.mean(w * (y - mean0) ** 2))
    energy = float(np.mean(w * y * y))
    if energy == 0.0 or rho0 <= 1e-24 * energy:
        return SinusoidModel(0, mean0 if energy else 0.0, np.zeros((0, 3)), rho0, w, s.fs,
                             (), (rho0,))

    bins = TWO_PI * s.fs / N
    sw = np.sqrt(w)
    resid = y - mean0
    a0, tones = mean0, []
    bics = [_bic(N, rho0, 0)]
    rhos = [rho0]
    models = [(a0, [])]
    best = 0
    above = 0
    for m in range(1, Mmax + 1):
        spec = np.abs(np.fft.rfft(sw * resid))
        if spec.size < 2:
            break
        j = 1 + int(np.argmax(spec[1:]))
        seed = j * bins
        lo, hi = max(seed - bins, 1e-3 * bins), min(seed + bins, math.pi * s.fs)
        res = optimize.minimize_scalar(lambda om: _fit3(resid, w, t, om)[1], bounds=(lo, hi),
                                       method="bounded", options={"xatol": tol})
        omega, q, rho = _polish(resid, w, t, float(res.x), lo, hi)
        if rho > rhos[-1]:
            # The bounded search can only land above the previous residual if
            # the fit degenerated; keep the residual monotone by stopping.
            break
        a0 += q[0]
        tones = tones + [(q[1], q[2], omega)]
        a0, tones, rho = _refine_all(y, w, t, a0, tones, rho, math.pi * s.fs)
        resid = y - _model(t, a0, tones)
        rhos.append(rho)
        models.append((a0, tones))
        if rho <= 1e-24 * energy:
            bics.append(-math.inf)
            best = m
            break
        bics.append(_bic(N, rho, m))
        if bics[-1] < bics[best]:
            best = m
            above = 0
        else:
            above += 1
            if above >= 2:
                break
    a0, tones = models[best]
    tones_arr = np.array(tones, dtype=float).reshape(-1, 3)
    return SinusoidModel(best, float(a0), tones_arr, rhos[best], w, s.fs, tuple(bics), tuple(rhos))


# Joint refinement is skipped when its Jacobian would exceed this many entries
# or the model holds more than this many tones; beyond that the cost grows
# with the cube of the order while the bias it removes is already small.
_JOINT_LIMIT = 2 * 10 ** 7
_JOINT_MAX_TONES = 5


def _model(t, a0, tones):
    tn = np.asarray(tones, dtype=float).reshape(-1, 3)
    if tn.shape[0] == 0:
        return np.full(t.shape, float(a0))
    ph = np.outer(t, tn[:, 2])
    return a0 + np.cos(ph) @ tn[:, 0] + np.sin(ph) @ tn[:, 1]


def _refine_all(y, w, t, a0, tones, rho, wmax):
    """Joint weighted least-squares refinement of every tone found so far.

    Peeling fits each new tone with the later ones still present, which
    biases its frequency slightly; refining all parameters together removes
    that bias.  The refinement is accepted only if it lowers the residual
    and keeps all frequencies inside (0, wmax]."""
    M = len(tones)
    if M > _JOINT_MAX_TONES or (3 * M + 1) * t.size > _JOINT_LIMIT:
        return a0, tones, rho
    sw = np.sqrt(w)
    p0 = np.concatenate([[a0], np.asarray(tones, dtype=float).ravel()])

    def unpack(p):
        return p[0], p[1:].reshape(M, 3)

    def res(p):
        c0, tn = unpack(p)
        return sw * (y - _model(t, c0, tn))

    def jac(p):
        _, tn = unpack(p)
        ph = np.outer(t, tn[:, 2])
        c, sn = np.cos(ph), np.sin(ph)
        J = np.empty((t.size, M, 3))
        J[:, :, 0] = -c
        J[:, :, 1] = -sn
        J[:, :, 2] = t[:, None] * (tn[:, 0] * sn - tn[:, 1] * c)
        return np.concatenate([-sw[:, None], sw[:, None] * J.reshape(t.size, 3 * M)], axis=1)

    try:
        sol = optimize.least_squares(res, p0, jac=jac, method="lm", xtol=1e-14, ftol=1e-14,
                                     gtol=1e-14, max_nfev=60)
    except (ValueError, np.linalg.LinAlgError):
        return a0, tones, rho
    c0, tn = unpack(sol.x)
    om = tn[:, 2]
    if np.all(om > 0) and np.all(om <= wmax):
        rho2 = float(np.mean(sol.fun ** 2))
        if rho2 < rho:
            return float(c0), [tuple(row) for row in tn], rho2
    return a0, tones, rho


def forecast_weights(spec: kn.KernelSpec, kind: str, T: float, wmin: float = None,
                     times=None) -> np.ndarray:
    """Exponential weights halving over the kernel's 0.5-support in time.

    w(t) = exp[-(T - t) log 2 / (tau2(0.5) - tau1(0.5))], with the rate
    multiplied by wmin / omega_psi for wavelets.
    """
    tau1, tau2 = kn.epsilon_support_time(spec, 0.5)
    width = tau2 - tau1
    if not width > 0:
        raise ValueError("kernel 0.5-support in time is empty")
    rate = math.log(2.0) / width
    if base_kind(kind) == "WT":
        if wmin is None or not wmin > 0:
            raise ValueError("wavelet forecast weights need a positive minimum frequency")
        rate *= wmin / spec.omega_psi
    t = np.asarray(times, dtype=float)
    return np.exp(-(T - t) * rate)


def _extension(y: np.ndarray, fs: float, n: int, weights, Mmax) -> np.ndarray:
    """Forecast n samples past the end of y."""
    if n == 0:
        return np.zeros(0)
    model = forecast(Signal(y, fs), weights, Mmax)
    t = (y.size - 1 + np.arange(1, n + 1)) / fs
    return model(t)


def _smoothstep(u: np.ndarray) -> np.ndarray:
    """Smooth step from 0 to 1 across u in [0, 1].

    An error-function profile whose end values differ from 0 and 1 by less
    than 1e-16; its spectrum decays like a Gaussian, so the hand-over adds
    no measurable content away from the forecast frequencies.
    """
    return 0.5 * special.erfc(-(np.asarray(u, dtype=float) - 0.5) * 12.0)


def _predictive(x: np.ndarray, fs: float, plan: PaddingPlan, weights, Mmax) -> np.ndarray:
    """Forecast pads with a smooth hand-over between the two forecasts.

    The padded record is treated cyclically by the transform, so the end of
    the right pad adjoins the start of the left pad.  Beyond the minimal pad
    lengths the forward and backward forecasts are cross-faded with an
    infinitely smooth step; otherwise the jump at the wrap point leaks
    negative-frequency content into low-frequency rows over the whole record.
    """
    n1, n2 = plan.n1, plan.n2
    b1 = max(0, n1 - int(math.ceil(plan.n1_min)))
    b2 = max(0, n2 - int(math.ceil(plan.n2_min)))
    L = b1 + b2
    if L < 4:
        b1 = b2 = L = 0
    fwd = _extension(x, fs, n2 + b1, weights, Mmax)
    bwd = _extension(x[::-1], fs, n1 + b2, weights, Mmax)
    right = fwd[:n2].copy()
    left = bwd[:n1][::-1].copy()
    if L:
        p = np.arange(L)
        w = _smoothstep((p + 0.5) / L)
        fr = fwd[n2 - b2 + p]
        fl = bwd[n1 + b2 - 1 - p]
        blend = (1.0 - w) * fr + w * fl
        right[n2 - b2:] = blend[:b2]
        left[:b1] = blend[b2:]
    return np.concatenate([left, x, right])


# ---------------------------------------------------------------------------
# Padding
# ---------------------------------------------------------------------------

def pad(s: Signal, plan: PaddingPlan, spec: kn.KernelSpec = None, kind: str = "WFT",
        grid=None, wmin: float = None) -> Signal:
    """Extend the signal by plan.n1 samples on the left and plan.n2 on the right.

    zero: zeros; periodic: cyclic copies; symmetric: reflection about the
    edge samples without repeating them; predictive: tone forecasts, the left
    side obtained by forecasting the time-reversed record.  The returned
    signal starts at t0 - n1 / fs.
    """
    if plan.N != s.N:
        raise ValueError("padding plan was made for a different signal length")
    x = s.samples
    n1, n2 = plan.n1, plan.n2
    if plan.scheme == "none" or (n1 == 0 and n2 == 0):
        out = x.copy()
    elif plan.scheme == "zero":
        out = np.pad(x, (n1, n2), mode="constant")
    elif plan.scheme == "periodic":
        out = np.pad(x, (n1, n2), mode="wrap")
    elif plan.scheme == "symmetric":
        out = np.pad(x, (n1, n2), mode="reflect")
    elif plan.scheme == "predictive":
        if spec is None:
            raise ValueError("predictive padding needs the kernel")
        if wmin is None and grid is not None:
            wmin = float(grid.centers[0])
        T = (s.N - 1) / s.fs
        w = forecast_weights(spec, kind, T, wmin, np.arange(s.N) / s.fs)
        Mmax = (s.N - 1) // 3
        if grid is not None:
            Mmax = min(Mmax, max(1, grid.n_bins // 2))
        out = _predictive(x, s.fs, plan, w, Mmax)
    else:
        raise ValueError(f"unknown padding scheme {plan.scheme!r}")
    return Signal(out, s.fs, s.t0 - n1 / s.fs)


def crop(padded: Signal, plan: PaddingPlan) -> Signal:
    """Inverse of `pad`: keep the original record."""
    x = padded.samples[plan.n1: plan.n1 + plan.N]
    return Signal(x, padded.fs, padded.t0 + plan.n1 / padded.fs)
