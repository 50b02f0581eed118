"""Window and wavelet catalog, derived constants, epsilon-supports and
resolution measures.

Fourier convention: ghat(xi) = int g(t) exp(-i xi t) dt, so that
g(t) = (1/2pi) int ghat(xi) exp(i xi t) dxi.  Windows are demodulated (their
|ghat| peaks at xi = 0); wavelets peak at omega_psi > 0.

Every quantity has a generic numerical route that only needs one of the two
forms.  Catalog kernels additionally carry closed-form expressions, which are
used whenever present; `generic` strips them so the numerical route can be
checked against them.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize, special

from . import quadrature as qd

TWO_PI = 2.0 * math.pi

WINDOW_NAMES = ("Gaussian", "Hann", "Blackman", "Exp", "Rect", "Kaiser")
WAVELET_NAMES = ("Lognorm", "Morlet", "Bump", "Morse")
PARAMETRIC = ("Kaiser", "Morse")

# Relative level at which a kernel form counts as decayed when choosing
# integration spans.  Forms that are themselves computed by quadrature have
# a noise floor near 1e-16 of their peak, so they use a looser level.
_DECAY_TOL = 1e-16
_NUMERIC_DECAY_TOL = 1e-12


def n_gauss(eps: float) -> float:
    """Half-width in standard deviations of the (1 - eps) Gaussian mass."""
    return math.sqrt(2.0) * float(special.erfinv(1.0 - eps))


@dataclass(frozen=True)
class KernelSpec:
    """A window (kind="window") or wavelet (kind="wavelet").

    ``time_form`` and ``freq_form`` are vectorized callables, at least one of
    which is present.  ``time_span``/``freq_span`` give finite supports where
    the form vanishes identically outside.  ``scale_t`` and ``scale_f`` are
    rough spreads used only to start numerical searches.  ``closed`` maps
    quantity names ("C", "Ctilde", "D", "omega_bar", "R", "P", "xi", "tau") to
    closed-form callables.
    """

    kind: str
    name: str
    f0: float
    params: dict = field(default_factory=dict)
    time_form: Optional[Callable] = None
    freq_form: Optional[Callable] = None
    time_span: Optional[tuple] = None
    freq_span: Optional[tuple] = None
    omega_psi_closed: Optional[float] = None
    closed: dict = field(default_factory=dict)
    scale_t: float = 1.0
    scale_f: float = 1.0
    numeric: tuple = ()
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in ("window", "wavelet"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.time_form is None and self.freq_form is None:
            raise ValueError("a kernel needs a time form or a frequency form")
        if not self.f0 > 0:
            raise ValueError("resolution parameter f0 must be positive")

    # -- evaluation ---------------------------------------------------------

    @property
    def is_wavelet(self) -> bool:
        return self.kind == "wavelet"

    @property
    def label(self) -> str:
        if self.name in PARAMETRIC:
            return f"{self.name}-{_fmt(self.params['a'])}"
        return self.name

    def freq(self, xi) -> np.ndarray:
        """ghat(xi) or psihat(xi), numerically if no analytic form exists."""
        if self.freq_form is not None:
            return _eval_complex(self.freq_form, xi)
        f = self._cache.get("numeric_freq")
        if f is None:
            f = _numeric_freq_form(self)
            self._cache["numeric_freq"] = f
        return f(xi)

    def time(self, t) -> np.ndarray:
        """g(t) or psi(t), numerically if no analytic form exists."""
        if self.time_form is not None:
            return _eval_complex(self.time_form, t)
        f = self._cache.get("numeric_time")
        if f is None:
            f = _numeric_time_form(self)
            self._cache["numeric_time"] = f
        return f(t)

    @property
    def omega_psi(self) -> Optional[float]:
        """Peak frequency of |psihat| (wavelets); None for windows."""
        if not self.is_wavelet:
            return None
        if self.omega_psi_closed is not None:
            return self.omega_psi_closed
        w = self._cache.get("omega_psi")
        if w is None:
            w = _numeric_peak(self)
            self._cache["omega_psi"] = w
        return w

    @property
    def freq_is_real_even(self) -> bool:
        """True when g is real and even (so ghat is real and symmetric)."""
        flag = self._cache.get("real_even")
        if flag is None:
            ts = np.linspace(0.05, 3.0, 37) * self.scale_t
            if self.time_form is not None:
                a, b = self.time(ts), self.time(-ts)
                flag = bool(np.allclose(a, b, rtol=1e-12, atol=0) and np.all(np.abs(a.imag) <= 1e-14 * np.abs(a).max()))
            else:
                xs = np.linspace(0.05, 3.0, 37) * self.scale_f
                a, b = self.freq(xs), self.freq(-xs)
                flag = bool(np.allclose(a, b, rtol=1e-12, atol=0) and np.all(np.abs(a.imag) <= 1e-14 * np.abs(a).max()))
            self._cache["real_even"] = flag
        return flag

    # -- extents ------------------------------------------------------------

    def time_extent(self) -> tuple:
        if self.time_span is not None:
            return tuple(self.time_span)
        ext = self._cache.get("time_extent")
        if ext is None:
            peak = float(np.max(np.abs(self.time(np.linspace(-3, 3, 601) * self.scale_t))))
            tol = _DECAY_TOL if _has_original(self, "time") else _NUMERIC_DECAY_TOL
            lo = qd.decay_extent(self.time, 0.0, -1.0, self.scale_t, tol, peak=peak)
            hi = qd.decay_extent(self.time, 0.0, 1.0, self.scale_t, tol, peak=peak)
            ext = (-lo, hi)
            self._cache["time_extent"] = ext
        return ext

    def freq_extent(self) -> tuple:
        """Span of the frequency form on the linear axis (including any
        negative-frequency part of a wavelet)."""
        if self.freq_span is not None:
            return tuple(self.freq_span)
        ext = self._cache.get("freq_extent")
        if ext is None:
            center = self.omega_psi if self.is_wavelet else 0.0
            xs = center + np.linspace(-3, 3, 601) * self.scale_f
            peak = float(np.max(np.abs(self.freq(xs))))
            tol = _DECAY_TOL if _has_original(self, "freq") else _NUMERIC_DECAY_TOL
            hi = center + qd.decay_extent(self.freq, center, 1.0, self.scale_f, tol, peak=peak)
            if self.is_wavelet:
                neg = self.freq(-np.linspace(1e-3, 10.0, 201) * center)
                if np.max(np.abs(neg)) == 0.0:
                    lo = 0.0
                else:
                    lo = -qd.decay_extent(self.freq, 0.0, -1.0, center, tol, peak=peak)
            else:
                lo = -qd.decay_extent(self.freq, 0.0, -1.0, self.scale_f, tol, peak=peak)
            ext = (lo, hi)
            self._cache["freq_extent"] = ext
        return ext

    def log_extent(self) -> tuple:
        """Span of psihat on the logarithmic axis, as (log xi_lo, log xi_hi)."""
        ext = self._cache.get("log_extent")
        if ext is None:
            if self.freq_span is not None and self.freq_span[0] > 0:
                ext = (math.log(self.freq_span[0]), math.log(self.freq_span[1]))
            else:
                u0 = math.log(self.omega_psi)
                h = lambda u: self.freq(np.exp(u))
                peak = abs(complex(self.freq(np.array([self.omega_psi]))[0]))
                width = max(self.scale_f / self.omega_psi, 0.05)
                tol = _DECAY_TOL if _has_original(self, "freq") else _NUMERIC_DECAY_TOL
                lo = qd.decay_extent(h, u0, -1.0, width, tol, peak=peak)
                hi = qd.decay_extent(h, u0, 1.0, width, tol, peak=peak)
                ext = (u0 - lo, u0 + hi)
            self._cache["log_extent"] = ext
        return ext

    # -- derived kernels ----------------------------------------------------

    def rescaled(self, r: float) -> "KernelSpec":
        """Wavelet with psihat_r(xi) = psihat(xi / r), psi_r(t) = r psi(r t).

        The peak frequency becomes r * omega_psi, so the wavelet transform,
        which only sees psihat(omega_psi xi / omega), is unchanged.
        """
        if not self.is_wavelet:
            raise ValueError("rescaling is defined for wavelets only")
        if not r > 0:
            raise ValueError("rescale factor must be positive")
        r = float(r)
        tf = None if self.time_form is None else (lambda t, f=self.time_form: r * _eval_complex(f, r * np.asarray(t, float)))
        ff = None if self.freq_form is None else (lambda x, f=self.freq_form: _eval_complex(f, np.asarray(x, float) / r))
        closed = {}
        for key, fn in self.closed.items():
            if key in ("C", "Ctilde", "D"):
                closed[key] = fn
            elif key == "R":
                closed[key] = lambda w, fn=fn: fn(np.asarray(w, float) / r)
            elif key == "P":
                closed[key] = lambda tau, fn=fn: fn(r * np.asarray(tau, float))
            elif key == "xi":
                closed[key] = lambda e, fn=fn: tuple(r * v for v in fn(e))
            elif key == "tau":
                closed[key] = lambda e, fn=fn: tuple(v / r for v in fn(e))
        # Supports without closed forms are inherited from this kernel so that
        # the rescaled copy does not repeat the quadrature with its own round-off.
        closed.setdefault("xi", lambda e: tuple(r * v for v in epsilon_support_freq(self, e)))
        closed.setdefault("tau", lambda e: tuple(v / r for v in epsilon_support_time(self, e)))
        params = dict(self.params)
        params["rescale"] = params.get("rescale", 1.0) * r
        return KernelSpec(
            kind=self.kind, name=self.name, f0=self.f0, params=params,
            time_form=tf, freq_form=ff,
            time_span=None if self.time_span is None else tuple(v / r for v in self.time_span),
            freq_span=None if self.freq_span is None else tuple(v * r for v in self.freq_span),
            omega_psi_closed=None if self.omega_psi_closed is None else r * self.omega_psi_closed,
            closed=closed, scale_t=self.scale_t / r, scale_f=self.scale_f * r, numeric=self.numeric,
        )


def _fmt(a: float) -> str:
    return f"{a:g}"


def _eval_complex(f, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.asarray(f(x), dtype=complex) * np.ones(x.shape)


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

def parse_kernel_name(text: str) -> tuple:
    """Split "Kaiser-2.5" into ("Kaiser", 2.5); plain names give (name, None)."""
    m = re.fullmatch(r"\s*([A-Za-z]+)(?:-([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?))?\s*", text)
    if not m:
        raise ValueError(f"unknown kernel name {text!r}")
    base, par = m.group(1), m.group(2)
    known = {n.lower(): n for n in WINDOW_NAMES + WAVELET_NAMES}
    if base.lower() not in known:
        raise ValueError(f"unknown kernel name {text!r}")
    base = known[base.lower()]
    if base in PARAMETRIC and par is None:
        raise ValueError(f"{base} needs a parameter, e.g. {base}-2.5")
    if base not in PARAMETRIC and par is not None:
        raise ValueError(f"{base} takes no parameter")
    return base, (None if par is None else float(par))


def kernel_kind(name: str) -> str:
    base, _ = parse_kernel_name(name)
    return "window" if base in WINDOW_NAMES else "wavelet"


def make_kernel(kind: Optional[str], name: str, f0: float = 1.0, **extras) -> KernelSpec:
    """Catalog window or wavelet by name, e.g. make_kernel("window", "Kaiser-2.5", 1.0).

    ``kind`` may be None to infer it from the name.  The parameter of the
    parametric families may also be passed as ``a=...``.
    """
    base, par = parse_kernel_name(name)
    if "a" in extras:
        par = float(extras.pop("a"))
    if extras:
        raise ValueError(f"unexpected kernel parameters: {sorted(extras)}")
    expected = "window" if base in WINDOW_NAMES else "wavelet"
    if kind is None:
        kind = expected
    if kind != expected:
        raise ValueError(f"{base} is a {expected}, not a {kind}")
    f0 = float(f0)
    if not f0 > 0:
        raise ValueError("resolution parameter f0 must be positive")
    builder = _BUILDERS[base]
    return builder(f0, par) if base in PARAMETRIC else builder(f0)


def _gaussian(f0):
    nG = n_gauss
    return KernelSpec(
        "window", "Gaussian", f0,
        time_form=lambda t: np.exp(-0.5 * (t / f0) ** 2) / (math.sqrt(TWO_PI) * f0),
        freq_form=lambda x: np.exp(-0.5 * (f0 * x) ** 2),
        closed={
            "C": lambda: math.sqrt(math.pi / 2) / f0,
            "Ctilde": lambda: 1.0,
            "omega_bar": lambda: 0.0,
            "R": lambda w: 0.5 * (1.0 + special.erf(f0 * np.asarray(w) / math.sqrt(2))),
            "P": lambda tau: 0.5 * (1.0 + special.erf(np.asarray(tau) / (math.sqrt(2) * f0))),
            "xi": lambda e: (-nG(e) / f0, nG(e) / f0),
            "tau": lambda e: (-f0 * nG(e), f0 * nG(e)),
        },
        scale_t=f0, scale_f=1.0 / f0,
    )


def _sinc_q(x, q):
    """sin(x q / 2) / (x q / 2), finite at x = 0."""
    return np.sinc(np.asarray(x) * q / TWO_PI)


def _hann(f0):
    q = 4.4 * f0
    w = TWO_PI / q

    def g(t):
        t = np.asarray(t)
        return np.where(np.abs(t) < q / 2, 0.5 * (1.0 + np.cos(w * t)), 0.0)

    def ghat(x):
        # Equal to the tabulated rational form; the sinc sum has no
        # removable singularities at xi = +-2 pi / q.
        return 0.5 * q * (_sinc_q(x, q) + 0.5 * _sinc_q(x - w, q) + 0.5 * _sinc_q(x + w, q))

    def P(tau):
        tau = np.clip(np.asarray(tau, float), -q / 2, q / 2)
        return tau / q + 0.5 + np.sin(w * tau) / TWO_PI

    return KernelSpec(
        "window", "Hann", f0, params={"q": q}, time_form=g, freq_form=ghat,
        time_span=(-q / 2, q / 2),
        closed={"C": lambda: math.pi, "Ctilde": lambda: q / 2, "omega_bar": lambda: 0.0, "P": P},
        scale_t=q / 4, scale_f=w,
    )


def _blackman(f0):
    q = 5.6 * f0
    alpha = 0.16
    w = TWO_PI / q

    def g(t):
        t = np.asarray(t)
        val = (1 - alpha) / 2 + 0.5 * np.cos(w * t) + 0.5 * alpha * np.cos(2 * w * t)
        return np.where(np.abs(t) < q / 2, val, 0.0)

    def ghat(x):
        return q * ((1 - alpha) / 2 * _sinc_q(x, q)
                    + 0.25 * (_sinc_q(x - w, q) + _sinc_q(x + w, q))
                    + 0.25 * alpha * (_sinc_q(x - 2 * w, q) + _sinc_q(x + 2 * w, q)))

    def P(tau):
        tau = np.clip(np.asarray(tau, float), -q / 2, q / 2)
        return ((tau + q / 2) / q + np.sin(w * tau) / (TWO_PI * (1 - alpha))
                + alpha * np.sin(2 * w * tau) / (2 * TWO_PI * (1 - alpha)))

    return KernelSpec(
        "window", "Blackman", f0, params={"q": q, "alpha": alpha}, time_form=g, freq_form=ghat,
        time_span=(-q / 2, q / 2),
        closed={"C": lambda: math.pi, "Ctilde": lambda: (1 - alpha) * q / 2,
                "omega_bar": lambda: 0.0, "P": P},
        scale_t=q / 4, scale_f=w,
    )


def _exp(f0):
    q = 6.5 * f0
    return KernelSpec(
        "window", "Exp", f0, params={"q": q},
        time_form=lambda t: np.exp(-np.abs(t) / q),
        freq_form=lambda x: (2.0 / q) / (np.asarray(x) ** 2 + q ** -2),
        closed={
            "C": lambda: math.pi,
            "Ctilde": lambda: 2.0 * q,
            "omega_bar": lambda: 0.0,
            "R": lambda w: 0.5 + np.arctan(q * np.asarray(w)) / math.pi,
            "xi": lambda e: (-1.0 / (q * math.tan(math.pi * e / 2)), 1.0 / (q * math.tan(math.pi * e / 2))),
            "P": lambda tau: 0.5 + 0.5 * np.sign(tau) * (1.0 - np.exp(-np.abs(tau) / q)),
            "tau": lambda e: (q * math.log(e), -q * math.log(e)),
        },
        scale_t=q, scale_f=1.0 / q,
    )


def _rect(f0):
    q = 10.0 * f0

    def R(w):
        si, _ = special.sici(q * np.asarray(w, float) / 2)
        return 0.5 + si / math.pi

    return KernelSpec(
        "window", "Rect", f0, params={"q": q},
        time_form=lambda t: np.where(np.abs(np.asarray(t)) <= q / 2, 1.0, 0.0),
        freq_form=lambda x: q * _sinc_q(x, q),
        time_span=(-q / 2, q / 2),
        closed={
            "C": lambda: math.pi,
            "Ctilde": lambda: q,
            "omega_bar": lambda: 0.0,
            "R": R,
            "P": lambda tau: np.clip(np.asarray(tau) / q + 0.5, 0.0, 1.0),
            "tau": lambda e: (-q * (1 - e) / 2, q * (1 - e) / 2),
        },
        scale_t=q / 4, scale_f=TWO_PI / q,
    )


def _kaiser(f0, a):
    if a is None or not a > 0:
        raise ValueError("Kaiser parameter a must be positive")
    q = 3.0 * math.sqrt(1.0 + abs(a - 1.0 / a)) * f0
    beta = math.pi * a
    i0b = float(np.i0(beta))

    def g(t):
        t = np.asarray(t, float)
        inside = np.abs(t) < q / 2
        arg = np.sqrt(np.clip(1.0 - (2.0 * t / q) ** 2, 0.0, None))
        return np.where(inside, np.i0(beta * arg) / i0b, 0.0)

    return KernelSpec(
        "window", "Kaiser", f0, params={"a": a, "q": q}, time_form=g,
        time_span=(-q / 2, q / 2),
        closed={"C": lambda: math.pi, "omega_bar": lambda: 0.0},
        scale_t=q / 4, scale_f=TWO_PI / q,
    )


def _lognorm(f0):
    s = TWO_PI * f0
    nG = n_gauss

    def psihat(x):
        x = np.asarray(x, float)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.exp(-0.5 * (s * np.log(np.where(x > 0, x, 1.0))) ** 2)
        return np.where(x > 0, val, 0.0)

    C = math.sqrt(math.pi / 2) / s
    return KernelSpec(
        "wavelet", "Lognorm", f0, freq_form=psihat, omega_psi_closed=1.0,
        closed={
            "C": lambda: C,
            "D": lambda: C * math.exp(0.5 / s ** 2),
            "Ctilde": lambda: 1.0,
            "R": lambda w: 0.5 * (1.0 + special.erf(s * np.log(np.maximum(np.asarray(w, float), 1e-300)) / math.sqrt(2))),
            "xi": lambda e: (math.exp(-nG(e) / s), math.exp(nG(e) / s)),
        },
        scale_t=s, scale_f=1.0 / s,
    )


def _morlet(f0):
    a = TWO_PI * f0
    damp = math.exp(-0.5 * a * a)

    def psihat(x):
        x = np.asarray(x, float)
        return np.exp(-0.5 * (x - a) ** 2) - np.exp(-0.5 * (x * x + a * a))

    def psi(t):
        t = np.asarray(t, float)
        return (np.exp(1j * a * t) - damp) * np.exp(-0.5 * t * t) / math.sqrt(TWO_PI)

    return KernelSpec(
        "wavelet", "Morlet", f0, time_form=psi, freq_form=psihat,
        closed={"D": lambda: math.inf},
        scale_t=1.0, scale_f=1.0,
    )


def _bump(f0):
    if f0 < 0.4:
        raise ValueError("Bump wavelet needs f0 >= 0.4")
    d = 0.4 / f0

    def psihat(x):
        x = np.asarray(x, float)
        r2 = ((1.0 - x) / d) ** 2
        inside = r2 < 1.0
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            val = np.exp(1.0 - 1.0 / (1.0 - np.where(inside, r2, 0.0)))
        return np.where(inside, val, 0.0)

    return KernelSpec(
        "wavelet", "Bump", f0, params={"delta": d}, freq_form=psihat,
        freq_span=(1.0 - d, 1.0 + d), omega_psi_closed=1.0,
        closed={"Ctilde": lambda: 1.0},
        scale_t=1.0 / d, scale_f=d / 3,
    )


def _morse(f0, a):
    if a is None or not a > 0:
        raise ValueError("Morse parameter a must be positive")
    q = 30.0 * f0 / a
    logB = (q / a) * (1.0 + math.log(a / q))
    wpsi = (q / a) ** (1.0 / a)

    def psihat(x):
        x = np.asarray(x, float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            xx = np.where(x > 0, x, 1.0)
            val = np.exp(logB + q * np.log(xx) - xx ** a)
        return np.where(x > 0, val, 0.0)

    C = math.exp(logB + special.gammaln(q / a)) / (2 * a)
    D = math.inf if q <= 1 else wpsi * math.exp(logB + special.gammaln((q - 1) / a)) / (2 * a)
    width = wpsi / math.sqrt(q * a)
    return KernelSpec(
        "wavelet", "Morse", f0, params={"a": a, "q": q}, freq_form=psihat, omega_psi_closed=wpsi,
        closed={"C": lambda: C, "D": lambda: D, "Ctilde": lambda: 1.0},
        scale_t=1.0 / width, scale_f=width,
    )


_BUILDERS = {
    "Gaussian": _gaussian, "Hann": _hann, "Blackman": _blackman, "Exp": _exp,
    "Rect": _rect, "Kaiser": _kaiser, "Lognorm": _lognorm, "Morlet": _morlet,
    "Bump": _bump, "Morse": _morse,
}


def custom_kernel(kind: str, time_form=None, freq_form=None, name: str = "custom",
                  f0: float = 1.0, time_span=None, freq_span=None,
                  scale_t: float = 1.0, scale_f: float = 1.0) -> KernelSpec:
    """User-defined window or wavelet from either (or both) forms."""
    spec = KernelSpec(kind, name, f0, time_form=time_form, freq_form=freq_form,
                      time_span=time_span, freq_span=freq_span,
                      scale_t=scale_t, scale_f=scale_f)
    if spec.is_wavelet:
        check_admissible(spec)
    return spec


def check_admissible(spec: KernelSpec, tol: float = 1e-8) -> None:
    """Raise if |psihat(0)| exceeds tol * max |psihat|."""
    xs = spec.omega_psi * np.geomspace(1e-3, 1e3, 2001)
    peak = float(np.max(np.abs(spec.freq(xs))))
    at0 = abs(complex(spec.freq(np.array([0.0]))[0]))
    if not at0 <= tol * peak:
        raise ValueError("wavelet fails the admissibility condition psihat(0) = 0")


def generic(spec: KernelSpec) -> KernelSpec:
    """Same forms, but every derived quantity computed numerically."""
    return KernelSpec(spec.kind, spec.name, spec.f0, dict(spec.params), spec.time_form,
                      spec.freq_form, spec.time_span, spec.freq_span, None, {},
                      spec.scale_t, spec.scale_f, spec.numeric)


def drop_form(spec: KernelSpec, which: str) -> KernelSpec:
    """Copy of ``spec`` without its "time" or "freq" form (and closed forms)."""
    if which not in ("time", "freq"):
        raise ValueError("which must be 'time' or 'freq'")
    base = generic(spec)
    if which == "time":
        return replace(base, time_form=None, _cache={})
    return replace(base, freq_form=None, _cache={})


def numeric_counterpart(spec: KernelSpec) -> KernelSpec:
    """Fill in the missing form of a kernel numerically.

    The missing form is evaluated by Gauss-Legendre Fourier quadrature of the
    present one over its decay span (panels sized to the oscillation at each
    argument).  The wavelet peak frequency is located numerically.
    """
    has_t, has_f = spec.time_form is not None, spec.freq_form is not None
    if has_t == has_f:
        raise ValueError("numeric_counterpart needs a kernel with exactly one analytic form")
    base = replace(spec, _cache={})
    if has_t:
        f = _numeric_freq_form(base)
        return replace(base, freq_form=f, numeric=("freq",), _cache={})
    f = _numeric_time_form(base)
    return replace(base, time_form=f, numeric=("time",), _cache={})


def _numeric_freq_form(spec: KernelSpec):
    lo, hi = spec.time_extent()
    g = spec.time_form
    bps = (0.0,) if lo < 0 < hi else ()

    def fhat(xi):
        xi = np.asarray(xi, float)
        return qd.fourier_integral(lambda t: _eval_complex(g, t), xi, lo, hi, -1.0, bps)

    return fhat


def _numeric_time_form(spec: KernelSpec):
    lo, hi = spec.freq_extent()
    ff = spec.freq_form
    bps = [0.0] if lo < 0 < hi else []
    if spec.is_wavelet and spec.omega_psi_closed is not None:
        bps.append(spec.omega_psi_closed)

    def ft(t):
        t = np.asarray(t, float)
        return qd.fourier_integral(lambda x: _eval_complex(ff, x), t, lo, hi, 1.0, bps) / TWO_PI

    return ft


def _numeric_peak(spec: KernelSpec) -> float:
    """argmax |psihat| on xi > 0, polished to near machine precision."""
    if spec.freq_span is not None and spec.freq_span[0] >= 0:
        xs = np.linspace(max(spec.freq_span[0], 0.0), spec.freq_span[1], 20001)[1:-1]
    elif not _has_original(spec, "freq"):
        # psihat is itself a quadrature here; search only where the spectrum
        # lives, located from the time-domain frequency moments.
        lo, hi = spec.time_extent()
        _, m1, sd = _moments(spec.time, _derivative(spec.time, spec.scale_t), lo, hi, 0.0,
                             spec.scale_t, (0.0,))
        xs = np.linspace(max(m1 - 8 * sd, 1e-3 * abs(m1)), m1 + 8 * sd, 4001)
    else:
        xs = np.geomspace(1e-4, 1e4, 20001) * spec.scale_f
    amp = np.abs(spec.freq(xs))
    j = int(np.clip(np.argmax(amp), 1, xs.size - 2))
    lo, hi = xs[j - 1], xs[j + 1]

    def neg_log(x):
        v = abs(complex(spec.freq(np.array([x]))[0]))
        return -math.log(v) if v > 0 else 1e300

    res = optimize.minimize_scalar(neg_log, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-13 * max(1.0, xs[j])})
    x0 = float(res.x)

    # Polish on the zero of the logarithmic derivative.
    def dlog(x):
        h = 1e-6 * max(x, 1e-12)
        return (neg_log(x + h) - neg_log(x - h)) / (2 * h)

    try:
        a, b = x0 - 1e-4 * x0, x0 + 1e-4 * x0
        if dlog(a) * dlog(b) < 0:
            x0 = optimize.brentq(dlog, a, b, xtol=1e-15 * x0, rtol=4 * np.finfo(float).eps)
    except ValueError:
        pass
    return x0


# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelConstants:
    """C (C_g or C_psi), C_tilde (ghat(0) or conj psihat(omega_psi)),
    omega_bar (windows), D_psi and omega_psi (wavelets)."""

    C: complex
    C_tilde: complex
    omega_bar: Optional[float] = None
    D: Optional[complex] = None
    omega_psi: Optional[float] = None

    @property
    def D_infinite(self) -> bool:
        return self.D is not None and not np.isfinite(self.D)


def _real_if_close(z: complex):
    z = complex(z)
    return z.real if abs(z.imag) <= 1e-13 * max(abs(z), 1e-300) else z


def _quad_complex(f, a, b, points=None, epsrel=1e-12):
    kw = dict(epsabs=0.0, epsrel=epsrel, limit=800)
    if points is not None and np.isfinite(a) and np.isfinite(b):
        kw["points"] = points
    re_, _ = integrate.quad(lambda x: float(np.real(f(x))), a, b, **kw)
    im_, _ = integrate.quad(lambda x: float(np.imag(f(x))), a, b, **kw)
    return complex(re_, im_)


def _scalar(fn):
    return lambda x: complex(np.asarray(fn(np.array([x])))[0])


def window_C(spec: KernelSpec) -> complex:
    if "C" in spec.closed:
        return complex(spec.closed["C"]())
    if spec.time_form is not None:
        # (1/2) int ghat = pi g(0) by the inversion formula at t = 0.
        return math.pi * complex(spec.time(np.array([0.0]))[0])
    lo, hi = spec.freq_extent()
    return 0.5 * _quad_complex(_scalar(spec.freq), lo, hi, points=[0.0])


def _sample_scale(spec):
    return spec.scale_t


def kernel_constants(spec: KernelSpec) -> KernelConstants:
    """C, C_tilde, omega_bar or D_psi and omega_psi; cached on the spec."""
    cached = spec._cache.get("constants")
    if cached is not None:
        return cached
    if spec.is_wavelet:
        consts = _wavelet_constants(spec)
    else:
        consts = _window_constants(spec)
    if not abs(consts.C) > 1e-300 or not np.isfinite(consts.C):
        raise ValueError("degenerate kernel: C evaluates to zero or infinity")
    spec._cache["constants"] = consts
    return consts


def _form_integral(spec: KernelSpec, which: str, f, lo: float, hi: float, points=()) -> complex:
    """Integral of a vectorized integrand built on one kernel form.

    Given forms go through adaptive quadrature; forms computed by quadrature
    themselves are integrated with a fixed composite rule in one batch, since
    adaptive refinement would only chase their noise floor.
    """
    if _has_original(spec, which):
        return _quad_complex(_scalar(f), lo, hi, points=list(points))
    return complex(qd.integrate(f, lo, hi, 400, points))


def _window_constants(spec: KernelSpec) -> KernelConstants:
    C = window_C(spec)
    if "Ctilde" in spec.closed:
        Ct = complex(spec.closed["Ctilde"]())
    elif spec.freq_form is not None:
        Ct = complex(spec.freq(np.array([0.0]))[0])
    else:
        lo, hi = spec.time_extent()
        Ct = _form_integral(spec, "time", spec.time, lo, hi, (0.0,))
    if "omega_bar" in spec.closed:
        wbar = float(spec.closed["omega_bar"]())
    elif spec.freq_is_real_even:
        wbar = 0.0
    elif _has_original(spec, "freq"):
        lo, hi = spec.freq_extent()
        wbar = 0.5 / C * _form_integral(spec, "freq", lambda x: x * spec.freq(x), lo, hi, (0.0,))
        wbar = float(np.real(wbar))
    else:
        # int xi ghat dxi = -2 pi i g'(0)
        h = 1e-5 * spec.scale_t
        gp = (spec.time(np.array([h]))[0] - spec.time(np.array([-h]))[0]) / (2 * h)
        wbar = float(np.real(0.5 / C * (-TWO_PI * 1j * gp)))
    return KernelConstants(_real_if_close(C), _real_if_close(Ct), omega_bar=wbar)


def _wavelet_constants(spec: KernelSpec) -> KernelConstants:
    wpsi = spec.omega_psi
    u_lo, u_hi = spec.log_extent()
    h = lambda u: np.conj(spec.freq(np.exp(u)))
    u0 = (math.log(wpsi),)
    if "C" in spec.closed:
        C = complex(spec.closed["C"]())
    else:
        C = 0.5 * _form_integral(spec, "freq", h, u_lo, u_hi, u0)
    if "Ctilde" in spec.closed:
        Ct = complex(spec.closed["Ctilde"]())
    else:
        Ct = complex(np.conj(spec.freq(np.array([wpsi]))[0]))
    if "D" in spec.closed:
        D = complex(spec.closed["D"]())
    elif _d_diverges(spec):
        D = complex(math.inf)
    else:
        D = 0.5 * wpsi * _form_integral(spec, "freq", lambda u: h(u) * np.exp(-u), u_lo, u_hi, u0)
    D = math.inf if not np.isfinite(D) else _real_if_close(D)
    return KernelConstants(_real_if_close(C), _real_if_close(Ct), D=D, omega_psi=wpsi)


def _d_diverges(spec: KernelSpec) -> bool:
    """int psihat(xi) xi^-2 dxi diverges at 0 when |psihat| ~ xi^p with p <= 1."""
    if spec.freq_span is not None and spec.freq_span[0] > 0:
        return False
    x = spec.omega_psi * np.array([1e-6, 1e-7])
    v = np.abs(spec.freq(x))
    if np.any(v == 0.0):
        return False
    p = math.log(v[0] / v[1]) / math.log(10.0)
    return p <= 1.0 + 1e-3


# ---------------------------------------------------------------------------
# Cumulative functionals and epsilon-supports
# ---------------------------------------------------------------------------

def freq_cumulative(spec: KernelSpec) -> Callable:
    """R(omega): fraction of the reconstruction integral below omega.

    Windows: (1/2C) int_{-inf}^omega ghat.  Wavelets: (1/2C) int_0^omega
    conj(psihat(xi)) dxi / xi.
    """
    R = spec._cache.get("R")
    if R is not None:
        return R
    if "R" in spec.closed:
        f = spec.closed["R"]
        R = lambda w: np.asarray(f(np.asarray(w, float)), dtype=complex)
    elif spec.is_wavelet:
        R = _wavelet_R(spec)
    elif _has_original(spec, "time") and spec.time_span is not None:
        R = _window_R_from_time(spec)
    elif _has_original(spec, "freq"):
        R = _window_R_from_freq(spec)
    else:
        R = _window_R_from_time(spec)
    spec._cache["R"] = R
    return R


def time_cumulative(spec: KernelSpec) -> Callable:
    """P(tau): fraction of int g (windows) or of int conj(psi(t)) exp(i
    omega_psi t) dt (wavelets) lying below tau."""
    P = spec._cache.get("P")
    if P is not None:
        return P
    if "P" in spec.closed:
        f = spec.closed["P"]
        P = lambda tau: np.asarray(f(np.asarray(tau, float)), dtype=complex)
    elif _has_original(spec, "time"):
        P = _P_from_time(spec)
    else:
        P = _P_from_freq(spec)
    spec._cache["P"] = P
    return P


def _window_R_from_time(spec: KernelSpec):
    lo, hi = spec.time_extent()
    X = max(-lo, hi)
    g0 = complex(spec.time(np.array([0.0]))[0])
    C = window_C(spec)
    bps = tuple(b for b in (-lo, hi) if 0 < b < X)

    even = lambda t: (spec.time(t) + spec.time(-t)) / t
    odd = lambda t: (spec.time(t) - spec.time(-t)) / t

    def R(w):
        w = np.asarray(w, float)
        s = qd.oscillatory_integral(even, w, 0.0, X, np.sin, bps)
        c = qd.oscillatory_integral(odd, w, 0.0, X, np.cos, bps)
        return (math.pi * g0 + s + 1j * c) / (2 * C)

    return R


def _has_original(spec: KernelSpec, which: str) -> bool:
    """True if the kernel's ``which`` form was given rather than computed."""
    form = spec.time_form if which == "time" else spec.freq_form
    return form is not None and which not in spec.numeric


def _mapped_table(f, lo: float, hi: float, center: float, scale: float, n_cells: int = 20000):
    """Normalized running integral of f on [lo, hi] tabulated on the axis
    u = arcsinh((x - center) / scale), which keeps algebraic tails resolved."""
    to_u = lambda x: np.arcsinh((np.asarray(x, float) - center) / scale)
    integrand = lambda u: f(center + scale * np.sinh(u)) * scale * np.cosh(u)
    u_lo, u_hi = float(to_u(lo)), float(to_u(hi))
    table = qd.CumulativeTable(integrand, u_lo, u_hi, n_cells, breakpoints=(0.0,))
    total = table.total
    return lambda x: table(to_u(x)) / total


def _window_R_from_freq(spec: KernelSpec):
    lo, hi = spec.freq_extent()
    return _mapped_table(spec.freq, lo, hi, 0.0, spec.scale_f)


def _wavelet_R(spec: KernelSpec):
    u_lo, u_hi = spec.log_extent()
    h = lambda u: np.conj(spec.freq(np.exp(u)))
    cells = 20000 if _has_original(spec, "freq") else 4000
    table = qd.CumulativeTable(h, u_lo, u_hi, cells, breakpoints=(math.log(spec.omega_psi),))
    total = table.total

    def R(w):
        w = np.asarray(w, float)
        with np.errstate(divide="ignore"):
            u = np.where(w > 0, np.log(np.where(w > 0, w, 1.0)), -np.inf)
        return np.where(w > 0, table(np.where(np.isfinite(u), u, u_lo)) / total, 0.0)

    return R


def _demodulated_time(spec: KernelSpec):
    if not spec.is_wavelet:
        return spec.time
    wpsi = spec.omega_psi
    return lambda t: np.conj(spec.time(t)) * np.exp(1j * wpsi * np.asarray(t, float))


def _P_from_time(spec: KernelSpec):
    lo, hi = spec.time_extent()
    return _mapped_table(_demodulated_time(spec), lo, hi, 0.0, spec.scale_t)


def _demodulated_freq(spec: KernelSpec):
    """Transform of the demodulated kernel: ghat, or conj psihat(omega_psi - xi)."""
    if not spec.is_wavelet:
        return spec.freq
    wpsi = spec.omega_psi
    return lambda x: np.conj(spec.freq(wpsi - np.asarray(x, float)))


def _P_from_freq(spec: KernelSpec):
    hhat = _demodulated_freq(spec)
    lo, hi = spec.freq_extent()
    if spec.is_wavelet:
        wpsi = spec.omega_psi
        X = max(wpsi - lo, hi - wpsi)
        bps = tuple(b for b in (wpsi, wpsi - lo, hi - wpsi) if 0 < b < X)
    else:
        X = max(-lo, hi)
        bps = ()
    h0 = complex(hhat(np.array([0.0]))[0])
    a_plus_b = lambda x: (hhat(x) + hhat(-x)) / x
    a_minus_b = lambda x: (hhat(x) - hhat(-x)) / x

    def P(tau):
        tau = np.asarray(tau, float)
        s = qd.oscillatory_integral(a_plus_b, tau, 0.0, X, np.sin, bps)
        c = qd.oscillatory_integral(a_minus_b, tau, 0.0, X, np.cos, bps)
        return 0.5 + (s - 1j * c) / (TWO_PI * h0)

    return P


def _support_edge(F, anchor: float, direction: float, scale: float, eps: float,
                  period: float, refine=None) -> float:
    """Outermost point x (on the anchor's ``direction`` side) where |F|
    first exceeds eps/2 when coming in from the far tail.

    ``F`` is scanned on a grid fine relative to ``period``; the bracketing
    cell is then refined by root finding on ``refine`` (a more accurate
    scalar version of |F|) when given.
    """
    thr = 0.5 * eps
    X = scale
    for _ in range(60):
        n = int(min(max(64, 12 * X / period), 100000))
        xs = anchor + direction * np.linspace(X, 2 * X, n)
        if np.max(np.abs(F(xs))) < 0.5 * thr:
            break
        X *= 2.0
    else:
        raise ValueError("cumulative functional does not decay; support undefined")
    n = int(min(max(4001, 12 * 2 * X / period), 200000))
    xs = anchor + direction * np.linspace(2 * X, 0.0, n)
    absF = np.abs(F(xs))
    vals = absF - thr
    # Local maxima that come close to the threshold may cross it between
    # grid points; polish them so grazing violations are not missed.
    interior = np.arange(1, n - 1)
    peaks = interior[(absF[interior] >= absF[interior - 1]) & (absF[interior] >= absF[interior + 1])
                     & (absF[interior] > 0.8 * thr) & (vals[interior] <= 0)]
    for i in peaks:
        lo_, hi_ = sorted((xs[i - 1], xs[i + 1]))
        res = optimize.minimize_scalar(lambda x: -float(np.abs(F(np.array([x]))[0])),
                                       bounds=(lo_, hi_), method="bounded",
                                       options={"xatol": 1e-12 * max(1.0, abs(lo_))})
        if -res.fun > thr:
            vals[i] = -res.fun - thr
            # Split the cell at the located maximum so the bracket is exact.
            xs = xs.copy()
            xs[i] = res.x
    bad = np.nonzero(vals > 0)[0]
    if bad.size == 0:
        raise ValueError(f"epsilon = {eps} is so large that the support collapses")
    j = int(bad[0])
    if j == 0:
        raise ValueError("support edge not bracketed")
    if refine is None:
        fun = lambda x: float(np.abs(F(np.array([x]))[0])) - thr
    else:
        fun = lambda x: float(refine(x)) - thr
    a, b = xs[j - 1], xs[j]
    if fun(a) > 0.0 or fun(b) < 0.0:
        # The accurate functional moved the crossing out of the cell; widen.
        a, b = _widen_bracket(fun, a, b, direction)
    if fun(a) == 0.0:
        return float(a)
    return float(optimize.brentq(fun, min(a, b), max(a, b),
                                 xtol=1e-14 * max(1.0, abs(a)), rtol=8 * np.finfo(float).eps))


def _widen_bracket(fun, a, b, direction):
    h = abs(b - a)
    for _ in range(60):
        if fun(a) <= 0.0 <= fun(b):
            return a, b
        if fun(a) > 0.0:
            a -= direction * h
        if fun(b) < 0.0:
            b += direction * h
        h *= 2.0
    raise ValueError("support edge not bracketed")


def _window_R_tails(spec: KernelSpec):
    """Accurate scalar |R(x)| for x < 0 and |1 - R(x)| for x > 0 from
    adaptive quadrature of the frequency form out to infinity."""
    C = window_C(spec)
    f = _scalar(spec.freq)
    lo, hi = spec.freq_span if spec.freq_span is not None else (-math.inf, math.inf)

    def lower(x):
        return abs(_quad_complex(f, lo, x, epsrel=1e-13)) / abs(2 * C)

    def upper(x):
        return abs(_quad_complex(f, x, hi, epsrel=1e-13)) / abs(2 * C)

    return lower, upper


def _window_freq_period(spec: KernelSpec) -> float:
    lo, hi = spec.time_extent()
    return TWO_PI / max(-lo, hi, 1e-300)


def epsilon_support_freq(spec: KernelSpec, eps: float) -> tuple:
    """(xi1, xi2) with |R(xi <= xi1)| <= eps/2 and |1 - R(xi >= xi2)| <= eps/2.

    For wavelets the support is on the positive axis in the logarithmic
    measure, so xi1, xi2 > 0.
    """
    _check_eps(eps)
    key = ("xi", float(eps))
    if key in spec._cache:
        return spec._cache[key]
    if "xi" in spec.closed:
        out = tuple(float(v) for v in spec.closed["xi"](eps))
    else:
        R = freq_cumulative(spec)
        if spec.is_wavelet:
            u0 = math.log(spec.omega_psi)
            Fl = lambda u: R(np.exp(u))
            Fr = lambda u: 1.0 - R(np.exp(u))
            u_lo, u_hi = spec.log_extent()
            width = max((u_hi - u_lo) / 64, 1e-3)
            period = width
            u1 = _support_edge(Fl, u0, -1.0, width, eps, period)
            u2 = _support_edge(Fr, u0, 1.0, width, eps, period)
            out = (math.exp(u1), math.exp(u2))
        else:
            period = _window_freq_period(spec)
            lower = upper = None
            if "R" not in spec.closed and not (_has_original(spec, "time") and spec.time_span is not None) \
                    and _has_original(spec, "freq"):
                lower, upper = _window_R_tails(spec)
            x2 = _support_edge(lambda x: 1.0 - R(x), 0.0, 1.0, spec.scale_f, eps, period, upper)
            if spec.freq_is_real_even:
                x1 = -x2
            else:
                x1 = _support_edge(R, 0.0, -1.0, spec.scale_f, eps, period, lower)
            out = (x1, x2)
    spec._cache[key] = out
    return out


def epsilon_support_time(spec: KernelSpec, eps: float) -> tuple:
    """(tau1, tau2) with |P(tau <= tau1)| <= eps/2, |1 - P(tau >= tau2)| <= eps/2."""
    _check_eps(eps)
    key = ("tau", float(eps))
    if key in spec._cache:
        return spec._cache[key]
    if "tau" in spec.closed:
        out = tuple(float(v) for v in spec.closed["tau"](eps))
    else:
        P = time_cumulative(spec)
        if spec.is_wavelet:
            period = TWO_PI / (8 * max(spec.scale_f, spec.omega_psi))
        else:
            period = TWO_PI / (8 * spec.scale_f)
        t2 = _support_edge(lambda t: 1.0 - P(t), 0.0, 1.0, spec.scale_t, eps, period)
        if not spec.is_wavelet and spec.freq_is_real_even:
            t1 = -t2
        else:
            t1 = _support_edge(P, 0.0, -1.0, spec.scale_t, eps, period)
        out = (t1, t2)
    spec._cache[key] = out
    return out


def _check_eps(eps):
    if not 0.0 < eps < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")


# ---------------------------------------------------------------------------
# Resolution measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResolutionReport:
    """Resolution characteristics.

    For wavelets ``dnu_min`` is the relative ratio dnu/nu (frequency
    independent) and ``dtau_min``, ``gamma_t``, ``gamma_omega`` refer to the
    reference frequency ``nu_ref``.  Classic measures are variance based and
    may be infinite.
    """

    eps_r: float
    dnu_min: float
    dtau_min: float
    gamma_t: float
    gamma_omega: float
    gamma_omega_t: float
    delta_omega: float
    delta_t: float
    gamma_classic: float
    nu_ref: Optional[float] = None
    dnu_classic: Optional[float] = None
    dtau_classic: Optional[float] = None


def _derivative(f, scale: float):
    h = 1e-5 * scale
    return lambda x: (f(np.asarray(x, float) + h) - f(np.asarray(x, float) - h)) / (2 * h)


def _moments(f, fprime, lo: float, hi: float, center: float, scale: float, breakpoints=()) -> tuple:
    """(E, mean, spread) of a variable x with density |f|^2, using
    int x^2 |f|^2 and int x |f|^2 expressed through the conjugate-domain
    derivative: E = int |F|^2, m1 = Im int conj(F) F', m2 = int |F'|^2."""
    to_x = lambda u: center + scale * np.sinh(u)
    jac = lambda u: scale * np.cosh(u)
    u_lo, u_hi = (float(np.arcsinh((v - center) / scale)) for v in (lo, hi))
    bps = tuple(float(np.arcsinh((b - center) / scale)) for b in breakpoints)
    E = qd.integrate(lambda u: np.abs(f(to_x(u))) ** 2 * jac(u), u_lo, u_hi, 4000, bps).real
    m1 = qd.integrate(lambda u: np.imag(np.conj(f(to_x(u))) * fprime(to_x(u))) * jac(u),
                      u_lo, u_hi, 4000, bps).real / E
    m2 = qd.integrate(lambda u: np.abs(fprime(to_x(u))) ** 2 * jac(u), u_lo, u_hi, 4000, bps).real / E
    return E, m1, math.sqrt(max(m2 - m1 * m1, 0.0))


def _direct_spread(f, lo, hi, center, scale, breakpoints=()) -> float:
    to_x = lambda u: center + scale * np.sinh(u)
    jac = lambda u: scale * np.cosh(u)
    u_lo, u_hi = (float(np.arcsinh((v - center) / scale)) for v in (lo, hi))
    bps = tuple(float(np.arcsinh((b - center) / scale)) for b in breakpoints)
    w = lambda u: np.abs(f(to_x(u))) ** 2 * jac(u)
    E = qd.integrate(w, u_lo, u_hi, 4000, bps).real
    m1 = qd.integrate(lambda u: to_x(u) * w(u), u_lo, u_hi, 4000, bps).real / E
    m2 = qd.integrate(lambda u: (to_x(u) - m1) ** 2 * w(u), u_lo, u_hi, 4000, bps).real / E
    return math.sqrt(max(m2, 0.0))


def _jumps_at_edges(f, span) -> bool:
    lo, hi = span
    inner = np.array([lo + 1e-12 * (hi - lo), hi - 1e-12 * (hi - lo)])
    peak = float(np.max(np.abs(f(np.linspace(lo, hi, 1001)))))
    return bool(np.max(np.abs(f(inner))) > 1e-8 * peak)


def _classic_spreads(spec: KernelSpec) -> tuple:
    """(Delta_omega, Delta_t): standard deviations of the densities
    |ghat|^2 and |g|^2 (infinite when the second moment diverges).

    The moment whose density is not directly available in closed form goes
    through the derivative identities int xi^2 |ghat|^2 = 2 pi int |g'|^2 and
    int t^2 |g|^2 = (1/2 pi) int |ghat'|^2, which stay accurate for
    transforms with slowly decaying tails.
    """
    if _has_original(spec, "time"):
        lo, hi = spec.time_extent()
        d_t = _direct_spread(spec.time, lo, hi, 0.0, spec.scale_t, (0.0,))
        if spec.time_span is not None and _jumps_at_edges(spec.time, spec.time_span):
            d_omega = math.inf
        else:
            # conj(g) g' integrated gives i * (mean frequency) E up to sign.
            _, m1, d_omega = _moments(spec.time, _derivative(spec.time, spec.scale_t),
                                      lo, hi, 0.0, spec.scale_t, (0.0,))
    else:
        center = spec.omega_psi if spec.is_wavelet else 0.0
        lo, hi = spec.freq_extent()
        bps = (0.0, center)
        d_omega = _direct_spread(spec.freq, lo, hi, center, spec.scale_f, bps)
        fprime = _derivative(spec.freq, spec.scale_f)
        p = qd.tail_exponent(lambda x: np.abs(fprime(x)) ** 2 + np.abs(fprime(-x)) ** 2, spec.scale_f)
        if spec.freq_span is None and p <= 1.1:
            d_t = math.inf
        else:
            _, _, d_t = _moments(spec.freq, fprime, lo, hi, center, spec.scale_f, bps)
    return d_omega, d_t


def resolution_measures(spec: KernelSpec, eps_r: float = 0.05, nu_ref: float = TWO_PI) -> ResolutionReport:
    """Minimal resolvable frequency/time differences from the eps_r-supports,
    plus the classic variance-based measures."""
    xi1, xi2 = epsilon_support_freq(spec, eps_r)
    tau1, tau2 = epsilon_support_time(spec, eps_r)
    d_omega, d_t = _classic_spreads(spec)
    with np.errstate(divide="ignore"):
        g_cl = 1.0 / (d_omega * d_t) if np.isfinite(d_omega * d_t) else 0.0
    if not spec.is_wavelet:
        dnu = xi2 - xi1
        dtau = tau2 - tau1
        return ResolutionReport(eps_r, dnu, dtau, 1.0 / dtau, 1.0 / dnu, 1.0 / (dnu * dtau),
                                d_omega, d_t, g_cl)
    wpsi = spec.omega_psi
    rel = xi2 / xi1 - 1.0
    dtau = wpsi / nu_ref * (tau2 - tau1)
    g_wt = 1.0 / (wpsi * (tau2 - tau1) * math.log(xi2 / xi1))
    return ResolutionReport(eps_r, rel, dtau, 1.0 / dtau, 1.0 / (nu_ref * rel), g_wt,
                            d_omega, d_t, g_cl, nu_ref=nu_ref,
                            dnu_classic=nu_ref / wpsi * d_omega, dtau_classic=wpsi / nu_ref * d_t)
