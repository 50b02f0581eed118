"""Composite Gauss-Legendre rules used by the kernel numerics.

The kernel module needs many integrals of smooth, possibly oscillatory
functions evaluated for whole vectors of parameters at once (cumulative
functionals on a scan grid, Fourier integrals at many frequencies).  A fixed
high-order rule on panels sized to the oscillation period does this with a
single matrix product; scalar constants instead go through
``scipy.integrate.quad``.
"""

from __future__ import annotations

import math

import numpy as np

_ORDER = 20
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_ORDER)
_CELL_X, _CELL_W = np.polynomial.legendre.leggauss(8)

# Largest number of complex products formed at once in `fourier_integral`.
_CHUNK = 2_000_000


def panel_edges(lo: float, hi: float, n: int, breakpoints=()) -> np.ndarray:
    """Edges of ``n`` near-equal panels on [lo, hi], always splitting at the
    given interior breakpoints."""
    pts = sorted({lo, hi, *[b for b in breakpoints if lo < b < hi]})
    edges = []
    total = hi - lo
    for a, b in zip(pts[:-1], pts[1:]):
        m = max(1, int(math.ceil(n * (b - a) / total)))
        edges.append(np.linspace(a, b, m + 1)[:-1])
    edges.append(np.array([hi]))
    return np.concatenate(edges)


def composite_rule(edges: np.ndarray, order_nodes=None, order_weights=None):
    """Nodes and weights of the Gauss-Legendre rule replicated on each panel."""
    x = _GL_X if order_nodes is None else order_nodes
    w = _GL_W if order_weights is None else order_weights
    a = edges[:-1, None]
    h = (edges[1:] - edges[:-1])[:, None]
    nodes = a + 0.5 * h * (x[None, :] + 1.0)
    weights = 0.5 * h * w[None, :]
    return nodes.ravel(), weights.ravel()


def integrate(f, lo: float, hi: float, n_panels: int = 64, breakpoints=()) -> complex:
    nodes, weights = composite_rule(panel_edges(lo, hi, n_panels, breakpoints))
    return np.sum(weights * f(nodes))


def fourier_integral(f, x, lo: float, hi: float, sign: float, breakpoints=(),
                     base_panels: int = 48) -> np.ndarray:
    """I(x) = integral_lo^hi f(u) exp(sign * i * x * u) du for every x."""
    return oscillatory_integral(f, x, lo, hi, lambda z: np.exp(sign * 1j * z),
                                breakpoints, base_panels)


def oscillatory_integral(f, x, lo: float, hi: float, kernel, breakpoints=(),
                         base_panels: int = 48) -> np.ndarray:
    """I(x) = integral_lo^hi f(u) kernel(x * u) du for every x, where kernel
    is a unit-rate oscillation such as exp(i z), sin z or cos z.

    Panels are sized so that each holds at most half an oscillation of the
    exponential at the largest |x| of a group; groups are formed by powers of
    two in |x| so small arguments do not pay for large ones.
    """
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    out = np.zeros(flat.shape, dtype=complex)
    if flat.size == 0:
        return out.reshape(x.shape)
    width = hi - lo
    mag = np.abs(flat) * width / (2 * math.pi)
    group = np.where(mag > 1, np.ceil(np.log2(np.maximum(mag, 1.0))), 0).astype(int)
    for gval in np.unique(group):
        idx = np.nonzero(group == gval)[0]
        n = base_panels + 2 * int(math.ceil(2.0 ** gval))
        nodes, weights = composite_rule(panel_edges(lo, hi, n, breakpoints))
        fw = weights * f(nodes)
        step = max(1, _CHUNK // nodes.size)
        for s in range(0, idx.size, step):
            sel = idx[s:s + step]
            out[sel] = kernel(np.outer(flat[sel], nodes)) @ fw
    return out.reshape(x.shape)


class CumulativeTable:
    """Running integral F(x) = integral_lo^x f(u) du on [lo, hi].

    The integral over each of ``n_cells`` cells is computed with an 8-point
    rule and accumulated; values inside a cell add a partial integral over
    the remainder, so F is accurate to the rule, not to the cell spacing.
    """

    def __init__(self, f, lo: float, hi: float, n_cells: int = 8000, breakpoints=()):
        self.f = f
        self.edges = panel_edges(lo, hi, n_cells, breakpoints)
        nodes, weights = composite_rule(self.edges, _CELL_X, _CELL_W)
        vals = (weights * f(nodes)).reshape(self.edges.size - 1, _CELL_X.size).sum(axis=1)
        self.values = np.concatenate([[0.0], np.cumsum(vals)])
        self.lo, self.hi = lo, hi

    @property
    def total(self) -> complex:
        return self.values[-1]

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, self.lo, self.hi)
        j = np.clip(np.searchsorted(self.edges, xc, side="right") - 1, 0, self.edges.size - 2)
        a = self.edges[j]
        h = xc - a
        nodes = a[..., None] + 0.5 * h[..., None] * (_CELL_X + 1.0)
        part = np.sum(0.5 * h[..., None] * _CELL_W * self.f(nodes), axis=-1)
        return self.values[j] + part


def decay_extent(f, center: float, direction: float, scale: float, rel_tol: float = 1e-16,
                 max_doublings: int = 60, peak: float | None = None) -> float:
    """Distance from ``center`` beyond which |f| stays below rel_tol * peak.

    ``peak`` defaults to the largest |f| seen on [center, center + direction
    * X]; the test window [X, 4X] is sampled densely enough to catch
    oscillations.  Returns the last X tried if the tolerance is never met.
    """
    X = scale
    seen = float(np.max(np.abs(f(center + direction * np.linspace(0.0, scale, 257)))))
    peak = seen if peak is None else max(peak, seen)
    for _ in range(max_doublings):
        xs = center + direction * np.linspace(X, 4 * X, 1025)
        vals = np.abs(f(xs))
        window_max = float(np.max(vals)) if vals.size else 0.0
        peak = max(peak, window_max)
        if window_max <= rel_tol * peak:
            return X
        X *= 2.0
    return X


def tail_exponent(f, scale: float) -> float:
    """Power-law decay exponent p of the envelope of |f(x)| ~ x^(-p), x > 0.

    Returns +inf when the function has decayed to zero (faster than any power).
    """
    def envelope(x):
        return float(np.max(np.abs(f(np.linspace(x, 1.5 * x, 401)))))

    x1 = 1e3 * scale
    e1, e2 = envelope(x1), envelope(10 * x1)
    if e1 == 0.0 or e2 == 0.0:
        return math.inf
    return -math.log10(e2 / e1)
