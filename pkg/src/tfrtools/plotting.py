"""Amplitude heatmaps of time-frequency maps with an optional cone overlay."""

from __future__ import annotations

import hashlib

import numpy as np

from .core import TWO_PI, TimeFrequencyMap

# Maps wider than this are decimated along time before rendering.
MAX_COLUMNS = 4000


def render_matrix(tfr: TimeFrequencyMap, max_columns: int = MAX_COLUMNS) -> tuple:
    """Amplitude matrix actually drawn, with its time and frequency axes.

    Returns (amplitude (n_bins, n_cols), times s, frequencies Hz).  Long
    records are decimated by taking every k-th column.
    """
    amp = np.abs(tfr.dense())
    step = max(1, int(np.ceil(amp.shape[1] / max_columns)))
    cols = np.arange(0, amp.shape[1], step)
    return amp[:, cols], tfr.times[cols], tfr.grid.centers / TWO_PI


def matrix_digest(tfr: TimeFrequencyMap, decimals: int = 9) -> str:
    """SHA-256 of the rendered matrix rounded relative to its maximum.

    Rendered images depend on the plotting backend; this digest pins the
    numbers behind a plot instead.
    """
    amp, _, _ = render_matrix(tfr)
    top = amp.max() if amp.size else 0.0
    scaled = np.round(amp / top, decimals) if top > 0 else amp
    return hashlib.sha256(np.ascontiguousarray(scaled, dtype="<f8").tobytes()).hexdigest()


def plot_map(tfr: TimeFrequencyMap, path: str, cone=None, log_freq: bool = None,
             title: str = None, dpi: int = 120):
    """Write a |TFR| heatmap (time in s by frequency in Hz) to ``path``.

    ``cone`` is a `diagnostics.Cone` whose time bounds are drawn as lines.
    The frequency axis is logarithmic for WT/SWT maps unless ``log_freq``
    says otherwise.  The image format follows the file extension.
    """
    import matplotlib
    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    amp, times, freqs = render_matrix(tfr)
    if log_freq is None:
        log_freq = tfr.kind in ("WT", "SWT")
    fig, ax = plt.subplots(figsize=(8, 4.5))
    try:
        mesh = ax.pcolormesh(times, freqs, amp, shading="nearest", cmap="viridis")
        fig.colorbar(mesh, ax=ax, label="amplitude")
        if log_freq:
            ax.set_yscale("log")
        if cone is not None:
            lo, hi = cone.freq_range
            sel = (freqs * TWO_PI >= lo) & (freqs * TWO_PI <= hi)
            t_first, t_last = times[0], times[-1]
            start = np.clip(cone.t_start, t_first, t_last)
            end = np.clip(cone.t_end, t_first, t_last)
            ax.plot(start[sel], freqs[sel], color="white", lw=1.2)
            ax.plot(end[sel], freqs[sel], color="white", lw=1.2)
            if tfr.kind in ("SWFT", "SWT"):
                for f in (lo, hi):
                    if freqs[0] * TWO_PI <= f <= freqs[-1] * TWO_PI:
                        ax.axhline(f / TWO_PI, color="white", lw=0.8, ls="--")
        ax.set_xlabel("time (s)")
        ax.set_ylabel("frequency (Hz)")
        ax.set_title(title or f"{tfr.kind} amplitude")
        fig.tight_layout()
        fig.savefig(path, dpi=dpi)
    finally:
        plt.close(fig)
    return path
