"""Command-line driver.

    tfr wft SIGNAL [options]       windowed Fourier transform
    tfr wt SIGNAL [options]        wavelet transform
    tfr squeeze SIGNAL [options]   synchrosqueezed WFT or WT
    tfr extract MAP [options]      ridge/support and component parameters
    tfr plot MAP [options]         amplitude heatmap

User-facing frequencies are in Hz; the library works in rad/s.  Signals
are read from CSV (one value column, or time,value columns on a uniform
time axis) or raw little-endian float64 with --fs.  Exit codes: 0 on
success, 1 on runtime failures, 2 on invalid input or configuration.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from dataclasses import dataclass
from typing import Optional

import click
import numpy as np

from . import container
from . import diagnostics as dg
from . import extract as ex
from . import kernels as kn
from . import synchrosqueeze as sq
from . import transform as tr
from .core import TWO_PI, Signal

# Relative spread allowed in the time column of a CSV input.
TIME_JITTER = 1e-6


class ConfigError(click.ClickException):
    """Invalid input or configuration (exit code 2)."""

    exit_code = 2


class RuntimeFailure(click.ClickException):
    """Failure while computing or writing results (exit code 1)."""

    exit_code = 1


# ---------------------------------------------------------------------------
# Input
# ---------------------------------------------------------------------------

def _detect_format(path: str, fmt: Optional[str]) -> str:
    if fmt:
        return fmt
    return "raw" if os.path.splitext(path)[1].lower() in (".bin", ".raw", ".f64") else "csv"


def _read_csv(path: str):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if rows:
        try:
            [float(c) for c in rows[0]]
        except ValueError:
            rows = rows[1:]
    if not rows:
        return None
    width = len(rows[0])
    if width not in (1, 2) or any(len(r) != width for r in rows):
        raise ConfigError("CSV input needs one value column or time,value columns")
    try:
        arr = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"non-numeric CSV entry: {exc}") from exc
    return arr


def read_signal(path: str, fmt: Optional[str] = None, fs: Optional[float] = None) -> Signal:
    """Signal from a CSV or raw float64 file.

    For time,value CSVs the sampling rate and start time come from the time
    column, which must be uniform to a relative jitter of 1e-6.
    """
    fmt = _detect_format(path, fmt)
    try:
        if fmt == "raw":
            if fs is None:
                raise ConfigError("raw input needs --fs")
            x = np.fromfile(path, dtype="<f8")
            arr = x[:, None] if x.size else None
        elif fmt == "csv":
            arr = _read_csv(path)
        else:
            raise ConfigError(f"unknown input format {fmt!r}")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if arr is None or arr.shape[0] == 0:
        raise ConfigError("empty signal")
    t0 = 0.0
    if arr.shape[1] == 2:
        t = arr[:, 0]
        if t.size < 2:
            raise ConfigError("a time column needs at least two samples")
        d = np.diff(t)
        dt = float(np.mean(d))
        if not dt > 0 or np.max(np.abs(d - dt)) > TIME_JITTER * dt:
            raise ConfigError("time column is not uniformly sampled")
        rate = 1.0 / dt
        if fs is not None and abs(fs - rate) > TIME_JITTER * rate:
            raise ConfigError(f"--fs {fs} disagrees with the time column ({rate:g} Hz)")
        fs, t0 = rate, float(t[0])
    elif fs is None:
        raise ConfigError("single-column input needs --fs")
    x = arr[:, -1]
    if not np.all(np.isfinite(x)):
        raise ConfigError("signal contains non-finite values")
    try:
        return Signal(x, float(fs), t0)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    """Validated settings for one transform run (frequencies in Hz)."""

    kind: str
    kernel: kn.KernelSpec
    fmin: float
    fmax: float
    nb: int
    step: Optional[float]
    pad: str
    eps: float
    preprocess: bool
    outdir: str
    stem: str
    plot: bool
    coi: bool

    @property
    def wmin(self) -> float:
        return TWO_PI * self.fmin

    @property
    def wmax(self) -> float:
        return TWO_PI * self.fmax

    def grid_step(self) -> float:
        """Delta omega (rad/s) for windows or n_v for wavelets."""
        if self.step is not None:
            return TWO_PI * self.step if self.kind == "WFT" else self.step
        return tr.choose_step(self.kernel, self.nb)


def _make_config(kind, s: Signal, kernel, f0, fmin, fmax, nb, step, pad, eps, no_preprocess,
                 outdir, stem, plot, coi) -> RunConfig:
    want = "wavelet" if kind == "WT" else "window"
    if kernel is None:
        kernel = "Lognorm" if want == "wavelet" else "Gaussian"
    try:
        spec = kn.make_kernel(None, kernel, f0)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if spec.kind != want:
        raise ConfigError(f"{kernel} is a {spec.kind}; {kind} needs a {want}")
    T = (s.N - 1) / s.fs
    if s.N < 2 or T <= 0:
        raise ConfigError("signal needs at least two samples")
    nyq = s.fs / 2.0
    if fmin is None:
        fmin = 5.0 / T
    if fmax is None:
        fmax = nyq
    if fmax > nyq * (1 + 1e-12):
        raise ConfigError(f"--fmax {fmax:g} Hz exceeds the Nyquist limit fs/2 = {nyq:g} Hz "
                          "(the highest representable frequency is half the sampling rate)")
    if kind == "WT" and not fmin > 0:
        raise ConfigError("--fmin must be positive for wavelet transforms")
    if not fmax > fmin:
        raise ConfigError("need --fmin < --fmax")
    if fmin * T < 1.0:
        click.echo(f"warning: fmin {fmin:g} Hz is below one cycle per record (1/T = {1 / T:g} Hz)",
                   err=True)
    if not 0.0 < eps < 1.0:
        raise ConfigError("--eps must lie in (0, 1)")
    if nb < 1:
        raise ConfigError("--nb must be a positive integer")
    if step is not None and not step > 0:
        raise ConfigError("--step must be positive")
    os.makedirs(outdir, exist_ok=True)
    return RunConfig(kind, spec, float(fmin), float(fmax), int(nb), step, pad, float(eps),
                     not no_preprocess, outdir, stem, plot, coi)


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _grid_summary(grid) -> dict:
    c = grid.centers
    d = grid.describe()
    d.update({"n_bins": int(grid.n_bins), "fmin_hz": float(c[0] / TWO_PI),
              "fmax_hz": float(c[-1] / TWO_PI)})
    if grid.kind == "linear":
        d["step_hz"] = grid.step / TWO_PI
    return d


def _write_coi(cone, tfr, path: str):
    buf = io.StringIO()
    buf.write("freq_hz,t_start,t_end,in_band\n")
    lo, hi = cone.freq_range
    for f, a, b in zip(tfr.grid.centers, cone.t_start, cone.t_end):
        inside = int(lo <= f <= hi)
        buf.write(f"{f / TWO_PI!r},{float(a)!r},{float(b)!r},{inside}\n")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(buf.getvalue())


def _emit(tfr, cfg: RunConfig, summary: dict, t_start: float):
    stem = os.path.join(cfg.outdir, cfg.stem)
    try:
        meta_path, bin_path = container.save(tfr, stem)
        cone = dg.cone_of_influence(tfr, cfg.eps)
        coi_path = stem + ".coi.csv"
        _write_coi(cone, tfr, coi_path)
        files = [meta_path, bin_path, coi_path]
        if cfg.plot:
            from . import plotting
            files.append(plotting.plot_map(tfr, stem + ".png", cone if cfg.coi else None))
    except OSError as exc:
        raise RuntimeFailure(f"cannot write output: {exc}") from exc
    summary.update({
        "grid": _grid_summary(tfr.grid),
        "pad": None if tfr.pad is None else {"scheme": tfr.pad.scheme, "n1": tfr.pad.n1,
                                              "n2": tfr.pad.n2, "Np": tfr.meta.get("Np")},
        "coi": {"eps": cfg.eps, "freq_range_hz": [cone.freq_range[0] / TWO_PI,
                                                   cone.freq_range[1] / TWO_PI],
                "t_start": [float(np.min(cone.t_start)), float(np.max(cone.t_start))],
                "t_end": [float(np.min(cone.t_end)), float(np.max(cone.t_end))],
                "empty": cone.empty},
        "files": files,
    })
    runtime = time.perf_counter() - t_start
    with open(stem + ".summary.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    g = summary["grid"]
    click.echo(f"{tfr.kind}: {g['n_bins']} bins, {g['fmin_hz']:.6g}-{g['fmax_hz']:.6g} Hz, "
               f"{tfr.N} samples")
    if summary["pad"]:
        p = summary["pad"]
        click.echo(f"padding: {p['scheme']} n1={p['n1']} n2={p['n2']} Np={p['Np']}")
    c = summary["coi"]
    click.echo(f"cone of influence (eps={c['eps']:g}): {c['freq_range_hz'][0]:.6g}-"
               f"{c['freq_range_hz'][1]:.6g} Hz, start {c['t_start'][0]:.6g}-{c['t_start'][1]:.6g} s,"
               f" end {c['t_end'][0]:.6g}-{c['t_end'][1]:.6g} s")
    click.echo(f"wrote {meta_path}; runtime {runtime:.3f} s")


def _guard(fn):
    """Map library errors to exit codes: ValueError 2, anything else 1."""
    import functools

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        except (OSError, RuntimeError, ArithmeticError, MemoryError) as exc:
            raise RuntimeFailure(str(exc)) from exc
    return wrapper


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

@click.group()
@click.version_option(package_name="artifact")
def main():
    """Windowed Fourier, wavelet and synchrosqueezed transforms of signals."""


def _input_options(f):
    opts = [
        click.argument("signal", type=click.Path(dir_okay=False)),
        click.option("--format", "fmt", type=click.Choice(["csv", "raw"]), default=None,
                     help="Input format (default from the file extension)."),
        click.option("--fs", type=float, default=None, help="Sampling rate in Hz."),
        click.option("--kernel", default=None, help="Window or wavelet name, e.g. Gaussian, "
                     "Kaiser-2.5, Lognorm, Morse-3."),
        click.option("--f0", type=float, default=1.0, show_default=True,
                     help="Resolution parameter."),
        click.option("--fmin", type=float, default=None, help="Lowest frequency (Hz)."),
        click.option("--fmax", type=float, default=None, help="Highest frequency (Hz)."),
        click.option("--nb", type=int, default=10, show_default=True,
                     help="Bins per peak width used to choose the bin step."),
        click.option("--pad", type=click.Choice(["predictive", "zero", "periodic", "symmetric",
                                                 "none"]),
                     default="predictive", show_default=True),
        click.option("--eps", type=float, default=0.001, show_default=True,
                     help="Accuracy for padding and the cone of influence."),
        click.option("--no-preprocess", is_flag=True,
                     help="Skip detrending and band-pass filtering."),
        click.option("--out", "outdir", type=click.Path(file_okay=False), default=".",
                     show_default=True, help="Output directory."),
        click.option("--name", "stem", default=None, help="Output file stem."),
        click.option("--plot/--no-plot", default=False, help="Also write a PNG heatmap."),
        click.option("--coi/--no-coi", default=True, help="Draw the cone on the plot."),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _transform_command(kind, signal, fmt, fs, kernel, f0, fmin, fmax, nb, step, pad, eps,
                       no_preprocess, outdir, stem, plot, coi):
    t_start = time.perf_counter()
    s = read_signal(signal, fmt, fs)
    stem = stem or f"{os.path.splitext(os.path.basename(signal))[0]}_{kind.lower()}"
    cfg = _make_config(kind, s, kernel, f0, fmin, fmax, nb, step, pad, eps, no_preprocess,
                       outdir, stem, plot, coi)
    grid = tr.build_grid(kind, cfg.wmin, cfg.wmax, cfg.grid_step())
    tfr = tr.compute(s, cfg.kernel, grid, pad_scheme=cfg.pad, preprocessed=not cfg.preprocess,
                     eps=cfg.eps)
    _emit(tfr, cfg, {"command": kind.lower(), "kernel": cfg.kernel.label, "f0": cfg.kernel.f0},
          t_start)
    return tfr


@main.command("wft")
@_input_options
@click.option("--step", type=float, default=None, help="Bin width in Hz (overrides --nb).")
@_guard
def cmd_wft(**kw):
    """Windowed Fourier transform of SIGNAL."""
    _transform_command("WFT", **kw)


@main.command("wt")
@_input_options
@click.option("--nv", "step", type=float, default=None,
              help="Voices per octave (overrides --nb).")
@_guard
def cmd_wt(**kw):
    """Wavelet transform of SIGNAL."""
    _transform_command("WT", **kw)


@main.command("squeeze")
@_input_options
@click.option("--kind", type=click.Choice(["wft", "wt"]), default=None,
              help="Underlying transform (default from the kernel).")
@click.option("--step", type=float, default=None,
              help="Source bin width: Hz for WFT, voices per octave for WT.")
@click.option("--step-out", "--nv-out", "step_out", type=float, default=None,
              help="Output bin width (Hz for SWFT, voices per octave for SWT).")
@click.option("--method", type=click.Choice(["finite_difference", "derivative_kernel"]),
              default="finite_difference", show_default=True,
              help="Phase-velocity estimate.")
@click.option("--threshold", type=float, default=1e-6, show_default=True,
              help="Ignore source coefficients below this fraction of the map maximum "
                   "(0 keeps all).")
@_guard
def cmd_squeeze(signal, fmt, fs, kernel, f0, fmin, fmax, nb, pad, eps, no_preprocess, outdir,
                stem, plot, coi, kind, step, step_out, method, threshold):
    """Synchrosqueezed transform of SIGNAL over [fmin, fmax].

    The underlying transform is computed on a range widened by the kernel's
    frequency support and squeezed back onto the requested band.
    """
    t_start = time.perf_counter()
    s = read_signal(signal, fmt, fs)
    if kind is None:
        kind = "wt" if kernel is not None and kn.kernel_kind(kernel) == "wavelet" else "wft"
    base = kind.upper()
    stem = stem or f"{os.path.splitext(os.path.basename(signal))[0]}_s{kind}"
    cfg = _make_config(base, s, kernel, f0, fmin, fmax, nb, step, pad, eps, no_preprocess,
                       outdir, stem, plot, coi)
    src_step = cfg.grid_step()
    if step_out is None:
        out_step = src_step
    else:
        if not step_out > 0:
            raise ConfigError("--step-out must be positive")
        out_step = TWO_PI * step_out if base == "WFT" else step_out
    if threshold < 0:
        raise ConfigError("--threshold must be non-negative")
    ss, src, _ = sq.synchrosqueeze(s, cfg.kernel, cfg.wmin, cfg.wmax, step=src_step,
                                   out_step=out_step, eps=cfg.eps, method=method,
                                   pad_scheme=cfg.pad, preprocessed=not cfg.preprocess,
                                   relative_threshold=threshold or None,
                                   return_source=True)
    sc = src.grid.centers
    summary = {"command": "squeeze", "kernel": cfg.kernel.label, "f0": cfg.kernel.f0,
               "method": method, "threshold": threshold,
               "source_range_hz": [float(sc[0] / TWO_PI), float(sc[-1] / TWO_PI)],
               "nonzero_fraction": ss.data.nnz / float(ss.shape[0] * ss.shape[1])}
    click.echo(f"source transform: {sc[0] / TWO_PI:.6g}-{sc[-1] / TWO_PI:.6g} Hz")
    _emit(ss, cfg, summary, t_start)


def _fmt_cell(x) -> str:
    return "" if x is None or not np.isfinite(x) else repr(float(x))


@main.command("extract")
@click.argument("container_path", metavar="MAP", type=click.Path(dir_okay=False))
@click.option("--method", type=click.Choice(["direct", "ridge", "hybrid"]), default="direct",
              show_default=True)
@click.option("--band", nargs=2, type=float, default=None,
              help="Frequency band (Hz) for the ridge search.")
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None,
              help="Track CSV (default: next to MAP).")
@_guard
def cmd_extract(container_path, method, band, output):
    """Extract one component from a stored MAP into a CSV of t, nu, A, phi.

    nu is in Hz.  Missing times give empty cells.  Ridge estimates from
    synchrosqueezed maps carry no amplitude, so the A column is omitted.
    """
    tfr = container.load(container_path)
    if tfr.kernel is None:
        raise ConfigError("map has no catalog kernel; extraction needs its constants")
    if method == "hybrid" and tfr.kind not in ("WFT", "WT"):
        raise ConfigError("hybrid extraction needs a WFT or WT map")
    wband = None if band is None else (TWO_PI * band[0], TWO_PI * band[1])
    track = ex.extract_tfs(tfr, wband)
    nu_map = sq.phase_velocity(tfr) if method == "hybrid" else None
    est = ex.reconstruct(tfr, track, method, nu_map)
    has_amp = est.amplitude is not None
    if output is None:
        base = container_path[:-5] if container_path.endswith(".json") else container_path
        output = f"{base}.{method}.csv"
    buf = io.StringIO()
    buf.write("t,nu_hz,A,phi\n" if has_amp else "t,nu_hz,phi\n")
    for i, t in enumerate(est.times):
        cells = [repr(float(t)), _fmt_cell(est.frequency[i] / TWO_PI)]
        if has_amp:
            cells.append(_fmt_cell(est.amplitude[i]))
        cells.append(_fmt_cell(est.phase[i]))
        buf.write(",".join(cells) + "\n")
    try:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(buf.getvalue())
    except OSError as exc:
        raise RuntimeFailure(f"cannot write {output}: {exc}") from exc
    missing = int(np.sum(~est.present))
    click.echo(f"{method} estimates for {est.times.size} times ({missing} missing) -> {output}")
    if not has_amp:
        click.echo("note: ridge estimates from a synchrosqueezed map have no amplitude")


@main.command("plot")
@click.argument("container_path", metavar="MAP", type=click.Path(dir_okay=False))
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None,
              help="Image file (format from the extension; default MAP.png).")
@click.option("--coi/--no-coi", default=False, help="Overlay the cone of influence.")
@click.option("--eps", type=float, default=0.001, show_default=True)
@click.option("--log-freq/--linear-freq", default=None,
              help="Frequency axis scale (default: log for WT/SWT).")
@_guard
def cmd_plot(container_path, output, coi, eps, log_freq):
    """Amplitude heatmap of a stored MAP."""
    from . import plotting
    tfr = container.load(container_path)
    cone = None
    if coi:
        if tfr.kernel is None:
            raise ConfigError("cone overlay needs a catalog kernel")
        cone = dg.cone_of_influence(tfr, eps)
    if output is None:
        base = container_path[:-5] if container_path.endswith(".json") else container_path
        output = base + ".png"
    try:
        plotting.plot_map(tfr, output, cone, log_freq)
    except OSError as exc:
        raise RuntimeFailure(f"cannot write {output}: {exc}") from exc
    click.echo(f"wrote {output} (matrix digest {plotting.matrix_digest(tfr)[:16]})")


if __name__ == "__main__":
    main()
