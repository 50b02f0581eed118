"""Time-frequency analysis of real signals: windowed Fourier and wavelet
transforms, synchrosqueezing, component extraction and error diagnostics."""

from .core import (AnalyticSignal, ComponentTrack, FrequencyGrid, PadRecord, Signal,
                   SparseEntries, Spectrum, TimeFrequencyMap, analytic_signal)
from .kernels import KernelSpec, custom_kernel, kernel_constants, make_kernel
from .transform import (build_grid, choose_step, compute, compute_wft, compute_wt,
                        invert_freq, invert_time)
from .synchrosqueeze import invert_ss, phase_velocity, squeeze
from .extract import (direct_reconstruct, extract_tfs, hybrid_reconstruct, reconstruct,
                      ridge_reconstruct)
from .diagnostics import (analytic_error, boundary_error, cone_of_influence, frequency_limits,
                          negative_freq_interference)

__version__ = "0.1.0"

__all__ = [
    "AnalyticSignal", "ComponentTrack", "FrequencyGrid", "PadRecord", "Signal", "SparseEntries",
    "Spectrum", "TimeFrequencyMap", "analytic_signal", "KernelSpec", "custom_kernel",
    "kernel_constants", "make_kernel", "build_grid", "choose_step", "compute", "compute_wft",
    "compute_wt", "invert_freq", "invert_time", "invert_ss", "phase_velocity", "squeeze",
    "direct_reconstruct", "extract_tfs", "hybrid_reconstruct", "reconstruct",
    "ridge_reconstruct", "analytic_error", "boundary_error", "cone_of_influence",
    "frequency_limits", "negative_freq_interference",
]
