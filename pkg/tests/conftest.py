"""Shared fixtures: frozen oracle values and common test signals."""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from tfrtools import kernels as kn
from tfrtools.core import Signal

DATA = Path(__file__).with_name("data")
TWO_PI = 2.0 * math.pi


@pytest.fixture(scope="session")
def oracle():
    """Values frozen by tests/freeze_oracles.py from the independent oracles."""
    return json.loads((DATA / "oracle_values.json").read_text())


@pytest.fixture(scope="session")
def wft_convolution():
    with np.load(DATA / "wft_convolution.npz") as d:
        return {k: d[k] for k in d.files}


@pytest.fixture(scope="session")
def gaussian():
    return kn.make_kernel("window", "Gaussian", 1.0)


@pytest.fixture(scope="session")
def morlet():
    return kn.make_kernel("wavelet", "Morlet", 1.0)


@pytest.fixture(scope="session")
def lognorm():
    return kn.make_kernel("wavelet", "Lognorm", 1.0)


def tone(f_hz=1.0, fs=100.0, T=50.0, amp=1.0, phase=0.0, t0=0.0):
    """A cos(2 pi f t + phase) sampled on [t0, t0 + T)."""
    t = t0 + np.arange(int(round(T * fs))) / fs
    return Signal(amp * np.cos(TWO_PI * f_hz * t + phase), fs, t0)


def wrap(phase):
    """Phase difference folded into (-pi, pi]."""
    return np.angle(np.exp(1j * np.asarray(phase)))


# Acceptance reporting: each acceptance test records its parts here and the
# terminal summary prints one PASS/FAIL line per criterion.
ACCEPTANCE = {}


@pytest.fixture
def criterion():
    def record(number, ok, detail):
        ACCEPTANCE.setdefault(number, []).append((bool(ok), detail))
        return bool(ok)
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[number]
        status = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {number}: {status} - {detail}")
