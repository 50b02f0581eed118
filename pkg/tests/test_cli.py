import csv
import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from tfrtools import container, kernels as kn, plotting, transform as tr
from tfrtools.cli import main
from tfrtools.core import Signal

TWO_PI = 2 * math.pi
FS, N = 10.0, 1000


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    t = np.arange(N) / FS
    x = np.cos(TWO_PI * 1.0 * t)
    with open(d / "tone.csv", "w") as fh:
        fh.write("t,x\n")
        for a, b in zip(t, x):
            fh.write(f"{float(a)!r},{float(b)!r}\n")
    with open(d / "values.csv", "w") as fh:
        fh.write("\n".join(repr(float(v)) for v in x) + "\n")
    x.astype("<f8").tofile(d / "tone.bin")
    (d / "empty.csv").write_text("")
    with open(d / "jitter.csv", "w") as fh:
        for a, b in zip(t + np.where(np.arange(N) == 5, 0.01, 0.0), x):
            fh.write(f"{float(a)!r},{float(b)!r}\n")
    return d


def run(*args):
    return CliRunner().invoke(main, [str(a) for a in args], catch_exceptions=False)


class TestTransformCommands:
    def test_wft_tone(self, files, tmp_path):
        r = run("wft", files / "tone.csv", "--kernel", "Gaussian", "--f0", 1, "--fmin", 0.5,
                "--fmax", 1.5, "--no-preprocess", "--out", tmp_path)
        assert r.exit_code == 0, r.output
        assert "padding:" in r.output and "cone of influence" in r.output and "runtime" in r.output
        G = container.load(tmp_path / "tone_wft")
        g = kn.make_kernel("window", "Gaussian", 1.0)
        k = int(np.argmin(np.abs(G.grid.centers - TWO_PI)))
        exact = 0.5 * g.freq(G.grid.centers[k] - TWO_PI) * np.exp(1j * TWO_PI * G.times)
        inner = slice(100, -100)
        rel = np.abs(G.data[k, inner] - exact[inner]) / np.abs(exact[inner])
        assert np.max(rel) <= 1e-6
        summary = json.loads((tmp_path / "tone_wft.summary.json").read_text())
        assert summary["grid"]["n_bins"] == G.shape[0]
        assert (tmp_path / "tone_wft.coi.csv").exists()

    def test_round_trip_bit_exact(self, files, tmp_path):
        run("wft", files / "tone.csv", "--fmin", 0.5, "--fmax", 1.5, "--out", tmp_path)
        back = container.load(tmp_path / "tone_wft")
        g = kn.make_kernel("window", "Gaussian", 1.0)
        grid = tr.build_grid("WFT", TWO_PI * 0.5, TWO_PI * 1.5, tr.choose_step(g))
        t = np.arange(N) / FS
        mem = tr.compute_wft(Signal(np.cos(TWO_PI * t), FS), g, grid)
        assert np.array_equal(mem.data.view(np.float64), back.data.view(np.float64))

    def test_deterministic(self, files, tmp_path):
        for sub in ("a", "b"):
            assert run("squeeze", files / "tone.csv", "--fmin", 0.5, "--fmax", 2,
                       "--out", tmp_path / sub).exit_code == 0
        for ext in (".json", ".bin", ".coi.csv"):
            a = (tmp_path / "a" / f"tone_swft{ext}").read_bytes()
            assert a == (tmp_path / "b" / f"tone_swft{ext}").read_bytes()

    def test_wt_and_raw_input(self, files, tmp_path):
        r = run("wt", files / "tone.bin", "--fs", FS, "--fmin", 0.3, "--fmax", 3, "--nv", 16,
                "--out", tmp_path)
        assert r.exit_code == 0, r.output
        W = container.load(tmp_path / "tone_wt")
        assert W.kind == "WT" and W.grid.step == 16 and W.kernel.name == "Lognorm"

    def test_single_column_needs_fs(self, files, tmp_path):
        r = run("wft", files / "values.csv", "--out", tmp_path)
        assert r.exit_code == 2 and "--fs" in r.output
        assert run("wft", files / "values.csv", "--fs", FS, "--fmin", 0.5, "--fmax", 1.5,
                   "--out", tmp_path).exit_code == 0


class TestValidation:
    def test_empty_signal(self, files, tmp_path):
        r = run("wft", files / "empty.csv", "--out", tmp_path)
        assert r.exit_code == 2 and "empty signal" in r.output

    def test_nyquist(self, files, tmp_path):
        r = run("wft", files / "tone.csv", "--fmax", 6, "--out", tmp_path)
        assert r.exit_code == 2 and "Nyquist" in r.output

    def test_missing_file(self, tmp_path):
        r = run("wft", tmp_path / "nope.csv", "--out", tmp_path)
        assert r.exit_code == 2 and "cannot read" in r.output

    def test_nonuniform_time(self, files, tmp_path):
        r = run("wft", files / "jitter.csv", "--out", tmp_path)
        assert r.exit_code == 2 and "uniformly" in r.output

    @pytest.mark.parametrize("args, msg", [
        (("--kernel", "Morlet"), "wavelet"),
        (("--kernel", "Nope"), "unknown kernel"),
        (("--eps", 2), "--eps"),
        (("--fmin", 2, "--fmax", 1), "--fmin"),
    ])
    def test_bad_config(self, files, tmp_path, args, msg):
        r = run("wft", files / "tone.csv", "--out", tmp_path, *args)
        assert r.exit_code == 2 and msg in r.output


class TestSqueezeCommand:
    def test_sparse_default_band(self, files, tmp_path):
        # Cubic detrending leaves a low-frequency residue of about 1e-2 on a finite tone,
        # which fills a few percent of the low rows; the count is taken on the raw tone.
        r = run("squeeze", files / "tone.csv", "--no-preprocess", "--out", tmp_path)
        assert r.exit_code == 0, r.output
        ss = container.load(tmp_path / "tone_swft")
        assert ss.is_sparse
        assert 1.0 - ss.data.nnz / (ss.shape[0] * ss.shape[1]) >= 0.99

    def test_widened_range(self, files, tmp_path):
        r = run("squeeze", files / "tone.csv", "--fmin", 1, "--fmax", 2, "--out", tmp_path)
        assert r.exit_code == 0
        summary = json.loads((tmp_path / "tone_swft.summary.json").read_text())
        lo, hi = summary["source_range_hz"]
        xi = kn.epsilon_support_freq(kn.make_kernel("window", "Gaussian", 1.0), 0.001)[1]
        dw = tr.choose_step(kn.make_kernel("window", "Gaussian", 1.0)) / TWO_PI
        assert lo == pytest.approx(1 - xi / TWO_PI, abs=dw)
        assert hi == pytest.approx(2 + xi / TWO_PI, abs=dw)
        ss = container.load(tmp_path / "tone_swft")
        c = ss.grid.centers / TWO_PI
        assert c[0] >= 1 - 1e-12 and c[-1] <= 2 + 1e-12

    def test_finer_output_axis(self, files, tmp_path):
        r = run("squeeze", files / "tone.csv", "--kernel", "Lognorm", "--fmin", 0.5, "--fmax", 2,
                "--step", 12, "--nv-out", 48, "--out", tmp_path)
        assert r.exit_code == 0, r.output
        ss = container.load(tmp_path / "tone_swt")
        assert ss.kind == "SWT" and ss.grid.step == 48
        assert ss.meta["source_grid"]["step"] == 12

    def test_negative_threshold(self, files, tmp_path):
        r = run("squeeze", files / "tone.csv", "--threshold", -1, "--out", tmp_path)
        assert r.exit_code == 2


class TestExtractCommand:
    def _csv(self, path):
        with open(path) as fh:
            return list(csv.reader(fh))

    def test_tone_columns_constant(self, files, tmp_path):
        run("wft", files / "tone.csv", "--fmin", 0.1, "--fmax", 1.9, "--no-preprocess",
            "--out", tmp_path)
        r = run("extract", tmp_path / "tone_wft.json")
        assert r.exit_code == 0, r.output
        rows = self._csv(tmp_path / "tone_wft.direct.csv")
        assert rows[0] == ["t", "nu_hz", "A", "phi"]
        vals = np.array(rows[1:], dtype=float)[100:-100]
        assert np.max(np.abs(vals[:, 1] - 1.0)) <= 1e-6
        assert np.max(np.abs(vals[:, 2] - 1.0)) <= 1e-6

    def test_default_preprocessing_close(self, files, tmp_path):
        run("wft", files / "tone.csv", "--fmin", 0.1, "--fmax", 1.9, "--out", tmp_path)
        assert run("extract", tmp_path / "tone_wft.json").exit_code == 0
        vals = np.array(self._csv(tmp_path / "tone_wft.direct.csv")[1:], dtype=float)[100:-100]
        assert np.max(np.abs(vals[:, 1] - 1.0)) <= 1e-3
        assert np.max(np.abs(vals[:, 2] - 1.0)) <= 1e-3

    def test_squeezed_ridge_has_no_amplitude(self, files, tmp_path):
        run("squeeze", files / "tone.csv", "--fmin", 0.5, "--fmax", 1.5, "--out", tmp_path)
        out = tmp_path / "ridge.csv"
        r = run("extract", tmp_path / "tone_swft.json", "--method", "ridge", "-o", out)
        assert r.exit_code == 0 and "no amplitude" in r.output
        assert self._csv(out)[0] == ["t", "nu_hz", "phi"]

    def test_missing_times_are_empty_cells(self, files, tmp_path):
        run("squeeze", files / "tone.csv", "--fmin", 0.5, "--fmax", 1.5, "--no-preprocess",
            "--out", tmp_path)
        out = tmp_path / "band.csv"
        r = run("extract", tmp_path / "tone_swft.json", "--band", 1.3, 1.5, "-o", out)
        assert r.exit_code == 0
        rows = self._csv(out)[1:]
        assert all(row[1:] == ["", "", ""] for row in rows)
        assert f"({len(rows)} missing)" in r.output

    def test_hybrid_on_squeezed_rejected(self, files, tmp_path):
        run("squeeze", files / "tone.csv", "--fmin", 0.5, "--fmax", 1.5, "--out", tmp_path)
        r = run("extract", tmp_path / "tone_swft.json", "--method", "hybrid")
        assert r.exit_code == 2

    def test_unreadable_container(self, tmp_path):
        (tmp_path / "bad.json").write_text("not json")
        r = run("extract", tmp_path / "bad.json")
        assert r.exit_code == 2 and "unreadable" in r.output


class TestPlotCommand:
    def test_tone_band_and_digest(self, files, tmp_path):
        run("wft", files / "tone.csv", "--fmin", 0.5, "--fmax", 1.5, "--out", tmp_path)
        r = run("plot", tmp_path / "tone_wft.json", "--coi")
        assert r.exit_code == 0, r.output
        assert (tmp_path / "tone_wft.png").stat().st_size > 0
        G = container.load(tmp_path / "tone_wft")
        assert plotting.matrix_digest(G)[:16] in r.output
        amp, _, freqs = plotting.render_matrix(G)
        rows = np.argmax(amp, axis=0)
        assert np.all(np.abs(freqs[rows] - 1.0) <= G.grid.step / TWO_PI)

    def test_squeezed_near_line(self, files, tmp_path):
        run("squeeze", files / "tone.csv", "--fmin", 0.5, "--fmax", 1.5, "--no-preprocess",
            "--out", tmp_path)
        out = tmp_path / "ss.png"
        assert run("plot", tmp_path / "tone_swft.json", "-o", out, "--coi").exit_code == 0
        ss = container.load(tmp_path / "tone_swft")
        amp, _, _ = plotting.render_matrix(ss)
        assert np.mean(np.count_nonzero(amp, axis=0)) <= 1.5

    def test_unreadable(self, tmp_path):
        r = run("plot", tmp_path / "none.json")
        assert r.exit_code == 2 and "unreadable" in r.output
