import json
import math

import numpy as np
import pytest

from tfrtools import container, kernels as kn, synchrosqueeze as sq, transform as tr
from tfrtools.core import FrequencyGrid, Signal, TimeFrequencyMap

TWO_PI = 2 * math.pi


@pytest.fixture(scope="module")
def maps(gaussian):
    fs = 10.0
    x = np.cos(TWO_PI * np.arange(600) / fs) + 0.1 * np.random.default_rng(0).standard_normal(600)
    s = Signal(x, fs)
    G = tr.compute_wft(s, gaussian, tr.build_grid("WFT", 3.0, 9.0, tr.choose_step(gaussian)))
    ss = sq.synchrosqueeze(s, gaussian, 4.0, 8.0)
    return G, ss


def _same(a, b):
    assert a.kind == b.kind and a.shape == b.shape
    assert a.grid.describe() == b.grid.describe()
    assert a.fs == b.fs and a.t0 == b.t0
    da, db = a.dense(), b.dense()
    assert np.array_equal(da.view(np.float64), db.view(np.float64))


class TestRoundTrip:
    def test_dense(self, maps, tmp_path):
        G = maps[0]
        container.save(G, tmp_path / "g")
        back = container.load(tmp_path / "g")
        _same(G, back)
        assert back.kernel.label == G.kernel.label and back.pad == G.pad

    def test_sparse(self, maps, tmp_path):
        ss = maps[1]
        container.save(ss, str(tmp_path / "s.json"))
        back = container.load(str(tmp_path / "s"))
        assert back.is_sparse and back.data.nnz == ss.data.nnz
        _same(ss, back)
        assert back.meta["source_grid"] == ss.meta["source_grid"]

    def test_signed_zero_and_extremes(self, gaussian, tmp_path):
        grid = FrequencyGrid.linear(1.0, 1.5, 0.5)
        d = np.array([[complex(-0.0, 0.0), complex(1e-310, -1e308)],
                      [complex(0.0, -0.0), complex(math.pi, -math.e)]])
        m = TimeFrequencyMap(d, grid, 1.0, -3.5, "WFT", gaussian)
        container.save(m, tmp_path / "z")
        back = container.load(tmp_path / "z")
        _same(m, back)
        assert math.copysign(1.0, back.data[0, 0].real) == -1.0

    def test_byte_identical(self, maps, tmp_path):
        for i in (1, 2):
            container.save(maps[1], tmp_path / f"r{i}")
        for ext in (".json", ".bin"):
            assert (tmp_path / f"r1{ext}").read_bytes() == (tmp_path / f"r2{ext}").read_bytes()

    def test_metadata_document(self, maps, tmp_path):
        p, _ = container.save(maps[0], tmp_path / "m")
        doc = json.loads(open(p).read())
        assert doc["format"] == container.FORMAT and doc["version"] == container.VERSION
        assert doc["units"]["frequency"] == "rad/s"
        assert doc["payload"]["byteorder"] == "little"

    def test_custom_kernel_comes_back_without_kernel(self, tmp_path):
        spec = kn.custom_kernel("window", freq_form=lambda x: np.exp(-x ** 2 / 2), name="mine")
        grid = FrequencyGrid.linear(1.0, 1.5, 0.5)
        m = TimeFrequencyMap(np.ones((2, 3), complex), grid, 1.0, 0.0, "WFT", spec)
        container.save(m, tmp_path / "c")
        back = container.load(tmp_path / "c")
        assert back.kernel is None and back.meta["kernel"]["name"] == "mine"


class TestErrors:
    def test_missing(self, tmp_path):
        with pytest.raises(ValueError, match="unreadable"):
            container.load(tmp_path / "nothing")

    def test_not_a_container(self, tmp_path):
        (tmp_path / "x.json").write_text('{"format": "other"}')
        (tmp_path / "x.bin").write_bytes(b"")
        with pytest.raises(ValueError, match="not a"):
            container.load(tmp_path / "x")

    def test_truncated_payload(self, maps, tmp_path):
        _, b = container.save(maps[0], tmp_path / "t")
        raw = open(b, "rb").read()
        open(b, "wb").write(raw[:-16])
        with pytest.raises(ValueError, match="wrong size"):
            container.load(tmp_path / "t")

    def test_version(self, maps, tmp_path):
        p, _ = container.save(maps[0], tmp_path / "v")
        doc = json.loads(open(p).read())
        doc["version"] = 99
        open(p, "w").write(json.dumps(doc))
        with pytest.raises(ValueError, match="version"):
            container.load(tmp_path / "v")
