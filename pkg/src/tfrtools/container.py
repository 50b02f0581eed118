"""On-disk container for time-frequency maps.

A map is stored as two files sharing a stem: ``<stem>.json`` holds the
metadata (kind, kernel, grid, sampling, padding, units, format version) as
sorted, indented JSON, and ``<stem>.bin`` the payload as little-endian
float64.  Dense maps store the (n_bins, N) array row-major with real and
imaginary parts interleaved; synchrosqueezed maps store one (bin, time,
re, im) quadruple per nonzero entry, ordered by time then bin.  Identical
maps give byte-identical files.
"""

from __future__ import annotations

import json
import math
import os

import numpy as np

from . import kernels as kn
from .core import FrequencyGrid, PadRecord, SparseEntries, TimeFrequencyMap

FORMAT = "tfrtools-map"
VERSION = 1
_LE = "<f8"


def _plain(obj):
    """JSON-compatible copy of nested metadata (tuples become lists)."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if obj is None or isinstance(obj, (int, str)):
        return obj
    return str(obj)


def _kernel_record(spec) -> dict:
    if spec is None:
        return None
    return {"kind": spec.kind, "name": spec.name, "label": spec.label, "f0": float(spec.f0),
            "params": _plain(spec.params)}


def _kernel_from_record(rec):
    if rec is None:
        return None
    if rec["name"] not in kn.WINDOW_NAMES + kn.WAVELET_NAMES:
        return None
    params = dict(rec.get("params") or {})
    extras = {"a": params["a"]} if rec["name"] in kn.PARAMETRIC else {}
    return kn.make_kernel(rec["kind"], rec["name"], rec["f0"], **extras)


def metadata(tfr: TimeFrequencyMap) -> dict:
    """Metadata document of a map, as written to the ``.json`` file."""
    layout = "sparse-quadruples" if tfr.is_sparse else "dense-interleaved"
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "kind": tfr.kind,
        "kernel": _kernel_record(tfr.kernel),
        "grid": tfr.grid.describe(),
        "fs": float(tfr.fs),
        "t0": float(tfr.t0),
        "shape": [int(d) for d in tfr.shape],
        "pad": None if tfr.pad is None else {"scheme": tfr.pad.scheme, "n1": int(tfr.pad.n1),
                                              "n2": int(tfr.pad.n2)},
        "band": None if tfr.band is None else [float(b) for b in tfr.band],
        "meta": _plain(tfr.meta),
        "payload": {"layout": layout, "dtype": "float64", "byteorder": "little",
                    "count": int(tfr.data.nnz) if tfr.is_sparse else int(np.prod(tfr.shape))},
        "units": {"frequency": "rad/s", "time": "s", "fs": "Hz"},
    }
    return doc


def _paths(stem: str) -> tuple:
    stem = os.fspath(stem)
    for ext in (".json", ".bin"):
        if stem.endswith(ext):
            stem = stem[: -len(ext)]
    return stem + ".json", stem + ".bin"


def _payload(tfr: TimeFrequencyMap) -> bytes:
    if tfr.is_sparse:
        e = tfr.data
        q = np.empty((e.nnz, 4), dtype=_LE)
        q[:, 0] = e.bins
        q[:, 1] = e.times
        q[:, 2] = e.values.real
        q[:, 3] = e.values.imag
        return q.tobytes(order="C")
    d = np.ascontiguousarray(tfr.data)
    inter = np.empty(d.shape + (2,), dtype=_LE)
    inter[..., 0] = d.real
    inter[..., 1] = d.imag
    return inter.tobytes(order="C")


def save(tfr: TimeFrequencyMap, stem: str) -> tuple:
    """Write ``<stem>.json`` and ``<stem>.bin``; returns both paths."""
    meta_path, bin_path = _paths(stem)
    text = json.dumps(metadata(tfr), indent=2, sort_keys=True) + "\n"
    with open(meta_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    with open(bin_path, "wb") as fh:
        fh.write(_payload(tfr))
    return meta_path, bin_path


def _unplain(obj):
    if isinstance(obj, dict):
        return {k: _unplain(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_unplain(v) for v in obj]
    if obj in ("inf", "-inf", "nan"):
        return float(obj)
    return obj


def _complex(re: np.ndarray, im: np.ndarray) -> np.ndarray:
    # Assigning the parts keeps signed zeros, which re + 1j * im would not.
    out = np.empty(re.shape, dtype=complex)
    out.real = re
    out.imag = im
    return out


def load(stem: str) -> TimeFrequencyMap:
    """Read a map written by `save`.

    Catalog kernels are rebuilt from their name and parameters; custom
    kernels come back as None (their metadata stays in ``meta["kernel"]``).
    """
    meta_path, bin_path = _paths(stem)
    try:
        with open(meta_path, encoding="utf-8") as fh:
            doc = json.load(fh)
        raw = np.fromfile(bin_path, dtype=_LE)
    except (OSError, ValueError) as exc:
        raise ValueError(f"unreadable container {meta_path}: {exc}") from exc
    if doc.get("format") != FORMAT:
        raise ValueError(f"{meta_path} is not a {FORMAT} container")
    if doc.get("version") != VERSION:
        raise ValueError(f"unsupported container version {doc.get('version')}")
    g = doc["grid"]
    grid = FrequencyGrid(g["kind"], float(g["step"]), int(g["k0"]), int(g["n_bins"]))
    shape = tuple(int(d) for d in doc["shape"])
    count = int(doc["payload"]["count"])
    if doc["payload"]["layout"] == "sparse-quadruples":
        if raw.size != 4 * count:
            raise ValueError("container payload has the wrong size")
        q = raw.reshape(count, 4)
        data = SparseEntries(q[:, 0].astype(np.int64), q[:, 1].astype(np.int64),
                             _complex(q[:, 2], q[:, 3]), shape)
    else:
        if raw.size != 2 * count or count != shape[0] * shape[1]:
            raise ValueError("container payload has the wrong size")
        inter = raw.reshape(shape + (2,))
        data = _complex(inter[..., 0], inter[..., 1])
    pad = doc.get("pad")
    pad = None if pad is None else PadRecord(pad["scheme"], int(pad["n1"]), int(pad["n2"]))
    band = doc.get("band")
    band = None if band is None else tuple(float(b) for b in band)
    meta = _unplain(doc.get("meta") or {})
    kernel = _kernel_from_record(doc.get("kernel"))
    if kernel is None and doc.get("kernel") is not None:
        meta["kernel"] = doc["kernel"]
    return TimeFrequencyMap(data, grid, float(doc["fs"]), float(doc["t0"]), doc["kind"], kernel,
                            pad, band, meta)
