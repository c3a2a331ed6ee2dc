"""On-disk formats for descriptors and learned models.

Binary container layout (all little-endian)::

    b"RRV1" | uint32 version | uint32 n_arrays
    per array: uint16 name_len | name utf-8 | uint8 ndim | uint64 dims[ndim] | float64 data

Hyperparameters live in a JSON sidecar next to the container
(``model.rrv`` -> ``model.json``).
"""
from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .descriptor import WIDTH
from .errors import DataError, ParseError
from .recognize.bow import Codebook, Dictionary
from .recognize.svm import SvmModel
from .skeleton import SkeletonDescriptor

MAGIC = b"RRV1"
VERSION = 1
BLOCK_COLUMNS = ("qw", "qx", "qy", "qz", "tx", "ty", "tz")


def _fmt(x: float) -> str:
    return repr(float(x))


def descriptor_columns(width: int, prefix: str = "") -> list[str]:
    n = width // WIDTH
    if n == 1:
        return [prefix + c for c in BLOCK_COLUMNS]
    return [f"{prefix}{c}{k}" for k in range(n) for c in BLOCK_COLUMNS]


def save_descriptor_csv(path, desc) -> None:
    """Header plus one row per time step; skeleton columns are ``<PART>_...``."""
    if isinstance(desc, SkeletonDescriptor):
        cols, data = [], []
        for name, arr in desc.parts.items():
            cols += descriptor_columns(arr.shape[1], f"{name}_")
            data.append(arr)
        data = np.concatenate(data, axis=1)
    else:
        data = np.asarray(desc, dtype=float)
        cols = descriptor_columns(data.shape[1])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in data:
            w.writerow([_fmt(v) for v in row])


def load_descriptor_csv(path):
    """Inverse of :func:`save_descriptor_csv`."""
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError("empty descriptor file", path=path)
    header, body = rows[0], rows[1:]
    data = np.empty((len(body), len(header)))
    for i, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", path=path, line=i)
        for j, tok in enumerate(row):
            try:
                data[i - 2, j] = float(tok)
            except ValueError:
                raise ParseError(f"non-numeric value {tok!r}", path=path, line=i, field=j + 1) from None
    if header and "_" in header[0]:
        parts: dict = {}
        for j, col in enumerate(header):
            parts.setdefault(col.split("_", 1)[0], []).append(j)
        return SkeletonDescriptor({k: data[:, idx] for k, idx in parts.items()})
    return data


def save_descriptor_bin(path, desc) -> None:
    """uint64 rows, uint64 columns, then row-major float64."""
    arr = desc.concatenated() if isinstance(desc, SkeletonDescriptor) else np.asarray(desc, dtype=float)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<QQ", *arr.shape))
        fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_descriptor_bin(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 16:
        raise ParseError("truncated descriptor file", path=path)
    n, m = struct.unpack_from("<QQ", raw)
    if len(raw) != 16 + 8 * n * m:
        raise ParseError(f"size mismatch for {n}x{m} descriptor", path=path)
    return np.frombuffer(raw, dtype="<f8", offset=16).reshape(n, m).astype(float)


def write_container(path, arrays: dict, meta: dict | None = None) -> None:
    path = Path(path)
    out = [MAGIC, struct.pack("<II", VERSION, len(arrays))]
    for name, arr in arrays.items():
        arr = np.asarray(arr, dtype="<f8", order="C")  # ascontiguousarray would promote 0-d to 1-d
        key = name.encode()
        out.append(struct.pack("<HB", len(key), arr.ndim) + key)
        out.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        out.append(arr.tobytes())
    path.write_bytes(b"".join(out))
    if meta is not None:
        path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_container(path) -> tuple[dict, dict | None]:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] != MAGIC:
        raise DataError(f"{path}: not an RRV1 container")
    version, count = struct.unpack_from("<II", raw, 4)
    if version != VERSION:
        raise DataError(f"{path}: unsupported container version {version}")
    pos, arrays = 12, {}
    try:
        for _ in range(count):
            klen, ndim = struct.unpack_from("<HB", raw, pos)
            pos += 3
            name = raw[pos : pos + klen].decode()
            pos += klen
            shape = struct.unpack_from(f"<{ndim}Q", raw, pos)
            pos += 8 * ndim
            size = int(np.prod(shape)) if ndim else 1
            arrays[name] = np.frombuffer(raw, dtype="<f8", count=size, offset=pos).reshape(shape).astype(float)
            pos += 8 * size
    except (struct.error, ValueError) as exc:
        raise DataError(f"{path}: truncated container") from exc
    sidecar = path.with_suffix(".json")
    meta = json.loads(sidecar.read_text()) if sidecar.exists() else None
    return arrays, meta


def save_dictionary(path, d: Dictionary, **hyper) -> None:
    write_container(path, {"words": d.words}, {"kind": d.kind, "k": d.k, **hyper})


def load_dictionary(path) -> Dictionary:
    arrays, meta = read_container(path)
    if meta is None:
        raise DataError(f"{path}: missing sidecar")
    return Dictionary(arrays["words"], meta["kind"])


def save_bow_model(path, codebook: Codebook, svm: SvmModel, hyper: dict | None = None) -> None:
    """One container holding every dictionary and the SVM state."""
    arrays = {}
    for part, (dr, dt) in codebook.dicts.items():
        arrays[f"dict/{part}/rotational"] = dr.words
        arrays[f"dict/{part}/translational"] = dt.words
    arrays["svm/train_x"] = svm.train_x
    arrays["svm/pairs"] = svm.pairs.astype(float)
    arrays["svm/coef"] = svm.coef
    arrays["svm/bias"] = svm.bias
    meta = {
        "format": "rrv-bow-model",
        "parts": codebook.parts,
        "classes": [str(c) for c in svm.classes],
        "gamma": svm.gamma,
        "C": svm.c,
        **(hyper or {}),
    }
    write_container(path, arrays, meta)


def load_bow_model(path) -> tuple[Codebook, SvmModel, dict]:
    arrays, meta = read_container(path)
    if not meta or meta.get("format") != "rrv-bow-model":
        raise DataError(f"{path}: not a BoW model")
    dicts = {
        p: (
            Dictionary(arrays[f"dict/{p}/rotational"], "rotational"),
            Dictionary(arrays[f"dict/{p}/translational"], "translational"),
        )
        for p in meta["parts"]
    }
    svm = SvmModel(
        list(meta["classes"]),
        arrays["svm/train_x"],
        arrays["svm/pairs"].astype(int).reshape(-1, 2),
        arrays["svm/coef"],
        arrays["svm/bias"],
        float(meta["gamma"]),
        float(meta["C"]),
    )
    return Codebook(dicts), svm, meta
