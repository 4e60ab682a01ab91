"""On-disk formats.

Matrix file (``.matrix``), all integers little-endian::

    offset  size  field
    0       6     magic b"SPODM1"
    6       2     dtype tag b"f8" (IEEE-754 binary64)
    8       1     layout tag b"F" (column-major)
    9       1     reserved, 0
    10      8     rows M (uint64)
    18      8     columns N (uint64)
    26      8MN   payload, float64 little-endian, column-major

Vectors (shifts, times) are plain text, one ``repr`` float per line, and
metadata files are ``key = value`` lines. Writes go to a temporary file in
the target directory and are renamed into place.
"""
import csv
import json
import os
import struct
import tempfile

import numpy as np

from .errors import FormatError

__all__ = [
    "MAGIC",
    "HEADER_SIZE",
    "write_matrix",
    "read_matrix",
    "read_csv_matrix",
    "write_vector",
    "read_vector",
    "write_kv",
    "read_kv",
    "write_json",
    "read_json",
    "write_text",
]

MAGIC = b"SPODM1"
_HEADER = struct.Struct("<6s2s1s1sQQ")
HEADER_SIZE = _HEADER.size


def _atomic_write(path, data, mode="wb"):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_text(path, text):
    _atomic_write(path, text.encode("utf-8"))


def matrix_bytes(values):
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise FormatError(f"only 2D matrices can be stored, got ndim={values.ndim}")
    m, n = values.shape
    header = _HEADER.pack(MAGIC, b"f8", b"F", b"\x00", m, n)
    return header + np.asarray(values, dtype="<f8").tobytes(order="F")


def write_matrix(path, values):
    _atomic_write(path, matrix_bytes(values))


def read_matrix(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < HEADER_SIZE:
        raise FormatError(f"{path}: truncated header")
    magic, dtype, layout, _, m, n = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if dtype != b"f8" or layout != b"F":
        raise FormatError(f"{path}: unsupported dtype/layout {dtype!r}/{layout!r}")
    if len(raw) - HEADER_SIZE != 8 * m * n:
        raise FormatError(f"{path}: payload has {len(raw) - HEADER_SIZE} bytes, expected {8 * m * n}")
    payload = np.frombuffer(raw, dtype="<f8", offset=HEADER_SIZE, count=m * n)
    return payload.reshape((m, n), order="F").astype(np.float64)


def read_csv_matrix(path):
    """Comma-separated rows of numbers (rows = grid points, columns = snapshots)."""
    with open(path, newline="") as fh:
        try:
            rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
        except ValueError as exc:
            raise FormatError(f"{path}: {exc}") from exc
    if not rows or len({len(r) for r in rows}) != 1:
        raise FormatError(f"{path}: ragged or empty CSV matrix")
    return np.array(rows, dtype=np.float64)


def write_vector(path, values):
    text = "".join(repr(float(v)) + "\n" for v in np.ravel(values))
    write_text(path, text)


def read_vector(path):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh]
    try:
        return np.array([float(ln) for ln in lines if ln], dtype=np.float64)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_kv(path, mapping):
    write_text(path, "".join(f"{k} = {v}\n" for k, v in mapping.items()))


def read_kv(path):
    out = {}
    with open(path) as fh:
        for ln in fh:
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            if "=" not in ln:
                raise FormatError(f"{path}: expected 'key = value', got {ln!r}")
            k, v = ln.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def write_json(path, obj):
    write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from exc
