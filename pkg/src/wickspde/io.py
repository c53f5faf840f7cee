"""Persistence: binary field container, CSV tables, JSON reports and run manifests.

Field container layout (little or big endian, tagged in the header)::

    magic   4 bytes  b"WSPF"
    version u2
    endian  1 byte   b"<" or b">"
    pad     1 byte
    N, M    u4, u4
    count   u4
    then per field: time f8, then (2N+1)^2 complex values as interleaved
    (re, im) f8 pairs in row-major order of (k1, k2), k from -N to N.
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import struct
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError, IntegrityError
from .field import FourierField

MAGIC = b"WSPF"
CONTAINER_VERSION = 1
REPORT_SCHEMA_VERSION = 1
_HEADER = "4sHcxIII"


def write_fields(path, fields: Sequence[FourierField], times: Sequence[float] | None = None,
                 byteorder: str = "<") -> None:
    if byteorder not in ("<", ">"):
        raise ConfigurationError("byteorder must be '<' or '>'")
    if not fields:
        raise ConfigurationError("no fields to write")
    N, M = fields[0].N, fields[0].M
    if any(f.N != N for f in fields):
        raise ConfigurationError("all fields in a container must share the cutoff")
    times = [0.0] * len(fields) if times is None else list(times)
    buf = _io.BytesIO()
    buf.write(struct.pack(byteorder + _HEADER, MAGIC, CONTAINER_VERSION, byteorder.encode(),
                          N, M, len(fields)))
    dt = np.dtype(byteorder + "f8")
    for t, f in zip(times, fields):
        buf.write(np.array([t], dtype=dt).tobytes())
        inter = np.empty(f.coeffs.shape + (2,))
        inter[..., 0] = f.coeffs.real
        inter[..., 1] = f.coeffs.imag
        buf.write(inter.astype(dt).tobytes())
    Path(path).write_bytes(buf.getvalue())


def read_fields(path) -> tuple:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise IntegrityError(f"{path}: not a field container")
    byteorder = chr(data[6])
    if byteorder not in "<>":
        raise IntegrityError(f"{path}: bad endianness tag")
    magic, version, _, N, M, count = struct.unpack_from(byteorder + _HEADER, data, 0)
    if version != CONTAINER_VERSION:
        raise IntegrityError(f"{path}: unsupported container version {version}")
    off = struct.calcsize(byteorder + _HEADER)
    dt = np.dtype(byteorder + "f8")
    side = 2 * N + 1
    per = 1 + 2 * side * side
    need = off + count * per * 8
    if len(data) != need:
        raise IntegrityError(f"{path}: truncated container ({len(data)} bytes, expected {need})")
    arr = np.frombuffer(data, dtype=dt, offset=off).astype(float).reshape(count, per)
    times = arr[:, 0].copy()
    vals = arr[:, 1:].reshape(count, side, side, 2)
    fields = [FourierField(v[..., 0] + 1j * v[..., 1], M, check=False) for v in vals]
    return fields, times


def write_grid_csv(path, field: FourierField) -> None:
    g = field.to_grid()
    M = g.shape[0]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1", "x2", "value"])
        for i in range(M):
            for j in range(M):
                w.writerow([f"{i / M:.10g}", f"{j / M:.10g}", f"{g[i, j]:.17g}"])


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(header))
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_csv(path) -> tuple:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def write_variance_tables(directory, renorm) -> list:
    """CSV exports (k1, k2, mu_k, v_k) and (q, c_q) of a RenormConstant."""
    d = Path(directory)
    modes = d / "mode_variances.csv"
    annuli = d / "annulus_variances.csv"
    rows = renorm.mode_rows()
    write_csv(modes, ["k1", "k2", "mu_k", "v_k"],
              ([int(r[0]), int(r[1]), r[2], r[3]] for r in rows))
    write_csv(annuli, ["q", "c_q"], enumerate(renorm.annulus_variances))
    return [modes, annuli]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, float):
        if obj != obj or obj in (float("inf"), float("-inf")):
            return None
        return obj
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps_json(obj) -> str:
    """Deterministic JSON: sorted keys, non-finite floats as null."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps_json(obj))


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def verify_manifest(manifest_path) -> dict:
    """Load a manifest and check every listed file; raise IntegrityError on mismatch."""
    manifest_path = Path(manifest_path)
    manifest = json.loads(manifest_path.read_text())
    base = manifest_path.parent
    for entry in manifest.get("files", []):
        p = base / entry["path"]
        if not p.exists():
            raise IntegrityError(f"missing artifact {entry['path']}")
        if sha256_file(p) != entry["sha256"]:
            raise IntegrityError(f"checksum mismatch for {entry['path']}")
    return manifest
