"""Artifact I/O: "ELWV" binary field snapshots, CSV exports, JSON, manifest.

Binary layout (version 1, little-endian):

    bytes 0-3   magic "ELWV"
    bytes 4-7   format version, uint32
    bytes 8-..  header: origin f64, spacing f64, count u64, nfields u64,
                time f64, frame shift f64
    payload     nfields x count float64, row-major

CSV files carry a fixed header row; floats are written with repr so that
identical configs yield byte-identical artifacts. Every file written
through an ArtifactWriter lands in the manifest with its sha256.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"ELWV"
FORMAT_VERSION = 1
SCHEMA_VERSION = 1
_HEADER = struct.Struct("<ddQQdd")


def write_snapshot(path, origin: float, spacing: float, values: np.ndarray,
                   time: float = 0.0, shift: float = 0.0) -> None:
    values = np.ascontiguousarray(values, dtype="<f8")
    if values.ndim == 1:
        values = values[None, :]
    nfields, count = values.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(_HEADER.pack(origin, spacing, count, nfields, time, shift))
        fh.write(values.tobytes())


def read_snapshot(path) -> dict:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported format version {version}")
        origin, spacing, count, nfields, time, shift = _HEADER.unpack(
            fh.read(_HEADER.size))
        payload = np.frombuffer(fh.read(), dtype="<f8")
    if payload.size != count * nfields:
        raise ValueError(f"{path}: truncated payload")
    return {
        "origin": origin, "spacing": spacing, "count": int(count),
        "nfields": int(nfields), "time": time, "shift": shift,
        "values": payload.reshape(int(nfields), int(count)),
    }


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header: list[str], columns: list[np.ndarray]) -> None:
    rows = len(columns[0])
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(rows):
            fh.write(",".join(_fmt(col[i]) for col in columns) + "\n")


def write_data_csv(path, x, w, phi) -> None:
    """Initial-data export: x, seed amplitudes, reconstructed state."""
    header = (["x"] + [f"w{k}" for k in range(1, 5)]
              + [f"phi{k}" for k in range(1, 5)])
    write_csv(path, header, [x] + list(w) + list(phi))


def write_fan_csv(path, fan, stride: int = 1) -> None:
    """Long-format fan export: (z, t, X, rho, v, w)."""
    ts = fan.t[::stride]
    zs = fan.z
    with open(path, "w") as fh:
        fh.write("z,t,X,rho,v,w\n")
        w = fan.w()
        for j, t in enumerate(ts):
            jj = j * stride
            for i, z in enumerate(zs):
                fh.write(",".join(_fmt(v) for v in (
                    z, t, fan.X[jj, i], fan.rho[jj, i], fan.v[jj, i],
                    w[jj, i])) + "\n")


def canonical_json(obj) -> str:
    def default(o):
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if isinstance(o, np.ndarray):
            return o.tolist()
        if hasattr(o, "as_dict"):
            return o.as_dict()
        if hasattr(o, "__dict__"):
            return {k: v for k, v in o.__dict__.items()
                    if not k.startswith("_")}
        raise TypeError(f"not serializable: {type(o)}")

    return json.dumps(obj, sort_keys=True, indent=1, default=default) + "\n"


class ArtifactWriter:
    """Writes artifacts under a directory and keeps a hashed manifest."""

    def __init__(self, outdir):
        self.outdir = Path(outdir)
        self.outdir.mkdir(parents=True, exist_ok=True)
        self.entries: dict[str, str] = {}

    def register(self, path: Path) -> None:
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        self.entries[str(path.relative_to(self.outdir))] = digest

    def path(self, name: str) -> Path:
        p = self.outdir / name
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def json(self, name: str, obj) -> Path:
        p = self.path(name)
        payload = dict(obj) if isinstance(obj, dict) else obj
        if isinstance(payload, dict):
            payload.setdefault("schema_version", SCHEMA_VERSION)
        p.write_text(canonical_json(payload))
        self.register(p)
        return p

    def csv(self, name: str, header, columns) -> Path:
        p = self.path(name)
        write_csv(p, header, columns)
        self.register(p)
        return p

    def snapshot(self, name: str, origin, spacing, values, time=0.0,
                 shift=0.0) -> Path:
        p = self.path(name)
        write_snapshot(p, origin, spacing, values, time=time, shift=shift)
        self.register(p)
        return p

    def text(self, name: str, content: str) -> Path:
        p = self.path(name)
        p.write_text(content)
        self.register(p)
        return p

    def finalize(self) -> Path:
        manifest = {"schema_version": SCHEMA_VERSION,
                    "files": dict(sorted(self.entries.items()))}
        p = self.outdir / "manifest.json"
        p.write_text(canonical_json(manifest))
        return p
