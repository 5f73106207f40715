"""File formats: raw I/Q signals with JSON sidecars, models, CSV tables.

Signal files hold little-endian float64 samples interleaved as
``re0, im0, re1, im1, ...``; the sidecar ``<file>.json`` carries at least
``sample_rate_hz``, ``length`` and ``config_hash``. Every write goes to a
temporary file in the target directory followed by an atomic rename.
"""
from __future__ import annotations

import csv
import io as _io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .models import model_from_dict
from .numerics import ComplexSignal

OUTPUT_ENV = "SPLINEDPD_OUTPUT"
_DTYPE = np.dtype("<f8")


class FileFormatError(OSError):
    """A file exists but does not have the expected layout."""


def output_path(path) -> Path:
    """Resolve relative output paths against ``$SPLINEDPD_OUTPUT`` if set."""
    p = Path(path)
    root = os.environ.get(OUTPUT_ENV)
    if root and not p.is_absolute():
        p = Path(root) / p
    return p


def atomic_write(path, data) -> Path:
    """Write ``data`` (bytes or str) to ``path`` via temp file + rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = data.encode() if isinstance(data, str) else bytes(data)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_signal(path, signal: ComplexSignal, metadata: dict) -> Path:
    s = np.asarray(signal.samples, dtype=np.complex128)
    inter = np.empty(2 * s.size, dtype=_DTYPE)
    inter[0::2], inter[1::2] = s.real, s.imag
    meta = {**metadata, "sample_rate_hz": float(signal.sample_rate_hz), "length": int(s.size)}
    if "config_hash" not in meta:
        raise ValueError("signal metadata must include config_hash")
    atomic_write(path, inter.tobytes())
    atomic_write(sidecar_path(path), json.dumps(meta, indent=1, sort_keys=True))
    return Path(path)


def read_signal(path):
    """Returns ``(ComplexSignal, metadata)``."""
    path = Path(path)
    raw = path.read_bytes()
    meta = read_json(sidecar_path(path))
    if len(raw) % 16:
        raise FileFormatError(f"{path}: size {len(raw)} is not a whole number of I/Q pairs")
    inter = np.frombuffer(raw, dtype=_DTYPE)
    samples = inter[0::2] + 1j * inter[1::2]
    for key in ("sample_rate_hz", "length", "config_hash"):
        if key not in meta:
            raise FileFormatError(f"{sidecar_path(path)}: missing {key!r}")
    if samples.size != meta["length"]:
        raise FileFormatError(f"{path}: {samples.size} samples but sidecar says {meta['length']}")
    return ComplexSignal(samples, float(meta["sample_rate_hz"])), meta


def read_json(path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: invalid JSON ({exc})") from exc


def save_model(path, model, config_hash: str, extra: dict | None = None) -> Path:
    doc = {"config_hash": config_hash, "model": model.to_dict(), **(extra or {})}
    return atomic_write(path, json.dumps(doc, indent=1))


def load_model(path):
    """Returns ``(model, document)``."""
    doc = read_json(path)
    try:
        return model_from_dict(doc["model"]), doc
    except (KeyError, ValueError, TypeError) as exc:
        raise FileFormatError(f"{path}: not a model file ({exc})") from exc


def write_csv(path, columns, rows) -> Path:
    """``rows`` are dicts (keyed by column) or sequences."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        values = [row[c] for c in columns] if isinstance(row, dict) else list(row)
        writer.writerow([_fmt(v) for v in values])
    return atomic_write(path, buf.getvalue())


def read_csv(path) -> list:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v
