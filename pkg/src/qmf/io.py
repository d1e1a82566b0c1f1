"""File formats shared by the CLI and tests.

Time series come in as CSV with a ``t,strain`` header or as raw
little-endian float64 with a JSON sidecar ``{"fs_hz": ..., "t0_s": ...}``.
PSDs are ``f_hz,sn`` CSV; SNR series go out as ``t,rho`` CSV.  Every
file written here opens with a provenance comment carrying the tool
version, the full configuration echo and the seed, and is written
atomically (temp file + rename) so concurrent readers never see a
partial file.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .dsp import Psd, SnrSeries, TimeSeries
from .errors import InputError


def provenance_line(command: str, config: dict, seed: int | None) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return f"# qmf {__version__} | cmd={command} | seed={seed} | config={blob}"


def _atomic_write(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str | Path, header: str, rows, provenance: str) -> None:
    lines = [provenance, header]
    lines.extend(",".join(str(v) for v in row) for row in rows)
    _atomic_write(path, "\n".join(lines) + "\n")


def write_json(path: str | Path, payload: dict, provenance: str) -> None:
    body = {"provenance": provenance, **payload}
    _atomic_write(path, json.dumps(body, indent=2, sort_keys=False) + "\n")


def read_time_series(path: str | Path) -> TimeSeries:
    """Load strain from CSV (t,strain) or raw float64 + JSON sidecar."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if path.suffix.lower() == ".csv":
        t, strain = _read_two_columns(path, ("t", "strain"))
        if t.size < 2:
            raise InputError(f"{path}: need at least 2 samples")
        dt = float(t[1] - t[0])
        if not np.allclose(np.diff(t), dt, rtol=1e-6, atol=1e-12):
            raise InputError(f"{path}: time column is not uniformly sampled")
        return TimeSeries(samples=strain, dt=dt, t0=float(t[0]))
    sidecar = path.with_suffix(path.suffix + ".json")
    if not sidecar.exists():
        raise FileNotFoundError(f"raw input {path} needs a sidecar {sidecar}")
    meta = json.loads(sidecar.read_text())
    samples = np.fromfile(path, dtype="<f8")
    return TimeSeries(samples=samples, dt=1.0 / float(meta["fs_hz"]),
                      t0=float(meta.get("t0_s", 0.0)))


def read_psd(path: str | Path) -> Psd:
    f, sn = _read_two_columns(Path(path), ("f_hz", "sn"))
    if f.size < 2:
        raise InputError(f"{path}: need at least 2 PSD bins")
    return Psd(values=sn, df=float(f[1] - f[0]))


def write_psd(path: str | Path, psd: Psd, provenance: str) -> None:
    rows = ((repr(k * psd.df), repr(float(v))) for k, v in enumerate(psd.values))
    write_csv(path, "f_hz,sn", rows, provenance)


def write_snr(path: str | Path, snr: SnrSeries, provenance: str, t0: float = 0.0) -> None:
    rows = ((repr(t0 + j * snr.dt), repr(float(v))) for j, v in enumerate(snr.rho))
    write_csv(path, "t,rho", rows, provenance)


def _read_two_columns(path: Path, expected: tuple[str, str]) -> tuple[np.ndarray, np.ndarray]:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise InputError(f"{path}: empty file")
    header = tuple(c.strip() for c in lines[0].split(","))
    if header != expected:
        raise InputError(f"{path}: expected header {','.join(expected)!r}")
    try:
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    except ValueError as exc:
        raise InputError(f"{path}: malformed row ({exc})") from None
    if data.ndim != 2 or data.shape[1] != 2:
        raise InputError(f"{path}: expected two columns")
    return data[:, 0], data[:, 1]
