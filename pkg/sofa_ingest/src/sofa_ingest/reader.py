"""Read SOFA (HDF5) files following the SimpleFreeFieldHRIR convention."""

from dataclasses import dataclass
from pathlib import Path

import h5py
import numpy as np


class IngestError(Exception):
    """Unreadable or unsupported SOFA input."""


@dataclass(frozen=True)
class SofaSource:
    path: str
    convention: str
    n_measurements: int  # M
    n_receivers: int     # R
    n_samples: int       # N
    samplerate_hz: float
    positions_deg: np.ndarray  # [M x 3]: azimuth deg, elevation deg, metres
    ir: np.ndarray             # [M x R x N]


def _attr_str(obj, name, default=""):
    raw = obj.attrs.get(name, default)
    if isinstance(raw, bytes):
        return raw.decode("utf-8", "replace")
    return str(raw)


def _to_spherical_deg(positions, coord_type):
    pos = np.asarray(positions, dtype=np.float64)
    if pos.ndim != 2 or pos.shape[1] != 3:
        raise IngestError(f"SourcePosition must be M x 3, got {pos.shape}")
    kind = coord_type.strip().lower()
    if kind == "spherical":
        out = pos.copy()
        out[:, 0] = out[:, 0] % 360.0
        return out
    if kind == "cartesian":
        x, y, z = pos[:, 0], pos[:, 1], pos[:, 2]
        dist = np.sqrt(x * x + y * y + z * z)
        az = np.degrees(np.arctan2(y, x)) % 360.0
        el = np.degrees(np.arctan2(z, np.hypot(x, y)))
        return np.column_stack([az, el, dist])
    raise IngestError(f"unsupported coordinate type {coord_type!r}")


def read_sofa(path) -> SofaSource:
    path = Path(path)
    try:
        fh = h5py.File(path, "r")
    except OSError as exc:
        raise IngestError(f"{path}: not a readable HDF5 file: {exc}") from exc
    with fh:
        convention = _attr_str(fh, "SOFAConventions")
        if convention != "SimpleFreeFieldHRIR":
            raise IngestError(
                f"{path}: unsupported convention {convention!r} "
                f"(only SimpleFreeFieldHRIR)")
        if "Data.IR" not in fh:
            raise IngestError(f"{path}: missing Data.IR")
        ir = np.asarray(fh["Data.IR"])
        if ir.ndim != 3:
            raise IngestError(f"{path}: Data.IR must be M x R x N, "
                              f"got shape {ir.shape}")
        m, r, n = ir.shape
        if r != 2:
            raise IngestError(f"{path}: expected two receivers, got {r}")
        if "Data.SamplingRate" not in fh:
            raise IngestError(f"{path}: missing Data.SamplingRate")
        samplerate = float(np.asarray(fh["Data.SamplingRate"]).ravel()[0])
        if samplerate <= 0:
            raise IngestError(f"{path}: bad samplerate {samplerate}")
        if "SourcePosition" not in fh:
            raise IngestError(f"{path}: missing SourcePosition variable")
        src = fh["SourcePosition"]
        coord_type = _attr_str(src, "Type", "spherical")
        positions = _to_spherical_deg(np.asarray(src), coord_type)
        if len(positions) != m:
            raise IngestError(
                f"{path}: SourcePosition rows ({len(positions)}) do not "
                f"match measurements ({m})")
    return SofaSource(str(path), convention, m, r, n, samplerate,
                      positions, ir)
