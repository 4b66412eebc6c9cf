"""HRIR corpus data model and the portable on-disk "HRC" format.

An HRC corpus is a directory holding ``manifest.json`` plus one raw
float32 payload file per subject-ear (row-major [position][sample], no
header).
"""

from dataclasses import dataclass, field, replace
import json
import math
from pathlib import Path

import numpy as np

from .errors import DataError

SCHEMA_VERSION = 1
DEFAULT_AZ_TOL_DEG = 3.0
DEFAULT_EL_TOL_DEG = 1.0

# Horizontal-plane ring shared by all supported datasets.
COMMON_AZIMUTHS_DEG = (0.0, 30.0, 60.0, 90.0, 120.0, 150.0, 180.0,
                       210.0, 240.0, 270.0, 300.0, 330.0)


@dataclass(frozen=True)
class Position:
    """Direction in degrees: azimuth counterclockwise from front."""

    azimuth_deg: float
    elevation_deg: float
    distance_m: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "azimuth_deg", self.azimuth_deg % 360.0)
        if not -90.0 <= self.elevation_deg <= 90.0:
            raise DataError(f"elevation {self.elevation_deg} out of [-90, 90]")


def common_grid_positions() -> list[Position]:
    """The twelve horizontal-plane positions kept after intersection."""
    return [Position(a, 0.0) for a in COMMON_AZIMUTHS_DEG]


@dataclass(frozen=True)
class EarRecording:
    side: str  # "left" | "right"
    positions: tuple[Position, ...]
    hrir: np.ndarray  # [n_positions x n_samples]
    source_side: str | None = None  # pre-mirroring side, set by mirroring

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise DataError(f"bad ear side {self.side!r}")
        hrir = np.asarray(self.hrir, dtype=np.float32)
        object.__setattr__(self, "hrir", hrir)
        object.__setattr__(self, "positions", tuple(self.positions))
        if hrir.ndim != 2 or hrir.shape[0] != len(self.positions):
            raise DataError("hrir row count does not match positions")
        if hrir.shape[1] == 0:
            raise DataError("hrir has zero samples")
        if not np.all(np.isfinite(hrir)):
            raise DataError("hrir contains non-finite samples")
        if self.source_side is None:
            object.__setattr__(self, "source_side", self.side)


@dataclass(frozen=True)
class Subject:
    id: str
    ears: tuple[EarRecording, ...]

    def __post_init__(self):
        object.__setattr__(self, "ears", tuple(self.ears))
        if not 1 <= len(self.ears) <= 2:
            raise DataError(f"subject {self.id}: need 1-2 ears")
        sides = [(e.side, e.source_side) for e in self.ears]
        if len(set(sides)) != len(sides):
            raise DataError(f"subject {self.id}: duplicate ear side")


@dataclass(frozen=True)
class HrirCorpus:
    name: str
    samplerate_hz: int
    method: str  # "measured" | "simulated"
    radius_m: float | None
    subjects: tuple[Subject, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "subjects", tuple(self.subjects))
        if not self.name:
            raise DataError("corpus name is empty")
        if self.samplerate_hz <= 0:
            raise DataError("samplerate must be positive")
        if self.method not in ("measured", "simulated"):
            raise DataError(f"bad method {self.method!r}")
        ids = [s.id for s in self.subjects]
        if len(set(ids)) != len(ids):
            raise DataError("duplicate subject ids")
        lengths = {e.hrir.shape[1] for s in self.subjects for e in s.ears}
        if len(lengths) > 1:
            raise DataError("ear recordings differ in sample count")

    @property
    def n_samples(self) -> int:
        for s in self.subjects:
            for e in s.ears:
                return e.hrir.shape[1]
        return 0


def save_corpus(corpus: HrirCorpus, path) -> None:
    """Write manifest.json plus one float32 payload per subject-ear."""
    if not corpus.subjects:
        raise DataError("empty corpus")
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "name": corpus.name,
        "samplerate_hz": corpus.samplerate_hz,
        "method": corpus.method,
        "radius_m": corpus.radius_m,
        "subjects": [],
    }
    for subject in corpus.subjects:
        ears = []
        for ear in subject.ears:
            fname = f"{subject.id}_{ear.side}.f32"
            ear.hrir.astype("<f4").tofile(root / fname)
            ears.append({
                "side": ear.side,
                "file": fname,
                "positions": [[p.azimuth_deg, p.elevation_deg, p.distance_m]
                              for p in ear.positions],
            })
        manifest["subjects"].append({"id": subject.id, "ears": ears})
    with open(root / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1)


def load_corpus(path) -> HrirCorpus:
    root = Path(path)
    mpath = root / "manifest.json"
    if not mpath.is_file():
        raise DataError(f"{root}: missing manifest.json")
    try:
        with open(mpath, encoding="utf-8") as fh:
            manifest = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{mpath}: malformed manifest: {exc}") from exc
    try:
        if manifest["schema_version"] != SCHEMA_VERSION:
            raise DataError(f"unsupported schema_version "
                            f"{manifest['schema_version']}")
        subjects = []
        for sub in manifest["subjects"]:
            ears = []
            for ear in sub["ears"]:
                positions = tuple(Position(az, el, dist)
                                  for az, el, dist in ear["positions"])
                payload = np.fromfile(root / ear["file"], dtype="<f4")
                n_pos = len(positions)
                if n_pos == 0 or payload.size % n_pos != 0 or payload.size == 0:
                    raise DataError(
                        f"{ear['file']}: payload size mismatch "
                        f"({payload.size} floats for {n_pos} positions)")
                hrir = payload.reshape(n_pos, payload.size // n_pos)
                ears.append(EarRecording(ear["side"], positions, hrir))
            subjects.append(Subject(sub["id"], tuple(ears)))
        corpus = HrirCorpus(manifest["name"], int(manifest["samplerate_hz"]),
                            manifest["method"], manifest.get("radius_m"),
                            tuple(subjects))
    except KeyError as exc:
        raise DataError(f"{mpath}: missing manifest field {exc}") from exc
    # cross-check declared sample count consistency against row lengths
    lengths = {e.hrir.shape[1] for s in corpus.subjects for e in s.ears}
    if len(lengths) > 1:
        raise DataError(f"{root}: inconsistent sample counts {sorted(lengths)}")
    return corpus


def mirror_right_ears(corpus: HrirCorpus) -> HrirCorpus:
    """Reflect right-ear recordings about the median plane.

    Right ears become left-side recordings with azimuth a -> (360 - a),
    keeping their original side as provenance.  Within each subject the
    original left ear precedes the mirrored right one.
    """
    subjects = []
    for subject in corpus.subjects:
        lefts = [e for e in subject.ears if e.side == "left"]
        rights = [e for e in subject.ears if e.side == "right"]
        mirrored = []
        for ear in rights:
            positions = tuple(
                Position((360.0 - p.azimuth_deg) % 360.0, p.elevation_deg,
                         p.distance_m)
                for p in ear.positions)
            mirrored.append(EarRecording("left", positions, ear.hrir,
                                         source_side="right"))
        subjects.append(Subject(subject.id, tuple(lefts + mirrored)))
    return replace(corpus, subjects=tuple(subjects))


def angular_distance_deg(a: Position, b: Position) -> float:
    """Great-circle central angle between two directions, in degrees."""
    az1, el1 = math.radians(a.azimuth_deg), math.radians(a.elevation_deg)
    az2, el2 = math.radians(b.azimuth_deg), math.radians(b.elevation_deg)
    c = (math.sin(el1) * math.sin(el2)
         + math.cos(el1) * math.cos(el2) * math.cos(az1 - az2))
    return math.degrees(math.acos(min(1.0, max(-1.0, c))))


def _circular_diff_deg(a: float, b: float) -> float:
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


def select_positions(corpus: HrirCorpus, targets,
                     az_tol_deg: float = DEFAULT_AZ_TOL_DEG,
                     el_tol_deg: float = DEFAULT_EL_TOL_DEG) -> HrirCorpus:
    """Reduce every ear to one measured position per target.

    Candidates must be within both tolerances; the angularly closest wins,
    ties broken by the lower measured azimuth.  Output rows follow target
    order.  Raises when any target has no match (the intersection of
    positions would be empty).
    """
    targets = list(targets)
    if not targets:
        raise DataError("select_positions: no targets")
    if az_tol_deg < 0 or el_tol_deg < 0:
        raise DataError("tolerances must be non-negative")
    subjects = []
    for subject in corpus.subjects:
        ears = []
        for ear in subject.ears:
            rows = []
            kept = []
            for target in targets:
                best = None
                for idx, pos in enumerate(ear.positions):
                    if _circular_diff_deg(pos.azimuth_deg,
                                          target.azimuth_deg) > az_tol_deg:
                        continue
                    if abs(pos.elevation_deg - target.elevation_deg) > el_tol_deg:
                        continue
                    key = (angular_distance_deg(pos, target), pos.azimuth_deg)
                    if best is None or key < best[0]:
                        best = (key, idx)
                if best is None:
                    raise DataError(
                        f"position not found: subject {subject.id} "
                        f"{ear.side} ear has no match for azimuth "
                        f"{target.azimuth_deg} elevation {target.elevation_deg}")
                rows.append(ear.hrir[best[1]])
                kept.append(ear.positions[best[1]])
            ears.append(EarRecording(ear.side, tuple(kept),
                                     np.stack(rows), ear.source_side))
        subjects.append(Subject(subject.id, tuple(ears)))
    return replace(corpus, subjects=tuple(subjects))
