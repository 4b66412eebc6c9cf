"""End-to-end harmonisation of an HRIR corpus onto the common ground.

Pipeline: mirror right ears -> intersect positions -> resample ->
truncate -> minimum phase -> dataset-level RMS scaling -> magnitude
spectrum -> band selection (-> optional dB).  Output is one
[n_azimuths x n_bins] matrix per subject-ear.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import json
from pathlib import Path

import numpy as np

from . import dsp
from .corpus import (DEFAULT_AZ_TOL_DEG, DEFAULT_EL_TOL_DEG, HrirCorpus,
                     Position, common_grid_positions, mirror_right_ears,
                     select_positions)
from .errors import DataError

DB_FLOOR = 1e-6  # linear magnitude floor before 20*log10


@dataclass(frozen=True)
class HarmonizationConfig:
    target_fs_hz: int = 44100
    target_len: int = 235
    target_azimuths_deg: tuple[float, ...] = tuple(
        p.azimuth_deg for p in common_grid_positions())
    target_elevation_deg: float = 0.0
    band_lo_hz: float = 1.0  # any lo in (0, first bin] drops DC only
    band_hi_hz: float = 18000.0
    magnitude_scale: str = "linear"  # "linear" | "db"
    az_tol_deg: float = DEFAULT_AZ_TOL_DEG
    el_tol_deg: float = DEFAULT_EL_TOL_DEG
    scale_per_ear: bool = False  # per-ear instead of per-subject loudest row
    jobs: int = 1

    def __post_init__(self):
        if self.target_len <= 0:
            raise DataError("target_len must be positive")
        if not 0 <= self.band_lo_hz < self.band_hi_hz <= self.target_fs_hz / 2:
            raise DataError("need 0 <= band_lo < band_hi <= fs/2")
        if self.magnitude_scale not in ("linear", "db"):
            raise DataError(f"bad magnitude scale {self.magnitude_scale!r}")

    def target_positions(self) -> list[Position]:
        return [Position(a, self.target_elevation_deg)
                for a in self.target_azimuths_deg]

    def to_dict(self) -> dict:
        return {
            "target_fs_hz": self.target_fs_hz,
            "target_len": self.target_len,
            "target_azimuths_deg": list(self.target_azimuths_deg),
            "target_elevation_deg": self.target_elevation_deg,
            "band_lo_hz": self.band_lo_hz,
            "band_hi_hz": self.band_hi_hz,
            "magnitude_scale": self.magnitude_scale,
            "az_tol_deg": self.az_tol_deg,
            "el_tol_deg": self.el_tol_deg,
            "scale_per_ear": self.scale_per_ear,
        }


@dataclass(frozen=True)
class FeatureEntry:
    subject_id: str
    source_side: str
    matrix: np.ndarray  # [n_azimuths x n_bins]


@dataclass(frozen=True)
class HarmonizedFeatureSet:
    dataset_name: str
    entries: tuple[FeatureEntry, ...]
    bin_frequencies_hz: np.ndarray
    azimuths_deg: tuple[float, ...]
    scale_factor: float
    source_fs_hz: int
    source_len: int
    magnitude_scale: str
    config: dict = field(default_factory=dict)

    @property
    def n_bins(self) -> int:
        return len(self.bin_frequencies_hz)


def dataset_scale_factor(corpus: HrirCorpus, per_ear: bool = False) -> float:
    """1 / median over subjects of their loudest measurement's RMS.

    The per-subject statistic is the max RMS over both ears and all
    retained positions (the ipsilateral row in practice); `per_ear`
    computes one statistic per ear instead.
    """
    if not corpus.subjects:
        raise DataError("empty corpus")
    stats = []
    for subject in corpus.subjects:
        if per_ear:
            for ear in subject.ears:
                stats.append(max(dsp.rms(row) for row in ear.hrir))
        else:
            stats.append(max(dsp.rms(row)
                             for ear in subject.ears for row in ear.hrir))
    med = float(np.median(stats))
    if med == 0.0:
        raise DataError("all-zero corpus: median loudest RMS is zero")
    return 1.0 / med


def _process_row(row, from_hz, cfg):
    # The minimum-phase step of the pipeline preserves both the row RMS
    # (Parseval) and the magnitude spectrum on the target_len FFT grid,
    # which are the only two quantities consumed downstream, so the
    # explicit waveform reconstruction (dsp.minimum_phase) is skipped.
    x = dsp.resample(row, from_hz, cfg.target_fs_hz)
    return dsp.truncate_or_pad(x, cfg.target_len)


def harmonize_corpus(corpus: HrirCorpus,
                     cfg: HarmonizationConfig = HarmonizationConfig()
                     ) -> HarmonizedFeatureSet:
    mirrored = mirror_right_ears(corpus)
    selected = select_positions(mirrored, cfg.target_positions(),
                                cfg.az_tol_deg, cfg.el_tol_deg)

    # minimum-phase common-ground rows, per subject-ear, fixed ordering
    ear_keys = [(si, ei) for si, s in enumerate(selected.subjects)
                for ei, _ in enumerate(s.ears)]

    def process_ear(key):
        si, ei = key
        ear = selected.subjects[si].ears[ei]
        return np.stack([_process_row(row, corpus.samplerate_hz, cfg)
                         for row in ear.hrir])

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            processed = dict(zip(ear_keys, pool.map(process_ear, ear_keys)))
    else:
        processed = {key: process_ear(key) for key in ear_keys}

    # dataset scale factor on the processed rows (barrier step)
    stats = []
    for si, subject in enumerate(selected.subjects):
        if cfg.scale_per_ear:
            for ei in range(len(subject.ears)):
                stats.append(max(dsp.rms(r) for r in processed[(si, ei)]))
        else:
            stats.append(max(dsp.rms(r) for ei in range(len(subject.ears))
                             for r in processed[(si, ei)]))
    med = float(np.median(stats))
    if med == 0.0:
        raise DataError("all-zero corpus: median loudest RMS is zero")
    factor = 1.0 / med

    entries = []
    bin_freqs = None
    for si, subject in enumerate(selected.subjects):
        for ei, ear in enumerate(subject.ears):
            rows = []
            for row in processed[(si, ei)]:
                spec = dsp.magnitude_spectrum(row * factor, cfg.target_fs_hz)
                spec = dsp.select_band(spec, cfg.band_lo_hz, cfg.band_hi_hz)
                rows.append(spec.bin_values)
                bin_freqs = spec.bin_frequencies_hz
            matrix = np.stack(rows)
            if cfg.magnitude_scale == "db":
                matrix = 20.0 * np.log10(np.maximum(matrix, DB_FLOOR))
            entries.append(FeatureEntry(subject.id, ear.source_side, matrix))

    return HarmonizedFeatureSet(
        dataset_name=corpus.name,
        entries=tuple(entries),
        bin_frequencies_hz=bin_freqs,
        azimuths_deg=tuple(cfg.target_azimuths_deg),
        scale_factor=factor,
        source_fs_hz=cfg.target_fs_hz,
        source_len=cfg.target_len,
        magnitude_scale=cfg.magnitude_scale,
        config=cfg.to_dict(),
    )


def reslice_band(fset: HarmonizedFeatureSet, lo_hz: float,
                 hi_hz: float) -> HarmonizedFeatureSet:
    """Restrict a stored feature set to a narrower band.

    Uses the same bin-index rules as the harmonisation itself, so slicing
    a full-band set equals harmonising at the narrow band directly.
    """
    k_lo, k_hi = dsp.band_indices(lo_hz, hi_hz, fset.source_fs_hz,
                                  fset.source_len)
    stored = np.rint(np.asarray(fset.bin_frequencies_hz) * fset.source_len
                     / fset.source_fs_hz).astype(int)
    keep = np.nonzero((stored >= k_lo) & (stored <= k_hi))[0]
    wanted = k_hi - k_lo + 1
    if len(keep) != wanted:
        raise DataError(
            f"stored band does not cover [{lo_hz}, {hi_hz}] Hz "
            f"({len(keep)} of {wanted} bins present)")
    entries = tuple(FeatureEntry(e.subject_id, e.source_side,
                                 e.matrix[:, keep]) for e in fset.entries)
    return HarmonizedFeatureSet(
        fset.dataset_name, entries, fset.bin_frequencies_hz[keep],
        fset.azimuths_deg, fset.scale_factor, fset.source_fs_hz,
        fset.source_len, fset.magnitude_scale, dict(fset.config))


def save_features(fset: HarmonizedFeatureSet, path) -> None:
    """features.json (metadata + entry index) plus features.f32 payload."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    meta = {
        "dataset_name": fset.dataset_name,
        "azimuths_deg": list(fset.azimuths_deg),
        "bin_frequencies_hz": [float(f) for f in fset.bin_frequencies_hz],
        "scale_factor": fset.scale_factor,
        "source_fs_hz": fset.source_fs_hz,
        "source_len": fset.source_len,
        "magnitude_scale": fset.magnitude_scale,
        "config": fset.config,
        "entries": [{"subject_id": e.subject_id, "source_side": e.source_side}
                    for e in fset.entries],
    }
    with open(root / "features.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=1)
    payload = np.concatenate([e.matrix.astype("<f4").ravel()
                              for e in fset.entries])
    payload.tofile(root / "features.f32")


def load_features(path) -> HarmonizedFeatureSet:
    root = Path(path)
    jpath = root / "features.json"
    if not jpath.is_file():
        raise DataError(f"{root}: missing features.json")
    with open(jpath, encoding="utf-8") as fh:
        meta = json.load(fh)
    payload = np.fromfile(root / "features.f32", dtype="<f4").astype(float)
    n_az = len(meta["azimuths_deg"])
    n_bins = len(meta["bin_frequencies_hz"])
    per_entry = n_az * n_bins
    n_entries = len(meta["entries"])
    if payload.size != per_entry * n_entries:
        raise DataError(f"{root}: features.f32 size mismatch "
                        f"({payload.size} != {per_entry * n_entries})")
    entries = []
    for i, ent in enumerate(meta["entries"]):
        matrix = payload[i * per_entry:(i + 1) * per_entry].reshape(n_az, n_bins)
        entries.append(FeatureEntry(ent["subject_id"], ent["source_side"],
                                    matrix))
    return HarmonizedFeatureSet(
        meta["dataset_name"], tuple(entries),
        np.asarray(meta["bin_frequencies_hz"], dtype=float),
        tuple(meta["azimuths_deg"]), meta["scale_factor"],
        meta["source_fs_hz"], meta["source_len"], meta["magnitude_scale"],
        meta.get("config", {}))
