"""Setup-classification experiments: balancing, design matrices, grouped
cross-validation runs, frequency-band ablations and report export."""

from dataclasses import dataclass, field
import json
from pathlib import Path

import numpy as np

from . import ml
from .errors import DataError, UsageError
from .harmonize import HarmonizedFeatureSet, reslice_band

ABLATION_BANDS = (
    (187.0, 18000.0, False),
    (0.0, 22050.0, True),
    (187.0, 15000.0, False),
    (5000.0, 22050.0, False),
    (5000.0, 15000.0, False),
)


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "full_matrix"  # "full_matrix" | "per_position"
    model: str = "gbt"  # "cart" | "linsvm" | "rbfsvm" | "gbt"
    band_lo_hz: float | None = None  # None: keep the stored band
    band_hi_hz: float | None = None
    include_dc: bool = False
    k_folds: int = 5
    n_per_class: int = 36
    seed: int = 0
    model_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in ("full_matrix", "per_position"):
            raise UsageError(f"bad mode {self.mode!r}")
        if self.model not in ("cart", "linsvm", "rbfsvm", "gbt"):
            raise UsageError(f"bad model {self.model!r}")
        if self.k_folds < 2:
            raise UsageError("k_folds must be >= 2")
        if self.n_per_class < 2 or self.n_per_class % 2 != 0:
            raise UsageError("n_per_class must be even and >= 2")
        if (self.band_lo_hz is None) != (self.band_hi_hz is None):
            raise UsageError("band_lo_hz and band_hi_hz go together")

    def to_dict(self) -> dict:
        return {
            "mode": self.mode, "model": self.model,
            "band_lo_hz": self.band_lo_hz, "band_hi_hz": self.band_hi_hz,
            "include_dc": self.include_dc, "k_folds": self.k_folds,
            "n_per_class": self.n_per_class, "seed": self.seed,
            "model_params": dict(self.model_params),
        }


@dataclass
class DesignMatrix:
    rows: np.ndarray
    labels: np.ndarray
    groups: np.ndarray  # integer group id per row
    feature_names: list[str]
    class_names: list[str]
    group_names: list[str]
    bin_frequencies_hz: np.ndarray

    def __post_init__(self):
        if not (len(self.rows) == len(self.labels) == len(self.groups)):
            raise DataError("design matrix length mismatch")
        if len(np.unique(self.labels)) < 2:
            raise DataError("need at least two classes")
        if not np.all(np.isfinite(self.rows)):
            raise DataError("non-finite feature values")
        for g in np.unique(self.groups):
            if len(np.unique(self.labels[self.groups == g])) != 1:
                raise DataError(f"group {self.group_names[g]} spans classes")


@dataclass
class CvReport:
    fold_accuracies: list[float]
    mean_accuracy: float
    confusion: np.ndarray  # pooled over folds, rows = true class
    class_names: list[str]
    importance_per_fold: list[np.ndarray] | None
    importance_mean: np.ndarray | None
    feature_names: list[str]
    bin_frequencies_hz: np.ndarray
    n_features: int
    config: dict
    seed: int


def balance_classes(sets, n_per_class: int) -> list[HarmonizedFeatureSet]:
    """First n_per_class entries per set, in the stored deterministic order
    (manifest subject order, left ear before mirrored right)."""
    out = []
    for fset in sets:
        if len(fset.entries) < n_per_class:
            raise DataError(
                f"dataset {fset.dataset_name}: {len(fset.entries)} entries "
                f"< n_per_class {n_per_class}")
        out.append(HarmonizedFeatureSet(
            fset.dataset_name, fset.entries[:n_per_class],
            fset.bin_frequencies_hz, fset.azimuths_deg, fset.scale_factor,
            fset.source_fs_hz, fset.source_len, fset.magnitude_scale,
            dict(fset.config)))
    return out


def _signed_azimuth(az: float) -> int:
    a = az % 360.0
    return int(round(a if a <= 180.0 else a - 360.0))


def build_design_matrix(sets, mode: str) -> DesignMatrix:
    """full_matrix: one row per entry, azimuth-major flattening.
    per_position: one row per (entry, azimuth), angle label discarded."""
    grids = {(tuple(np.asarray(s.bin_frequencies_hz).tolist()),
              tuple(s.azimuths_deg)) for s in sets}
    if len(grids) != 1:
        raise DataError("feature sets differ in azimuth/bin grids")
    ordered = sorted(sets, key=lambda s: s.dataset_name)
    class_names = [s.dataset_name for s in ordered]
    freqs = np.asarray(ordered[0].bin_frequencies_hz)
    azimuths = ordered[0].azimuths_deg

    rows, labels, groups, group_names = [], [], [], []
    group_index = {}
    for label, fset in enumerate(ordered):
        for entry in fset.entries:
            gkey = f"{fset.dataset_name}/{entry.subject_id}"
            if gkey not in group_index:
                group_index[gkey] = len(group_names)
                group_names.append(gkey)
            gid = group_index[gkey]
            if mode == "full_matrix":
                rows.append(entry.matrix.ravel())
                labels.append(label)
                groups.append(gid)
            elif mode == "per_position":
                for az_row in entry.matrix:
                    rows.append(az_row)
                    labels.append(label)
                    groups.append(gid)
            else:
                raise UsageError(f"bad mode {mode!r}")

    if mode == "full_matrix":
        feature_names = [f"az{_signed_azimuth(a)}/f{int(round(f))}"
                         for a in azimuths for f in freqs]
    else:
        feature_names = [f"f{int(round(f))}" for f in freqs]
    return DesignMatrix(np.asarray(rows, dtype=float),
                        np.asarray(labels, dtype=np.int64),
                        np.asarray(groups, dtype=np.int64),
                        feature_names, class_names, group_names, freqs)


def _standardize(train, test):
    mu = train.mean(axis=0)
    sd = train.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    return (train - mu) / sd, (test - mu) / sd


def _train(model_name, X, y, n_classes, seed, params):
    p = dict(params)
    if model_name == "cart":
        return ml.train_cart(X, y, n_classes,
                             max_depth=p.pop("max_depth", 12),
                             min_samples_leaf=p.pop("min_samples_leaf", 1),
                             seed=seed)
    if model_name == "gbt":
        return ml.train_gbt(X, y, n_classes,
                            n_rounds=p.pop("n_rounds", 200),
                            learning_rate=p.pop("learning_rate", 0.1),
                            max_depth=p.pop("max_depth", 3),
                            min_samples_leaf=p.pop("min_samples_leaf", 1),
                            seed=seed)
    if model_name == "linsvm":
        return ml.train_linear_svm(X, y, n_classes,
                                   c_reg=p.pop("c_reg", 1.0),
                                   max_iter=p.pop("max_iter", 1000),
                                   tol=p.pop("tol", 1e-4), seed=seed)
    if model_name == "rbfsvm":
        return ml.train_rbf_svm(X, y, n_classes,
                                c_reg=p.pop("c_reg", 1.0),
                                gamma=p.pop("gamma", None),
                                tol=p.pop("tol", 1e-4), seed=seed)
    raise UsageError(f"bad model {model_name!r}")


def run_experiment(sets, cfg: ExperimentConfig,
                   folds: list[np.ndarray] | None = None) -> CvReport:
    if len(sets) < 2:
        raise DataError("need at least two datasets")
    balanced = balance_classes(sets, cfg.n_per_class)
    if cfg.band_lo_hz is not None:
        lo = 0.0 if cfg.include_dc else cfg.band_lo_hz
        balanced = [reslice_band(s, lo, cfg.band_hi_hz) for s in balanced]
    d = build_design_matrix(balanced, cfg.mode)
    if folds is None:
        folds = ml.grouped_kfold(d.groups, d.labels, cfg.k_folds, cfg.seed)
    n_classes = len(d.class_names)
    needs_scaling = cfg.model in ("linsvm", "rbfsvm")
    tree_model = cfg.model in ("cart", "gbt")

    fold_accs = []
    confusion = np.zeros((n_classes, n_classes), dtype=int)
    importances = [] if tree_model else None
    all_rows = np.arange(len(d.rows))
    for test_idx in folds:
        train_idx = np.setdiff1d(all_rows, test_idx)
        Xtr, Xte = d.rows[train_idx], d.rows[test_idx]
        if needs_scaling:
            Xtr, Xte = _standardize(Xtr, Xte)
        model = _train(cfg.model, Xtr, d.labels[train_idx], n_classes,
                       cfg.seed, cfg.model_params)
        pred = ml.predict(model, Xte)
        fold_accs.append(ml.accuracy(d.labels[test_idx], pred))
        confusion += ml.confusion_matrix(d.labels[test_idx], pred, n_classes)
        if tree_model:
            importances.append(ml.feature_importance(model))
    mean_acc = float(np.trace(confusion)) / float(confusion.sum())
    return CvReport(
        fold_accuracies=fold_accs,
        mean_accuracy=mean_acc,
        confusion=confusion,
        class_names=d.class_names,
        importance_per_fold=importances,
        importance_mean=(np.mean(importances, axis=0)
                         if importances else None),
        feature_names=d.feature_names,
        bin_frequencies_hz=d.bin_frequencies_hz,
        n_features=d.rows.shape[1],
        config=cfg.to_dict(),
        seed=cfg.seed,
    )


def run_ablation_suite(sets, base_cfg: ExperimentConfig) -> list[CvReport]:
    """The five frequency-range configurations, sharing one fold split."""
    balanced = balance_classes(sets, base_cfg.n_per_class)
    d = build_design_matrix(balanced, base_cfg.mode)
    folds = ml.grouped_kfold(d.groups, d.labels, base_cfg.k_folds,
                             base_cfg.seed)
    reports = []
    for lo, hi, include_dc in ABLATION_BANDS:
        cfg = ExperimentConfig(
            mode=base_cfg.mode, model=base_cfg.model, band_lo_hz=lo,
            band_hi_hz=hi, include_dc=include_dc, k_folds=base_cfg.k_folds,
            n_per_class=base_cfg.n_per_class, seed=base_cfg.seed,
            model_params=dict(base_cfg.model_params))
        reports.append(run_experiment(sets, cfg, folds=folds))
    return reports


def report_to_dict(report: CvReport) -> dict:
    return {
        "fold_accuracies": report.fold_accuracies,
        "mean_accuracy": report.mean_accuracy,
        "confusion": report.confusion.tolist(),
        "class_names": report.class_names,
        "importance_per_fold": ([imp.tolist() for imp in
                                 report.importance_per_fold]
                                if report.importance_per_fold is not None
                                else None),
        "importance_mean": (report.importance_mean.tolist()
                            if report.importance_mean is not None else None),
        "feature_names": report.feature_names,
        "bin_frequencies_hz": np.asarray(report.bin_frequencies_hz).tolist(),
        "n_features": report.n_features,
        "config": report.config,
        "seed": report.seed,
    }


def _frequency_importance(report: CvReport):
    """Mean importance aggregated per frequency bin (summed over azimuths)."""
    freqs = np.asarray(report.bin_frequencies_hz)
    imp = report.importance_mean
    if imp is None:
        return freqs, None
    n_bins = len(freqs)
    per_bin = np.zeros(n_bins)
    for i, v in enumerate(imp):
        per_bin[i % n_bins] += v
    return freqs, per_bin


def export_report(report: CvReport, out_dir, formats=("json", "csv")) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "json" in formats:
        path = out / "report.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report_to_dict(report), fh, indent=1, sort_keys=True)
        written.append(path)
    if "csv" in formats:
        path = out / "confusion.csv"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("true\\pred," + ",".join(report.class_names) + "\n")
            for name, row in zip(report.class_names, report.confusion):
                fh.write(name + "," + ",".join(str(int(v)) for v in row)
                         + "\n")
        written.append(path)
        freqs, per_bin = _frequency_importance(report)
        if per_bin is not None:
            path = out / "importance.csv"
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write("frequency_hz,mean_importance\n")
                for f, v in zip(freqs, per_bin):
                    fh.write(f"{float(f)!r},{float(v)!r}\n")
            written.append(path)
    if "svg" in formats:
        written.extend(_export_svgs(report, out))
    return written


def _export_svgs(report: CvReport, out: Path) -> list:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written = []
    fig, ax = plt.subplots(figsize=(6, 5))
    ax.imshow(report.confusion, cmap="viridis")
    ax.set_xticks(range(len(report.class_names)), report.class_names,
                  rotation=90)
    ax.set_yticks(range(len(report.class_names)), report.class_names)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    fig.tight_layout()
    path = out / "confusion.svg"
    fig.savefig(path)
    plt.close(fig)
    written.append(path)

    freqs, per_bin = _frequency_importance(report)
    if per_bin is not None:
        fig, ax = plt.subplots(figsize=(8, 3))
        ax.bar(freqs, per_bin, width=0.8 * float(np.min(np.diff(freqs))))
        ax.set_xlabel("frequency (Hz)")
        ax.set_ylabel("mean importance")
        fig.tight_layout()
        path = out / "importance.svg"
        fig.savefig(path)
        plt.close(fig)
        written.append(path)
    return written
