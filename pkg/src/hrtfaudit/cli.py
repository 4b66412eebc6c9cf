"""Command-line front door.

Subcommands: validate, harmonize, classify, ablate, synth.
Exit codes: 0 success, 1 usage error, 2 data error.
"""

import argparse
import json
from pathlib import Path
import sys

from . import synthgen
from .corpus import load_corpus, save_corpus
from .errors import DataError, UsageError
from .experiments import (ABLATION_BANDS, ExperimentConfig, export_report,
                          run_ablation_suite, run_experiment)
from .harmonize import HarmonizationConfig, harmonize_corpus, load_features, \
    save_features


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_band(text: str):
    """'LO:HI' in Hz; LO of 0 keeps the DC bin."""
    try:
        lo_s, hi_s = text.split(":")
        lo = float(lo_s)
        hi = float(hi_s)
    except ValueError as exc:
        raise UsageError(f"bad band {text!r}, expected LO:HI in Hz") from exc
    if lo < 0 or hi <= lo:
        raise UsageError(f"bad band {text!r}: need 0 <= LO < HI")
    return lo, hi


def _build_parser() -> _Parser:
    parser = _Parser(prog="hrtfaudit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an HRC corpus directory")
    p.add_argument("corpus")

    p = sub.add_parser("harmonize",
                       help="harmonise HRC corpora into feature sets")
    p.add_argument("corpora", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--fs", type=int, default=44100)
    p.add_argument("--len", dest="target_len", type=int, default=235)
    p.add_argument("--band", default="1:18000", metavar="LO:HI")
    p.add_argument("--db", action="store_true",
                   help="store magnitudes in dB instead of linear")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("classify", help="grouped CV setup classification")
    p.add_argument("features", nargs="+")
    p.add_argument("--model", default="gbt",
                   choices=["cart", "linsvm", "rbfsvm", "gbt"])
    p.add_argument("--mode", default="full",
                   choices=["full", "per-position"])
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--n-per-class", type=int, default=36)
    p.add_argument("--band", default=None, metavar="LO:HI")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rounds", type=int, default=None,
                   help="boosting rounds (gbt only)")
    p.add_argument("--plots", action="store_true", help="also write SVGs")
    p.add_argument("--out", required=True)

    p = sub.add_parser("ablate",
                       help="run the five frequency-band configurations")
    p.add_argument("features", nargs="+")
    p.add_argument("--model", default="gbt",
                   choices=["cart", "linsvm", "rbfsvm", "gbt"])
    p.add_argument("--mode", default="per-position",
                   choices=["full", "per-position"])
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--n-per-class", type=int, default=36)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--plots", action="store_true")
    p.add_argument("--out", required=True)

    p = sub.add_parser("synth", help="generate synthetic labelled corpora")
    p.add_argument("--profiles", default="strong",
                   choices=["null", "mild", "strong"])
    p.add_argument("--datasets", type=int, default=10)
    p.add_argument("--subjects", type=int, default=18)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    return parser


def _cmd_validate(args) -> int:
    corpus = load_corpus(args.corpus)
    n_ears = sum(len(s.ears) for s in corpus.subjects)
    print(f"ok: {corpus.name}: {len(corpus.subjects)} subjects, "
          f"{n_ears} ears, {corpus.samplerate_hz} Hz, "
          f"{corpus.n_samples} samples")
    return 0


def _cmd_harmonize(args) -> int:
    lo, hi = _parse_band(args.band)
    cfg = HarmonizationConfig(target_fs_hz=args.fs,
                              target_len=args.target_len,
                              band_lo_hz=lo, band_hi_hz=hi,
                              magnitude_scale="db" if args.db else "linear",
                              jobs=args.jobs)
    out = Path(args.out)
    for cpath in args.corpora:
        corpus = load_corpus(cpath)
        fset = harmonize_corpus(corpus, cfg)
        save_features(fset, out / corpus.name)
        print(f"{corpus.name}: {len(fset.entries)} entries, "
              f"{len(fset.azimuths_deg)} azimuths x {fset.n_bins} bins "
              f"-> {out / corpus.name}")
    return 0


def _experiment_config(args, mode_map={"full": "full_matrix",
                                       "per-position": "per_position"}):
    lo = hi = None
    include_dc = False
    band = getattr(args, "band", None)
    if band is not None:
        lo, hi = _parse_band(band)
        include_dc = lo == 0.0
    params = {}
    if args.rounds is not None:
        params["n_rounds"] = args.rounds
    return ExperimentConfig(mode=mode_map[args.mode], model=args.model,
                            band_lo_hz=lo, band_hi_hz=hi,
                            include_dc=include_dc, k_folds=args.folds,
                            n_per_class=args.n_per_class, seed=args.seed,
                            model_params=params)


def _cmd_classify(args) -> int:
    cfg = _experiment_config(args)
    sets = [load_features(p) for p in args.features]
    report = run_experiment(sets, cfg)
    formats = ("json", "csv", "svg") if args.plots else ("json", "csv")
    export_report(report, args.out, formats)
    print(f"mean accuracy {report.mean_accuracy:.4f} over "
          f"{len(report.fold_accuracies)} folds "
          f"({report.n_features} features) -> {args.out}")
    return 0


def _cmd_ablate(args) -> int:
    base = _experiment_config(args)
    sets = [load_features(p) for p in args.features]
    reports = run_ablation_suite(sets, base)
    formats = ("json", "csv", "svg") if args.plots else ("json", "csv")
    for (lo, hi, include_dc), report in zip(ABLATION_BANDS, reports):
        name = f"band_{int(lo)}_{int(hi)}" + ("_dc" if include_dc else "")
        export_report(report, Path(args.out) / name, formats)
        print(f"{name}: mean accuracy {report.mean_accuracy:.4f} "
              f"({report.n_features} features)")
    return 0


def _cmd_synth(args) -> int:
    profiles = synthgen.default_profiles(args.datasets, args.profiles,
                                         args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    synthgen.save_profiles(profiles, out / "profiles.json")
    run_cfg = {"profiles": args.profiles, "datasets": args.datasets,
               "subjects": args.subjects, "seed": args.seed}
    with open(out / "synth_config.json", "w", encoding="utf-8") as fh:
        json.dump(run_cfg, fh, indent=1, sort_keys=True)
    for profile in profiles:
        corpus = synthgen.synth_corpus(profile, args.subjects, args.seed)
        save_corpus(corpus, out / profile.name)
        print(f"{profile.name}: {args.subjects} subjects "
              f"-> {out / profile.name}")
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "harmonize": _cmd_harmonize,
    "classify": _cmd_classify,
    "ablate": _cmd_ablate,
    "synth": _cmd_synth,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
