"""Write HRC corpus directories from SOFA sources.

An HRC corpus is a directory with a ``manifest.json`` (schema_version 1)
and one raw little-endian float32 payload per subject-ear, row-major
[position][sample].  This mirrors the format the hrtfaudit toolkit reads;
the two packages share only this directory contract.
"""

import json
from pathlib import Path

import numpy as np

from .reader import IngestError, read_sofa

SCHEMA_VERSION = 1


def _subject_id(path) -> str:
    return Path(path).stem


def convert(inputs, dataset_name: str, out_dir,
            swap_receivers: bool = False) -> Path:
    """One SOFA file per subject; subject ids are the file stems, sorted
    lexicographically.  Receiver 0 maps to the left ear unless swapped."""
    if not inputs:
        raise IngestError("no input files")
    if not dataset_name:
        raise IngestError("dataset name is empty")
    paths = sorted((Path(p) for p in inputs), key=lambda p: p.stem)
    ids = [_subject_id(p) for p in paths]
    if len(set(ids)) != len(ids):
        raise IngestError("duplicate subject ids (file stems must differ)")

    sources = [read_sofa(p) for p in paths]
    rates = {s.samplerate_hz for s in sources}
    if len(rates) > 1:
        raise IngestError(f"mixed samplerates: {sorted(rates)}")
    lengths = {s.n_samples for s in sources}
    if len(lengths) > 1:
        raise IngestError(f"mixed sample counts: {sorted(lengths)}")
    samplerate = rates.pop()
    if samplerate != int(samplerate):
        raise IngestError(f"non-integer samplerate {samplerate}")

    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    sides = ("right", "left") if swap_receivers else ("left", "right")
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "name": dataset_name,
        "samplerate_hz": int(samplerate),
        "method": "measured",
        "radius_m": None,
        "subjects": [],
    }
    for sid, source in zip(ids, sources):
        positions = [[float(az), float(el), float(dist)]
                     for az, el, dist in source.positions_deg]
        ears = []
        for receiver, side in enumerate(sides):
            fname = f"{sid}_{side}.f32"
            payload = np.ascontiguousarray(source.ir[:, receiver, :],
                                           dtype="<f4")
            payload.tofile(root / fname)
            ears.append({"side": side, "file": fname,
                         "positions": positions})
        ears.sort(key=lambda e: e["side"] != "left")
        manifest["subjects"].append({"id": sid, "ears": ears})
    with open(root / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1)
    return root
