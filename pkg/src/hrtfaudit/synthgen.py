"""Synthetic HRIR corpora with controllable setup fingerprints.

Each setup profile stamps two dataset-consistent artifacts onto every
subject: a low-pass-filtered early reflection (comb signature below
~1 kHz) and a spectral-domain noise floor with a high-frequency tilt.
Subject individuality comes from seeded resonance/notch filters, so a
`null` pair of profiles differs only in its random subjects.
"""

from dataclasses import dataclass, asdict
import json

import numpy as np

from . import dsp
from .corpus import (COMMON_AZIMUTHS_DEG, EarRecording, HrirCorpus,
                     Position, Subject)
from .errors import DataError

SPEED_OF_SOUND = 343.0  # m/s
ECHO_LOWPASS_HZ = 700.0  # reflections only fingerprint the low band
MIN_COMMON_DURATION_S = 0.005333


@dataclass(frozen=True)
class SetupProfile:
    name: str
    native_fs_hz: int
    native_len: int
    radius_m: float  # onset delay = radius / 343
    reflection_delay_s: float
    reflection_gain: float
    noise_floor_db: float
    noise_tilt_db_per_octave: float
    coloration: tuple[tuple[float, float], ...]  # (freq_hz, gain_db) anchors
    seed: int
    method: str = "measured"

    def __post_init__(self):
        if not 0.0 <= self.reflection_gain < 1.0:
            raise DataError("reflection_gain must be in [0, 1)")
        if self.native_len / self.native_fs_hz < MIN_COMMON_DURATION_S:
            raise DataError("native duration shorter than the common ground")
        if self.native_fs_hz < 44100:
            raise DataError("native samplerate below 44.1 kHz")
        if len(self.coloration) > 5:
            raise DataError("at most 5 coloration anchor points")


@dataclass(frozen=True)
class SubjectParams:
    head_radius_m: float
    resonances: tuple[tuple[float, float, float], ...]  # (hz, q, gain_db)
    ear_jitter_db: tuple[float, float]

    def __post_init__(self):
        for hz, _, _ in self.resonances:
            if not 200.0 < hz < 20000.0:
                raise DataError("resonance centre outside (200, 20000) Hz")


def _draw_subject(rng) -> SubjectParams:
    n_res = 4
    # individuality lives in the midband; the band edges stay free for
    # the setup artifacts, mirroring where real morphology features sit
    centers = np.exp(rng.uniform(np.log(2000.0), np.log(11000.0), n_res))
    qs = rng.uniform(2.5, 8.0, n_res)
    gains = rng.uniform(-5.0, 5.0, n_res)
    return SubjectParams(
        head_radius_m=float(rng.uniform(0.08, 0.10)),
        resonances=tuple((float(c), float(q), float(g))
                         for c, q, g in zip(centers, qs, gains)),
        ear_jitter_db=(float(rng.normal(0.0, 0.15)),
                       float(rng.normal(0.0, 0.15))),
    )


def _resonance_db(freqs, center, q, gain_db):
    # push-pull peak/notch pair on a log-frequency axis; the paired
    # shape keeps broadband energy near-constant, so subject timbre
    # varies without disturbing per-subject loudness
    lf = np.log2(np.maximum(freqs, 1.0) / center)
    width = 1.0 / (2.0 * q)
    return gain_db * (np.exp(-0.5 * ((lf - width) / width) ** 2)
                      - np.exp(-0.5 * ((lf + width) / width) ** 2))


def _coloration_db(freqs, anchors):
    if not anchors:
        return np.zeros_like(freqs)
    fx = np.array([max(a[0], 1.0) for a in anchors])
    gy = np.array([a[1] for a in anchors])
    order = np.argsort(fx)
    return np.interp(np.log(np.maximum(freqs, 1.0)),
                     np.log(fx[order]), gy[order])


def _direct_magnitude(freqs, params: SubjectParams, jitter_db: float):
    gain_db = np.zeros_like(freqs)
    for center, q, g in params.resonances:
        gain_db += _resonance_db(freqs, center, q, g)
    # steep high-frequency rolloff so the setup noise floor is unmasked
    rolloff = -80.0 * np.clip((freqs - 12500.0) / 4500.0, 0.0, None)
    return 10.0 ** ((gain_db + rolloff + jitter_db) / 20.0)


def _min_phase_from_magnitude(mag, n: int):
    """Causal minimum-phase signal whose |rfft| approximates `mag`.

    Cepstral folding of the log magnitude; plenty accurate for the smooth
    resonance spectra generated here and far cheaper than exact zero
    reflection on long signals.
    """
    if n % 2 == 0:
        full = np.concatenate([mag, mag[-2:0:-1]])
    else:
        full = np.concatenate([mag, mag[-1:0:-1]])
    logm = np.log(np.maximum(full, np.max(full) * 1e-6))
    cep = np.fft.ifft(logm).real
    folded = np.zeros(n)
    folded[0] = cep[0]
    folded[1:(n + 1) // 2] = 2.0 * cep[1:(n + 1) // 2]
    if n % 2 == 0:
        folded[n // 2] = cep[n // 2]
    return np.fft.ifft(np.exp(np.fft.fft(folded))).real


def _azimuth_gain_db(azimuth_deg: float):
    """Left-ear level and shadow: ipsilateral at 90 deg, shadowed opposite."""
    theta = np.radians(azimuth_deg - 90.0)
    level_db = -9.0 * (1.0 - np.cos(theta)) / 2.0
    shadow_db = -12.0 * (1.0 - np.cos(theta)) / 2.0  # extra tilt above 4 kHz
    return level_db, shadow_db


def synth_corpus(profile: SetupProfile, n_subjects: int,
                 seed: int = 0) -> HrirCorpus:
    """Deterministic synthetic corpus under one setup profile."""
    if n_subjects < 1:
        raise DataError("need at least one subject")
    fs = profile.native_fs_hz
    n = profile.native_len
    freqs = np.fft.rfftfreq(n, d=1.0 / fs)
    onset_samples = int(round(profile.radius_m / SPEED_OF_SOUND * fs))
    delay_phase = np.exp(-2j * np.pi * freqs * onset_samples / fs)
    echo_lp = 1.0 / (1.0 + (freqs / ECHO_LOWPASS_HZ) ** 4)
    echo_phase = np.exp(-2j * np.pi * freqs * profile.reflection_delay_s)
    coloration = 10.0 ** (_coloration_db(freqs, profile.coloration) / 20.0)
    octaves = np.log2(np.maximum(freqs, 1.0) / 1000.0)
    # the floor is specified relative to the spectral level of a
    # unit-RMS row, whose bin magnitudes sit on a sqrt(n) scale
    noise_amp = np.sqrt(n) * 10.0 ** ((profile.noise_floor_db
                                       + profile.noise_tilt_db_per_octave
                                       * octaves) / 20.0)
    noise_amp[0] = 0.0

    subjects = []
    for si in range(n_subjects):
        srng = np.random.default_rng([profile.seed, seed, si])
        params = _draw_subject(srng)
        ears = []
        for side_idx, side in enumerate(("left", "right")):
            jitter = params.ear_jitter_db[side_idx]
            # build the twelve direct rows first, then normalise the loudest
            direct = []
            for az in COMMON_AZIMUTHS_DEG:
                eff_az = az if side == "left" else (360.0 - az) % 360.0
                level_db, shadow_db = _azimuth_gain_db(eff_az)
                mag = _direct_magnitude(freqs, params, jitter)
                shadow = 10.0 ** ((shadow_db / 20.0)
                                  * np.clip(freqs / 4000.0, 0.0, 1.0))
                mag = mag * 10.0 ** (level_db / 20.0) * shadow
                direct.append(_min_phase_from_magnitude(mag, n))
            setup = coloration * delay_phase \
                * (1.0 + profile.reflection_gain * echo_lp * echo_phase)
            specs = [np.fft.rfft(x) * setup for x in direct]
            # normalise the loudest row to unit RMS over the window a
            # 235-sample frame at 44.1 kHz retains, so downstream
            # truncation sees the same per-subject loudness
            win = min(n, int(round(fs * 235.0 / 44100.0)))
            peak_rms = max(dsp.rms(np.fft.irfft(s, n)[:win]) for s in specs)
            rows = []
            for spec in specs:
                s = spec / peak_rms
                # the noise floor adds incoherent power: raise each bin
                # magnitude to sqrt(|s|^2 + amp^2), keep the phase, then
                # sprinkle a small random component on top
                target = np.sqrt(np.abs(s) ** 2 + noise_amp ** 2)
                s = s * (target / np.maximum(np.abs(s), 1e-300))
                s += 0.05 * noise_amp * (srng.standard_normal(len(freqs))
                                         + 1j * srng.standard_normal(len(freqs)))
                rows.append(np.fft.irfft(s, n))
            positions = tuple(Position(a, 0.0) for a in COMMON_AZIMUTHS_DEG)
            ears.append(EarRecording(side, positions, np.stack(rows)))
        subjects.append(Subject(f"subj{si:03d}", tuple(ears)))
    return HrirCorpus(profile.name, fs, profile.method, profile.radius_m,
                      tuple(subjects))


def default_profiles(n: int, distinctness: str = "strong",
                     seed: int = 0) -> list[SetupProfile]:
    """n profiles: `null` identical but for seeds, `mild`/`strong` spread."""
    if n < 2:
        raise DataError("need at least two profiles")
    if distinctness not in ("null", "mild", "strong"):
        raise DataError(f"bad distinctness {distinctness!r}")
    profiles = []
    for i in range(n):
        if distinctness == "null":
            delay, gain, floor, tilt = 2.0e-3, 0.3, -35.0, 3.0
            fs, length, radius = 48000, 384, 0.25
            coloration = ()
        elif distinctness == "mild":
            delay = 2.0e-3 + 0.1e-3 * i
            gain = 0.27 + 0.012 * i
            floor = -36.5 + 0.5 * i
            tilt = 3.0 + 0.2 * i
            fs, length, radius = 48000, 384, 0.25
            coloration = ()
        else:
            delay = 0.6e-3 + 0.4e-3 * i  # pairwise >= 0.4 ms apart
            gain = 0.15 + 0.07 * (i % 12)
            floor = -42.0 + 2.5 * i
            # tilts follow a permutation so neighbouring floors never pair
            # with neighbouring tilts; the shelf curves stay separated over
            # the whole band instead of crossing near its top
            tilt = 2.0 + (0, 4, 8, 1, 5, 9, 2, 6, 3, 7)[i % 10]
            fs = (48000, 96000, 44100)[i % 3]
            length = 2 * int(round(0.004 * fs))
            radius = 0.15 + 0.02 * (i % 6)
            coloration = ((500.0, 0.5 * (i % 4)), (16000.0, -0.5 * (i % 3)))
        profiles.append(SetupProfile(
            name=f"{distinctness}{i:02d}",
            native_fs_hz=fs,
            native_len=length,
            radius_m=radius,
            reflection_delay_s=delay,
            reflection_gain=gain,
            noise_floor_db=floor,
            noise_tilt_db_per_octave=tilt,
            coloration=coloration,
            seed=seed * 1000 + i,
        ))
    return profiles


def save_profiles(profiles, path) -> None:
    data = [asdict(p) for p in profiles]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1)


def load_profiles(path) -> list[SetupProfile]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    out = []
    for d in data:
        d["coloration"] = tuple(tuple(a) for a in d["coloration"])
        out.append(SetupProfile(**d))
    return out
