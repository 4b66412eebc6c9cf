"""Signal-processing kernels for HRIR harmonisation.

Rate conversion, truncation, minimum-phase reconstruction, magnitude
spectra, band selection and RMS.  All functions are pure and operate on
1-D float arrays.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import math

import numpy as np

from ._accel import polyphase
from .errors import DataError

# Resampler design: Kaiser-windowed sinc, 32 taps per polyphase branch
# measured at the lower of the two rates, cutoff at 0.45x that rate.
KAISER_BETA = 8.6
TAPS_PER_PHASE = 32
CUTOFF_FRACTION = 0.45



@dataclass(frozen=True)
class Spectrum:
    """One-sided linear magnitude spectrum of a real signal."""

    bin_values: np.ndarray
    bin_frequencies_hz: np.ndarray
    source_fs_hz: float
    source_len: int

    def __post_init__(self):
        if len(self.bin_values) != len(self.bin_frequencies_hz):
            raise DataError("bin values and frequencies differ in length")
        if np.any(np.diff(self.bin_frequencies_hz) <= 0):
            raise DataError("bin frequencies must be strictly increasing")


def _as_ratio(from_hz, to_hz):
    frac = Fraction(to_hz).limit_denominator(10**6) / \
        Fraction(from_hz).limit_denominator(10**6)
    return frac.numerator, frac.denominator


@lru_cache(maxsize=32)
def _design_filter(from_hz: float, to_hz: float):
    up, down = _as_ratio(from_hz, to_hz)
    lower = min(from_hz, to_hz)
    rate = from_hz * up  # rate of the zero-stuffed grid
    half = int(round(0.5 * TAPS_PER_PHASE * rate / lower))
    n_taps = 2 * half + 1
    fc = CUTOFF_FRACTION * lower
    t = (np.arange(n_taps) - half) / rate
    h = 2.0 * fc / rate * np.sinc(2.0 * fc * t)
    h *= np.kaiser(n_taps, KAISER_BETA)
    return up, down, h


def resample(x, from_hz, to_hz):
    """Rational-ratio polyphase resampling; output length floor(n*to/from)."""
    if from_hz <= 0 or to_hz <= 0:
        raise DataError("sample rates must be positive")
    x = np.asarray(x, dtype=float)
    if from_hz == to_hz:
        return x.copy()
    up, down, h = _design_filter(float(from_hz), float(to_hz))
    n_out = len(x) * up // down
    return polyphase(x, h, up, down, n_out)


def truncate_or_pad(x, n: int):
    """First n samples, zero-padded when the input is shorter."""
    if n <= 0:
        raise DataError("target length must be positive")
    x = np.asarray(x, dtype=float)
    out = np.zeros(n)
    m = min(len(x), n)
    out[:m] = x[:m]
    return out


def minimum_phase(x):
    """Minimum-phase signal with the same magnitude spectrum as x.

    Treats the signal as a polynomial in z^-1, reflects every zero outside
    the unit circle to its conjugate reciprocal (compensating the gain by
    |r| per reflected zero) and drops leading zero samples (pure delay).
    The result has the same length and, to root-finding precision, an
    identical magnitude spectrum; its z-transform has no zeros outside the
    unit circle, which is the minimum-phase condition.  The spectrum is
    evaluated from the zeros as a sum of logarithms, which stays stable
    where direct polynomial reconstruction from 200+ roots overflows.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    nonzero = np.nonzero(x)[0]
    if len(nonzero) == 0:
        raise DataError("minimum_phase: input is identically zero")
    core = x[nonzero[0]:nonzero[-1] + 1]
    roots = np.roots(core)
    outside = np.abs(roots) > 1.0
    gain = core[0] * np.prod(np.abs(roots[outside]))
    reflected = roots.copy()
    reflected[outside] = 1.0 / np.conj(roots[outside])
    w = np.exp(-2j * np.pi * np.arange(n) / n)
    log_spec = np.sum(np.log(1.0 - np.outer(w, reflected)), axis=1)
    return np.fft.ifft(gain * np.exp(log_spec)).real


def magnitude_spectrum(x, fs_hz: float) -> Spectrum:
    """One-sided |FFT|; bins k = 0..floor(N/2) at k*fs/N."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 2:
        raise DataError("magnitude_spectrum: need at least 2 samples")
    mag = np.abs(np.fft.rfft(x))
    freqs = np.arange(len(mag)) * (fs_hz / n)
    return Spectrum(mag, freqs, float(fs_hz), n)


def band_indices(lo_hz, hi_hz, fs_hz, n: int):
    """Retained FFT bin indices for the [lo, hi] band; DC only when lo == 0.

    k = max(1, ceil(lo*N/fs)) .. floor(hi*N/fs) for lo > 0,
    else 0 .. floor(hi*N/fs).  Exact rational arithmetic avoids float
    boundary surprises.
    """
    if lo_hz < 0 or hi_hz <= lo_hz:
        raise DataError("invalid band: need 0 <= lo < hi")
    scale = Fraction(n) / Fraction(fs_hz).limit_denominator(10**9)
    k_hi = math.floor(Fraction(hi_hz).limit_denominator(10**9) * scale)
    if lo_hz > 0:
        k_lo = max(1, math.ceil(Fraction(lo_hz).limit_denominator(10**9) * scale))
    else:
        k_lo = 0
    k_hi = min(k_hi, n // 2)
    if k_hi < k_lo:
        raise DataError(f"empty band [{lo_hz}, {hi_hz}] Hz")
    return k_lo, k_hi


def select_band(s: Spectrum, lo_hz, hi_hz) -> Spectrum:
    """Keep the bins of the [lo, hi] Hz band, dropping DC when lo > 0."""
    k_lo, k_hi = band_indices(lo_hz, hi_hz, s.source_fs_hz, s.source_len)
    sl = slice(k_lo, k_hi + 1)
    return Spectrum(s.bin_values[sl], s.bin_frequencies_hz[sl],
                    s.source_fs_hz, s.source_len)


def rms(x) -> float:
    x = np.asarray(x, dtype=float)
    if len(x) == 0:
        raise DataError("rms: empty signal")
    return float(np.sqrt(np.mean(x * x)))
