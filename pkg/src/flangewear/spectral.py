"""Single-sided amplitude spectra and filter-spec extraction from spectra.

Spectra are scaled by the unpadded signal length so that a sinusoid of
amplitude ``A`` sitting on a bin reads ``A`` and the DC bin reads the mean.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSpec,
    FrequencyOutOfRange,
    InvalidSignal,
    NoNoiseDetected,
)
from .timeseries import TimeSeries

WINDOWS = ("rectangular", "hann")


@dataclass(frozen=True)
class Spectrum:
    bin_width: float
    magnitudes: tuple
    # length of the analysed signal before zero-padding; defaults to n_fft
    n_samples: int = 0

    def __post_init__(self):
        if not self.bin_width > 0:
            raise InvalidSignal("bin_width must be positive")
        mags = tuple(float(m) for m in self.magnitudes)
        if len(mags) < 2:
            raise InvalidSignal("spectrum needs at least DC and Nyquist bins")
        if any(not math.isfinite(m) or m < 0 for m in mags):
            raise InvalidSignal("magnitudes must be finite and non-negative")
        object.__setattr__(self, "magnitudes", mags)
        if not self.n_samples:
            object.__setattr__(self, "n_samples", self.n_fft)

    @property
    def n_fft(self):
        return 2 * (len(self.magnitudes) - 1)

    @property
    def nyquist(self):
        return self.bin_width * (len(self.magnitudes) - 1)

    @property
    def sample_rate(self):
        return self.bin_width * self.n_fft

    def frequencies(self):
        return self.bin_width * np.arange(len(self.magnitudes))

    def energy(self):
        """Time-domain energy sum(x**2) implied by this (rectangular) spectrum."""
        m = np.asarray(self.magnitudes)
        return self.n_samples**2 / self.n_fft * (m[0] ** 2 + 0.5 * np.sum(m[1:-1] ** 2) + m[-1] ** 2)


def next_pow2(n):
    return 1 << max(0, (n - 1).bit_length())


def fft_radix2(x):
    """Iterative decimation-in-time radix-2 FFT. ``len(x)`` must be a power of two."""
    a = np.asarray(x, dtype=complex).copy()
    n = a.size
    if n == 0 or n & (n - 1):
        raise ValueError(f"length must be a power of two, got {n}")
    bits = n.bit_length() - 1
    if bits:
        idx = np.arange(n)
        rev = np.zeros(n, dtype=int)
        for b in range(bits):
            rev |= ((idx >> b) & 1) << (bits - 1 - b)
        a = a[rev]
    half = 1
    while half < n:
        tw = np.exp(-2j * np.pi * np.arange(half) / (2 * half))
        blocks = a.reshape(-1, 2 * half)
        top = blocks[:, :half].copy()
        bot = blocks[:, half:] * tw
        blocks[:, :half] = top + bot
        blocks[:, half:] = top - bot
        half *= 2
    return a


def fft_magnitude(series: TimeSeries, window="rectangular") -> Spectrum:
    if window not in WINDOWS:
        raise ValueError(f"unknown window {window!r}; expected one of {WINDOWS}")
    x = series.values()
    if x.size < 2:
        raise InvalidSignal("need at least two samples")
    n = x.size
    n_fft = next_pow2(n)
    if window == "hann":
        w = np.hanning(n)
        gain = w.sum()
        x = x * w
    else:
        gain = float(n)
    buf = np.zeros(n_fft)
    buf[:n] = x
    X = fft_radix2(buf)[: n_fft // 2 + 1]
    mags = np.abs(X) / gain
    mags[1:-1] *= 2.0
    return Spectrum(series.sample_rate / n_fft, tuple(mags), n)


def _check_freq(spectrum, f):
    if not (0.0 <= f <= spectrum.nyquist * (1 + 1e-12)):
        raise FrequencyOutOfRange(f"{f} Hz outside [0, {spectrum.nyquist}] Hz")


def _cumulative(spectrum):
    e = np.cumsum(np.asarray(spectrum.magnitudes) ** 2)
    return e / e[-1] if e[-1] > 0 else np.ones_like(e)


def cumulative_energy_fraction(spectrum: Spectrum, f: float) -> float:
    """Fraction of total squared magnitude in bins at or below ``f`` Hz."""
    _check_freq(spectrum, f)
    k = min(int(math.floor(f / spectrum.bin_width + 1e-9)), len(spectrum.magnitudes) - 1)
    return float(_cumulative(spectrum)[k])


@dataclass(frozen=True)
class ExtractionRules:
    energy_fraction: float = 0.99
    excess_factor: float = 10.0
    # bins below floor * max(measured) never count as contaminated
    floor: float = 1e-3


def extract_filter_spec(measured: Spectrum, reference: Spectrum, ap_db=0.1, aa_db=40.0,
                        rules: ExtractionRules = ExtractionRules()):
    """Derive a low-pass :class:`FilterSpec` from a noisy and a clean spectrum.

    The passband edge is where the clean spectrum has accumulated
    ``rules.energy_fraction`` of its energy. The stopband edge is one bin
    below the first pair of consecutive bins (above the passband edge) where
    the noisy spectrum exceeds the clean one by ``rules.excess_factor``.
    """
    from .iirdesign import FilterSpec

    if (len(measured.magnitudes) != len(reference.magnitudes)
            or not math.isclose(measured.bin_width, reference.bin_width, rel_tol=1e-12)):
        raise DegenerateSpec("measured and reference spectra must share bin grid")
    if not (ap_db > 0 and aa_db > ap_db):
        raise DegenerateSpec(f"need 0 < Ap < Aa, got Ap={ap_db}, Aa={aa_db}")

    df = reference.bin_width
    cum = _cumulative(reference)
    kp = int(np.argmax(cum >= rules.energy_fraction))
    fp = kp * df

    meas = np.asarray(measured.magnitudes)
    ref = np.asarray(reference.magnitudes)
    floor = rules.floor * meas.max()
    hot = (meas >= rules.excess_factor * ref) & (meas > floor) & (meas > ref)
    ka = None
    for k in range(kp + 1, len(meas) - 1):
        if hot[k] and hot[k + 1]:
            ka = k
            break
    if ka is None:
        raise NoNoiseDetected("no persistently contaminated bins above the passband edge")
    fa = (ka - 1) * df
    if fp <= 0 or fa <= fp:
        raise DegenerateSpec(f"derived edges not ordered: fp={fp} Hz, fa={fa} Hz")
    return FilterSpec(measured.sample_rate, fp, fa, ap_db, aa_db)


def write_spectrum_csv(spectrum: Spectrum, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frequency_hz", "magnitude"])
        for f, m in zip(spectrum.frequencies(), spectrum.magnitudes):
            w.writerow([f"{f:.9g}", f"{m:.9g}"])
