"""Butterworth low-pass synthesis via pre-warping and the bilinear transform.

Design chain: pre-warp the band edges, pick the minimum order meeting both
attenuation limits, place the cutoff so the passband limit is met exactly,
build the normalized prototype, scale it to the cutoff and map it to the z
domain.

Polynomials are stored as tuples of coefficients in *ascending* powers (of
``s`` for analog transfer functions, of ``z**-1`` for discrete ones).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateMapping,
    InvalidSpec,
    NyquistEdge,
    OrderOutOfRange,
    UnstableFilter,
)

MAX_ORDER = 12


@dataclass(frozen=True)
class FilterSpec:
    sample_rate: float
    passband_edge: float
    stopband_edge: float
    passband_atten: float
    stopband_atten: float

    def __post_init__(self):
        fs, fp, fa = self.sample_rate, self.passband_edge, self.stopband_edge
        if not all(math.isfinite(v) for v in (fs, fp, fa, self.passband_atten, self.stopband_atten)):
            raise InvalidSpec("filter spec values must be finite")
        if not (0 < fp < fa < fs / 2):
            raise InvalidSpec(f"need 0 < fp < fa < fs/2, got fp={fp}, fa={fa}, fs={fs}")
        if not (0 < self.passband_atten < self.stopband_atten):
            raise InvalidSpec(
                f"need 0 < Ap < Aa, got Ap={self.passband_atten}, Aa={self.stopband_atten}")

    @property
    def sample_period(self):
        return 1.0 / self.sample_rate


@dataclass(frozen=True)
class DesignRecord:
    omega_p_warped: float
    omega_a_warped: float
    order: int
    omega_c_warped: float


@dataclass(frozen=True)
class AnalogTF:
    numerator: tuple
    denominator: tuple

    def __post_init__(self):
        num = tuple(float(c) for c in self.numerator)
        den = tuple(float(c) for c in self.denominator)
        if not num or not den:
            raise InvalidSpec("transfer function polynomials must be non-empty")
        if not all(math.isfinite(c) for c in num + den):
            raise InvalidSpec("transfer function coefficients must be finite")
        if den[0] == 0:
            raise InvalidSpec("denominator constant term must be nonzero")
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)

    def response(self, omega):
        """Complex frequency response at ``omega`` rad/s (scalar or array)."""
        s = 1j * np.asarray(omega, dtype=float)
        return np.polynomial.polynomial.polyval(s, self.numerator) / \
            np.polynomial.polynomial.polyval(s, self.denominator)


@dataclass(frozen=True)
class DiscreteFilter:
    """H(z) = sum(b[i] z^-i) / sum(a[i] z^-i), normalized so ``a[0] == 1``."""

    b: tuple
    a: tuple
    sample_period: float
    design: DesignRecord | None = field(default=None, compare=False)

    def __post_init__(self):
        b = [float(c) for c in self.b]
        a = [float(c) for c in self.a]
        if not b or not a:
            raise InvalidSpec("filter coefficient lists must be non-empty")
        if not all(math.isfinite(c) for c in b + a):
            raise InvalidSpec("filter coefficients must be finite")
        if a[0] == 0:
            raise DegenerateMapping("leading denominator coefficient is zero")
        if not (math.isfinite(self.sample_period) and self.sample_period > 0):
            raise InvalidSpec("sample_period must be positive")
        a0 = a[0]
        if a0 != 1.0:
            b = [c / a0 for c in b]
            a = [c / a0 for c in a]
            a[0] = 1.0
        object.__setattr__(self, "b", tuple(b))
        object.__setattr__(self, "a", tuple(a))

    @property
    def sample_rate(self):
        return 1.0 / self.sample_period

    def response(self, f):
        """Complex frequency response at ``f`` Hz (scalar or array)."""
        zinv = np.exp(-2j * np.pi * np.asarray(f, dtype=float) * self.sample_period)
        P = np.polynomial.polynomial
        return P.polyval(zinv, self.b) / P.polyval(zinv, self.a)


def prewarp(f, sample_rate):
    """Analog frequency (rad/s) that the bilinear transform maps onto ``f`` Hz."""
    if not (0 < f < sample_rate / 2):
        if f >= sample_rate / 2:
            raise NyquistEdge(f"{f} Hz is at or above Nyquist ({sample_rate / 2} Hz)")
        raise InvalidSpec(f"frequency must be positive, got {f}")
    return 2.0 * sample_rate * math.tan(math.pi * f / sample_rate)


def _ripple_factor(atten_db):
    return math.sqrt(10.0 ** (0.1 * atten_db) - 1.0)


def butterworth_min_order(omega_p, omega_a, ap_db, aa_db):
    if not (omega_p > 0 and omega_a > omega_p):
        raise InvalidSpec(f"need 0 < omega_p < omega_a, got {omega_p}, {omega_a}")
    if not (aa_db > ap_db > 0):
        raise InvalidSpec(f"need Aa > Ap > 0, got Ap={ap_db}, Aa={aa_db}")
    ratio = math.log(_ripple_factor(aa_db) / _ripple_factor(ap_db)) / math.log(omega_a / omega_p)
    # guard against ceil(4.0000000001) when the ratio is integral up to rounding
    return max(1, math.ceil(ratio - 1e-9))


def butterworth_cutoff(omega_p, ap_db, order):
    """Cutoff (-3 dB) frequency placing exactly ``ap_db`` of loss at ``omega_p``."""
    if order < 1 or ap_db <= 0:
        raise InvalidSpec(f"need order >= 1 and Ap > 0, got {order}, {ap_db}")
    return omega_p * (10.0 ** (0.1 * ap_db) - 1.0) ** (-1.0 / (2 * order))


def butterworth_prototype(order) -> AnalogTF:
    """Normalized (1 rad/s) Butterworth low-pass, built from its pole positions."""
    if not (isinstance(order, (int, np.integer)) and 1 <= order <= MAX_ORDER):
        raise OrderOutOfRange(f"order must be an integer in 1..{MAX_ORDER}, got {order}")
    den = np.array([1.0])
    for k in range(1, order // 2 + 1):
        pole = complex(math.cos(math.pi * (2 * k + order - 1) / (2 * order)),
                       math.sin(math.pi * (2 * k + order - 1) / (2 * order)))
        # (s - p)(s - p*) = s^2 - 2 Re(p) s + 1, ascending
        den = np.convolve(den, [1.0, -2.0 * pole.real, 1.0])
    if order % 2:
        den = np.convolve(den, [1.0, 1.0])
    return AnalogTF((1.0,), tuple(den))


def frequency_scale(tf: AnalogTF, omega_c) -> AnalogTF:
    """Substitute s -> s / omega_c."""
    if not omega_c > 0:
        raise InvalidSpec(f"omega_c must be positive, got {omega_c}")
    return AnalogTF(
        tuple(c / omega_c**k for k, c in enumerate(tf.numerator)),
        tuple(c / omega_c**k for k, c in enumerate(tf.denominator)),
    )


def _binomial_row(k, sign):
    # coefficients of (1 + sign*z^-1)^k, ascending
    return np.array([math.comb(k, i) * sign**i for i in range(k + 1)], dtype=float)


def _bilinear_poly(coeffs, degree, c):
    out = np.zeros(degree + 1)
    for k, ck in enumerate(coeffs):
        if ck == 0.0:
            continue
        term = np.convolve(_binomial_row(k, -1), _binomial_row(degree - k, +1))
        out += ck * c**k * term
    return out


def bilinear_transform(tf: AnalogTF, sample_rate) -> DiscreteFilter:
    """Map H(s) to H(z) with s = (2/T)(1 - z^-1)/(1 + z^-1)."""
    if not sample_rate > 0:
        raise InvalidSpec(f"sample_rate must be positive, got {sample_rate}")
    degree = max(len(tf.numerator), len(tf.denominator)) - 1
    c = 2.0 * sample_rate
    b = _bilinear_poly(tf.numerator, degree, c)
    a = _bilinear_poly(tf.denominator, degree, c)
    if a[0] == 0:
        raise DegenerateMapping("bilinear mapping produced a zero leading denominator term")
    b, a = b / a[0], a / a[0]
    a[0] = 1.0
    return DiscreteFilter(tuple(b), tuple(a), 1.0 / sample_rate)


def design_lowpass(spec: FilterSpec) -> tuple[DiscreteFilter, DesignRecord]:
    fs = spec.sample_rate
    omega_p = prewarp(spec.passband_edge, fs)
    omega_a = prewarp(spec.stopband_edge, fs)
    order = butterworth_min_order(omega_p, omega_a, spec.passband_atten, spec.stopband_atten)
    if order > MAX_ORDER:
        raise OrderOutOfRange(f"spec needs order {order}, above the supported {MAX_ORDER}")
    omega_c = butterworth_cutoff(omega_p, spec.passband_atten, order)
    record = DesignRecord(omega_p, omega_a, order, omega_c)
    digital = bilinear_transform(frequency_scale(butterworth_prototype(order), omega_c), fs)
    # Sum(a) suffers cancellation when the poles crowd z = 1, so pin H(1) = 1
    # on the stored coefficients rather than trusting the expansion.
    gain = math.fsum(digital.b) / math.fsum(digital.a)
    b = tuple(c / gain for c in digital.b)
    filt = DiscreteFilter(b, digital.a, digital.sample_period, record)
    from .iirruntime import jury_stable

    if not jury_stable(filt):
        raise UnstableFilter(
            f"order-{order} direct form with cutoff {cutoff_hz(omega_c, fs):.4g} Hz at fs={fs} Hz "
            "has poles on or outside the unit circle after rounding; widen the transition band or lower the order")
    return filt, record


def digital_magnitude(filt: DiscreteFilter, f):
    """Magnitude response in dB at ``f`` Hz."""
    nyq = filt.sample_rate / 2
    f_arr = np.asarray(f, dtype=float)
    if np.any(f_arr < 0) or np.any(f_arr > nyq * (1 + 1e-12)):
        raise InvalidSpec(f"frequency must lie in [0, {nyq}] Hz")
    mag = 20.0 * np.log10(np.abs(filt.response(f_arr)))
    return float(mag) if mag.ndim == 0 else mag


def cutoff_hz(omega_c, sample_rate):
    """Digital frequency (Hz) at which a design with analog cutoff ``omega_c`` is -3 dB."""
    return sample_rate / math.pi * math.atan(omega_c / (2.0 * sample_rate))


def format_transfer_function(filt: DiscreteFilter, digits=6):
    def poly(coeffs):
        terms = []
        for i, c in enumerate(coeffs):
            term = f"{c:.{digits}g}" if i == 0 else f"{c:.{digits}g} z^-{i}"
            terms.append(term)
        return " + ".join(terms).replace("+ -", "- ")

    num, den = poly(filt.b), poly(filt.a)
    width = max(len(num), len(den))
    return f"       {num}\nH(z) = {'-' * width}\n       {den}"


def format_difference_equation(filt: DiscreteFilter, digits=6):
    terms = [(-c, f"y(n-{i})") for i, c in enumerate(filt.a[1:], start=1)]
    terms += [(c, f"x(n-{i})" if i else "x(n)") for i, c in enumerate(filt.b)]
    text = ""
    for k, (c, sym) in enumerate(terms):
        mag = f"{abs(c):.{digits}g}{sym}"
        if k == 0:
            text = mag if c >= 0 else "-" + mag
        else:
            text += (" + " if c >= 0 else " - ") + mag
    return "y(n) = " + text


FILTER_FORMAT_VERSION = 1


def filter_to_json(filt: DiscreteFilter) -> str:
    rec = filt.design
    d = {
        "format_version": FILTER_FORMAT_VERSION,
        "sample_period": filt.sample_period,
        "b": list(filt.b),
        "a": list(filt.a),
        "design_record": None if rec is None else {
            "omega_p_warped": rec.omega_p_warped,
            "omega_a_warped": rec.omega_a_warped,
            "order": rec.order,
            "omega_c_warped": rec.omega_c_warped,
        },
    }
    return json.dumps(d, indent=2)


def filter_from_json(text) -> DiscreteFilter:
    d = json.loads(text)
    rec = d.get("design_record")
    return DiscreteFilter(tuple(d["b"]), tuple(d["a"]), d["sample_period"],
                          DesignRecord(**rec) if rec else None)
