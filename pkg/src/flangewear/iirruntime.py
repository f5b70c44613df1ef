"""Streaming execution of discrete filters as Direct Form I recursions.

    y(n) = sum_i b[i] x(n-i) - sum_{i>=1} a[i] y(n-i)
"""

from __future__ import annotations

import math
from collections import deque
from fractions import Fraction
from typing import Iterable, Iterator

from .errors import (
    InvalidSample,
    NumericalOverflow,
    PoleAtDC,
    SampleRateMismatch,
)
from .iirdesign import DiscreteFilter
from .timeseries import TimeSeries

INIT_MODES = ("zero", "dc_prime")


class FilterState:
    """Bounded input/output history for one stream through one filter.

    Not thread-safe; each stream owns its own state.
    """

    def __init__(self, filt: DiscreteFilter, mode="zero"):
        if mode not in INIT_MODES:
            raise ValueError(f"unknown init mode {mode!r}; expected one of {INIT_MODES}")
        self.filter = filt
        self.mode = mode
        m, k = len(filt.b) - 1, len(filt.a) - 1
        # index 0 holds the most recent value
        self.input_history = deque([0.0] * m, maxlen=m)
        self.output_history = deque([0.0] * k, maxlen=k)
        self.samples_seen = 0

    def _prime(self, x0):
        g = dc_gain(self.filter)
        for i in range(len(self.input_history)):
            self.input_history[i] = x0
        for i in range(len(self.output_history)):
            self.output_history[i] = g * x0


def init_state(filt: DiscreteFilter, mode="zero") -> FilterState:
    return FilterState(filt, mode)


def step(state: FilterState, x) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise InvalidSample(f"non-finite input sample {x!r}")
    if state.samples_seen == 0 and state.mode == "dc_prime":
        state._prime(x)
    b, a = state.filter.b, state.filter.a
    acc = b[0] * x
    for bi, xi in zip(b[1:], state.input_history):
        acc += bi * xi
    for ai, yi in zip(a[1:], state.output_history):
        acc -= ai * yi
    if not math.isfinite(acc):
        raise NumericalOverflow(f"filter output diverged after {state.samples_seen} samples")
    if state.input_history.maxlen:
        state.input_history.appendleft(x)
    if state.output_history.maxlen:
        state.output_history.appendleft(acc)
    state.samples_seen += 1
    return acc


def stream(filt: DiscreteFilter, samples: Iterable[float], mode="zero") -> Iterator[float]:
    """Lazily filter an iterable of samples with constant memory."""
    state = FilterState(filt, mode)
    for x in samples:
        yield step(state, x)


def run(filt: DiscreteFilter, series: TimeSeries, mode="zero") -> TimeSeries:
    if not math.isclose(series.sample_period, filt.sample_period, rel_tol=0, abs_tol=1e-9):
        raise SampleRateMismatch(
            f"series period {series.sample_period} s != filter period {filt.sample_period} s")
    out = list(stream(filt, series.samples, mode))
    return TimeSeries(series.sample_period, out, series.t0)


def jury_stable(filt: DiscreteFilter) -> bool:
    """True iff every pole lies strictly inside the unit circle.

    Jury/Schur-Cohn reduction: repeatedly fold the denominator against its
    reversal; all reflection coefficients must have magnitude below one.
    The reduction runs in exact rational arithmetic on the stored floats, so
    the verdict is not itself subject to rounding when poles crowd z = 1.
    """
    p = [Fraction(float(c)) for c in filt.a]
    while len(p) > 1 and p[-1] == 0:
        p.pop()  # trailing zeros are poles at the origin
    while len(p) > 1:
        k = p[-1] / p[0]
        if not abs(k) < 1.0:
            return False
        n = len(p) - 1
        p = [(p[i] - k * p[n - i]) for i in range(n)]
        if p[0] == 0:
            return False
    return True


def dc_gain(filt: DiscreteFilter) -> float:
    sa = math.fsum(filt.a)
    if sa == 0.0:
        raise PoleAtDC("denominator vanishes at z = 1")
    return math.fsum(filt.b) / sa


def group_delay_dc(filt: DiscreteFilter) -> float:
    """Group delay at 0 Hz, in seconds."""
    sb, sa = math.fsum(filt.b), math.fsum(filt.a)
    if sa == 0.0 or sb == 0.0:
        raise PoleAtDC("group delay undefined with a pole or zero at z = 1")
    nb = math.fsum(i * c for i, c in enumerate(filt.b))
    na = math.fsum(i * c for i, c in enumerate(filt.a))
    return (nb / sb - na / sa) * filt.sample_period
