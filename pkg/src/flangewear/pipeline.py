"""Ingestion, accuracy scoring, wear analytics and the streaming monitor."""

from __future__ import annotations

import csv
import math
import os
from collections import deque
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Iterator

import numpy as np

from .errors import DivisionDomain, ParseError, SchemaError, UnstableFilter
from .iirdesign import DiscreteFilter
from .iirruntime import FilterState, jury_stable, step
from .regress import (
    DEFAULT_THRESHOLD,
    Observation,
    SurfaceModel,
    TrainingDatabase,
    auto_fit,
    predict_clearance,
)
from .rig import DATASET_HEADER, SENSOR_RANGE_MM
from .timeseries import TimeSeries

DEFAULT_INITIAL_CLEARANCE = 1.5
DEFAULT_WEAR_LIMIT = 9.0
WARN_FRACTION = 0.8
DEFAULT_WEAR_WINDOW = 100
REQUIRED_COLUMNS = DATASET_HEADER[:3]


# -- ingestion ---------------------------------------------------------------

def _parse_float(text, column, line):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ParseError(f"column {column!r}: cannot parse {text!r} as a number", line) from None
    if not math.isfinite(value):
        raise ParseError(f"column {column!r}: non-finite value {text!r}", line)
    return value


def load_observations(path):
    """Read a rig dataset CSV. The ``clearance_mm`` column may be absent or blank."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: file is empty, expected a header row") from None
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing required column(s) {missing}")
        idx = {name: header.index(name) for name in DATASET_HEADER if name in header}
        out = []
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", line)
            vals = {c: _parse_float(row[i], c, line) for c, i in idx.items()
                    if c != "clearance_mm"}
            clearance = None
            if "clearance_mm" in idx and row[idx["clearance_mm"]].strip():
                clearance = _parse_float(row[idx["clearance_mm"]], "clearance_mm", line)
            try:
                out.append(Observation(vals["timestamp_s"], vals["voltage_v"],
                                       vals["temperature_c"], clearance))
            except ValueError as exc:
                raise ParseError(str(exc), line) from None
    return out


def write_observations(obs, path):
    with open(path, "w") as fh:
        fh.write(",".join(DATASET_HEADER) + "\n")
        for o in obs:
            c = "" if o.clearance is None else f"{o.clearance:.9g}"
            fh.write(f"{o.timestamp:.9g},{o.voltage:.9g},{o.temperature:.9g},{c}\n")


def load_series(path, column=None):
    """Read a time series from a CSV whose first column is time in seconds.

    ``column`` defaults to ``filtered``, then ``clearance_mm``, then the
    second column.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: file is empty") from None
        if column is None:
            for cand in ("filtered", "clearance_mm"):
                if cand in header:
                    column = cand
                    break
            else:
                if len(header) < 2:
                    raise SchemaError(f"{path}: need a time column and a value column")
                column = header[1]
        if column not in header:
            raise SchemaError(f"{path}: no column {column!r}")
        ci = header.index(column)
        times, values = [], []
        for row in reader:
            if not row:
                continue
            times.append(_parse_float(row[0], header[0], reader.line_num))
            values.append(_parse_float(row[ci], column, reader.line_num))
    if not values:
        raise SchemaError(f"{path}: no data rows")
    period = 1.0
    if len(times) > 1:
        # span / steps averages out the per-timestamp print rounding
        period = (times[-1] - times[0]) / (len(times) - 1)
        if not period > 0 or np.max(np.abs(np.diff(times) - period)) > 1e-3 * period:
            raise SchemaError(f"{path}: timestamps are not uniformly spaced")
    return TimeSeries(period, values, times[0]), column


# -- accuracy ----------------------------------------------------------------

@dataclass(frozen=True)
class AccuracyRow:
    true_clearance: float
    measured: float
    abs_error: float
    percent_error: float


@dataclass(frozen=True)
class AccuracyReport:
    rows: tuple
    mean_percent_error: float

    @property
    def mean_accuracy_percent(self):
        return 100.0 - self.mean_percent_error


def evaluate_accuracy(pairs) -> AccuracyReport:
    """Percent error 100 * |d_o - d_a| / d_a per (true d_a, measured d_o) pair."""
    rows = []
    for d_a, d_o in pairs:
        if not d_a > 0:
            raise DivisionDomain(f"true clearance must be positive, got {d_a}")
        err = abs(d_o - d_a)
        rows.append(AccuracyRow(d_a, d_o, err, 100.0 * err / d_a))
    if not rows:
        raise DivisionDomain("no rows to evaluate")
    mean = math.fsum(r.percent_error for r in rows) / len(rows)
    return AccuracyReport(tuple(rows), mean)


def steady_state_mask(truth, sample_rate, settle_s):
    """True where the reference has been constant for at least ``settle_s`` seconds."""
    truth = np.asarray(truth, dtype=float)
    mask = np.zeros(truth.size, dtype=bool)
    need = int(math.ceil(settle_s * sample_rate - 1e-6))  # rates read back from CSV carry rounding
    run = 0
    for k in range(truth.size):
        run = run + 1 if k and truth[k] == truth[k - 1] else 0
        mask[k] = run >= need
    return mask


def steady_state_accuracy(truth, measured, sample_rate, settle_s) -> AccuracyReport:
    """Score ``measured`` against ``truth`` only where the truth has settled."""
    truth = np.asarray(truth, dtype=float)
    measured = np.asarray(measured, dtype=float)
    if truth.shape != measured.shape:
        raise SchemaError(f"length mismatch: {truth.size} truth vs {measured.size} measured")
    mask = steady_state_mask(truth, sample_rate, settle_s)
    return evaluate_accuracy(zip(truth[mask], measured[mask]))


# -- wear analytics ----------------------------------------------------------

class Alarm(IntEnum):
    OK = 0
    WARN = 1
    CRITICAL = 2


@dataclass(frozen=True)
class WearReport:
    initial_clearance: float
    current_reading: float
    wear_depth: float
    wear_rate: float  # mm per hour
    alarm: Alarm
    wear_limit: float
    unreliable: bool = False

    def as_dict(self):
        return {
            "initial_clearance_mm": self.initial_clearance,
            "current_reading_mm": self.current_reading,
            "wear_depth_mm": self.wear_depth,
            "wear_rate_mm_per_h": self.wear_rate,
            "alarm": self.alarm.name,
            "wear_limit_mm": self.wear_limit,
            "unreliable": self.unreliable,
        }


def classify_wear(wear_depth, wear_limit=DEFAULT_WEAR_LIMIT):
    # tolerance keeps 8.7 - 1.5 == 7.2 == 0.8 * 9 on the WARN side
    eps = 1e-9 * max(1.0, wear_limit)
    if wear_depth >= wear_limit - eps:
        return Alarm.CRITICAL
    if wear_depth >= WARN_FRACTION * wear_limit - eps:
        return Alarm.WARN
    return Alarm.OK


def _slope(values, period):
    n = len(values)
    if n < 2:
        return 0.0
    t = np.arange(n) * period
    t -= t.mean()
    y = np.asarray(values, dtype=float)
    return float(t @ (y - y.mean()) / (t @ t))


def make_wear_report(readings, period, s_i=DEFAULT_INITIAL_CLEARANCE,
                     wear_limit=DEFAULT_WEAR_LIMIT, sensor_range=SENSOR_RANGE_MM[1]):
    current = float(readings[-1])
    depth = current - s_i
    rate = _slope(readings, period) * 3600.0
    return WearReport(s_i, current, depth, rate, classify_wear(depth, wear_limit), wear_limit,
                      current >= sensor_range or current < SENSOR_RANGE_MM[0])


def wear_report(series: TimeSeries, s_i=DEFAULT_INITIAL_CLEARANCE, wear_limit=DEFAULT_WEAR_LIMIT,
                window=DEFAULT_WEAR_WINDOW) -> WearReport:
    """Wear depth from the last reading; wear rate from a trailing least-squares slope."""
    if s_i < 0:
        raise ValueError("initial clearance must be non-negative")
    if window < 2:
        raise ValueError("window must be at least 2 samples")
    tail = series.samples[-window:]
    return make_wear_report(tail, series.sample_period, s_i, wear_limit)


# -- monitor -----------------------------------------------------------------

@dataclass(frozen=True)
class MonitorRow:
    t: float
    raw_estimate: float
    filtered_estimate: float
    report: WearReport
    model_version: int


class Monitor:
    """Prediction -> filtering -> wear reporting over a live sample stream.

    With a :class:`TrainingDatabase`, the model is refit whenever the
    database version moves; the swap happens between samples so each row is
    computed with exactly one model.
    """

    def __init__(self, filt: DiscreteFilter, model: SurfaceModel | None = None,
                 db: TrainingDatabase | None = None, threshold_r=DEFAULT_THRESHOLD,
                 s_i=DEFAULT_INITIAL_CLEARANCE, wear_limit=DEFAULT_WEAR_LIMIT,
                 window=DEFAULT_WEAR_WINDOW, init_mode="zero"):
        if model is None and db is None:
            raise ValueError("need a trained model or a training database")
        if not jury_stable(filt):
            raise UnstableFilter("filter has poles on or outside the unit circle")
        self.filter = filt
        self.db = db
        self.threshold_r = threshold_r
        self.model = model if model is not None else auto_fit(db, threshold_r)
        self.state = FilterState(filt, init_mode)
        self.s_i, self.wear_limit = s_i, wear_limit
        self._recent = deque(maxlen=max(2, window))
        self.reloads = 0

    def _maybe_reload(self):
        if self.db is not None and self.db.version != self.model.db_version:
            self.model = auto_fit(self.db, self.threshold_r)
            self.reloads += 1

    def push(self, t, voltage, temperature) -> MonitorRow:
        self._maybe_reload()
        model = self.model
        raw = predict_clearance(model, voltage, temperature)
        filtered = step(self.state, raw)
        self._recent.append(filtered)
        report = make_wear_report(self._recent, self.filter.sample_period, self.s_i,
                                  self.wear_limit)
        return MonitorRow(t, raw, filtered, report, model.db_version)


def run_monitor(filt: DiscreteFilter, samples: Iterable, model=None, db=None,
                threshold_r=DEFAULT_THRESHOLD, **kw) -> Iterator[MonitorRow]:
    """Yield one :class:`MonitorRow` per ``(t, voltage, temperature)`` sample."""
    mon = Monitor(filt, model, db, threshold_r, **kw)
    for t, v, temp in samples:
        yield mon.push(t, v, temp)


class CsvDatabaseWatcher:
    """Mirrors an on-disk training CSV into a :class:`TrainingDatabase`.

    ``poll()`` appends rows added to the file since the last poll.
    """

    def __init__(self, path):
        self.path = path
        self.db = TrainingDatabase()
        self._stamp = None
        self.poll()

    def poll(self):
        st = os.stat(self.path)
        stamp = (st.st_mtime_ns, st.st_size)
        if stamp == self._stamp:
            return False
        self._stamp = stamp
        obs = [o for o in load_observations(self.path) if o.clearance is not None]
        new = obs[len(self.db):]
        if new:
            self.db.append(new)
        return bool(new)
