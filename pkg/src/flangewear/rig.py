"""Desk emulation of the clearance rig.

A :class:`SurfaceModel` plays the role of the sensor physics: the emulator
picks a clearance and temperature trajectory, inverts the surface to get the
voltage the sensor would read, and optionally adds vibration tones plus white
noise. Feeding the voltage back through the same surface recovers the
(noisy) clearance exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import AliasingRisk, NoBracket, OutOfSurfaceRange, RangeExceeded
from .regress import SurfaceModel, high_temperature_surface, predict_clearance
from .timeseries import TimeSeries

SENSOR_RANGE_MM = (0.0, 10.5)
BISECTION_BRACKET_V = (0.0, 15.0)
PROFILES = ("staircase", "ramp", "hold")
TEMPERATURE_SHAPES = ("constant", "linear")
NOISE_CHANNELS = ("clearance", "voltage")
DATASET_HEADER = ("timestamp_s", "voltage_v", "temperature_c", "clearance_mm")


@dataclass(frozen=True)
class NoiseSpec:
    tones: tuple = ()  # (frequency Hz, amplitude mm) pairs
    white_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        tones = tuple((float(f), float(a)) for f, a in self.tones)
        if any(a < 0 for _, a in tones) or self.white_sigma < 0:
            raise ValueError("noise amplitudes must be non-negative")
        object.__setattr__(self, "tones", tones)


def default_noise(seed=0):
    """Vibration fixture: three stopband tones plus a white floor."""
    return NoiseSpec(((1.2, 0.04), (2.0, 0.1), (2.7, 0.02)), 0.01, seed)


@dataclass(frozen=True)
class ClearanceParams:
    start: float = 1.0
    step: float = 1.0
    dwell: float = 10.0
    ramp_rate: float = 0.0


@dataclass(frozen=True)
class TemperatureParams:
    start: float = 20.0
    end: float = 20.0
    shape: str = "constant"

    def __post_init__(self):
        if self.shape not in TEMPERATURE_SHAPES:
            raise ValueError(f"unknown temperature shape {self.shape!r}")


@dataclass(frozen=True)
class RigConfig:
    profile: str
    duration: float
    sample_rate: float
    clearance: ClearanceParams = ClearanceParams()
    temperature: TemperatureParams = TemperatureParams()
    surface: SurfaceModel = field(default_factory=high_temperature_surface)
    noise: NoiseSpec = NoiseSpec()
    noise_channel: str = "clearance"

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}; expected one of {PROFILES}")
        if not (self.duration > 0 and self.sample_rate > 0):
            raise ValueError("duration and sample_rate must be positive")
        if self.noise_channel not in NOISE_CHANNELS:
            raise ValueError(f"unknown noise channel {self.noise_channel!r}")

    @property
    def n_samples(self):
        return int(round(self.duration * self.sample_rate))

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["clearance"] = ClearanceParams(**d.get("clearance", {}))
        d["temperature"] = TemperatureParams(**d.get("temperature", {}))
        noise = d.get("noise")
        d["noise"] = NoiseSpec(**noise) if noise is not None else NoiseSpec()
        surf = d.get("surface")
        if surf is None:
            d.pop("surface", None)
        elif isinstance(surf, dict):
            d["surface"] = SurfaceModel.from_json(json.dumps(surf))
        return cls(**d)

    def to_dict(self):
        d = asdict(self)
        d["surface"] = json.loads(self.surface.to_json())
        return d


def staircase_config(seed=0, noise=True):
    """Staircase 1..10 mm at 43-50 degC, 6 Hz, default vibration noise."""
    return RigConfig(
        profile="staircase", duration=100.0, sample_rate=6.0,
        clearance=ClearanceParams(start=1.0, step=1.0, dwell=10.0),
        temperature=TemperatureParams(43.0, 50.0, "linear"),
        noise=default_noise(seed) if noise else NoiseSpec(seed=seed),
    )


def _voltage_poly(surface: SurfaceModel, temperature):
    # coefficients c_i(T) of d = sum_i c_i V^i
    return [sum(surface.coefficient(i, j) * temperature**j for j in range(surface.order_t + 1))
            for i in range(surface.order_v + 1)]


def clearance_slope(surface: SurfaceModel, voltage, temperature):
    """d(clearance)/d(voltage) at (V, T)."""
    c = _voltage_poly(surface, temperature)
    return sum(i * ci * voltage ** (i - 1) for i, ci in enumerate(c) if i)


def sensor_voltage(surface: SurfaceModel, clearance, temperature, bracket=BISECTION_BRACKET_V):
    """Voltage at which ``surface`` predicts ``clearance`` at ``temperature``.

    Picks the root on the branch where clearance increases with voltage.
    """
    c = _voltage_poly(surface, temperature)
    if surface.order_v <= 2:
        c0 = c[0] - clearance
        c1 = c[1] if len(c) > 1 else 0.0
        c2 = c[2] if len(c) > 2 else 0.0
        if c2 == 0.0:
            if c1 <= 0.0:
                raise OutOfSurfaceRange(f"surface is not increasing in voltage at T={temperature}")
            return -c0 / c1
        disc = c1 * c1 - 4.0 * c2 * c0
        if disc < 0:
            raise OutOfSurfaceRange(
                f"no voltage yields {clearance} mm at {temperature} degC on this surface")
        sq = math.sqrt(disc)
        # root with c1 + 2 c2 V = +sq; pick the cancellation-free formula
        if c1 >= 0:
            return -2.0 * c0 / (c1 + sq) if c1 + sq != 0 else 0.0
        return (sq - c1) / (2.0 * c2)

    lo, hi = bracket
    f = lambda v: predict_clearance(surface, v, temperature) - clearance  # noqa: E731
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise NoBracket(f"no sign change on [{lo}, {hi}] V for {clearance} mm")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0 or hi - lo < 1e-15 * max(1.0, abs(mid)):
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def clearance_value(config: RigConfig, t):
    p = config.clearance
    if config.profile == "staircase":
        return p.start + p.step * math.floor(t / p.dwell + 1e-9)
    if config.profile == "ramp":
        return p.start + p.ramp_rate * t
    return p.start


def temperature_value(config: RigConfig, t):
    p = config.temperature
    if p.shape == "constant":
        return p.start
    return p.start + (p.end - p.start) * t / config.duration


def _times(config):
    return np.arange(config.n_samples) / config.sample_rate


def clearance_profile(config: RigConfig) -> TimeSeries:
    values = [clearance_value(config, t) for t in _times(config)]
    lo, hi = SENSOR_RANGE_MM
    end_value = values[-1]
    if config.profile == "ramp":
        end_value = clearance_value(config, config.duration)
    if min(values + [end_value]) < lo or max(values + [end_value]) > hi + 1e-9:
        raise RangeExceeded(f"profile leaves the sensor range {SENSOR_RANGE_MM} mm")
    return TimeSeries(1.0 / config.sample_rate, values)


def temperature_profile(config: RigConfig) -> TimeSeries:
    return TimeSeries(1.0 / config.sample_rate, [temperature_value(config, t) for t in _times(config)])


def noise_samples(n, sample_rate, noise: NoiseSpec):
    """The additive noise alone: tones with seeded random phases plus white noise."""
    nyq = sample_rate / 2
    for f, _ in noise.tones:
        if not 0 <= f < nyq:
            raise AliasingRisk(f"tone at {f} Hz is not below Nyquist ({nyq} Hz)")
    rng = np.random.default_rng(noise.seed)
    t = np.arange(n) / sample_rate
    out = np.zeros(n)
    for f, amp in noise.tones:
        phase = rng.uniform(0.0, 2.0 * math.pi)
        out += amp * np.sin(2.0 * math.pi * f * t + phase)
    if noise.white_sigma > 0:
        out += rng.normal(0.0, noise.white_sigma, n)
    return out


def inject_noise(series: TimeSeries, noise: NoiseSpec) -> TimeSeries:
    if not noise.tones and noise.white_sigma == 0:
        return series
    x = series.values() + noise_samples(len(series), series.sample_rate, noise)
    return TimeSeries(series.sample_period, x, series.t0)


def emulate(config: RigConfig):
    """Rows ``(t, voltage, temperature, true_clearance)``, one per sample."""
    truth = clearance_profile(config)
    temps = temperature_profile(config).values()
    d_true = truth.values()
    noise = noise_samples(len(d_true), config.sample_rate, config.noise)
    surface = config.surface
    rows = []
    for k, t in enumerate(truth.times()):
        if config.noise_channel == "clearance":
            v = sensor_voltage(surface, d_true[k] + noise[k], temps[k])
        else:
            v = sensor_voltage(surface, d_true[k], temps[k])
            v += noise[k] / clearance_slope(surface, v, temps[k])
        rows.append((float(t), float(v), float(temps[k]), float(d_true[k])))
    return rows


def write_dataset_csv(rows, path):
    with open(path, "w") as fh:
        fh.write(",".join(DATASET_HEADER) + "\n")
        for row in rows:
            fh.write(",".join(f"{x:.9g}" for x in row) + "\n")
