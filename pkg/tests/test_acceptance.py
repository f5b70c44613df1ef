"""Acceptance suite: one marked group per criterion, summarised as PASS/FAIL lines."""

import math

import numpy as np
import pytest

from flangewear.iirdesign import (
    AnalogTF,
    DiscreteFilter,
    FilterSpec,
    bilinear_transform,
    butterworth_min_order,
    butterworth_prototype,
    design_lowpass,
    frequency_scale,
)
from flangewear.iirruntime import dc_gain, jury_stable, run, stream
from flangewear.pipeline import Alarm, evaluate_accuracy, steady_state_accuracy, wear_report
from flangewear.regress import (
    LOW_TEMP_TERMS,
    Observation,
    TrainingDatabase,
    auto_fit,
    design_matrix,
    fit_surface,
    low_temperature_surface,
    predict_clearance,
    predict_many,
)
from flangewear.rig import emulate, staircase_config
from flangewear.spectral import fft_magnitude
from flangewear.timeseries import TimeSeries

from fixtures import (
    FIFTH_ORDER_PROTOTYPE,
    PRINTED_FIFTH_A,
    PRINTED_FIFTH_B,
    PRINTED_OMEGA_A,
    PRINTED_OMEGA_P,
    PRINTED_SEVENTH_A,
    PRINTED_SEVENTH_B,
    RIG_SPEC,
    SCALED_FIFTH_ORDER,
    SCALED_FIFTH_ORDER_PERIOD,
    SEVENTH_ORDER_CUTOFF,
    SEVENTH_ORDER_PROTOTYPE,
    SEVENTH_ORDER_RATE,
    STAIRCASE_ACCURACY_ROWS,
    STAIRCASE_MEAN_ACCURACY,
)


def criterion(number, title):
    return pytest.mark.criterion(number, title)


def low_temperature_sample(n, seed, sigma):
    rng = np.random.default_rng(seed)
    v, t = rng.uniform(0, 10, n), rng.uniform(20, 75, n)
    d = predict_many(low_temperature_surface(), v, t)
    if sigma:
        d = d + rng.normal(0, sigma, n)
    return [Observation(float(k), float(a), float(b), float(c)) for k, (a, b, c) in enumerate(zip(v, t, d))]


def impulse_oracle(b, a, n):
    h = np.zeros(n)
    b = list(b) + [0.0] * n
    for k in range(n):
        h[k] = b[k] - sum(a[i] * h[k - i] for i in range(1, min(k, len(a) - 1) + 1))
    return h


# A spread of specs over rate, band edges and attenuation; the designable ones
# exercise the runtime checks.
SPEC_GRID = [FilterSpec(fs, fp * fs / 2, fa * fs / 2, ap, aa)
             for fs in (6.0, 100.0, 1000.0)
             for fp, fa in ((0.05, 0.3), (0.1, 0.3), (0.2, 0.5), (0.3, 0.9), (0.4, 0.6))
             for ap, aa in ((0.1, 40.0), (1.0, 20.0), (3.0, 60.0))]


def designed_filters():
    out = []
    for spec in SPEC_GRID:
        try:
            out.append(design_lowpass(spec)[0])
        except ArithmeticError:
            continue
    return out


# -- 1 -------------------------------------------------------------------------

@criterion(1, "Butterworth prototypes N = 5, 7 match printed denominators within 1e-3")
@pytest.mark.parametrize("order, printed", [(5, FIFTH_ORDER_PROTOTYPE), (7, SEVENTH_ORDER_PROTOTYPE)])
def test_prototype_fixtures(order, printed):
    den = butterworth_prototype(order).denominator
    assert len(den) == len(printed)
    assert np.max(np.abs(np.array(den) - printed)) <= 1e-3


# -- 2 -------------------------------------------------------------------------

@criterion(2, "minimum order is 5 for the printed warped edges at Ap = 0.1 and 0.17 dB")
@pytest.mark.parametrize("ap", [0.1, 0.17])
def test_min_order_fixture(ap):
    assert butterworth_min_order(PRINTED_OMEGA_P, PRINTED_OMEGA_A, ap, 40.0) == 5


# -- 3 -------------------------------------------------------------------------

@criterion(3, "bilinear transform of the printed scaled fifth-order filter within 1% per coefficient")
def test_bilinear_fifth_order_fixture():
    f = bilinear_transform(AnalogTF((1.0,), SCALED_FIFTH_ORDER), 1.0 / SCALED_FIFTH_ORDER_PERIOD)
    assert np.all(np.abs(np.array(f.b) / PRINTED_FIFTH_B - 1) <= 0.01)
    assert np.all(np.abs(np.array(f.a) / PRINTED_FIFTH_A - 1) <= 0.01)


# -- 4 -------------------------------------------------------------------------

@criterion(4, "seventh-order 100 Hz filter: denominator within 1%, numerator within 5%")
def test_seventh_order_reproduction():
    tf = frequency_scale(butterworth_prototype(7), SEVENTH_ORDER_CUTOFF)
    f = bilinear_transform(tf, SEVENTH_ORDER_RATE)
    assert np.all(np.abs(np.array(f.a) / PRINTED_SEVENTH_A - 1) <= 0.01)
    assert np.all(np.abs(np.array(f.b) / PRINTED_SEVENTH_B - 1) <= 0.05)


# -- 5 -------------------------------------------------------------------------

@criterion(5, "digital magnitude equals warped analog magnitude within 1e-9, orders 1-9")
@pytest.mark.parametrize("order", range(1, 10))
@pytest.mark.parametrize("cutoff_frac", [0.1, 0.2, 0.3, 0.5])
def test_bilinear_magnitude_preservation(order, cutoff_frac):
    fs = 100.0
    omega_c = 2 * fs * math.tan(math.pi * cutoff_frac / 2)
    tf = frequency_scale(butterworth_prototype(order), omega_c)
    filt = bilinear_transform(tf, fs)
    f = np.linspace(0.0, 0.8 * fs / 2, 100)
    hd = np.abs(filt.response(f))
    ha = np.abs(tf.response(2 * fs * np.tan(np.pi * f / fs)))
    assert np.max(np.abs(hd / ha - 1)) <= 1e-9


# -- 6 -------------------------------------------------------------------------

@criterion(6, "surface regression: exact recovery; noisy auto_fit selects (2, 1) with r >= 0.975")
def test_noiseless_surface_recovery():
    model = fit_surface(low_temperature_sample(200, 0, 0.0), 2, 1)
    for (i, j), c in LOW_TEMP_TERMS.items():
        assert abs(model.coefficient(i, j) - c) <= 1e-6


@criterion(6, "surface regression: exact recovery; noisy auto_fit selects (2, 1) with r >= 0.975")
def test_noisy_auto_fit_selects_second_order():
    hits, picked = 0, {}
    for seed in range(100):
        model = auto_fit(TrainingDatabase(low_temperature_sample(200, 1000 + seed, 0.05)))
        key = (model.order_v, model.order_t)
        picked[key] = picked.get(key, 0) + 1
        if key == (2, 1) and model.metrics.correlation_r >= 0.975:
            hits += 1
    assert hits >= 95, f"(2, 1) chosen with r >= 0.975 in {hits}/100 trials; orders picked: {picked}"


# -- 7 -------------------------------------------------------------------------

@criterion(7, "normal equations: residual orthogonality and nested R^2 monotonicity on 50 fits")
def test_normal_equation_properties():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(30, 200))
        v, t = rng.uniform(0, 10, n), rng.uniform(20, 75, n)
        coeffs = rng.normal(0, 1, (3, 2)) * [[1, 0.01], [0.3, 0.003], [0.05, 0.0005]]
        d = sum(coeffs[i, j] * v**i * t**j for i in range(3) for j in range(2))
        d = np.abs(d + rng.normal(0, rng.uniform(0.01, 1.0), n)) + 0.1
        obs = [Observation(float(k), float(a), float(b), float(c)) for k, (a, b, c) in enumerate(zip(v, t, d))]
        m, nn = int(rng.integers(0, 3)), int(rng.integers(0, 3))
        model = fit_surface(obs, m, nn)
        X = design_matrix(obs, m, nn)
        r = d - X @ np.array(model.coefficients)
        assert np.linalg.norm(X.T @ r) <= 1e-8 * np.linalg.norm(d)
        r2 = {(i, j): fit_surface(obs, i, j).metrics.r_squared for i in range(3) for j in range(3)}
        for (i, j), a in r2.items():
            for (k, l), b in r2.items():
                if k >= i and l >= j:
                    assert b >= a - 1e-12


# -- 8 -------------------------------------------------------------------------

@criterion(8, "staircase accuracy rows reproduce printed percent errors; mean accuracy 96.18 +- 0.01")
def test_staircase_accuracy_fixture():
    report = evaluate_accuracy([(d, d * (1 + e)) for d, e, _ in STAIRCASE_ACCURACY_ROWS])
    for row, (_, _, printed) in zip(report.rows, STAIRCASE_ACCURACY_ROWS):
        decimals = len(printed.split(".")[1])
        assert f"{row.percent_error:.{decimals}f}" == printed
    assert abs(report.mean_accuracy_percent - STAIRCASE_MEAN_ACCURACY) <= 0.01


# -- 9 -------------------------------------------------------------------------

@criterion(9, "filtering cuts steady-state error >= 20% and suppresses each tone >= 40 dB")
def test_end_to_end_noise_reduction():
    cfg = staircase_config(seed=0)
    rows = emulate(cfg)
    fs = cfg.sample_rate
    filt, _ = design_lowpass(FilterSpec(*RIG_SPEC))
    truth = np.array([r[3] for r in rows])
    raw = np.array([predict_clearance(cfg.surface, v, temp) for _, v, temp, _ in rows])
    filtered = run(filt, TimeSeries.from_rate(fs, raw)).values()

    settle = 6.0
    e_raw = steady_state_accuracy(truth, raw, fs, settle).mean_percent_error
    e_filt = steady_state_accuracy(truth, filtered, fs, settle).mean_percent_error
    assert e_filt <= 0.8 * e_raw, f"raw {e_raw:.3f}% vs filtered {e_filt:.3f}%"

    # filtering is linear, so filtered(raw) - filtered(truth) is the filtered noise
    residual = filtered - run(filt, TimeSeries.from_rate(fs, truth)).values()
    t = np.arange(len(rows)) / fs
    keep = t >= 20.0
    for f, amp in cfg.noise.tones:
        basis = np.column_stack([np.sin(2 * np.pi * f * t[keep]), np.cos(2 * np.pi * f * t[keep])])
        coef, *_ = np.linalg.lstsq(basis, residual[keep], rcond=None)
        suppression = 20 * math.log10(amp / math.hypot(*coef))
        assert suppression >= 40.0, f"{f} Hz tone suppressed by {suppression:.1f} dB"


# -- 10 ------------------------------------------------------------------------

@criterion(10, "designed filters are stable with unit DC gain; streaming matches oracles")
def test_designed_filters_stable_unit_gain():
    filters = designed_filters()
    assert len(filters) >= 30
    for filt in filters:
        assert jury_stable(filt)
        assert abs(dc_gain(filt) - 1.0) <= 1e-6


@criterion(10, "designed filters are stable with unit DC gain; streaming matches oracles")
@pytest.mark.parametrize("which", ["printed", "designed"])
def test_impulse_response_oracle(which):
    filt = (DiscreteFilter(PRINTED_FIFTH_B, PRINTED_FIFTH_A, 1 / 6) if which == "printed"
            else design_lowpass(FilterSpec(*RIG_SPEC))[0])
    x = np.zeros(200)
    x[0] = 1.0
    y = np.array(list(stream(filt, x)))
    assert np.max(np.abs(y - impulse_oracle(filt.b, filt.a, 200))) <= 1e-9


@criterion(10, "designed filters are stable with unit DC gain; streaming matches oracles")
def test_linearity_and_time_invariance():
    rng = np.random.default_rng(10)
    for filt in designed_filters()[::5]:
        x, z = rng.normal(size=150), rng.normal(size=150)
        alpha, beta = rng.normal(size=2)
        y = lambda s: np.array(list(stream(filt, s)))  # noqa: E731
        assert np.max(np.abs(y(alpha * x + beta * z) - (alpha * y(x) + beta * y(z)))) <= 1e-9
        k = int(rng.integers(1, 40))
        delayed = y(np.concatenate([np.zeros(k), x]))
        assert np.array_equal(delayed[:k], np.zeros(k))
        assert np.array_equal(delayed[k:], y(x))


# -- 11 ------------------------------------------------------------------------

@criterion(11, "wear 10.5 - 1.5 = 9.0 mm is CRITICAL; alarm monotone over 1000 rising sequences")
def test_wear_limit():
    rep = wear_report(TimeSeries(1.0, [10.5]), s_i=1.5)
    assert rep.wear_depth == 9.0
    assert rep.alarm is Alarm.CRITICAL


@criterion(11, "wear 10.5 - 1.5 = 9.0 mm is CRITICAL; alarm monotone over 1000 rising sequences")
def test_alarm_monotonicity():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        readings = np.cumsum(rng.exponential(rng.uniform(0.05, 1.0), int(rng.integers(2, 40))))
        readings += rng.uniform(0.0, 3.0)
        s_i = rng.uniform(0.0, 3.0)
        levels = [wear_report(TimeSeries(1.0, readings[: k + 1]), s_i=s_i).alarm
                  for k in range(len(readings))]
        assert all(b >= a for a, b in zip(levels, levels[1:]))


# -- 12 ------------------------------------------------------------------------

@criterion(12, "Parseval within 1e-9 for lengths 8-1024; 1.5 Hz unit tone reads 1.0 +- 0.05")
@pytest.mark.parametrize("n", [2**k for k in range(3, 11)])
def test_parseval(n):
    x = np.random.default_rng(n).normal(size=n)
    spec = fft_magnitude(TimeSeries(1 / 6, x))
    assert abs(spec.energy() / np.sum(x**2) - 1) <= 1e-9


@criterion(12, "Parseval within 1e-9 for lengths 8-1024; 1.5 Hz unit tone reads 1.0 +- 0.05")
def test_unit_tone():
    t = np.arange(64) / 6.0
    spec = fft_magnitude(TimeSeries(1 / 6, np.sin(2 * np.pi * 1.5 * t)))
    k = int(np.argmax(spec.magnitudes))
    assert k == round(1.5 / spec.bin_width)
    assert abs(spec.magnitudes[k] - 1.0) <= 0.05
