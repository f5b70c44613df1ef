"""Onboard wheel-flange wear measurement: regression, Butterworth IIR design, streaming filters."""

from .errors import DataError, FlangeWearError, NumericalError
from .iirdesign import (
    AnalogTF,
    DesignRecord,
    DiscreteFilter,
    FilterSpec,
    bilinear_transform,
    butterworth_cutoff,
    butterworth_min_order,
    butterworth_prototype,
    design_lowpass,
    digital_magnitude,
    frequency_scale,
    prewarp,
)
from .iirruntime import FilterState, dc_gain, init_state, jury_stable, run, step
from .pipeline import (
    AccuracyReport,
    Alarm,
    Monitor,
    WearReport,
    evaluate_accuracy,
    load_observations,
    run_monitor,
    wear_report,
)
from .regress import (
    FitMetrics,
    Observation,
    SurfaceModel,
    TrainingDatabase,
    append_and_refit,
    auto_fit,
    design_matrix,
    fit_surface,
    model_metrics,
    predict_clearance,
)
from .rig import NoiseSpec, RigConfig, emulate, inject_noise, sensor_voltage
from .spectral import Spectrum, cumulative_energy_fraction, extract_filter_spec, fft_magnitude
from .timeseries import TimeSeries

__version__ = "0.1.0"
