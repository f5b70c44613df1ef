"""End-to-end staircase run: raw vs filtered accuracy and per-tone suppression."""

import argparse
import math

import numpy as np

from flangewear.iirdesign import FilterSpec, design_lowpass
from flangewear.iirruntime import run
from flangewear.pipeline import steady_state_accuracy
from flangewear.regress import predict_clearance
from flangewear.rig import emulate, staircase_config
from flangewear.timeseries import TimeSeries


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--settle", type=float, default=6.0)
    ap.add_argument("--fp", type=float, default=0.1)
    ap.add_argument("--fa", type=float, default=0.9)
    args = ap.parse_args()

    cfg = staircase_config(seed=args.seed)
    fs = cfg.sample_rate
    rows = emulate(cfg)
    filt, rec = design_lowpass(FilterSpec(fs, args.fp, args.fa, 0.1, 40.0))
    truth = np.array([r[3] for r in rows])
    raw = np.array([predict_clearance(cfg.surface, v, temp) for _, v, temp, _ in rows])
    filtered = run(filt, TimeSeries.from_rate(fs, raw)).values()

    for name, x in (("raw", raw), ("filtered", filtered)):
        rep = steady_state_accuracy(truth, x, fs, args.settle)
        print(f"{name:>8}: mean error {rep.mean_percent_error:.3f}%  accuracy {rep.mean_accuracy_percent:.3f}%")

    residual = filtered - run(filt, TimeSeries.from_rate(fs, truth)).values()
    t = np.arange(len(rows)) / fs
    keep = t >= 20.0
    print(f"order-{rec.order} filter, tone suppression on the steady-state residual:")
    for f, amp in cfg.noise.tones:
        basis = np.column_stack([np.sin(2 * np.pi * f * t[keep]), np.cos(2 * np.pi * f * t[keep])])
        coef, *_ = np.linalg.lstsq(basis, residual[keep], rcond=None)
        print(f"  {f:.2f} Hz: {20 * math.log10(amp / math.hypot(*coef)):.1f} dB")


if __name__ == "__main__":
    main()
