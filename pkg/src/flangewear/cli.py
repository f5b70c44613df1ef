"""Command-line entry point: ``flangewear <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data/parse error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import iirdesign, iirruntime, pipeline, regress, rig, spectral
from .errors import DataError, NumericalError

log = logging.getLogger("flangewear")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path):
    with open(path) as fh:
        return fh.read()


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text if text.endswith("\n") else text + "\n")


def cmd_train(args):
    obs = pipeline.load_observations(args.db)
    db = regress.TrainingDatabase(obs)
    model = regress.auto_fit(db, args.threshold)
    _write(args.out, model.to_json())
    m = model.metrics
    flag = " (below threshold)" if model.below_threshold else ""
    print(f"order (m, n) = ({model.order_v}, {model.order_t}); r = {m.correlation_r:.6f}, "
          f"R^2 = {m.r_squared:.6f}, adjusted R^2 = {m.adjusted_r_squared:.6f}{flag}")


def cmd_predict(args):
    model = regress.SurfaceModel.from_json(_read(args.model))
    d = regress.predict_clearance(model, args.voltage, args.temperature)
    print(f"{d:.9g}")
    if regress.extrapolating(model, args.voltage, args.temperature):
        print("warning: input outside the training range; extrapolated", file=sys.stderr)


def cmd_design(args):
    spec = iirdesign.FilterSpec(args.fs, args.fp, args.fa, args.ap, args.aa)
    filt, rec = iirdesign.design_lowpass(spec)
    print(f"order N = {rec.order}; Omega_p = {rec.omega_p_warped:.6g} rad/s, "
          f"Omega_a = {rec.omega_a_warped:.6g} rad/s, Omega_c = {rec.omega_c_warped:.6g} rad/s")
    print(iirdesign.format_transfer_function(filt))
    print(iirdesign.format_difference_equation(filt))
    if args.out:
        _write(args.out, iirdesign.filter_to_json(filt))


def cmd_filter(args):
    filt = iirdesign.filter_from_json(_read(args.filter))
    series, _ = pipeline.load_series(args.input, args.column)
    out = iirruntime.run(filt, series, args.mode)
    with open(args.out, "w") as fh:
        fh.write("t,raw,filtered\n")
        for t, x, y in zip(series.times(), series.samples, out.samples):
            fh.write(f"{t:.9g},{x:.9g},{y:.9g}\n")


def cmd_emulate(args):
    cfg = rig.RigConfig.from_dict(json.loads(_read(args.config)))
    rig.write_dataset_csv(rig.emulate(cfg), args.out)


def cmd_evaluate(args):
    truth, _ = pipeline.load_series(args.truth, "clearance_mm")
    measured, col = pipeline.load_series(args.measured, args.column)
    report = pipeline.steady_state_accuracy(truth.values(), measured.values(),
                                            truth.sample_rate, args.settle)
    print(f"rows evaluated: {len(report.rows)} (column {col!r})")
    print(f"mean percent error: {report.mean_percent_error:.6g} %")
    print(f"mean accuracy: {report.mean_accuracy_percent:.6g} %")


def cmd_wear(args):
    series, _ = pipeline.load_series(args.input, args.column)
    rep = pipeline.wear_report(series, args.si, args.limit, args.window)
    print(json.dumps(rep.as_dict(), indent=2))


def cmd_spectrum(args):
    series, _ = pipeline.load_series(args.input, args.column)
    spec = spectral.fft_magnitude(series, args.window)
    spectral.write_spectrum_csv(spec, args.out)


def cmd_monitor(args):
    filt = iirdesign.filter_from_json(_read(args.filter))
    watcher = pipeline.CsvDatabaseWatcher(args.db)
    model = regress.SurfaceModel.from_json(_read(args.model)) if args.model else None
    mon = pipeline.Monitor(filt, model=model, db=None if model else watcher.db,
                           threshold_r=args.threshold, s_i=args.si, wear_limit=args.limit)
    stream = pipeline.load_observations(args.input)
    with open(args.out, "w") as fh:
        fh.write("t,raw,filtered,wear_depth_mm,wear_rate_mm_per_h,alarm,model_version\n")
        for ob in stream:
            if model is None:
                watcher.poll()
            row = mon.push(ob.timestamp, ob.voltage, ob.temperature)
            r = row.report
            fh.write(f"{row.t:.9g},{row.raw_estimate:.9g},{row.filtered_estimate:.9g},"
                     f"{r.wear_depth:.9g},{r.wear_rate:.9g},{r.alarm.name},{row.model_version}\n")
    if mon.reloads:
        log.info("model reloaded %d time(s)", mon.reloads)


def build_parser():
    p = _Parser(prog="flangewear", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("train", help="fit the clearance surface from a training CSV")
    s.add_argument("--db", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--threshold", type=float, default=regress.DEFAULT_THRESHOLD)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("predict", help="evaluate a trained surface")
    s.add_argument("--model", required=True)
    s.add_argument("--voltage", type=float, required=True)
    s.add_argument("--temperature", type=float, required=True)
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("design", help="design a Butterworth low-pass filter")
    s.add_argument("--fs", type=float, required=True, help="sample rate, Hz")
    s.add_argument("--fp", type=float, required=True, help="passband edge, Hz")
    s.add_argument("--fa", type=float, required=True, help="stopband edge, Hz")
    s.add_argument("--ap", type=float, default=0.1, help="max passband loss, dB")
    s.add_argument("--aa", type=float, default=40.0, help="min stopband loss, dB")
    s.add_argument("--out")
    s.set_defaults(func=cmd_design)

    s = sub.add_parser("filter", help="run a filter over a CSV time series")
    s.add_argument("--filter", required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--column")
    s.add_argument("--mode", choices=iirruntime.INIT_MODES, default="zero")
    s.set_defaults(func=cmd_filter)

    s = sub.add_parser("emulate", help="generate a synthetic rig dataset")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_emulate)

    s = sub.add_parser("evaluate", help="percent-error accuracy against true clearances")
    s.add_argument("--truth", required=True)
    s.add_argument("--measured", required=True)
    s.add_argument("--column")
    s.add_argument("--settle", type=float, default=0.0,
                   help="only score samples this many seconds into each plateau")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("wear", help="wear depth, rate and alarm from a clearance series")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--si", type=float, default=pipeline.DEFAULT_INITIAL_CLEARANCE)
    s.add_argument("--limit", type=float, default=pipeline.DEFAULT_WEAR_LIMIT)
    s.add_argument("--window", type=int, default=pipeline.DEFAULT_WEAR_WINDOW)
    s.add_argument("--column")
    s.set_defaults(func=cmd_wear)

    s = sub.add_parser("spectrum", help="single-sided amplitude spectrum of a series")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--column")
    s.add_argument("--window", choices=spectral.WINDOWS, default="rectangular")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("monitor", help="stream predictions through filter and wear report")
    s.add_argument("--db", required=True)
    s.add_argument("--filter", required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--model", help="use this model instead of fitting the database")
    s.add_argument("--threshold", type=float, default=regress.DEFAULT_THRESHOLD)
    s.add_argument("--si", type=float, default=pipeline.DEFAULT_INITIAL_CLEARANCE)
    s.add_argument("--limit", type=float, default=pipeline.DEFAULT_WEAR_LIMIT)
    s.set_defaults(func=cmd_monitor)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    np.seterr(all="ignore")
    try:
        args.func(args)
    except (DataError, ValueError, OSError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
