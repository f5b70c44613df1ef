"""Rebuild the reference filters and print coefficient-wise relative errors."""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from fixtures import (  # noqa: E402
    PRINTED_FIFTH_A,
    PRINTED_FIFTH_B,
    PRINTED_SEVENTH_A,
    PRINTED_SEVENTH_B,
    RIG_SPEC,
    SCALED_FIFTH_ORDER,
    SCALED_FIFTH_ORDER_PERIOD,
    SEVENTH_ORDER_CUTOFF,
    SEVENTH_ORDER_RATE,
)
from flangewear.iirdesign import (  # noqa: E402
    AnalogTF,
    FilterSpec,
    bilinear_transform,
    butterworth_prototype,
    design_lowpass,
    frequency_scale,
)
from flangewear.iirruntime import dc_gain, group_delay_dc, jury_stable  # noqa: E402


def compare(label, got, ref):
    err = np.abs(np.asarray(got) / np.asarray(ref) - 1)
    print(f"  {label}: max rel err {err.max():.2e}")
    for g, r in zip(got, ref):
        print(f"    {g:+.6e}  ref {r:+.6e}")


def main():
    print("fifth order, T = %.3f s" % SCALED_FIFTH_ORDER_PERIOD)
    f5 = bilinear_transform(AnalogTF((1.0,), SCALED_FIFTH_ORDER), 1 / SCALED_FIFTH_ORDER_PERIOD)
    compare("b", f5.b, PRINTED_FIFTH_B)
    compare("a", f5.a, PRINTED_FIFTH_A)

    print(f"seventh order, fs = {SEVENTH_ORDER_RATE} Hz, cutoff {SEVENTH_ORDER_CUTOFF} rad/s")
    f7 = bilinear_transform(frequency_scale(butterworth_prototype(7), SEVENTH_ORDER_CUTOFF), SEVENTH_ORDER_RATE)
    compare("b", f7.b, PRINTED_SEVENTH_B)
    compare("a", f7.a, PRINTED_SEVENTH_A)

    filt, rec = design_lowpass(FilterSpec(*RIG_SPEC))
    print(f"rig filter {RIG_SPEC}: order {rec.order}, stable {jury_stable(filt)}, "
          f"DC gain {dc_gain(filt):.12f}, DC group delay {group_delay_dc(filt):.3f} samples")


if __name__ == "__main__":
    main()
