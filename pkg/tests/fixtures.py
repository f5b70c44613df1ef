"""Printed reference values used as test fixtures (ascending powers throughout)."""

FIFTH_ORDER_PROTOTYPE = [1, 3.236, 5.236, 5.236, 3.236, 1]
SEVENTH_ORDER_PROTOTYPE = [1, 4.494, 10.0978, 14.5918, 14.5918, 10.0978, 4.494, 1]

# fifth-order prototype after s -> s / omega_c
SCALED_FIFTH_ORDER = [1, 0.8683, 0.377, 0.1011, 0.0168, 0.0014]
SCALED_FIFTH_ORDER_PERIOD = 0.167

# digital fifth-order filter printed for the 6 Hz rig
PRINTED_FIFTH_B = [0.001076, 0.005379, 0.01076, 0.01076, 0.005379, 0.001076]
PRINTED_FIFTH_A = [1, -3.06, 3.997, -2.721, 0.9566, -0.138]

# digital seventh-order filter printed for the 100 Hz vehicle-dynamics channel
PRINTED_SEVENTH_B = [2.273e-15, 1.591e-14, 4.773e-14, 7.955e-14,
                     7.955e-14, 4.773e-14, 1.591e-14, 2.273e-15]
PRINTED_SEVENTH_A = [1, -6.927, 20.56, -33.92, 33.56, -19.93, 6.574, -0.9295]
SEVENTH_ORDER_CUTOFF = 1.626
SEVENTH_ORDER_RATE = 100.0

# staircase accuracy run: (clearance mm, relative error, printed percent error)
STAIRCASE_ACCURACY_ROWS = [
    (1, 0.02595, "2.595"),
    (2, 0.020736, "2.0736"),
    (3, 0.024471, "2.4471"),
    (4, 0.078376, "7.8376"),
    (5, 0.081988, "8.1988"),
    (6, 0.056695, "5.6695"),
    (7, 0.01452, "1.452"),
    (8, 0.02922, "2.922"),
    (9, 0.027095, "2.7095"),
    (10, 0.0226914, "2.26914"),
]
STAIRCASE_MEAN_ACCURACY = 96.1826

# rig design inputs
RIG_SPEC = (6.0, 0.1, 0.9, 0.1, 40.0)
PRINTED_OMEGA_P = 1.328
PRINTED_OMEGA_A = 6.1287
