"""Self-updating polynomial surface d(V, T) = sum_ij a_ij V^i T^j.

Coefficients come from the normal equations (X^T X) a = X^T d, assembled in
raw monomials and solved by Gaussian elimination with partial pivoting.
The normal matrix is Jacobi-equilibrated before elimination and the solution
receives a few steps of iterative refinement; neither changes the coefficients
being estimated, they only limit round-off on the badly scaled monomials.

Raw monomials get ill-conditioned fast (V^4 T^4 reaches ~1e11 on rig data),
which is why both orders are capped at 4.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import (
    InsufficientData,
    InvalidObservation,
    OrderCapExceeded,
    SingularSystem,
    Underdetermined,
    ZeroVariance,
)

ORDER_CAP = 4
DEFAULT_THRESHOLD = 0.975
MIN_OBSERVATIONS = 8
TEMPERATURE_BAND = (-40.0, 200.0)
MODEL_FORMAT_VERSION = 1
# pivots below this (on the unit-diagonal equilibrated matrix) mean rank loss
PIVOT_TOL = 1e-12
REFINE_STEPS = 3


@dataclass(frozen=True)
class Observation:
    timestamp: float
    voltage: float
    temperature: float
    clearance: float | None = None

    def __post_init__(self):
        for name in ("timestamp", "voltage", "temperature"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise InvalidObservation(f"{name} must be finite, got {v!r}")
        if self.clearance is not None:
            if not math.isfinite(self.clearance) or self.clearance < 0:
                raise InvalidObservation(f"clearance must be finite and >= 0, got {self.clearance!r}")

    def check_temperature(self, band=TEMPERATURE_BAND):
        lo, hi = band
        if not lo <= self.temperature <= hi:
            raise InvalidObservation(
                f"temperature {self.temperature} degC outside plausibility band {band}")


class TrainingDatabase:
    """Append-only list of labelled observations with a version counter.

    Single writer: callers must serialize concurrent appends.
    """

    def __init__(self, observations=(), temperature_band=TEMPERATURE_BAND):
        self.temperature_band = temperature_band
        self._observations = []
        self.version = 0
        if observations:
            self.append(observations)

    @property
    def observations(self):
        return tuple(self._observations)

    def __len__(self):
        return len(self._observations)

    def append(self, new_obs):
        new_obs = list(new_obs)
        for ob in new_obs:
            if ob.clearance is None:
                raise InvalidObservation("training observations need a clearance label")
            ob.check_temperature(self.temperature_band)
        if new_obs:
            self._observations.extend(new_obs)
            self.version += 1
        return self.version


@dataclass(frozen=True)
class FitMetrics:
    r_squared: float
    adjusted_r_squared: float
    correlation_r: float
    residual_sum_squares: float


@dataclass(frozen=True)
class SurfaceModel:
    order_v: int
    order_t: int
    coefficients: tuple  # row-major over (i, j), i = voltage power
    metrics: FitMetrics | None = None
    db_version: int = 0
    below_threshold: bool = False
    # (v_min, v_max, t_min, t_max) of the fitting data, if known
    training_box: tuple | None = None
    trained_at: float = field(default_factory=time.time, compare=False)

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        if len(coeffs) != (self.order_v + 1) * (self.order_t + 1):
            raise ValueError(
                f"expected {(self.order_v + 1) * (self.order_t + 1)} coefficients, got {len(coeffs)}")
        if not all(math.isfinite(c) for c in coeffs):
            raise SingularSystem("non-finite regression coefficient")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def from_terms(cls, terms, order_v, order_t, **kw):
        """Build from a sparse ``{(i, j): a_ij}`` mapping."""
        grid = np.zeros((order_v + 1, order_t + 1))
        for (i, j), c in terms.items():
            grid[i, j] = c
        return cls(order_v, order_t, tuple(grid.ravel()), **kw)

    @property
    def n_params(self):
        return (self.order_v + 1) * (self.order_t + 1)

    def grid(self):
        return np.asarray(self.coefficients).reshape(self.order_v + 1, self.order_t + 1)

    def coefficient(self, i, j):
        if i > self.order_v or j > self.order_t:
            return 0.0
        return self.coefficients[i * (self.order_t + 1) + j]

    def to_json(self):
        d = {
            "format_version": MODEL_FORMAT_VERSION,
            "order_v": self.order_v,
            "order_t": self.order_t,
            "coefficients": list(self.coefficients),
            "metrics": asdict(self.metrics) if self.metrics else None,
            "db_version": self.db_version,
            "below_threshold": self.below_threshold,
            "training_box": list(self.training_box) if self.training_box else None,
            "trained_at": self.trained_at,
        }
        # json writes floats with repr, the shortest string that round-trips
        return json.dumps(d, indent=2)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        metrics = FitMetrics(**d["metrics"]) if d.get("metrics") else None
        box = tuple(d["training_box"]) if d.get("training_box") else None
        return cls(d["order_v"], d["order_t"], tuple(d["coefficients"]), metrics,
                   d.get("db_version", 0), d.get("below_threshold", False), box,
                   d.get("trained_at", 0.0))


def _columns(obs):
    v = np.array([o.voltage for o in obs], dtype=float)
    t = np.array([o.temperature for o in obs], dtype=float)
    return v, t


def _labels(obs):
    if any(o.clearance is None for o in obs):
        raise InvalidObservation("fitting needs labelled observations")
    return np.array([o.clearance for o in obs], dtype=float)


def monomials(v, t, m, n):
    v = np.asarray(v, dtype=float)
    t = np.asarray(t, dtype=float)
    return np.column_stack([v**i * t**j for i in range(m + 1) for j in range(n + 1)])


def design_matrix(obs, m, n):
    """Rows [V^i T^j for i in 0..m for j in 0..n], one per observation."""
    if not obs:
        raise Underdetermined("no observations")
    if m < 0 or n < 0:
        raise ValueError(f"orders must be non-negative, got ({m}, {n})")
    if (m + 1) * (n + 1) > len(obs):
        raise Underdetermined(
            f"{(m + 1) * (n + 1)} coefficients but only {len(obs)} observations")
    v, t = _columns(obs)
    return monomials(v, t, m, n)


def _eliminate(A, rhs):
    """Solve A x = rhs by Gaussian elimination with partial pivoting."""
    A = A.copy()
    x = rhs.copy()
    p = A.shape[0]
    for col in range(p):
        piv = col + int(np.argmax(np.abs(A[col:, col])))
        if abs(A[piv, col]) < PIVOT_TOL:
            raise SingularSystem(
                f"normal matrix is rank deficient (pivot {A[piv, col]:.3g} in column {col})")
        if piv != col:
            A[[col, piv]] = A[[piv, col]]
            x[[col, piv]] = x[[piv, col]]
        f = A[col + 1:, col] / A[col, col]
        A[col + 1:, col:] -= np.outer(f, A[col, col:])
        x[col + 1:] -= f * x[col]
    for row in range(p - 1, -1, -1):
        x[row] = (x[row] - A[row, row + 1:] @ x[row + 1:]) / A[row, row]
    return x


def solve_normal_equations(X, d):
    """Least-squares coefficients from (X^T X) a = X^T d."""
    G = X.T @ X
    h = X.T @ d
    diag = np.diag(G).copy()
    if np.any(diag <= 0):
        raise SingularSystem("design matrix has an all-zero column")
    s = 1.0 / np.sqrt(diag)
    Gs = G * np.outer(s, s)
    y = _eliminate(Gs, h * s)
    a = y * s
    for _ in range(REFINE_STEPS):
        r = d - X @ a
        a = a + s * _eliminate(Gs, (X.T @ r) * s)
    return a


def _metrics_from(d, pred, n_params):
    N = d.size
    resid = d - pred
    rss = float(resid @ resid)
    centered = d - d.mean()
    tss = float(centered @ centered)
    if tss == 0.0 or tss <= 1e-24 * max(1.0, float(d @ d)):
        raise ZeroVariance("response has zero variance; R^2 is undefined")
    r2 = 1.0 - rss / tss
    dof = N - n_params
    p = n_params - 1
    if dof > 0:
        adj = 1.0 - (1.0 - r2) * (N - 1) / (N - p - 1)
        corr = math.sqrt(max(adj, 0.0))
    else:
        adj, corr = float("nan"), 0.0
    return FitMetrics(r2, adj, corr, rss)


def predict_many(model: SurfaceModel, v, t):
    return monomials(v, t, model.order_v, model.order_t) @ np.asarray(model.coefficients)


def model_metrics(model: SurfaceModel, obs) -> FitMetrics:
    if not obs:
        raise InsufficientData("no observations to score")
    v, t = _columns(obs)
    d = _labels(obs)
    return _metrics_from(d, predict_many(model, v, t), model.n_params)


def fit_surface(obs, m, n, db_version=0) -> SurfaceModel:
    if m > ORDER_CAP or n > ORDER_CAP:
        raise OrderCapExceeded(f"orders ({m}, {n}) exceed cap {ORDER_CAP}")
    X = design_matrix(obs, m, n)
    d = _labels(obs)
    a = solve_normal_equations(X, d)
    try:
        metrics = _metrics_from(d, X @ a, X.shape[1])
    except ZeroVariance:
        metrics = None
    v, t = _columns(obs)
    box = (float(v.min()), float(v.max()), float(t.min()), float(t.max()))
    return SurfaceModel(m, n, tuple(a), metrics, db_version, False, box)


def candidate_orders(n_obs, cap=ORDER_CAP):
    """(m, n) pairs with m, n >= 1 by ascending parameter count, ties to larger m."""
    orders = [(m, n) for m in range(1, cap + 1) for n in range(1, cap + 1)
              if (m + 1) * (n + 1) <= n_obs / 2]
    return sorted(orders, key=lambda mn: ((mn[0] + 1) * (mn[1] + 1), -mn[0]))


def auto_fit(db: TrainingDatabase, threshold_r=DEFAULT_THRESHOLD) -> SurfaceModel:
    """Lowest-order surface whose correlation r reaches ``threshold_r``.

    When no admissible order passes, the best-scoring candidate is returned
    with ``below_threshold=True``.
    """
    obs = db.observations
    if len(obs) < MIN_OBSERVATIONS:
        raise InsufficientData(f"need at least {MIN_OBSERVATIONS} observations, have {len(obs)}")
    if np.ptp(_labels(obs)) == 0.0:
        raise ZeroVariance("all clearance labels are identical")
    best = None
    last_error = None
    for m, n in candidate_orders(len(obs)):
        try:
            model = fit_surface(obs, m, n, db.version)
        except SingularSystem as exc:
            last_error = exc
            continue
        if model.metrics.correlation_r >= threshold_r:
            return model
        if best is None or model.metrics.correlation_r > best.metrics.correlation_r:
            best = model
    if best is None:
        raise last_error or InsufficientData("no admissible regression order")
    return SurfaceModel(best.order_v, best.order_t, best.coefficients, best.metrics,
                        best.db_version, True, best.training_box)


def predict_clearance(model: SurfaceModel, voltage, temperature) -> float:
    total = 0.0
    for i in range(model.order_v + 1):
        vi = voltage**i
        for j in range(model.order_t + 1):
            total += model.coefficients[i * (model.order_t + 1) + j] * vi * temperature**j
    return total


def extrapolating(model: SurfaceModel, voltage, temperature, margin=0.10) -> bool:
    """True when (V, T) lies outside the training box widened by ``margin`` of its span."""
    if model.training_box is None:
        return False
    v0, v1, t0, t1 = model.training_box
    dv, dt = margin * (v1 - v0), margin * (t1 - t0)
    return not (v0 - dv <= voltage <= v1 + dv and t0 - dt <= temperature <= t1 + dt)


def append_and_refit(db: TrainingDatabase, new_obs, threshold_r=DEFAULT_THRESHOLD):
    db.append(new_obs)
    return db, auto_fit(db, threshold_r)


# Surfaces printed for the rig's inductive sensor, used as generators and as
# the emulator's default sensor physics.
LOW_TEMP_TERMS = {(0, 0): 1.373, (1, 0): 0.2082, (0, 1): -0.005041, (2, 0): 0.06928, (1, 1): 0.002771}
HIGH_TEMP_TERMS = {(0, 0): 1.16, (1, 0): 0.3672, (0, 1): -0.0036, (2, 0): 0.05812, (1, 1): 0.0006618}
LINEAR_TERMS = {(0, 0): -0.3407, (1, 0): 0.9617, (0, 1): 0.00595}


def low_temperature_surface():
    return SurfaceModel.from_terms(LOW_TEMP_TERMS, 2, 1)


def high_temperature_surface():
    return SurfaceModel.from_terms(HIGH_TEMP_TERMS, 2, 1)


def linear_surface():
    return SurfaceModel.from_terms(LINEAR_TERMS, 1, 1)
