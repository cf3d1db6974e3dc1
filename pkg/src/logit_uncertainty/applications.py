"""Two downstream uses of the uncertainty values: expert-deferral cost
analysis and Gaussian-KL context-drift monitoring.

Deferral keeps a prediction when u <= t and sends it to a (perfect) expert
otherwise, so the total cost at error cost c is  deferred + c * kept_errors
and is linear in c; comparing two methods therefore yields an interval of
c where one is strictly cheaper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data_io import _atomic_write_text
from .errors import EmptyInput, LengthMismatch

SIGMA_FLOOR = 1e-6


@dataclass(frozen=True)
class CostCurve:
    """Deferral outcome at one threshold: u > t deferred, errors kept at u <= t."""

    threshold: float
    deferred: int
    kept_errors: int


@dataclass(frozen=True)
class CostBound:
    """Interval of error costs c where method A beats method B.

    ``c_high`` is ``inf`` when unbounded; an empty interval carries the
    sentinel c_low > c_high with ``empty`` set.
    """

    c_low: float
    c_high: float
    empty: bool = False


_EMPTY_BOUND = CostBound(c_low=1.0, c_high=0.0, empty=True)


def _paired(uncertainties, correct):
    u = np.asarray(uncertainties, dtype=float).ravel()
    ok = np.asarray(correct, dtype=bool).ravel()
    if u.shape[0] != ok.shape[0]:
        raise LengthMismatch(
            f"{u.shape[0]} uncertainties but {ok.shape[0]} correctness flags"
        )
    return u, ok


def cost_curve(uncertainties, correct, t: float) -> CostCurve:
    u, ok = _paired(uncertainties, correct)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"threshold {t} outside [0, 1]")
    deferred = int(np.count_nonzero(u > t))
    kept_errors = int(np.count_nonzero((u <= t) & ~ok))
    return CostCurve(threshold=t, deferred=deferred, kept_errors=kept_errors)


def deferral_cost(uncertainties, correct, t: float, c: float) -> float:
    """deferred(t) + c * kept_errors(t); experts are assumed perfect."""
    if c < 0.0:
        raise ValueError("error cost must be nonnegative")
    curve = cost_curve(uncertainties, correct, t)
    return float(curve.deferred + c * curve.kept_errors)


def cost_bound_range(curve_a: CostCurve, curve_b: CostCurve) -> CostBound:
    """Solve D_a + c E_a < D_b + c E_b for c >= 0."""
    if curve_a.threshold != curve_b.threshold:
        raise ValueError("cost curves must share a threshold")
    da, ea = curve_a.deferred, curve_a.kept_errors
    db, eb = curve_b.deferred, curve_b.kept_errors
    if ea < eb:
        return CostBound(c_low=max(0.0, (da - db) / (eb - ea)), c_high=math.inf)
    if ea > eb:
        bound = (db - da) / (ea - eb)
        if bound > 0.0:
            return CostBound(c_low=0.0, c_high=bound)
        return _EMPTY_BOUND
    return CostBound(c_low=0.0, c_high=math.inf) if da < db else _EMPTY_BOUND


@dataclass(frozen=True)
class SweepRow:
    threshold: float
    deferred_a: int
    kept_errors_a: int
    deferred_b: int
    kept_errors_b: int
    bound: CostBound


def cost_bound_sweep(
    uncertainties_a,
    correct_a,
    uncertainties_b,
    correct_b,
    thresholds,
    out_path=None,
) -> list[SweepRow]:
    """Cost-bound interval of method A versus B at every threshold."""
    thresholds = list(thresholds)
    if not thresholds:
        raise EmptyInput("need at least one threshold")
    rows = []
    for t in thresholds:
        a = cost_curve(uncertainties_a, correct_a, t)
        b = cost_curve(uncertainties_b, correct_b, t)
        rows.append(
            SweepRow(
                threshold=t,
                deferred_a=a.deferred,
                kept_errors_a=a.kept_errors,
                deferred_b=b.deferred,
                kept_errors_b=b.kept_errors,
                bound=cost_bound_range(a, b),
            )
        )
    if out_path is not None:
        write_cost_bound_csv(rows, out_path)
    return rows


def write_cost_bound_csv(rows, path) -> None:
    lines = ["threshold,d_a,e_a,d_b,e_b,c_low,c_high,empty"]
    for r in rows:
        lines.append(
            f"{r.threshold:.12g},{r.deferred_a},{r.kept_errors_a},"
            f"{r.deferred_b},{r.kept_errors_b},{r.bound.c_low:.12g},"
            f"{r.bound.c_high:.12g},{'true' if r.bound.empty else 'false'}"
        )
    _atomic_write_text(path, "\n".join(lines) + "\n")


# --- drift -------------------------------------------------------------------


@dataclass(frozen=True)
class Gaussian1D:
    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma >= SIGMA_FLOOR:
            raise ValueError(f"sigma must be at least {SIGMA_FLOOR}")


def fit_gaussian_1d(values) -> Gaussian1D:
    """Moment fit: sample mean and biased standard deviation, floored."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise EmptyInput("cannot fit a Gaussian to an empty sample")
    mu = float(np.mean(v))
    sigma = float(np.sqrt(np.mean((v - mu) ** 2)))
    return Gaussian1D(mu=mu, sigma=max(sigma, SIGMA_FLOOR))


def kl_gaussian(p: Gaussian1D, q: Gaussian1D) -> float:
    """KL(p || q) = ln(sq/sp) + (sp^2 + (mp - mq)^2) / (2 sq^2) - 1/2."""
    return (
        math.log(q.sigma / p.sigma)
        + (p.sigma**2 + (p.mu - q.mu) ** 2) / (2.0 * q.sigma**2)
        - 0.5
    )


def drift_kl(reference_uncertainties, stream_uncertainties) -> float:
    """KL(stream || reference) between Gaussian fits of uncertainty values.

    The stream sits in the first KL slot so that mass in regions the
    reference considers unlikely is what raises the alarm.
    """
    reference = np.asarray(reference_uncertainties, dtype=float).ravel()
    stream = np.asarray(stream_uncertainties, dtype=float).ravel()
    if reference.size == 0 or stream.size == 0:
        raise EmptyInput("drift_kl needs nonempty uncertainty vectors")
    return kl_gaussian(fit_gaussian_1d(stream), fit_gaussian_1d(reference))


def drift_sweep(
    reference_uncertainties,
    contaminant_uncertainties,
    fractions,
    n_stream: int,
    seed,
    out_path=None,
) -> list[tuple[float, float]]:
    """Drift distance of synthetic streams mixing the two pools.

    For each fraction p the stream takes round(p * n_stream) values from
    the contaminant pool and the rest from the reference pool (shuffled
    without replacement), then measures KL against the full reference.
    """
    reference = np.asarray(reference_uncertainties, dtype=float).ravel()
    contaminant = np.asarray(contaminant_uncertainties, dtype=float).ravel()
    fractions = list(fractions)
    if not fractions:
        raise EmptyInput("need at least one mixing fraction")
    if n_stream < 1:
        raise ValueError("n_stream must be positive")
    if n_stream > reference.size or n_stream > contaminant.size:
        raise ValueError("pools must each hold at least n_stream values")
    rng = np.random.default_rng(seed)
    rows = []
    for p in fractions:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"fraction {p} outside [0, 1]")
        n_bad = int(round(p * n_stream))
        take_ref = rng.permutation(reference.size)[: n_stream - n_bad]
        take_bad = rng.permutation(contaminant.size)[:n_bad]
        stream = np.concatenate([reference[take_ref], contaminant[take_bad]])
        rows.append((float(p), drift_kl(reference, stream)))
    if out_path is not None:
        write_drift_csv(rows, out_path)
    return rows


def write_drift_csv(rows, path) -> None:
    lines = ["fraction,kl"]
    for fraction, kl in rows:
        lines.append(f"{fraction:.12g},{kl:.12g}")
    _atomic_write_text(path, "\n".join(lines) + "\n")
