"""End-to-end uncertainty pipeline over classifier logits.

Per class: keep the correctly predicted training logits, fit a mixture
with a BIC-selected component count, estimate the density maximum, take
score quantiles and pin the logistic map.  Prediction then evaluates
u(x) = logistic(score(x)) under the argmax class's mixture.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Union

import numpy as np

from .calibration import (
    ClassCalibration,
    Hyperparams,
    empirical_quantile,
    fit_logistic,
    logistic,
    max_log_density_estimate,
    score,
)
from .errors import ClassNotFitted, DegenerateScores, NoFittableClass
from .gmm import FitConfig, GmmModel, _elbow_rule, _fit_bic_path, log_density

if TYPE_CHECKING:
    from .data_io import RecordSet

DEFAULT_C_MAX = 5
DEFAULT_ELBOW_TOL = 0.01


def default_min_samples_per_class(num_classes: int) -> int:
    """Full-covariance EM needs O(d^2) statistics per component; below this
    floor a fit is meaningless."""
    return max(50, 5 * num_classes)


@dataclass(frozen=True)
class FittedClass:
    gmm: GmmModel
    calibration: ClassCalibration


@dataclass(frozen=True)
class UnfittedClass:
    reason: str


ClassEntry = Union[FittedClass, UnfittedClass]


@dataclass(frozen=True)
class UncertaintyModel:
    """Per-class mixtures and calibrations plus the four hyperparameters."""

    num_classes: int
    hyperparams: Hyperparams
    per_class: tuple[ClassEntry, ...]

    def __post_init__(self):
        if len(self.per_class) != self.num_classes:
            raise ValueError(
                f"expected {self.num_classes} class entries, got {len(self.per_class)}"
            )
        object.__setattr__(self, "per_class", tuple(self.per_class))

    @property
    def fitted_classes(self) -> list[int]:
        return [i for i, e in enumerate(self.per_class) if isinstance(e, FittedClass)]


def _fit_one_class(X: np.ndarray, hp, fit_config, c_max, elbow_tol) -> FittedClass:
    if not 0.0 < elbow_tol < 1.0:
        raise ValueError("elbow_tol must lie in (0, 1)")
    # Same fits select_components would run; the chosen model is reused
    # directly since em_fit is deterministic.
    models, bics = _fit_bic_path(X, c_max, fit_config)
    gmm = models[_elbow_rule(bics, elbow_tol) - 1]
    ld = log_density(gmm, X)
    mld = max_log_density_estimate(gmm, X, candidate_log_densities=ld)
    scores = score(mld, ld)
    s_q1 = empirical_quantile(scores, hp.q1)
    s_q2 = empirical_quantile(scores, hp.q2)
    c1, c2 = fit_logistic(s_q1, s_q2, hp)
    cal = ClassCalibration(
        max_log_density=mld, s_q1=s_q1, s_q2=s_q2, c1=c1, c2=c2
    )
    return FittedClass(gmm=gmm, calibration=cal)


def fit_uncertainty_model(
    train: "RecordSet",
    hp: Hyperparams,
    fit_config: FitConfig,
    c_max: int = DEFAULT_C_MAX,
    elbow_tol: float = DEFAULT_ELBOW_TOL,
    min_samples_per_class: int | None = None,
) -> UncertaintyModel:
    """Fit every class with enough correctly predicted training logits.

    Classes below the sample floor, or whose scores degenerate, are marked
    unfitted with a reason instead of aborting the whole fit.
    """
    k = train.num_classes
    if min_samples_per_class is None:
        min_samples_per_class = default_min_samples_per_class(k)
    entries: list[ClassEntry] = []
    for i in range(k):
        rows = [
            r.logits
            for r in train.records
            if r.true_label == i and r.predicted_label == i
        ]
        if len(rows) == 0:
            entries.append(UnfittedClass("no correct predictions"))
            continue
        if len(rows) < min_samples_per_class:
            entries.append(
                UnfittedClass(
                    f"only {len(rows)} correctly predicted samples "
                    f"(need {min_samples_per_class})"
                )
            )
            continue
        X = np.stack(rows)
        try:
            entries.append(_fit_one_class(X, hp, fit_config, c_max, elbow_tol))
        except DegenerateScores as exc:
            entries.append(UnfittedClass(f"degenerate scores: {exc}"))
    if not any(isinstance(e, FittedClass) for e in entries):
        raise NoFittableClass("no class had enough usable training data")
    return UncertaintyModel(num_classes=k, hyperparams=hp, per_class=tuple(entries))


def _uncertainty_for_class(entry: FittedClass, X: np.ndarray) -> np.ndarray:
    cal = entry.calibration
    ld = log_density(entry.gmm, X)
    return logistic(cal.c1, cal.c2, score(cal.max_log_density, ld))


def predict(model: UncertaintyModel, logits) -> tuple[int, float]:
    """(argmax class, uncertainty in (0, 1)) for one logit vector.

    Ties in the argmax break toward the lowest index, matching load-time
    validation.
    """
    x = np.asarray(logits, dtype=float)
    if x.shape != (model.num_classes,):
        raise ValueError(f"expected a logit vector of length {model.num_classes}")
    if not np.all(np.isfinite(x)):
        raise ValueError("logits must be finite")
    i = int(np.argmax(x))
    entry = model.per_class[i]
    if isinstance(entry, UnfittedClass):
        raise ClassNotFitted(f"class {i} is unfitted: {entry.reason}", indices=[0])
    u = _uncertainty_for_class(entry, x[None, :])
    return i, float(u[0])


def batch_predict(model: UncertaintyModel, records: "RecordSet") -> np.ndarray:
    """Elementwise ``predict`` over a record set, order preserved.

    Records whose argmax class is unfitted are collected and reported
    together in one ``ClassNotFitted`` carrying their indices.
    """
    n = len(records.records)
    if n == 0:
        return np.empty(0)
    X = np.stack([r.logits for r in records.records])
    preds = np.argmax(X, axis=1)
    bad = [
        int(i)
        for i in range(n)
        if isinstance(model.per_class[preds[i]], UnfittedClass)
    ]
    if bad:
        raise ClassNotFitted(
            f"{len(bad)} records predicted into unfitted classes "
            f"(first indices: {bad[:10]})",
            indices=bad,
        )
    out = np.empty(n)
    for ci in set(preds.tolist()):
        mask = preds == ci
        out[mask] = _uncertainty_for_class(model.per_class[ci], X[mask])
    return out
