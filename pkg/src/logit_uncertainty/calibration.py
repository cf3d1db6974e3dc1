"""Score function and quantile-anchored logistic calibration.

The score of a point is the log-density gap to the (approximate) mixture
maximum; the logistic map is pinned so that the q1/q2 score quantiles land
exactly on the target uncertainties u1/u2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import (
    DegenerateHyperparams,
    DegenerateScores,
    EmptyCandidateSet,
    EmptyInput,
)
from .gmm import GmmModel, log_density


@dataclass(frozen=True)
class Hyperparams:
    """Target uncertainties (u1, u2) and score-quantile fractions (q1, q2)."""

    u1: float = 0.5
    u2: float = 0.2
    q1: float = 0.8
    q2: float = 0.6

    def __post_init__(self):
        if not (0.0 < self.u2 < self.u1 < 1.0):
            raise DegenerateHyperparams(
                f"need 0 < u2 < u1 < 1, got u1={self.u1}, u2={self.u2}"
            )
        if not (0.0 < self.q2 < self.q1 < 1.0):
            raise DegenerateHyperparams(
                f"need 0 < q2 < q1 < 1, got q1={self.q1}, q2={self.q2}"
            )


@dataclass(frozen=True)
class ClassCalibration:
    """Fitted per-class constants: density maximum, score quantiles, logistic."""

    max_log_density: float
    s_q1: float
    s_q2: float
    c1: float
    c2: float

    def __post_init__(self):
        if not self.s_q2 < self.s_q1:
            raise DegenerateScores(
                f"score quantiles must satisfy s_q2 < s_q1, got {self.s_q2} >= {self.s_q1}"
            )
        if not self.c1 > 0.0:
            raise ValueError("logistic slope c1 must be positive")


def max_log_density_estimate(
    model: GmmModel, candidates, candidate_log_densities=None
) -> float:
    """Estimate ln(max_t density(t)) over component means plus candidates.

    The mixture mode has no closed form; for well-separated mixtures it sits
    at or near a component mean, and the candidate points (the class's
    training logits at fit time) cover the overlap cases.
    ``candidate_log_densities`` may carry precomputed values for the
    candidate rows to avoid re-evaluating them.
    """
    cands = np.asarray(candidates, dtype=float)
    if cands.ndim == 1:
        cands = cands[:, None] if model.dimension == 1 else cands[None, :]
    if cands.size == 0:
        raise EmptyCandidateSet("need at least one candidate point")
    if candidate_log_densities is None:
        candidate_log_densities = log_density(model, cands)
    best_mean = float(np.max(log_density(model, model.means)))
    return max(best_mean, float(np.max(candidate_log_densities)))


def score(max_log_density: float, log_density_at_x):
    """ln(max density) - ln(density at x); zero at the densest known point."""
    return max_log_density - log_density_at_x


def empirical_quantile(values, q: float) -> float:
    """Linear-interpolation quantile: h = q (n-1), blend of the order stats
    at floor(h) and floor(h)+1."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise EmptyInput("cannot take a quantile of an empty sequence")
    if not np.all(np.isfinite(v)):
        raise ValueError("quantile input must be finite")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"quantile fraction {q} outside [0, 1]")
    return float(np.quantile(v, q))


def fit_logistic(s_q1: float, s_q2: float, hp: Hyperparams) -> tuple[float, float]:
    """Solve g(s_q1) = u1 and g(s_q2) = u2 for the logistic constants.

    c2 = [s_q2 ln(1/u1 - 1) - s_q1 ln(1/u2 - 1)] / [ln(1/u1 - 1) - ln(1/u2 - 1)]
    c1 = -ln(1/u2 - 1) / (s_q2 - c2)

    When one of the u's equals 1/2 its log-odds term vanishes and the c1
    quotient above degenerates to 0/0, so the slope is recovered from the
    other constraint; both agree in exact arithmetic.
    """
    if s_q1 == s_q2:
        raise DegenerateScores("score quantiles coincide; cannot calibrate")
    if hp.u1 == hp.u2:
        raise DegenerateHyperparams("u1 == u2 zeroes the calibration denominator")
    a1 = math.log(1.0 / hp.u1 - 1.0)
    a2 = math.log(1.0 / hp.u2 - 1.0)
    c2 = (s_q2 * a1 - s_q1 * a2) / (a1 - a2)
    if abs(a2) >= abs(a1):
        c1 = -a2 / (s_q2 - c2)
    else:
        c1 = -a1 / (s_q1 - c2)
    return float(c1), float(c2)


def logistic(c1: float, c2: float, s):
    """1 / (1 + exp(-c1 (s - c2))); saturates to 0/1 only in floating point."""
    out = expit(c1 * (np.asarray(s, dtype=float) - c2))
    return float(out) if out.ndim == 0 else out
