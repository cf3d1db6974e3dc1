"""Executable diagnostics: highest-density regions, uncertainty bounds,
Mahalanobis radii, and a wide random-network simulator.

The HDR threshold f_alpha of a mixture has no closed form, so it is
estimated as the empirical alpha-quantile of density values at Monte Carlo
draws from the mixture itself; the mass above the threshold is then about
1 - alpha.  For a single Gaussian everything collapses to Mahalanobis
geometry: density(x) >= f  is equivalent to  r(x)^2 <= -2 ln(f c_norm)
with c_norm = (2 pi)^(d/2) det(Sigma)^(1/2), which is what the matched
radius/threshold checks exploit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr
from scipy.stats import chi2, kstest

from .calibration import empirical_quantile, logistic, score
from .data_io import _atomic_write_text
from .errors import ClassNotFitted, EmptyInput, IoFailure
from .gmm import FitConfig, GmmModel, em_fit, log_density, sample, sample_with_rng
from .model import UncertaintyModel, UnfittedClass

# Networks simulated per vectorized batch.  Fixed: the draw order, and hence
# the exact output stream for a given seed, depends on it.
_NETWORK_CHUNK = 32


@dataclass(frozen=True)
class HdrEstimate:
    """Monte Carlo estimate of the density threshold of a (1-alpha)-HDR."""

    alpha: float
    f_alpha: float
    n_mc: int
    seed: int

    def __post_init__(self):
        if not self.f_alpha > 0.0:
            raise ValueError("HDR density threshold must be positive")


def hdr_threshold(model: GmmModel, alpha: float, n_mc: int, seed) -> HdrEstimate:
    """Empirical alpha-quantile of density values over n_mc mixture draws.

    Uses ``sample(model, n_mc, seed)`` verbatim, so callers can reproduce
    the exact draw with the same seed.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if n_mc < 1000:
        raise ValueError("n_mc must be at least 1000")
    draws = sample(model, n_mc, seed)
    dens = np.exp(log_density(model, draws))
    f = empirical_quantile(dens, alpha)
    return HdrEstimate(alpha=alpha, f_alpha=float(f), n_mc=n_mc, seed=seed)


def hdr_contains(f_alpha: float, log_density_at_x):
    """Region membership: density(x) >= f_alpha, tested in log space.

    The region is closed, so a density exactly at the threshold is inside.
    """
    if not f_alpha > 0.0:
        raise ValueError("f_alpha must be positive")
    out = np.asarray(log_density_at_x, dtype=float) >= np.log(f_alpha)
    return bool(out) if out.ndim == 0 else out


def verify_hdr_uncertainty_bound(
    model: UncertaintyModel, class_index: int, which: str, n_mc: int, seed
) -> float:
    """Fraction of fresh in-HDR samples whose uncertainty breaks the bound.

    ``which`` selects the (q1 -> u1) or (q2 -> u2) pairing.  The HDR
    threshold is estimated from one draw (seeded ``seed``) and the check
    runs on a second, fresh draw (seeded ``[seed, 1]``); the residual
    violation rate comes only from Monte Carlo and empirical-quantile
    error.
    """
    if which not in ("q1", "q2"):
        raise ValueError("which must be 'q1' or 'q2'")
    entry = model.per_class[class_index]
    if isinstance(entry, UnfittedClass):
        raise ClassNotFitted(f"class {class_index} is unfitted: {entry.reason}")
    hp = model.hyperparams
    q, u_bound = (hp.q1, hp.u1) if which == "q1" else (hp.q2, hp.u2)
    estimate = hdr_threshold(entry.gmm, 1.0 - q, n_mc, seed)
    fresh = sample(entry.gmm, n_mc, [seed, 1])
    ld = log_density(entry.gmm, fresh)
    inside = hdr_contains(estimate.f_alpha, ld)
    cal = entry.calibration
    u = logistic(cal.c1, cal.c2, score(cal.max_log_density, ld))
    n_inside = int(np.count_nonzero(inside))
    if n_inside == 0:
        return 0.0
    violations = int(np.count_nonzero(inside & (u >= u_bound)))
    return violations / n_inside


def mahalanobis_radius(alpha: float, d: int) -> float:
    """Radius containing 1-alpha of a d-dimensional Gaussian: the square
    root of the (1-alpha) chi-square quantile with d degrees of freedom."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if d < 1:
        raise ValueError("dimension must be at least 1")
    return float(np.sqrt(chi2.ppf(1.0 - alpha, df=d)))


# --- wide random networks ----------------------------------------------------


@dataclass(frozen=True)
class NetworkSimConfig:
    """Random fully connected ReLU networks evaluated on a fixed input set.

    Hidden weights at layer mu are N(0, weight_variance_hat / fan_in),
    hidden biases N(0, bias_variance), and the single output unit's bias is
    drawn from a 1-D Gaussian mixture.
    """

    depth: int
    widths: tuple[int, ...]
    input_set: np.ndarray
    weight_variance_hat: float
    bias_variance: float
    final_bias_mixture: GmmModel
    n_networks: int
    seed: int

    def __post_init__(self):
        widths = tuple(int(w) for w in self.widths)
        if self.depth < 1:
            raise ValueError("depth must be at least 1")
        if not widths or any(b <= a for a, b in zip(widths, widths[1:])):
            raise ValueError("widths must be a strictly increasing nonempty list")
        if any(w < 1 for w in widths):
            raise ValueError("widths must be positive")
        X = np.atleast_2d(np.asarray(self.input_set, dtype=float))
        if X.size == 0 or not np.all(np.isfinite(X)):
            raise ValueError("input_set must be a nonempty finite (K, M) array")
        if self.weight_variance_hat < 0.0 or self.bias_variance < 0.0:
            raise ValueError("variances must be nonnegative")
        if self.final_bias_mixture.dimension != 1:
            raise ValueError("final bias mixture must be 1-dimensional")
        if self.n_networks < 1:
            raise ValueError("n_networks must be at least 1")
        object.__setattr__(self, "widths", widths)
        object.__setattr__(self, "input_set", X)


def _simulate_chunk(rng, n: int, width: int, cfg: NetworkSimConfig) -> np.ndarray:
    X = cfg.input_set  # (K, M)
    m = X.shape[1]
    cw = cfg.weight_variance_hat
    sb = np.sqrt(cfg.bias_variance)
    # activations kept as (n, width, K); layer maps are batched matmuls
    w = rng.standard_normal((n, width, m)) * np.sqrt(cw / m)
    b = rng.standard_normal((n, width)) * sb
    g = np.maximum(w @ X.T + b[:, :, None], 0.0)
    for _ in range(cfg.depth - 1):
        w = rng.standard_normal((n, width, width)) * np.sqrt(cw / width)
        b = rng.standard_normal((n, width)) * sb
        g = np.maximum(w @ g + b[:, :, None], 0.0)
    w_out = rng.standard_normal((n, 1, width)) * np.sqrt(cw / width)
    b_out = sample_with_rng(cfg.final_bias_mixture, n, rng)[:, 0]
    return (w_out @ g)[:, 0, :] + b_out[:, None]


def simulate_wide_network(config: NetworkSimConfig) -> list[np.ndarray]:
    """Scalar outputs of random networks at every configured width.

    Returns one (n_networks, K) array per width, K being the input-set
    size.  Each width gets its own child stream of the master seed, so
    results are deterministic and independent of evaluation order.
    """
    children = np.random.SeedSequence(int(config.seed)).spawn(len(config.widths))
    results = []
    for child, width in zip(children, config.widths):
        rng = np.random.default_rng(child)
        n_inputs = config.input_set.shape[0]
        out = np.empty((config.n_networks, n_inputs))
        done = 0
        while done < config.n_networks:
            n = min(_NETWORK_CHUNK, config.n_networks - done)
            out[done : done + n] = _simulate_chunk(rng, n, width, config)
            done += n
        results.append(out)
    return results


def mixture_cdf_1d(model: GmmModel, x) -> np.ndarray:
    """CDF of a 1-D mixture: sum_j w_j Phi((x - mu_j) / sigma_j)."""
    if model.dimension != 1:
        raise ValueError("mixture_cdf_1d needs a 1-dimensional model")
    t = np.atleast_1d(np.asarray(x, dtype=float))
    mus = model.means[:, 0]
    sigmas = model.choleskys[:, 0, 0]
    return ndtr((t[:, None] - mus[None, :]) / sigmas[None, :]) @ model.weights


def convergence_report(
    per_width_samples, c: int, config: FitConfig | None = None
) -> list[float]:
    """Kolmogorov-Smirnov distance between each width's output sample and a
    c-component mixture fitted to it.  Samples with several inputs are
    pooled before fitting."""
    if config is None:
        config = FitConfig()
    stats = []
    for samples in per_width_samples:
        s = np.asarray(samples, dtype=float).ravel()
        if s.size == 0:
            raise EmptyInput("convergence_report needs nonempty sample sets")
        fitted = em_fit(s[:, None], c, config)
        result = kstest(s, lambda t: mixture_cdf_1d(fitted, t))
        stats.append(float(result.statistic))
    return stats


# --- CSV summaries ------------------------------------------------------------


def write_convergence_csv(widths, n_samples, ks_statistics, path) -> None:
    lines = ["width,n_samples,ks_statistic"]
    for w, n, stat in zip(widths, n_samples, ks_statistics):
        lines.append(f"{w},{n},{stat:.12g}")
    _atomic_write_text(path, "\n".join(lines) + "\n")


def write_hdr_check_csv(rows, path) -> None:
    """Rows: (class_index, alpha, f_alpha, r_alpha, violation_q1,
    violation_q2, n_mc)."""
    lines = ["class_index,alpha,f_alpha,r_alpha,violation_rate_q1,violation_rate_q2,n_mc"]
    for class_index, alpha, f_alpha, r_alpha, v1, v2, n_mc in rows:
        lines.append(
            f"{class_index},{alpha:.12g},{f_alpha:.12g},{r_alpha:.12g},"
            f"{v1:.12g},{v2:.12g},{n_mc}"
        )
    _atomic_write_text(path, "\n".join(lines) + "\n")
