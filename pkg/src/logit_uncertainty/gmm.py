"""Full-covariance Gaussian mixture models fitted by expectation-maximization.

Covariances are carried everywhere as lower-triangular Cholesky factors:
log-density evaluation, sampling and Mahalanobis distances all reduce to
triangular solves, and a strictly positive factor diagonal doubles as the
positive-definiteness certificate.  Fitting is a pure function of
``(data, component_count, config)``; repeated calls return bitwise
identical models.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import InsufficientData, NumericalFailure

LOG_2PI = float(np.log(2.0 * np.pi))

# Responsibility mass under which a component counts as collapsed and is
# re-seeded at the lowest-density point.
_COLLAPSE_MASS = 1e-10

_WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class GaussianComponent:
    """One weighted Gaussian, covariance stored as its lower Cholesky factor."""

    weight: float
    mean: np.ndarray
    cholesky: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        chol = np.asarray(self.cholesky, dtype=float)
        if mean.ndim != 1:
            raise ValueError("component mean must be a 1-D vector")
        d = mean.shape[0]
        if chol.shape != (d, d):
            raise ValueError("Cholesky factor shape must match the mean dimension")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(chol))):
            raise ValueError("component parameters must be finite")
        if np.any(np.diag(chol) <= 0.0):
            raise ValueError("Cholesky factor needs a strictly positive diagonal")
        if not (0.0 < self.weight <= 1.0):
            raise ValueError(f"component weight {self.weight} outside (0, 1]")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cholesky", np.tril(chol))

    @property
    def dimension(self) -> int:
        return self.mean.shape[0]

    def covariance(self) -> np.ndarray:
        """Reconstruct the dense covariance matrix L @ L.T."""
        return self.cholesky @ self.cholesky.T


@dataclass(frozen=True)
class GmmModel:
    """A nonempty weighted mixture of Gaussians sharing one dimension."""

    components: tuple[GaussianComponent, ...]
    dimension: int

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("a mixture needs at least one component")
        if any(c.dimension != self.dimension for c in comps):
            raise ValueError("all components must share the model dimension")
        total = sum(c.weight for c in comps)
        if abs(total - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError(f"component weights sum to {total!r}, not 1")
        object.__setattr__(self, "components", comps)

    @property
    def num_components(self) -> int:
        return len(self.components)

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.components])

    @property
    def means(self) -> np.ndarray:
        return np.stack([c.mean for c in self.components])

    @property
    def choleskys(self) -> np.ndarray:
        return np.stack([c.cholesky for c in self.components])


@dataclass(frozen=True)
class FitConfig:
    """EM controls: iteration budget, tolerance, regularization, seeding."""

    max_iterations: int = 500
    convergence_tol: float = 1e-7
    covariance_regularizer: float = 1e-6
    seed: int = 0
    num_restarts: int = 3

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if not self.convergence_tol > 0.0:
            raise ValueError("convergence_tol must be positive")
        if not self.covariance_regularizer > 0.0:
            raise ValueError("covariance_regularizer must be positive")
        if self.num_restarts < 1:
            raise ValueError("num_restarts must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


def _as_data_matrix(data) -> np.ndarray:
    X = np.asarray(data, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("data must be a nonempty (n, d) array")
    if not np.all(np.isfinite(X)):
        raise ValueError("data must be finite")
    return X


def _solve_lower(L: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Forward substitution for L Z = Y, Y of shape (d, n).

    Hand-rolled instead of BLAS trsm (and with einsum rather than dot for
    the inner products): each column's result is then independent of how
    many other columns ride along, so single-point and batched density
    evaluations agree bitwise.
    """
    Z = np.empty_like(Y)
    for i in range(L.shape[0]):
        Z[i] = (Y[i] - np.einsum("k,kn->n", L[i, :i], Z[:i])) / L[i, i]
    return Z


def _squared_mahalanobis(mean: np.ndarray, chol: np.ndarray, X: np.ndarray) -> np.ndarray:
    """(x-mu)^T Sigma^-1 (x-mu) for each row of X, via one triangular solve.

    Both ``log_density`` and ``mahalanobis`` route through this helper so the
    two produce bitwise-identical quadratic forms.
    """
    z = _solve_lower(chol, (X - mean).T)
    return np.einsum("dn,dn->n", z, z)


def _component_log_density(comp: GaussianComponent, X: np.ndarray) -> np.ndarray:
    q = _squared_mahalanobis(comp.mean, comp.cholesky, X)
    log_norm = 0.5 * comp.dimension * LOG_2PI + np.sum(np.log(np.diag(comp.cholesky)))
    return -log_norm - 0.5 * q


def log_density(model: GmmModel, x) -> float | np.ndarray:
    """ln sum_j w_j N(x; mu_j, Sigma_j), stable via log-sum-exp.

    ``x`` may be a single d-vector (returns a float) or an (n, d) array
    (returns an (n,) array).
    """
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X2 = X[None, :] if single else X
    if X2.ndim != 2 or X2.shape[1] != model.dimension:
        raise ValueError(f"expected points of dimension {model.dimension}")
    if not np.all(np.isfinite(X2)):
        raise ValueError("points must be finite")
    terms = np.stack(
        [np.log(c.weight) + _component_log_density(c, X2) for c in model.components],
        axis=1,
    )
    out = logsumexp(terms, axis=1)
    return float(out[0]) if single else out


def mahalanobis(component: GaussianComponent, x) -> float | np.ndarray:
    """((x-mu)^T Sigma^-1 (x-mu))^(1/2) using the stored Cholesky factor."""
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X2 = X[None, :] if single else X
    if X2.shape[1] != component.dimension:
        raise ValueError(f"expected points of dimension {component.dimension}")
    if not np.all(np.isfinite(X2)):
        raise ValueError("points must be finite")
    r = np.sqrt(_squared_mahalanobis(component.mean, component.cholesky, X2))
    return float(r[0]) if single else r


# --- EM internals -----------------------------------------------------------
#
# During fitting the mixture lives as plain arrays (weights (c,), means
# (c, d), Cholesky factors (c, d, d)); GaussianComponent objects are built
# only for the returned model.


def _cholesky_or_fail(cov: np.ndarray, regularizer: float) -> np.ndarray:
    cov = 0.5 * (cov + cov.T)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise NumericalFailure(
            f"covariance not positive definite despite regularizer {regularizer}"
        ) from None


def _cholesky_stack_or_fail(covs: np.ndarray, regularizer: float) -> np.ndarray:
    covs = 0.5 * (covs + covs.transpose(0, 2, 1))
    try:
        return np.linalg.cholesky(covs)
    except np.linalg.LinAlgError:
        raise NumericalFailure(
            f"covariance not positive definite despite regularizer {regularizer}"
        ) from None


def _global_covariance(X: np.ndarray, regularizer: float) -> np.ndarray:
    mu = np.ones(X.shape[0]) @ X / X.shape[0]
    Xc = X - mu
    return (Xc.T @ Xc) / X.shape[0] + regularizer * np.eye(X.shape[1])


def _kmeanspp_means(X: np.ndarray, c: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = np.sum((X - X[chosen[0]]) ** 2, axis=1)
    for _ in range(1, c):
        total = d2.sum()
        if total > 0.0:
            pick = int(rng.choice(n, p=d2 / total))
        else:
            pick = int(rng.integers(n))
        chosen.append(pick)
        d2 = np.minimum(d2, np.sum((X - X[pick]) ** 2, axis=1))
    return X[np.array(chosen)].copy()


def _initial_params(X: np.ndarray, c: int, config: FitConfig, rng: np.random.Generator):
    n, d = X.shape
    reg = config.covariance_regularizer
    means = _kmeanspp_means(X, c, rng)
    # Nearest-seed assignment; per-cluster biased covariance, global fallback
    # for clusters too small to estimate one.
    dist2 = np.sum((X[:, None, :] - means[None, :, :]) ** 2, axis=2)
    assign = np.argmin(dist2, axis=1)
    fallback = _global_covariance(X, reg)
    chols = np.empty((c, d, d))
    for j in range(c):
        members = X[assign == j]
        if members.shape[0] >= 2:
            mu = np.ones(members.shape[0]) @ members / members.shape[0]
            Mc = members - mu
            cov = (Mc.T @ Mc) / members.shape[0] + reg * np.eye(d)
        else:
            cov = fallback
        chols[j] = _cholesky_or_fail(cov, reg)
    weights = np.full(c, 1.0 / c)
    return weights, means, chols


def _converged(ll: float, ll_prev: float, tol: float) -> bool:
    return abs(ll - ll_prev) <= tol * abs(ll_prev)


def _e_step(X, weights, means, chols):
    """Return (total log-likelihood, responsibilities, per-point log density).

    Vectorized across components: the forward substitution runs on all
    (component, point) pairs at once.
    """
    d = X.shape[1]
    Y = (X[None, :, :] - means[:, None, :]).transpose(0, 2, 1)  # (c, d, n)
    Z = np.empty_like(Y)
    for i in range(d):
        Z[:, i, :] = (
            Y[:, i, :] - np.einsum("ck,ckn->cn", chols[:, i, :i], Z[:, :i, :])
        ) / chols[:, i, i][:, None]
    q = np.einsum("cdn,cdn->cn", Z, Z)
    log_norm = 0.5 * d * LOG_2PI + np.sum(
        np.log(np.diagonal(chols, axis1=1, axis2=2)), axis=1
    )
    lp = (np.log(weights) - log_norm)[:, None] - 0.5 * q  # (c, n)
    # inlined log-sum-exp over components (hot loop)
    top = lp.max(axis=0)
    row = top + np.log(np.sum(np.exp(lp - top[None, :]), axis=0))
    resp = np.exp(lp - row[None, :]).T
    return float(row.sum()), resp, row


def _m_step(X, resp, row_log_density, config: FitConfig):
    n, d = X.shape
    c = resp.shape[1]
    reg = config.covariance_regularizer
    reg_eye = reg * np.eye(d)
    mass = resp.sum(axis=0)
    weights = np.empty(c)
    means = np.empty((c, d))
    covs = np.empty((c, d, d))
    for j in range(c):
        if mass[j] < _COLLAPSE_MASS:
            # Standard EM rescue: restart the dead component at the point the
            # current mixture explains worst.
            means[j] = X[int(np.argmin(row_log_density))]
            covs[j] = _global_covariance(X, reg)
            weights[j] = 1.0 / n
        else:
            means[j] = resp[:, j] @ X / mass[j]
            Xc = X - means[j]
            covs[j] = ((resp[:, j, None] * Xc).T @ Xc) / mass[j] + reg_eye
            weights[j] = mass[j] / n
    weights = weights / weights.sum()
    return weights, means, _cholesky_stack_or_fail(covs, reg)


def _run_em(X: np.ndarray, c: int, config: FitConfig, restart_index: int):
    """One EM run from a seeded initialization.

    Returns ``(weights, means, chols, ll_history)``; the last history entry
    is the log-likelihood of the returned parameters.
    """
    rng = np.random.default_rng([int(config.seed), restart_index])
    weights, means, chols = _initial_params(X, c, config, rng)
    history = []
    ll_prev = None
    for _ in range(config.max_iterations):
        ll, resp, row = _e_step(X, weights, means, chols)
        history.append(ll)
        if ll_prev is not None and _converged(ll, ll_prev, config.convergence_tol):
            return weights, means, chols, history
        ll_prev = ll
        weights, means, chols = _m_step(X, resp, row, config)
    # Iteration budget exhausted after an M-step: evaluate once more so the
    # reported likelihood matches the returned parameters.
    ll, _, _ = _e_step(X, weights, means, chols)
    history.append(ll)
    return weights, means, chols, history


def _to_model(weights, means, chols) -> GmmModel:
    comps = tuple(
        GaussianComponent(weight=float(w), mean=m, cholesky=L)
        for w, m, L in zip(weights, means, chols)
    )
    return GmmModel(components=comps, dimension=means.shape[1])


def em_fit(data, c: int, config: FitConfig) -> GmmModel:
    """Fit a c-component full-covariance mixture, best of several restarts.

    Each restart is seeded from ``(config.seed, restart_index)``; the run
    with the highest final log-likelihood wins, ties going to the lowest
    restart index, so results do not depend on evaluation order.
    """
    X = _as_data_matrix(data)
    if c < 1:
        raise ValueError("component count must be at least 1")
    if X.shape[0] < c:
        raise InsufficientData(f"{X.shape[0]} points cannot support {c} components")
    best = None
    best_ll = -np.inf
    for r in range(config.num_restarts):
        weights, means, chols, history = _run_em(X, c, config, r)
        if history[-1] > best_ll:
            best_ll = history[-1]
            best = (weights, means, chols)
    return _to_model(*best)


def bic(model: GmmModel, data) -> float:
    """p ln(n) - 2 L with p = (c-1) + c d + c d(d+1)/2 free parameters."""
    X = _as_data_matrix(data)
    n = X.shape[0]
    if n < 2:
        raise ValueError("BIC needs at least 2 data points")
    c = model.num_components
    d = model.dimension
    p = (c - 1) + c * d + c * (d * (d + 1) // 2)
    total_ll = float(np.sum(log_density(model, X)))
    return p * float(np.log(n)) - 2.0 * total_ll


def _elbow_rule(bics, elbow_tol: float) -> int:
    """Smallest c that minimizes BIC outright or whose relative improvement
    toward c+1 falls below the tolerance:
    (BIC(c) - BIC(c+1)) / |BIC(c)| < elbow_tol."""
    best_c = int(np.argmin(bics)) + 1
    for c in range(1, len(bics) + 1):
        if c == best_c:
            return c
        denom = max(abs(bics[c - 1]), np.finfo(float).tiny)
        if (bics[c - 1] - bics[c]) / denom < elbow_tol:
            return c
    return len(bics)


def _fit_bic_path(X: np.ndarray, c_max: int, config: FitConfig):
    """Models and BIC values for c = 1..c_max (shared with the pipeline so
    the selected model need not be refitted)."""
    if c_max < 1:
        raise ValueError("c_max must be at least 1")
    if X.shape[0] < c_max:
        raise InsufficientData(f"{X.shape[0]} points cannot support c_max={c_max}")
    models = [em_fit(X, c, config) for c in range(1, c_max + 1)]
    return models, [bic(m, X) for m in models]


def select_components(data, c_max: int, elbow_tol: float, config: FitConfig) -> int:
    """Pick a component count from the BIC curve over c = 1..c_max."""
    X = _as_data_matrix(data)
    if not 0.0 < elbow_tol < 1.0:
        raise ValueError("elbow_tol must lie in (0, 1)")
    _, bics = _fit_bic_path(X, c_max, config)
    return _elbow_rule(bics, elbow_tol)


def sample_with_rng(model: GmmModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """n mixture draws consuming exactly one component-index batch and one
    standard-normal batch from ``rng``."""
    if n < 1:
        raise ValueError("sample count must be at least 1")
    idx = rng.choice(model.num_components, size=n, p=model.weights)
    z = rng.standard_normal((n, model.dimension))
    means = model.means
    chols = model.choleskys
    return means[idx] + np.einsum("nij,nj->ni", chols[idx], z)


def sample(model: GmmModel, n: int, seed) -> np.ndarray:
    """n i.i.d. draws: component chosen by weight, then x = mu + L z.

    Deterministic for a given seed (anything ``np.random.default_rng``
    accepts).
    """
    return sample_with_rng(model, n, np.random.default_rng(seed))
