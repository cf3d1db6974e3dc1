#!/usr/bin/env python3
"""Highest-density regions, the uncertainty bound they imply, and the
Mahalanobis view of the single-Gaussian case.

For a 1-D standard normal the HDR threshold has a closed form (the density
at the two-sided normal quantile), which makes a good sanity check for the
Monte Carlo estimator.  For a single multivariate Gaussian, region
membership and Mahalanobis distance are the same geometry.
"""

import numpy as np
from scipy.stats import norm

from logit_uncertainty import (
    FitConfig,
    GaussianComponent,
    GmmModel,
    Hyperparams,
    fit_uncertainty_model,
    hdr_contains,
    hdr_threshold,
    log_density,
    mahalanobis,
    mahalanobis_radius,
    sample,
    verify_hdr_uncertainty_bound,
)
from logit_uncertainty.data_io import LogitRecord, RecordSet

std_normal = GmmModel(
    components=(GaussianComponent(1.0, np.zeros(1), np.eye(1)),), dimension=1
)

# --- HDR threshold vs closed form ---------------------------------------

print("HDR density thresholds, 1-D standard normal (n_mc = 100000):")
for alpha in (0.05, 0.2, 0.5):
    est = hdr_threshold(std_normal, alpha, 100000, seed=17)
    closed = norm.pdf(norm.ppf(1.0 - alpha / 2.0))
    print(f"  alpha={alpha:<5} f_alpha={est.f_alpha:.5f}  closed form {closed:.5f}")

# --- Mahalanobis radii ----------------------------------------------------

print("\nradius containing 95% of a d-dimensional Gaussian:")
for d in (1, 2, 5, 10):
    print(f"  d={d:<3} r = {mahalanobis_radius(0.05, d):.4f}")

# --- the two views agree for one component -------------------------------

rng = np.random.default_rng(4)
A = rng.normal(size=(2, 2))
chol = np.linalg.cholesky(A @ A.T + 0.3 * np.eye(2))
gauss = GmmModel(
    components=(GaussianComponent(1.0, rng.normal(size=2), chol),), dimension=2
)
comp = gauss.components[0]
r95 = mahalanobis_radius(0.05, 2)
f95 = float(np.exp(-0.5 * r95**2 + log_density(gauss, comp.mean)))
draws = sample(gauss, 20000, seed=5)
inside = hdr_contains(f95, log_density(gauss, draws))
within = mahalanobis(comp, draws) <= r95
print(f"\nregion membership vs r <= r_alpha agree on {np.mean(inside == within):.1%} "
      f"of 20000 draws (inside fraction {inside.mean():.4f})")

# --- the bound: in-region samples stay under the target uncertainty ------

records = []
gen = np.random.default_rng(6)
for i, mean in enumerate(np.array([[4.0, 0.0], [0.0, 4.0]])):
    draws = gen.normal(mean, 1.0, size=(4000, 2))
    for x in draws[np.argmax(draws, axis=1) == i][:2000]:
        records.append(LogitRecord(logits=x, true_label=i, predicted_label=i))
train = RecordSet(records=tuple(records), num_classes=2)
model = fit_uncertainty_model(train, Hyperparams(), FitConfig(seed=8), c_max=2)

print("\nshare of in-region samples breaking the uncertainty bound "
      "(should be ~0):")
for which in ("q1", "q2"):
    for i in (0, 1):
        rate = verify_hdr_uncertainty_bound(model, i, which, 50000, seed=100 + i)
        print(f"  class {i}, {which}: {rate:.4%}")
