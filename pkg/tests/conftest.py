"""Shared synthetic-data fixtures.

The heavy artifacts (fitted pipelines, the wide-network simulation) are
session-scoped so the module tests and the acceptance suite reuse one
computation.
"""

import numpy as np
import pytest

from logit_uncertainty import (
    FitConfig,
    GaussianComponent,
    GmmModel,
    Hyperparams,
    LogitRecord,
    RecordSet,
    fit_uncertainty_model,
)


def make_correct_records(n_per_class, means, seed, scale=1.0):
    """Logit records drawn from per-class Gaussians, keeping only draws whose
    argmax lands on their own class (so predicted == true everywhere)."""
    rng = np.random.default_rng(seed)
    means = np.asarray(means, dtype=float)
    k = means.shape[1]  # classes beyond means.shape[0] simply get no records
    records = []
    for i in range(means.shape[0]):
        kept = 0
        while kept < n_per_class:
            draws = rng.normal(means[i], scale, size=(2 * n_per_class, k))
            for x in draws[np.argmax(draws, axis=1) == i]:
                if kept == n_per_class:
                    break
                records.append(LogitRecord(logits=x, true_label=i, predicted_label=i))
                kept += 1
    return RecordSet(records=tuple(records), num_classes=k)


def single_gaussian_model(mean, cholesky):
    comp = GaussianComponent(weight=1.0, mean=np.asarray(mean, float),
                             cholesky=np.asarray(cholesky, float))
    return GmmModel(components=(comp,), dimension=comp.dimension)


def two_point_bias_mixture(separation=20.0):
    comps = tuple(
        GaussianComponent(weight=0.5, mean=np.array([mu]), cholesky=np.array([[1.0]]))
        for mu in (-separation, separation)
    )
    return GmmModel(components=comps, dimension=1)


TWO_CLASS_MEANS = np.array([[4.0, 0.0], [0.0, 4.0]])
SEPARATED_MEANS = np.array([[6.0, 0.0], [-6.0, 0.0]])
# the separated means rotated a quarter turn in logit space
ROTATED_MEANS = SEPARATED_MEANS @ np.array([[0.0, -1.0], [1.0, 0.0]]).T


@pytest.fixture(scope="session")
def default_hp():
    return Hyperparams(u1=0.5, u2=0.2, q1=0.8, q2=0.6)


@pytest.fixture(scope="session")
def fit_config():
    return FitConfig(seed=20)


@pytest.fixture(scope="session")
def two_class_train():
    return make_correct_records(1000, TWO_CLASS_MEANS, seed=101)


@pytest.fixture(scope="session")
def two_class_model(two_class_train, default_hp, fit_config):
    return fit_uncertainty_model(two_class_train, default_hp, fit_config, c_max=3)


@pytest.fixture(scope="session")
def separated_model(default_hp, fit_config):
    train = make_correct_records(1000, SEPARATED_MEANS, seed=301)
    return fit_uncertainty_model(train, default_hp, fit_config, c_max=3)


@pytest.fixture(scope="session")
def calibration_heavy_model(default_hp, fit_config):
    """Pipeline fitted with 20k correct samples per class: quantile noise is
    small enough for tight highest-density-region bound checks."""
    train = make_correct_records(20000, TWO_CLASS_MEANS, seed=707)
    return fit_uncertainty_model(train, default_hp, fit_config, c_max=2)
