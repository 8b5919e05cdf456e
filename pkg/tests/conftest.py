"""Shared test fixtures: random labeled instances in the whitened regime."""

import numpy as np
import pytest

from mcrmix import (
    FeatureMatrix,
    LabelVector,
    apply_whitener,
    fit_whitener,
)


def random_labels(rng, n, n_classes):
    """Labels with every class present, shuffled."""
    y = np.concatenate([np.arange(n_classes), rng.integers(0, n_classes, n - n_classes)])
    rng.shuffle(y)
    return LabelVector(y, n_classes)


def random_instance(rng, n=None, d=None, n_classes=None, separation=1.5, whiten=True):
    """One labeled feature matrix from a Gaussian mixture, optionally
    whitened exactly (ridge 0). Guarantees n large enough for a
    nonsingular covariance."""
    d = int(rng.integers(2, 17)) if d is None else d
    n_classes = int(rng.integers(2, 6)) if n_classes is None else n_classes
    if n is None:
        n = int(rng.integers(max(20, 2 * (d + 1)), 201))
    labels = random_labels(rng, n, n_classes)
    means = rng.normal(0.0, separation, (n_classes, d))
    features = FeatureMatrix(means[labels.labels] + rng.standard_normal((n, d)))
    if whiten:
        features = apply_whitener(fit_whitener(features, 0.0), features)
    return features, labels


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
