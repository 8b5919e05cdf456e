"""Feature containers, ZCA whitening, and class-conditional statistics.

Everything downstream (transferability scores, weight optimization, the
closed-form classifier) consumes only two statistics of the data: the
whitened feature matrix and the per-class conditional feature means. Both
are computed here. Covariances are the biased (divide-by-N) empirical kind
throughout the toolkit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimMismatch,
    EmptyClass,
    InsufficientSamples,
    LabelOutOfRange,
    SingularCovariance,
)

# Relative eigenvalue threshold below which a covariance counts as singular.
SINGULAR_EIG_RATIO = 1e-12


@dataclass(frozen=True)
class FeatureMatrix:
    """N x d matrix of extracted feature values, one row per sample."""

    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise DimMismatch(f"feature matrix must be 2-D, got shape {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise DimMismatch("feature matrix needs at least one row and one column")
        if not np.all(np.isfinite(data)):
            raise ValueError("feature matrix contains non-finite entries")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class LabelVector:
    """Class indices in {0, ..., n_classes - 1}.

    Class presence is not enforced here; operations that need every class
    populated (conditional_means) raise EmptyClass themselves, so that
    prediction outputs missing a class remain representable.
    """

    labels: np.ndarray
    n_classes: int

    def __post_init__(self) -> None:
        labels = np.array(self.labels, dtype=np.int64)
        if labels.ndim != 1 or labels.size < 1:
            raise DimMismatch("labels must be a non-empty 1-D sequence")
        if self.n_classes < 1:
            raise ValueError("n_classes must be positive")
        if labels.min() < 0 or labels.max() >= self.n_classes:
            raise LabelOutOfRange(
                f"labels must lie in [0, {self.n_classes}), got range "
                f"[{labels.min()}, {labels.max()}]"
            )
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.labels.size

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


@dataclass(frozen=True)
class WhitenTransform:
    """Affine map x -> transform @ (x - mean).

    Fitted so the fitting data comes out with zero mean and (for ridge=0 and
    nonsingular covariance) identity covariance.
    """

    mean: np.ndarray
    transform: np.ndarray
    ridge: float = 0.0

    def __post_init__(self) -> None:
        mean = np.array(self.mean, dtype=np.float64)
        transform = np.array(self.transform, dtype=np.float64)
        if mean.ndim != 1:
            raise DimMismatch("whitener mean must be a vector")
        if transform.shape != (mean.size, mean.size):
            raise DimMismatch(
                f"whitener transform must be {mean.size}x{mean.size}, "
                f"got {transform.shape}"
            )
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(transform))):
            raise ValueError("whitener contains non-finite entries")
        if self.ridge < 0:
            raise ValueError("ridge must be nonnegative")
        mean.setflags(write=False)
        transform.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "transform", transform)

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class ConditionalMeans:
    """Per-class expected feature vectors with the empirical class priors.

    Row y of ``means`` is the average feature over the samples of class y;
    ``priors[y]`` is that class's empirical probability.
    """

    means: np.ndarray
    priors: np.ndarray

    def __post_init__(self) -> None:
        means = np.array(self.means, dtype=np.float64)
        priors = np.array(self.priors, dtype=np.float64)
        if means.ndim != 2 or priors.ndim != 1 or means.shape[0] != priors.size:
            raise DimMismatch(
                f"means {means.shape} and priors {priors.shape} are inconsistent"
            )
        if not np.all(np.isfinite(means)):
            raise ValueError("conditional means contain non-finite entries")
        if np.any(priors < 0) or abs(priors.sum() - 1.0) > 1e-12:
            raise ValueError("priors must be nonnegative and sum to 1")
        means.setflags(write=False)
        priors.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "priors", priors)

    @property
    def n_classes(self) -> int:
        return self.means.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]


def sample_covariance(data: np.ndarray) -> np.ndarray:
    """Biased (divide-by-N) covariance of the rows of ``data``."""
    centered = data - data.mean(axis=0)
    return centered.T @ centered / data.shape[0]


def default_ridge(covariance: np.ndarray) -> float:
    """Ridge rule used across the toolkit: 1e-3 * trace / dimension."""
    return 1e-3 * float(np.trace(covariance)) / covariance.shape[0]


def fit_whitener(features: FeatureMatrix, ridge: float | None = None) -> WhitenTransform:
    """Fit a symmetric (ZCA) whitening transform to ``features``.

    The transform is the inverse square root of (covariance + ridge * I),
    computed by eigendecomposition; ZCA keeps feature axes in place so that
    downstream ensemble weights stay interpretable.

    Parameters
    ----------
    features : FeatureMatrix
        Fitting data, at least two rows.
    ridge : float or None
        Covariance regularizer. None applies the default rule
        1e-3 * trace(cov) / dim; pass 0.0 to request exact whitening, which
        raises SingularCovariance when the covariance is rank-deficient.
    """
    if features.n_samples < 2:
        raise InsufficientSamples(
            f"whitening needs at least 2 samples, got {features.n_samples}"
        )
    mean = features.data.mean(axis=0)
    cov = sample_covariance(features.data)
    if ridge is None:
        ridge = default_ridge(cov)
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    eigval, eigvec = np.linalg.eigh(cov)
    largest = float(eigval[-1])
    if ridge == 0.0 and (largest <= 0.0 or float(eigval[0]) < SINGULAR_EIG_RATIO * largest):
        raise SingularCovariance(
            f"covariance is numerically singular (eigenvalue range "
            f"[{eigval[0]:.3e}, {largest:.3e}]); pass a positive ridge"
        )
    inv_sqrt = 1.0 / np.sqrt(np.maximum(eigval, 0.0) + ridge)
    transform = (eigvec * inv_sqrt) @ eigvec.T
    return WhitenTransform(mean=mean, transform=transform, ridge=float(ridge))


def apply_whitener(t: WhitenTransform, features: FeatureMatrix) -> FeatureMatrix:
    """Apply the affine map row-wise: transform @ (x - mean)."""
    if features.dim != t.dim:
        raise DimMismatch(
            f"whitener has dim {t.dim}, features have dim {features.dim}"
        )
    return FeatureMatrix((features.data - t.mean) @ t.transform.T)


def conditional_means(features: FeatureMatrix, labels: LabelVector) -> ConditionalMeans:
    """Empirical per-class feature expectations and class priors.

    means[y] is the plain arithmetic mean over the rows of class y;
    priors[y] = n_y / N. Every class must be populated.
    """
    if features.n_samples != len(labels):
        raise DimMismatch(
            f"{features.n_samples} feature rows but {len(labels)} labels"
        )
    counts = labels.class_counts()
    missing = np.flatnonzero(counts == 0)
    if missing.size:
        raise EmptyClass(f"classes {missing.tolist()} have no samples")
    sums = np.zeros((labels.n_classes, features.dim))
    np.add.at(sums, labels.labels, features.data)
    means = sums / counts[:, None]
    priors = counts / features.n_samples
    return ConditionalMeans(means=means, priors=priors)
