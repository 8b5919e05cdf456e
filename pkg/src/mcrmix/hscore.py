"""H-score transferability metrics and the ensemble Gram quadratic form.

Three variants are exposed:

* two-sided: scores a (feature, label-embedding) pair,
  E[f(X)^T g(Y)] - 1/2 tr(cov(f) cov(g));
* one-sided full: scores features alone,
  tr(cov(f)^{-1} cov(E[f|Y]));
* simplified: tr(cov(E[f|Y])), the one-sided form with the feature
  covariance assumed identity (whitened features).

For a weighted sum of source features the simplified score is the quadratic
alpha^T G alpha, where G is the Gram matrix of centered conditional means
built by :func:`gram_matrix`. All class-level expectations are weighted by
the empirical priors, and conditional means are centered at their
priors-weighted average, which keeps every variant translation-invariant
and nonnegative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, NotZeroMean, PriorMismatch, SingularCovariance
from .features import (
    SINGULAR_EIG_RATIO,
    ConditionalMeans,
    FeatureMatrix,
    LabelVector,
    conditional_means,
    default_ridge,
    sample_covariance,
)

ZERO_MEAN_TOL = 1e-6
PRIOR_MATCH_TOL = 1e-12

VARIANTS = ("two_sided", "one_sided_full", "one_sided_simplified")


@dataclass(frozen=True)
class HScoreValue:
    """A score value together with which variant produced it."""

    value: float
    variant: str

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if not np.isfinite(self.value):
            raise ValueError("score is not finite")
        if self.variant != "two_sided" and self.value < -1e-9:
            raise ValueError(
                f"one-sided scores are nonnegative, got {self.value!r}"
            )


@dataclass(frozen=True)
class GramMatrix:
    """M x M matrix of priors-weighted inner products of centered conditional
    means; the coefficient matrix that makes the ensemble score a quadratic
    form in the source weights. Symmetric positive semidefinite."""

    g: np.ndarray

    def __post_init__(self) -> None:
        g = np.array(self.g, dtype=np.float64)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise DimMismatch(f"Gram matrix must be square, got {g.shape}")
        if not np.all(np.isfinite(g)):
            raise ValueError("Gram matrix contains non-finite entries")
        if np.max(np.abs(g - g.T), initial=0.0) > 1e-12:
            raise ValueError("Gram matrix is not symmetric")
        eigs = np.linalg.eigvalsh(g)
        if eigs[0] < -1e-9 * max(float(eigs[-1]), 0.0):
            raise ValueError(
                f"Gram matrix is not positive semidefinite (min eig {eigs[0]:.3e})"
            )
        g.setflags(write=False)
        object.__setattr__(self, "g", g)

    @property
    def n_sources(self) -> int:
        return self.g.shape[0]


def _check_zero_mean(data: np.ndarray, what: str) -> None:
    worst = float(np.max(np.abs(data.mean(axis=0))))
    if worst > ZERO_MEAN_TOL:
        raise NotZeroMean(f"{what} mean has max-abs entry {worst:.3e} > {ZERO_MEAN_TOL}")


def _between_class_covariance(cm: ConditionalMeans) -> np.ndarray:
    """Priors-weighted covariance of the conditional means."""
    centered = cm.means - cm.priors @ cm.means
    return (centered * cm.priors[:, None]).T @ centered


def h_score_two_sided(
    features: FeatureMatrix, labels: LabelVector, class_embeddings: np.ndarray
) -> HScoreValue:
    """Score a (feature, label-embedding) pair.

    ``class_embeddings`` is a d_T x d matrix whose row y embeds class y.
    Features must be zero-mean over samples and embeddings zero-mean under
    the empirical class priors (both within 1e-6), matching the metric's
    zero-mean hypothesis.
    """
    g = np.asarray(class_embeddings, dtype=np.float64)
    if features.n_samples != len(labels):
        raise DimMismatch(
            f"{features.n_samples} feature rows but {len(labels)} labels"
        )
    if g.shape != (labels.n_classes, features.dim):
        raise DimMismatch(
            f"class embeddings must be {labels.n_classes}x{features.dim}, got {g.shape}"
        )
    _check_zero_mean(features.data, "feature")
    priors = labels.class_counts() / len(labels)
    g_bar = priors @ g
    if float(np.max(np.abs(g_bar))) > ZERO_MEAN_TOL:
        raise NotZeroMean(
            f"class embeddings are not zero-mean under the priors "
            f"(max-abs {np.max(np.abs(g_bar)):.3e})"
        )
    correlation = float(np.mean(np.sum(features.data * g[labels.labels], axis=1)))
    cov_f = sample_covariance(features.data)
    g_centered = g - g_bar
    cov_g = (g_centered * priors[:, None]).T @ g_centered
    value = correlation - 0.5 * float(np.sum(cov_f * cov_g))
    return HScoreValue(value=value, variant="two_sided")


def h_score_one_sided_full(
    features: FeatureMatrix, labels: LabelVector, ridge: float | None = None
) -> HScoreValue:
    """Score features alone: tr((cov(f) + ridge I)^{-1} cov(E[f|Y])).

    ridge=None applies the shared default rule 1e-3 * trace(cov) / dim;
    ridge=0 requires a nonsingular feature covariance.
    """
    _check_zero_mean(features.data, "feature")
    cov_f = sample_covariance(features.data)
    if ridge is None:
        ridge = default_ridge(cov_f)
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    if ridge == 0.0:
        eigs = np.linalg.eigvalsh(cov_f)
        if eigs[-1] <= 0.0 or eigs[0] < SINGULAR_EIG_RATIO * eigs[-1]:
            raise SingularCovariance(
                "feature covariance is numerically singular; pass a positive ridge"
            )
    between = _between_class_covariance(conditional_means(features, labels))
    regularized = cov_f + ridge * np.eye(features.dim)
    value = float(np.trace(np.linalg.solve(regularized, between)))
    return HScoreValue(value=value, variant="one_sided_full")


def h_score_simplified(cm: ConditionalMeans) -> HScoreValue:
    """tr(cov(E[f|Y])): the one-sided score of unit-covariance features."""
    value = float(np.trace(_between_class_covariance(cm)))
    return HScoreValue(value=value, variant="one_sided_simplified")


def gram_matrix(cms: list[ConditionalMeans] | tuple[ConditionalMeans, ...]) -> GramMatrix:
    """Gram matrix G with G_ij = sum_y p_y <c_i(y), c_j(y)>.

    c_j(y) is source j's conditional mean for class y, centered at the
    priors-weighted mean of means. All sources must share the class count,
    feature dimension and priors (they come from the same labels). Built as
    V V^T so symmetry and positive semidefiniteness hold by construction.
    """
    if not cms:
        raise DimMismatch("need at least one source")
    first = cms[0]
    for j, cm in enumerate(cms[1:], start=1):
        if cm.n_classes != first.n_classes or cm.dim != first.dim:
            raise DimMismatch(
                f"source {j} has shape {cm.means.shape}, source 0 has {first.means.shape}"
            )
        if np.max(np.abs(cm.priors - first.priors)) > PRIOR_MATCH_TOL:
            raise PriorMismatch(f"source {j} priors differ from source 0")
    sqrt_p = np.sqrt(first.priors)[:, None]
    rows = [((cm.means - cm.priors @ cm.means) * sqrt_p).ravel() for cm in cms]
    v = np.stack(rows)
    return GramMatrix(v @ v.T)


def ensemble_h_score(gram: GramMatrix, alpha) -> HScoreValue:
    """Quadratic form alpha^T G alpha: the simplified score of the mixture.

    ``alpha`` is an EnsembleWeights or a plain vector; the quadratic itself
    is defined for any weights (H(c alpha) = c^2 H(alpha)), so raw vectors
    off the sum-to-one hyperplane are accepted.
    """
    a = np.asarray(getattr(alpha, "alpha", alpha), dtype=np.float64)
    if a.ndim != 1 or a.size != gram.n_sources:
        raise DimMismatch(
            f"{a.size} weights for a {gram.n_sources}-source Gram matrix"
        )
    value = float(a @ gram.g @ a)
    return HScoreValue(value=value, variant="one_sided_simplified")
