"""Closed-form maximal-correlation classifier head.

The classifier is a label encoder: class y maps to the weighted
conditional feature mean g(y) = sum_j alpha_j E[f_j(X)|Y=y], and prediction
picks the class whose embedding correlates best with the (whitened, mixed)
feature of a sample. No iterative training is involved; fitting reduces to
the statistics in :mod:`mcrmix.features` plus the weight optimization in
:mod:`mcrmix.optimizer`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, LengthMismatch, PriorMismatch
from .features import (
    ConditionalMeans,
    FeatureMatrix,
    LabelVector,
    WhitenTransform,
    apply_whitener,
    conditional_means,
    fit_whitener,
)
from .hscore import PRIOR_MATCH_TOL
from .optimizer import (
    EnsembleWeights,
    OptimizerConfig,
    OptimizerReport,
    optimize_weights,
)


@dataclass(frozen=True)
class ClassEmbeddings:
    """d_T x d label-encoder matrix: row y embeds class y. Carries the
    empirical class priors alongside for posterior evaluation."""

    g: np.ndarray
    priors: np.ndarray

    def __post_init__(self) -> None:
        g = np.array(self.g, dtype=np.float64)
        priors = np.array(self.priors, dtype=np.float64)
        if g.ndim != 2 or priors.ndim != 1 or g.shape[0] != priors.size:
            raise DimMismatch(
                f"embeddings {g.shape} and priors {priors.shape} are inconsistent"
            )
        if not np.all(np.isfinite(g)):
            raise ValueError("class embeddings contain non-finite entries")
        if np.any(priors < 0) or abs(priors.sum() - 1.0) > 1e-12:
            raise ValueError("priors must be nonnegative and sum to 1")
        g.setflags(write=False)
        priors.setflags(write=False)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "priors", priors)

    @property
    def n_classes(self) -> int:
        return self.g.shape[0]

    @property
    def dim(self) -> int:
        return self.g.shape[1]


@dataclass(frozen=True)
class FittedEnsembleModel:
    """Everything needed to predict: weights, per-source whiteners, and the
    label-encoder embeddings. Immutable and self-contained (predict takes
    raw per-source features and whitens internally)."""

    alpha: EnsembleWeights
    whiteners: tuple[WhitenTransform, ...]
    embeddings: ClassEmbeddings
    n_sources: int
    feature_dim: int
    n_classes: int
    objective_used: str
    h_score_final: float

    def __post_init__(self) -> None:
        if self.alpha.n_sources != self.n_sources or len(self.whiteners) != self.n_sources:
            raise DimMismatch(
                f"model declares {self.n_sources} sources but has "
                f"{self.alpha.n_sources} weights and {len(self.whiteners)} whiteners"
            )
        for j, w in enumerate(self.whiteners):
            if w.dim != self.feature_dim:
                raise DimMismatch(
                    f"whitener {j} has dim {w.dim}, model expects {self.feature_dim}"
                )
        if self.embeddings.g.shape != (self.n_classes, self.feature_dim):
            raise DimMismatch(
                f"embeddings are {self.embeddings.g.shape}, model expects "
                f"({self.n_classes}, {self.feature_dim})"
            )
        if not np.isfinite(self.h_score_final):
            raise ValueError("h_score_final must be finite")


def optimal_classifier(
    cms: list[ConditionalMeans] | tuple[ConditionalMeans, ...],
    alpha: EnsembleWeights,
) -> ClassEmbeddings:
    """Closed-form optimal label encoder: g(y) = sum_j alpha_j means_j[y]."""
    if len(cms) != alpha.n_sources:
        raise DimMismatch(f"{len(cms)} sources but {alpha.n_sources} weights")
    first = cms[0]
    for j, cm in enumerate(cms[1:], start=1):
        if cm.means.shape != first.means.shape:
            raise DimMismatch(
                f"source {j} means are {cm.means.shape}, source 0 {first.means.shape}"
            )
        if np.max(np.abs(cm.priors - first.priors)) > PRIOR_MATCH_TOL:
            raise PriorMismatch(f"source {j} priors differ from source 0")
    g = np.tensordot(alpha.alpha, np.stack([cm.means for cm in cms]), axes=1)
    return ClassEmbeddings(g=g, priors=first.priors)


def mix_features(
    features: list[FeatureMatrix] | tuple[FeatureMatrix, ...],
    alpha: EnsembleWeights,
) -> FeatureMatrix:
    """Entrywise weighted sum sum_j alpha_j F_j.

    An exactly one-hot alpha returns the selected matrix bit-identically
    (no arithmetic is applied).
    """
    if len(features) != alpha.n_sources:
        raise DimMismatch(f"{len(features)} matrices but {alpha.n_sources} weights")
    shape = features[0].data.shape
    for j, f in enumerate(features[1:], start=1):
        if f.data.shape != shape:
            raise DimMismatch(
                f"matrix {j} has shape {f.data.shape}, matrix 0 has {shape}"
            )
    a = alpha.alpha
    hot = np.flatnonzero(a == 1.0)
    if hot.size == 1 and np.all(np.delete(a, hot[0]) == 0.0):
        return FeatureMatrix(features[int(hot[0])].data)
    return FeatureMatrix(np.tensordot(a, np.stack([f.data for f in features]), axes=1))


def posterior(model: FittedEnsembleModel, mixed_feature_row: np.ndarray) -> np.ndarray:
    """Approximated class posterior for one whitened, mixed feature row.

    raw_y = priors[y] * (1 + <f, g(y)>), clipped below at zero and
    renormalized. If every raw value is zero the priors are returned.
    """
    f = np.asarray(mixed_feature_row, dtype=np.float64)
    if f.shape != (model.feature_dim,):
        raise DimMismatch(
            f"feature row has shape {f.shape}, model expects ({model.feature_dim},)"
        )
    raw = model.embeddings.priors * (1.0 + model.embeddings.g @ f)
    raw = np.clip(raw, 0.0, None)
    total = raw.sum()
    if total <= 0.0:
        return model.embeddings.priors.copy()
    return raw / total


def predict(
    model: FittedEnsembleModel,
    per_source_features: list[FeatureMatrix] | tuple[FeatureMatrix, ...],
) -> LabelVector:
    """Argmax-correlation prediction on raw per-source features.

    Each source is whitened with its stored transform, features are mixed
    with the model weights, and each row gets the class maximizing
    <feature, g(y)>. Ties break to the lowest class index.
    """
    if len(per_source_features) != model.n_sources:
        raise DimMismatch(
            f"model has {model.n_sources} sources, got {len(per_source_features)} matrices"
        )
    whitened = [
        apply_whitener(w, f) for w, f in zip(model.whiteners, per_source_features)
    ]
    mixed = mix_features(whitened, model.alpha)
    scores = mixed.data @ model.embeddings.g.T
    return LabelVector(labels=np.argmax(scores, axis=1), n_classes=model.n_classes)


def evaluate(pred: LabelVector, truth: LabelVector) -> float:
    """Fraction of exact label matches."""
    if len(pred) != len(truth):
        raise LengthMismatch(f"{len(pred)} predictions vs {len(truth)} truths")
    return float(np.mean(pred.labels == truth.labels))


def fit_ensemble(
    features: list[FeatureMatrix] | tuple[FeatureMatrix, ...],
    labels: LabelVector,
    cfg: OptimizerConfig | None = None,
    ridge: float | None = None,
) -> tuple[FittedEnsembleModel, OptimizerReport]:
    """Full training pipeline on k-shot data.

    Whitens each source on the shots (ridge=None applies the default rule),
    computes conditional means, optimizes the ensemble weights, and builds
    the closed-form label encoder from the weighted means.
    """
    cfg = cfg or OptimizerConfig()
    if not features:
        raise DimMismatch("need at least one source")
    whiteners = tuple(fit_whitener(f, ridge) for f in features)
    whitened = [apply_whitener(w, f) for w, f in zip(whiteners, features)]
    cms = [conditional_means(f, labels) for f in whitened]
    report = optimize_weights(cms, whitened, labels, cfg)
    embeddings = optimal_classifier(cms, report.final_alpha)
    # A diverged run may end on a non-finite objective entry; keep the last
    # finite one so the persisted model stays valid.
    finite_scores = [h for _, h in report.trajectory if np.isfinite(h)]
    model = FittedEnsembleModel(
        alpha=report.final_alpha,
        whiteners=whiteners,
        embeddings=embeddings,
        n_sources=len(features),
        feature_dim=features[0].dim,
        n_classes=labels.n_classes,
        objective_used=cfg.objective,
        h_score_final=finite_scores[-1] if finite_scores else float("nan"),
    )
    return model, report
