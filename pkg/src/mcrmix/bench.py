"""Synthetic multi-source benchmarks and exact small-instance oracles.

Two kinds of fixtures live here:

* Gaussian tasks (:func:`generate_task`, :func:`build_pool`): class means
  drawn from a seeded Gaussian, isotropic noise, and linear "source
  extractor" surrogates trained on full synthetic source data. Pools come
  in two kinds: ``two_domain`` (two groups of tasks sharing a class-mean
  draw, the target belonging to the first group) and ``info_noise``
  (sources that carry the target's class structure vs. sources whose
  features are projected onto the orthogonal complement of the
  between-class span and therefore carry none).
* Discrete joints (:class:`DiscreteJointSpec`, :func:`chi2_divergence`):
  tiny enumerable distributions where the variational chi-squared loss of
  a label encoder can be evaluated exactly, used as the ground-truth
  oracle for the closed-form classifier.

:func:`run_ablation` trains the four method arms (single-source average,
uniform weights, weighted with the full objective, weighted with the
simplified objective) on k-shot target data and scores them on a held-out
split of 1,000 samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifier import (
    FittedEnsembleModel,
    evaluate,
    optimal_classifier,
    predict,
)
from .errors import ZeroMarginal
from .features import (
    ConditionalMeans,
    FeatureMatrix,
    LabelVector,
    apply_whitener,
    conditional_means,
    fit_whitener,
)
from .hscore import ensemble_h_score, gram_matrix
from .optimizer import EnsembleWeights, OptimizerConfig, optimize_weights

MAX_X_SUPPORT = 8
MAX_Y_SUPPORT = 4

TEST_SPLIT_SIZE = 1000

POOL_KINDS = ("two_domain", "info_noise")


@dataclass(frozen=True)
class SyntheticTaskSpec:
    """Parameters of one Gaussian classification task."""

    n_classes: int
    feature_dim: int
    class_mean_scale: float
    noise_sigma: float
    n_samples: int
    seed: int

    def __post_init__(self) -> None:
        if self.n_classes < 1 or self.feature_dim < 1 or self.n_samples < 1:
            raise ValueError("n_classes, feature_dim and n_samples must be positive")
        if self.class_mean_scale < 0 or self.noise_sigma <= 0:
            raise ValueError("class_mean_scale must be >= 0 and noise_sigma > 0")
        if self.n_samples < self.n_classes:
            raise ValueError("need at least one sample per class")


def _balanced_counts(total: int, n_classes: int) -> np.ndarray:
    counts = np.full(n_classes, total // n_classes)
    counts[: total % n_classes] += 1
    return counts


def generate_task(spec: SyntheticTaskSpec):
    """Draw one task: returns (features, labels, ground-truth class means).

    Class means are drawn once from a unit Gaussian scaled by
    class_mean_scale; samples are balanced across classes with isotropic
    noise. Fully deterministic given the seed.
    """
    rng = np.random.default_rng(spec.seed)
    truth = rng.standard_normal((spec.n_classes, spec.feature_dim)) * spec.class_mean_scale
    counts = _balanced_counts(spec.n_samples, spec.n_classes)
    rows = []
    labels = []
    for y, n_y in enumerate(counts):
        rows.append(truth[y] + spec.noise_sigma * rng.standard_normal((n_y, spec.feature_dim)))
        labels.append(np.full(n_y, y, dtype=np.int64))
    return (
        FeatureMatrix(np.concatenate(rows)),
        LabelVector(np.concatenate(labels), spec.n_classes),
        truth,
    )


@dataclass(frozen=True)
class DiscreteJointSpec:
    """A joint distribution on a tiny support with a deterministic feature
    per input value, small enough for exact enumeration."""

    joint: np.ndarray
    feature_table: np.ndarray

    def __post_init__(self) -> None:
        joint = np.array(self.joint, dtype=np.float64)
        table = np.array(self.feature_table, dtype=np.float64)
        if joint.ndim != 2:
            raise ValueError("joint must be a 2-D table")
        if joint.shape[0] > MAX_X_SUPPORT or joint.shape[1] > MAX_Y_SUPPORT:
            raise ValueError(
                f"support is limited to {MAX_X_SUPPORT}x{MAX_Y_SUPPORT}, "
                f"got {joint.shape}"
            )
        if np.any(joint < 0) or abs(joint.sum() - 1.0) > 1e-12:
            raise ValueError("joint entries must be nonnegative and sum to 1")
        if np.any(joint.sum(axis=0) <= 0):
            raise ZeroMarginal("every class needs positive marginal probability")
        if table.ndim != 2 or table.shape[0] != joint.shape[0]:
            raise ValueError("feature table must have one row per input value")
        if not np.all(np.isfinite(table)):
            raise ValueError("feature table contains non-finite entries")
        joint.setflags(write=False)
        table.setflags(write=False)
        object.__setattr__(self, "joint", joint)
        object.__setattr__(self, "feature_table", table)

    @property
    def x_support(self) -> int:
        return self.joint.shape[0]

    @property
    def y_support(self) -> int:
        return self.joint.shape[1]

    @property
    def dim(self) -> int:
        return self.feature_table.shape[1]


def chi2_divergence(spec: DiscreteJointSpec, class_embeddings) -> float:
    """Exact variational chi-squared loss of a label encoder.

    sum_x P(x) sum_y [P_model(y|x) - P(y|x)]^2 / P(y), with
    P_model(y|x) = P(y) (1 + f(x)^T g(y)) taken raw (no clipping), summed
    over the full support.
    """
    g = np.asarray(class_embeddings.g, dtype=np.float64)
    if g.shape != (spec.y_support, spec.dim):
        raise ValueError(
            f"embeddings must be {spec.y_support}x{spec.dim}, got {g.shape}"
        )
    p_x = spec.joint.sum(axis=1)
    p_y = spec.joint.sum(axis=0)
    if np.any(p_y <= 0):
        raise ZeroMarginal("every class needs positive marginal probability")
    support = p_x > 0
    cond = spec.joint[support] / p_x[support, None]
    model = p_y[None, :] * (1.0 + spec.feature_table[support] @ g.T)
    return float(np.sum(p_x[support, None] * (model - cond) ** 2 / p_y[None, :]))


def population_conditional_means(spec: DiscreteJointSpec) -> ConditionalMeans:
    """Exact conditional feature means E[f|Y=y] and priors of the joint."""
    p_y = spec.joint.sum(axis=0)
    means = (spec.joint / p_y).T @ spec.feature_table
    return ConditionalMeans(means=means, priors=p_y)


def random_discrete_instance(
    seed: int,
    x_support: int = 6,
    y_support: int = 3,
    dim: int = 2,
):
    """Random joint with rational cell probabilities and a feature table
    whitened under the input marginal (zero mean, identity second moment),
    which makes the weighted conditional means the exact minimizer of
    :func:`chi2_divergence`.

    Returns (spec, counts): integer cell counts are kept so tests can
    materialize a sample set whose empirical distribution equals the joint.
    """
    if x_support <= dim:
        raise ValueError("need x_support > dim for a full-rank feature table")
    rng = np.random.default_rng(seed)
    counts = rng.integers(1, 9, size=(x_support, y_support)).astype(np.int64)
    joint = counts / counts.sum()
    p_x = joint.sum(axis=1)
    table = rng.standard_normal((x_support, dim))
    table = table - p_x @ table
    cov = (table * p_x[:, None]).T @ table
    eigval, eigvec = np.linalg.eigh(cov)
    table = table @ ((eigvec / np.sqrt(eigval)) @ eigvec.T)
    return DiscreteJointSpec(joint=joint, feature_table=table), counts


@dataclass(frozen=True)
class LinearExtractor:
    """Affine source-extractor surrogate: f(x) = weight @ (x - offset)."""

    weight: np.ndarray
    offset: np.ndarray

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.offset) @ self.weight.T


@dataclass(frozen=True)
class SourcePool:
    """A target task plus the trained source-extractor surrogates."""

    kind: str
    seed: int
    class_means: np.ndarray  # target ground truth, n_classes x input_dim
    noise_sigma: float
    extractors: tuple[LinearExtractor, ...]
    same_distribution: tuple[bool, ...]  # which sources share the target's domain

    @property
    def n_classes(self) -> int:
        return self.class_means.shape[0]

    @property
    def n_sources(self) -> int:
        return len(self.extractors)


def draw_target(pool: SourcePool, total: int, seed) -> tuple[np.ndarray, LabelVector]:
    """Balanced draw of raw target inputs; deterministic given the seed."""
    rng = np.random.default_rng(seed)
    counts = _balanced_counts(total, pool.n_classes)
    rows = []
    labels = []
    for y, n_y in enumerate(counts):
        rows.append(
            pool.class_means[y]
            + pool.noise_sigma * rng.standard_normal((n_y, pool.class_means.shape[1]))
        )
        labels.append(np.full(n_y, y, dtype=np.int64))
    return np.concatenate(rows), LabelVector(np.concatenate(labels), pool.n_classes)


def _train_extractor(class_means: np.ndarray, noise_sigma: float, rng) -> LinearExtractor:
    """Nearest-class-mean surrogate: whitening of the source's own data
    composed with projection onto its whitened class means."""
    n_classes, input_dim = class_means.shape
    per_class = 80
    rows = np.concatenate(
        [m + noise_sigma * rng.standard_normal((per_class, input_dim)) for m in class_means]
    )
    labels = LabelVector(np.repeat(np.arange(n_classes), per_class), n_classes)
    whitener = fit_whitener(FeatureMatrix(rows))
    whitened = apply_whitener(whitener, FeatureMatrix(rows))
    centers = conditional_means(whitened, labels).means
    return LinearExtractor(weight=centers @ whitener.transform, offset=whitener.mean)


def _noise_extractor(class_means: np.ndarray, rng) -> LinearExtractor:
    """Extractor whose conditional means under the target are exactly equal:
    projects onto the orthogonal complement of the between-class span."""
    n_classes = class_means.shape[0]
    grand = class_means.mean(axis=0)
    centered = class_means - grand
    _, _, vt = np.linalg.svd(centered, full_matrices=True)
    complement = vt[n_classes - 1 :]  # between-class span has rank <= K-1
    mix = np.linalg.qr(rng.standard_normal((complement.shape[0], n_classes)))[0].T
    return LinearExtractor(weight=mix @ complement, offset=grand)


def build_pool(
    pool_seed: int,
    kind: str = "two_domain",
    n_classes: int = 3,
    input_dim: int = 24,
    class_mean_scale: float = 0.8,
    noise_sigma: float = 1.0,
    task_jitter: float = 0.35,
    domain_relatedness: float = 0.5,
    n_same: int = 3,
    n_other: int = 4,
) -> SourcePool:
    """Build the source pool for one target task.

    ``two_domain``: the target and ``n_same`` source tasks live in domain A
    (the target's class-mean draw plus per-task jitter); ``n_other`` source
    tasks live in domain B, whose class means interpolate between domain A's
    and a fresh draw with weight ``domain_relatedness``. Classes keep their
    identity across domains, so cross-domain extractors are partially
    aligned with the target rather than arbitrary, mirroring source models
    that saw the same label set under a shifted distribution.

    ``info_noise``: ``n_same`` sources trained on the target's distribution
    (small jitter) plus ``n_other`` sources producing features with no class
    information at all.
    """
    if kind not in POOL_KINDS:
        raise ValueError(f"kind must be one of {POOL_KINDS}")
    rng = np.random.default_rng([pool_seed, 7])
    domain_a = rng.standard_normal((n_classes, input_dim)) * class_mean_scale
    extractors: list[LinearExtractor] = []
    same: list[bool] = []
    if kind == "two_domain":
        fresh = rng.standard_normal((n_classes, input_dim)) * class_mean_scale
        rho = domain_relatedness
        domain_b = rho * domain_a + np.sqrt(1.0 - rho * rho) * fresh
        target_means = domain_a + task_jitter * rng.standard_normal(domain_a.shape)
        for domain, n_tasks, is_same in ((domain_a, n_same, True), (domain_b, n_other, False)):
            for _ in range(n_tasks):
                task_means = domain + task_jitter * rng.standard_normal(domain.shape)
                extractors.append(_train_extractor(task_means, noise_sigma, rng))
                same.append(is_same)
    else:
        target_means = domain_a
        for _ in range(n_same):
            task_means = target_means + task_jitter * rng.standard_normal(target_means.shape)
            extractors.append(_train_extractor(task_means, noise_sigma, rng))
            same.append(True)
        for _ in range(n_other):
            extractors.append(_noise_extractor(target_means, rng))
            same.append(False)
    return SourcePool(
        kind=kind,
        seed=pool_seed,
        class_means=target_means,
        noise_sigma=noise_sigma,
        extractors=tuple(extractors),
        same_distribution=tuple(same),
    )


def _one_hot(j: int, m: int) -> EnsembleWeights:
    alpha = np.zeros(m)
    alpha[j] = 1.0
    return EnsembleWeights(alpha)


def run_ablation(pool_seed: int, k_shot: int, pool_kind: str = "two_domain", **pool_params):
    """Train the four method arms on k-shot data and score them held-out.

    Returns [(method, accuracy), ...] rows for single_avg (mean accuracy of
    the per-source models), uniform (equal weights), weighted_full and
    weighted_simplified. Deterministic given (pool_seed, k_shot, pool_kind);
    extra keyword arguments are forwarded to :func:`build_pool`.
    """
    if k_shot < 1:
        raise ValueError("k_shot must be at least 1")
    pool = build_pool(pool_seed, pool_kind, **pool_params)
    shots_x, shots_y = draw_target(pool, k_shot * pool.n_classes, [pool.seed, 101])
    test_x, test_y = draw_target(pool, TEST_SPLIT_SIZE, [pool.seed, 202])
    shot_feats = [FeatureMatrix(e(shots_x)) for e in pool.extractors]
    test_feats = [FeatureMatrix(e(test_x)) for e in pool.extractors]

    whiteners = tuple(fit_whitener(f) for f in shot_feats)
    whitened = [apply_whitener(w, f) for w, f in zip(whiteners, shot_feats)]
    cms = [conditional_means(f, shots_y) for f in whitened]
    gram = gram_matrix(cms)
    m = pool.n_sources

    def accuracy_for(alpha: EnsembleWeights, objective: str, h_final: float) -> float:
        model = FittedEnsembleModel(
            alpha=alpha,
            whiteners=whiteners,
            embeddings=optimal_classifier(cms, alpha),
            n_sources=m,
            feature_dim=shot_feats[0].dim,
            n_classes=pool.n_classes,
            objective_used=objective,
            h_score_final=h_final,
        )
        return evaluate(predict(model, test_feats), test_y)

    single = [
        accuracy_for(a, "simplified", ensemble_h_score(gram, a).value)
        for a in (_one_hot(j, m) for j in range(m))
    ]
    uniform = EnsembleWeights(np.full(m, 1.0 / m))
    rows = [
        ("single_avg", float(np.mean(single))),
        ("uniform", accuracy_for(uniform, "simplified", ensemble_h_score(gram, uniform).value)),
    ]
    for label, objective in (("weighted_full", "full"), ("weighted_simplified", "simplified")):
        report = optimize_weights(cms, whitened, shots_y, OptimizerConfig(objective=objective))
        finite = [h for _, h in report.trajectory if np.isfinite(h)]
        rows.append((label, accuracy_for(report.final_alpha, objective, finite[-1])))
    return rows
