"""Ensemble-weight optimization on the sum-to-one hyperplane.

The weight vector alpha lives on {alpha : sum_j alpha_j = 1}; negative
entries are legal. Two objectives are supported:

* ``simplified`` runs projected gradient ascent on the quadratic
  alpha^T G alpha (gradient 2 G alpha). The quadratic is convex, so ascent
  is monotone but can be unbounded along tangent directions; a divergence
  guard stops runaway iterates.
* ``full`` re-evaluates the full one-sided H-score of the literally mixed
  feature matrix sum_j alpha_j F_j at every iteration, with a
  central-finite-difference gradient projected onto the hyperplane's
  tangent space. With the per-evaluation ridge rule this objective is
  invariant along rays through the origin, hence bounded; it is the
  default.

:func:`grid_oracle` provides an exhaustive brute-force argmax over the
hyperplane for up to three sources, used by the test suite as an
independent check on the ascent.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, NonFiniteObjective, TooManySources
from .features import (
    ConditionalMeans,
    FeatureMatrix,
    LabelVector,
    conditional_means,
    default_ridge,
    sample_covariance,
)
from .hscore import gram_matrix

# Snap tolerance: a point this close to the hyperplane is returned unchanged,
# which makes the projection exactly idempotent in floating point.
_ALREADY_PROJECTED_TOL = 1e-12

# Divergence guard thresholds.
ALPHA_CEILING = 100.0
OBJECTIVE_CEILING = 1e6

FD_STEP = 1e-5

OBJECTIVES = ("simplified", "full")


@dataclass(frozen=True)
class EnsembleWeights:
    """Source weights constrained to sum to 1 (within 1e-9)."""

    alpha: np.ndarray

    def __post_init__(self) -> None:
        alpha = np.array(self.alpha, dtype=np.float64)
        if alpha.ndim != 1 or alpha.size < 1:
            raise DimMismatch("weights must be a non-empty vector")
        if not np.all(np.isfinite(alpha)):
            raise ValueError("weights contain non-finite entries")
        if abs(alpha.sum() - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {alpha.sum()!r}")
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)

    @property
    def n_sources(self) -> int:
        return self.alpha.size


@dataclass(frozen=True)
class OptimizerConfig:
    learning_rate: float = 0.01
    max_iters: int = 500
    tol: float = 1e-6
    objective: str = "full"
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")


@dataclass(frozen=True)
class OptimizerReport:
    final_alpha: EnsembleWeights
    trajectory: tuple[tuple[int, float], ...]
    converged: bool
    iterations_used: int
    diverged: bool


def project_to_hyperplane(alpha: np.ndarray) -> EnsembleWeights:
    """Euclidean projection onto {alpha : sum alpha_j = 1}.

    alpha_j <- alpha_j - mean(alpha) + 1/M. Points already on the
    hyperplane (|sum - 1| <= 1e-12 * max(1, ||alpha||_1)) are returned
    unchanged so the projection is exactly idempotent.
    """
    v = np.asarray(alpha, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise DimMismatch("weights must be a non-empty vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("weights contain non-finite entries")
    total = float(v.sum())
    if abs(total - 1.0) <= _ALREADY_PROJECTED_TOL * max(1.0, float(np.abs(v).sum())):
        return EnsembleWeights(v)
    m = v.size
    return EnsembleWeights(v - total / m + 1.0 / m)


def pgd_step(gram, alpha: EnsembleWeights, learning_rate: float) -> EnsembleWeights:
    """One ascent step on the quadratic: project(alpha + lr * 2 G alpha)."""
    g = gram.g
    if g.shape[0] != alpha.n_sources:
        raise DimMismatch(
            f"Gram matrix is {g.shape[0]}x{g.shape[0]} but alpha has "
            f"{alpha.n_sources} entries"
        )
    if learning_rate < 0:
        raise ValueError("learning_rate must be nonnegative")
    gradient = 2.0 * (g @ alpha.alpha)
    return project_to_hyperplane(alpha.alpha + learning_rate * gradient)


def mixed_full_objective(
    features: list[FeatureMatrix] | tuple[FeatureMatrix, ...],
    labels: LabelVector,
):
    """Return f(alpha) = full one-sided H-score of sum_j alpha_j F_j.

    The ridge rule (1e-3 * trace / dim) is resolved per evaluation, which
    makes the objective scale-invariant along rays and therefore bounded.
    Inlined rather than routed through h_score_one_sided_full because mixed
    features are generally not zero-mean to 1e-6 at off-hyperplane probe
    points used by finite differences.
    """
    stack = np.stack([f.data for f in features])
    idx = labels.labels
    counts = labels.class_counts()
    if np.any(counts == 0):
        # conditional_means would raise; fail the same way, eagerly
        conditional_means(features[0], labels)
    priors = counts / len(labels)
    dim = stack.shape[2]

    def objective(a: np.ndarray) -> float:
        mixed = np.tensordot(a, stack, axes=1)
        cov = sample_covariance(mixed)
        ridge = default_ridge(cov)
        sums = np.zeros((labels.n_classes, dim))
        np.add.at(sums, idx, mixed)
        means = sums / counts[:, None]
        centered = means - priors @ means
        between = (centered * priors[:, None]).T @ centered
        value = float(np.trace(np.linalg.solve(cov + ridge * np.eye(dim), between)))
        return value

    return objective


def _make_objective(cms, features, labels, kind: str):
    if kind == "simplified":
        g = gram_matrix(cms).g

        def objective(a: np.ndarray) -> float:
            return float(a @ g @ a)

        def gradient(a: np.ndarray) -> np.ndarray:
            return 2.0 * (g @ a)

        return objective, gradient

    objective = mixed_full_objective(features, labels)

    def gradient(a: np.ndarray) -> np.ndarray:
        grad = np.empty(a.size)
        for j in range(a.size):
            probe = np.zeros(a.size)
            probe[j] = FD_STEP
            grad[j] = (objective(a + probe) - objective(a - probe)) / (2.0 * FD_STEP)
        return grad - grad.mean()  # tangent-space projection

    return objective, gradient


def optimize_weights(
    cms: list[ConditionalMeans] | tuple[ConditionalMeans, ...],
    features: list[FeatureMatrix] | tuple[FeatureMatrix, ...],
    labels: LabelVector,
    cfg: OptimizerConfig | None = None,
) -> OptimizerReport:
    """Maximize the configured ensemble objective over the hyperplane.

    Initialization is uniform (1/M each) when cfg.seed is None, else uniform
    plus Gaussian noise with sigma = 0.1/M, projected. Terminates when the
    infinity-norm step drops below cfg.tol, at cfg.max_iters, or when the
    divergence guard trips (any |alpha_j| > 100 or objective > 1e6).
    """
    cfg = cfg or OptimizerConfig()
    m = len(cms)
    if m < 1 or len(features) != m:
        raise DimMismatch(
            f"{m} conditional-mean sets but {len(features)} feature matrices"
        )
    objective, gradient = _make_objective(cms, features, labels, cfg.objective)

    if cfg.seed is None:
        a = np.full(m, 1.0 / m)
    else:
        rng = np.random.default_rng(cfg.seed)
        a = np.full(m, 1.0 / m) + rng.normal(0.0, 0.1 / m, size=m)
    a = project_to_hyperplane(a).alpha

    h = objective(a)
    if np.isnan(h):
        raise NonFiniteObjective("objective is NaN at the initial point")
    trajectory: list[tuple[int, float]] = [(0, h)]
    converged = False
    diverged = not np.isfinite(h)
    iterations = 0
    unvisited_vertices = set(range(m)) if cfg.objective == "full" else set()
    while not diverged and iterations < cfg.max_iters:
        iterations += 1
        grad = gradient(a)
        if cfg.objective == "simplified":
            # ascent on the convex quadratic is monotone for any step size
            new = project_to_hyperplane(a + cfg.learning_rate * grad).alpha
            h_new = objective(new)
        else:
            # the full objective is not quadratic; halve the step until it
            # does not decrease, so iterates cannot wander along flat ridges
            rate = cfg.learning_rate
            for _ in range(40):
                new = project_to_hyperplane(a + rate * grad).alpha
                h_new = objective(new)
                if np.isnan(h_new) or h_new >= h - 1e-12:
                    break
                rate *= 0.5
        if np.isnan(h_new):
            raise NonFiniteObjective(f"objective is NaN at iteration {iterations}")
        step = float(np.max(np.abs(new - a)))
        if step <= cfg.tol and unvisited_vertices:
            # ascent stalled: the objective can have several basins, so probe
            # the single-source vertices and keep climbing from a better one
            best_j, best_value = -1, h_new
            for j in sorted(unvisited_vertices):
                vertex = np.zeros(m)
                vertex[j] = 1.0
                value = objective(vertex)
                if np.isfinite(value) and value > best_value + 1e-12:
                    best_j, best_value = j, value
            if best_j >= 0:
                unvisited_vertices.discard(best_j)
                new = np.zeros(m)
                new[best_j] = 1.0
                h_new = best_value
                step = float(np.max(np.abs(new - a)))
            else:
                unvisited_vertices.clear()
        trajectory.append((iterations, h_new))
        a = new
        h = h_new
        if not np.isfinite(h) or np.max(np.abs(a)) > ALPHA_CEILING or h > OBJECTIVE_CEILING:
            diverged = True
            break
        if step <= cfg.tol:
            converged = True
            break
    return OptimizerReport(
        final_alpha=EnsembleWeights(a),
        trajectory=tuple(trajectory),
        converged=converged,
        iterations_used=iterations,
        diverged=diverged,
    )


def grid_oracle(
    cms,
    features,
    labels: LabelVector,
    objective: str,
    bounds: list[tuple[float, float]] | tuple[tuple[float, float], ...],
    step: float,
) -> EnsembleWeights:
    """Brute-force argmax of the chosen objective over a hyperplane grid.

    The first M-1 coordinates range over ``bounds`` with spacing ``step``;
    the last coordinate is 1 minus their sum. Ties break to the lowest grid
    index (grids enumerate lexicographically). Only M <= 3 is supported.
    """
    m = len(cms)
    if m > 3:
        raise TooManySources(f"grid search supports at most 3 sources, got {m}")
    if m == 1:
        return EnsembleWeights(np.array([1.0]))
    if step <= 0:
        raise ValueError("step must be positive")
    if len(bounds) != m - 1:
        raise DimMismatch(f"need {m - 1} coordinate bounds, got {len(bounds)}")
    fn, _ = _make_objective(cms, features, labels, objective)
    grids = [np.arange(lo, hi + step / 2.0, step) for lo, hi in bounds]
    best_value = -np.inf
    best: np.ndarray | None = None
    for combo in itertools.product(*grids):
        a = np.empty(m)
        a[: m - 1] = combo
        a[m - 1] = 1.0 - sum(combo)
        value = fn(a)
        if value > best_value:
            best_value = value
            best = a
    assert best is not None
    return EnsembleWeights(best)
