"""Weighted ensembles of black-box feature extractors.

Given per-source feature matrices extracted on a handful of labeled target
samples, this package scores how transferable each source (and any weighted
mixture of sources) is via H-scores, optimizes the mixture weights on the
sum-to-one hyperplane, and builds a closed-form maximal-correlation
classifier from the weighted class-conditional feature means.
"""

from .errors import (
    BadMagic,
    DimMismatch,
    EmptyClass,
    InsufficientSamples,
    LabelOutOfRange,
    LengthMismatch,
    MalformedDocument,
    McrmixError,
    NonFiniteObjective,
    NonNumericCell,
    NotZeroMean,
    OversizeMatrix,
    PriorMismatch,
    RaggedRows,
    SchemaVersionMismatch,
    SingularCovariance,
    TooManySources,
    TruncatedFile,
    ZeroMarginal,
)
from .features import (
    ConditionalMeans,
    FeatureMatrix,
    LabelVector,
    WhitenTransform,
    apply_whitener,
    conditional_means,
    default_ridge,
    fit_whitener,
)
from .hscore import (
    GramMatrix,
    HScoreValue,
    ensemble_h_score,
    gram_matrix,
    h_score_one_sided_full,
    h_score_simplified,
    h_score_two_sided,
)
from .optimizer import (
    EnsembleWeights,
    OptimizerConfig,
    OptimizerReport,
    grid_oracle,
    optimize_weights,
    pgd_step,
    project_to_hyperplane,
)
from .classifier import (
    ClassEmbeddings,
    FittedEnsembleModel,
    evaluate,
    fit_ensemble,
    mix_features,
    optimal_classifier,
    posterior,
    predict,
)
from .bench import (
    DiscreteJointSpec,
    SyntheticTaskSpec,
    build_pool,
    chi2_divergence,
    draw_target,
    generate_task,
    population_conditional_means,
    random_discrete_instance,
    run_ablation,
)
from .formats import (
    load_model,
    read_csv_features,
    read_fmx,
    read_lbl,
    save_model,
    write_fmx,
    write_lbl,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
