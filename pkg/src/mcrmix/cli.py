"""Command-line pipeline: transferability scoring, fitting, prediction,
evaluation, and the synthetic benchmark.

Machine-readable output goes to stdout as key=value lines (and CSV files);
human-oriented notes go to stderr. Exit codes: 0 success, 1 data or
validation error, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bench
from .classifier import evaluate, fit_ensemble, mix_features, optimal_classifier, predict
from .errors import DimMismatch, EmptyClass, McrmixError
from .features import (
    FeatureMatrix,
    LabelVector,
    conditional_means,
    default_ridge,
    sample_covariance,
)
from .hscore import (
    ensemble_h_score,
    gram_matrix,
    h_score_one_sided_full,
    h_score_two_sided,
)
from .optimizer import EnsembleWeights, OptimizerConfig
from .formats import read_fmx, read_lbl, load_model, save_model, write_lbl


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _load_inputs(feature_paths, label_path):
    labels = read_lbl(label_path)
    features = []
    for path in feature_paths:
        fm = read_fmx(path)
        if fm.n_samples != len(labels):
            raise DimMismatch(
                f"{path} has {fm.n_samples} rows but {label_path} has {len(labels)} labels"
            )
        features.append(fm)
    dims = {f.dim for f in features}
    if len(dims) != 1:
        raise DimMismatch(f"feature files disagree on dimension: {sorted(dims)}")
    return features, labels


def _require_all_classes(labels: LabelVector, label_path) -> None:
    counts = labels.class_counts()
    missing = np.flatnonzero(counts == 0)
    if missing.size:
        raise EmptyClass(
            f"{label_path} has no samples for classes {missing.tolist()}: k-shot "
            f"training requires k samples for each of the {labels.n_classes} classes"
        )


def _print_kv(key: str, value) -> None:
    print(f"{key}={value}")


def _format_alpha(alpha: EnsembleWeights) -> str:
    return ",".join(repr(float(x)) for x in alpha.alpha)


def cmd_hscore(args) -> int:
    features, labels = _load_inputs(args.features, args.labels)
    _require_all_classes(labels, args.labels)
    # center per source; whitening is deliberately not applied here so that
    # degenerate inputs (e.g. constant features) still score rather than fail
    centered = [FeatureMatrix(f.data - f.data.mean(axis=0)) for f in features]
    cms = [conditional_means(f, labels) for f in centered]
    gram = gram_matrix(cms)
    m = len(features)
    uniform = EnsembleWeights(np.full(m, 1.0 / m))
    mixed = mix_features(centered, uniform)
    ridge = args.ridge
    if args.variant == "simplified":
        value = ensemble_h_score(gram, uniform).value
        ridge_used = 0.0
    elif args.variant == "full":
        if ridge is None:
            ridge_used = default_ridge(sample_covariance(mixed.data))
        else:
            ridge_used = ridge
        value = h_score_one_sided_full(mixed, labels, ridge_used).value
    else:  # two-sided, scored at the closed-form optimal encoder
        embeddings = optimal_classifier([conditional_means(mixed, labels)],
                                        EnsembleWeights(np.array([1.0])))
        value = h_score_two_sided(mixed, labels, embeddings.g).value
        ridge_used = 0.0
    _print_kv("variant", args.variant)
    _print_kv("value", repr(float(value)))
    _print_kv("ridge", repr(float(ridge_used)))
    _print_kv("n_sources", m)
    for j in range(m):
        _print_kv(f"g_diag_{j}", repr(float(gram.g[j, j])))
    return 0


def cmd_fit(args) -> int:
    features, labels = _load_inputs(args.features, args.labels)
    _require_all_classes(labels, args.labels)
    cfg = OptimizerConfig(
        learning_rate=args.lr,
        max_iters=args.max_iters,
        tol=args.tol,
        objective=args.objective,
        seed=args.seed,
    )
    # run header: every effective setting, for provenance
    _print_kv("objective", cfg.objective)
    _print_kv("learning_rate", repr(cfg.learning_rate))
    _print_kv("max_iters", cfg.max_iters)
    _print_kv("tol", repr(cfg.tol))
    _print_kv("seed", "none" if cfg.seed is None else cfg.seed)
    _print_kv("ridge", "default" if args.ridge is None else repr(args.ridge))
    model, report = fit_ensemble(features, labels, cfg, args.ridge)
    save_model(args.out, model)
    _print_kv("alpha", _format_alpha(model.alpha))
    _print_kv("h_score_initial", repr(float(report.trajectory[0][1])))
    _print_kv("h_score_final", repr(float(model.h_score_final)))
    _print_kv("iterations", report.iterations_used)
    _print_kv("converged", str(report.converged).lower())
    _print_kv("diverged", str(report.diverged).lower())
    _print_kv("model", args.out)
    print(
        f"fitted {model.n_sources}-source ensemble on {len(labels)} samples "
        f"({labels.n_classes} classes); model written to {args.out}",
        file=sys.stderr,
    )
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    features = [read_fmx(path) for path in args.features]
    if len(features) != model.n_sources:
        raise DimMismatch(
            f"model expects {model.n_sources} feature files, got {len(features)}"
        )
    for path, fm in zip(args.features, features):
        if fm.dim != model.feature_dim:
            raise DimMismatch(
                f"{path} has dimension {fm.dim}, model expects {model.feature_dim}"
            )
        if fm.n_samples != features[0].n_samples:
            raise DimMismatch(f"{path} row count differs from {args.features[0]}")
    labels = predict(model, features)
    write_lbl(args.out, labels)
    _print_kv("n", len(labels))
    _print_kv("out", args.out)
    return 0


def cmd_eval(args) -> int:
    pred = read_lbl(args.predictions)
    truth = read_lbl(args.truth)
    _print_kv("accuracy", repr(evaluate(pred, truth)))
    return 0


def cmd_synth(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = bench.run_ablation(args.pool_seed, args.k_shot, args.pool)
    table = "method,accuracy\n" + "".join(
        f"{method},{repr(float(acc))}\n" for method, acc in rows
    )
    (out_dir / "ablation.csv").write_text(table, encoding="utf-8")
    # persist the generated task files so the run can be replayed by hand
    pool = bench.build_pool(args.pool_seed, args.pool)
    shots_x, shots_y = bench.draw_target(pool, args.k_shot * pool.n_classes, [pool.seed, 101])
    test_x, test_y = bench.draw_target(pool, bench.TEST_SPLIT_SIZE, [pool.seed, 202])
    from .formats import write_fmx  # local import keeps module top tidy

    for j, extractor in enumerate(pool.extractors):
        write_fmx(out_dir / f"shots_src{j}.fmx", FeatureMatrix(extractor(shots_x)))
        write_fmx(out_dir / f"test_src{j}.fmx", FeatureMatrix(extractor(test_x)))
    write_lbl(out_dir / "shots.lbl", shots_y)
    write_lbl(out_dir / "test.lbl", test_y)
    for method, acc in rows:
        _print_kv(method, repr(float(acc)))
    _print_kv("table", str(out_dir / "ablation.csv"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcrmix",
        description=(
            "Weighted ensembles of black-box feature extractors: score "
            "transferability, fit ensemble weights and the closed-form "
            "classifier, predict, evaluate, and run the synthetic benchmark."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hscore", help="score feature transferability")
    p.add_argument("features", nargs="+", help="FMX feature files, one per source")
    p.add_argument("--labels", required=True, help="LBL label file")
    p.add_argument(
        "--variant",
        choices=("simplified", "full", "two-sided"),
        default="simplified",
    )
    p.add_argument("--ridge", type=float, default=None)
    p.set_defaults(func=cmd_hscore)

    p = sub.add_parser("fit", help="fit ensemble weights and classifier")
    p.add_argument("features", nargs="+", help="FMX feature files, one per source")
    p.add_argument("--labels", required=True, help="LBL label file")
    p.add_argument("--out", required=True, help="output model path")
    p.add_argument("--objective", choices=("full", "simplified"), default="full")
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--max-iters", type=_positive_int, default=500)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--ridge", type=float, default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict labels with a fitted model")
    p.add_argument("model", help="model document from fit")
    p.add_argument("features", nargs="+", help="FMX feature files, one per source")
    p.add_argument("--out", required=True, help="output LBL path")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="accuracy of predictions against truth")
    p.add_argument("predictions", help="LBL file of predicted labels")
    p.add_argument("truth", help="LBL file of true labels")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="run the synthetic multi-source benchmark")
    p.add_argument("--pool-seed", type=int, required=True)
    p.add_argument("--k-shot", type=_positive_int, required=True)
    p.add_argument("--pool", choices=bench.POOL_KINDS, default="two_domain")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (McrmixError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
