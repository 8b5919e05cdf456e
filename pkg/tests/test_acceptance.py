"""Release acceptance suite.

Each test prints one ``ACCEPTANCE <name>: PASS|FAIL`` line and then asserts,
so a plain ``pytest -s tests/test_acceptance.py`` doubles as the acceptance
report.

Known failing check: ``pair_score_identity_at_optimal_encoder`` asserts that
the two-sided score evaluated at the closed-form optimal encoder equals the
one-sided score. The measurable relationship carries an extra factor 1/2
(the encoder maximizes the pair score, and that maximum is half the
one-sided score; see tests/test_hscore.py::
test_pair_score_at_optimal_encoder_is_half_one_sided for the verified
identity). The assertion is retained as stated rather than silently
corrected, so this one criterion reports FAIL by design of the suite.
"""

import time

import numpy as np
import pytest

from mcrmix import (
    ClassEmbeddings,
    EnsembleWeights,
    FeatureMatrix,
    LabelVector,
    OptimizerConfig,
    chi2_divergence,
    conditional_means,
    ensemble_h_score,
    fit_ensemble,
    gram_matrix,
    grid_oracle,
    h_score_one_sided_full,
    h_score_simplified,
    h_score_two_sided,
    load_model,
    mix_features,
    optimal_classifier,
    optimize_weights,
    population_conditional_means,
    predict,
    random_discrete_instance,
    read_fmx,
    read_lbl,
    run_ablation,
    save_model,
    write_fmx,
    write_lbl,
)
from mcrmix.bench import build_pool, draw_target
from mcrmix.optimizer import mixed_full_objective
from conftest import random_instance, random_labels

FIT_CFG = OptimizerConfig(learning_rate=0.05, max_iters=3000)


def report(name, ok, detail=""):
    suffix = f" ({detail})" if detail else ""
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}{suffix}")
    return ok


def test_pair_score_identity_at_optimal_encoder():
    rng = np.random.default_rng(101)
    start = time.time()
    worst = 0.0
    ratios = []
    for _ in range(200):
        features, labels = random_instance(rng)
        g = optimal_classifier(
            [conditional_means(features, labels)], EnsembleWeights(np.array([1.0]))
        ).g
        two = h_score_two_sided(features, labels, g).value
        one = h_score_one_sided_full(features, labels, 0.0).value
        worst = max(worst, abs(two - one))
        ratios.append(two / one)
    elapsed = time.time() - start
    ok = worst <= 1e-6 and elapsed < 10.0
    assert report(
        "pair_score_identity_at_optimal_encoder",
        ok,
        f"max |two_sided - one_sided| = {worst:.3e}, "
        f"measured ratio = {np.mean(ratios):.6f}, {elapsed:.1f}s",
    )


def test_ensemble_quadratic_matches_mixed_features():
    rng = np.random.default_rng(202)
    start = time.time()
    worst = 0.0
    worst_eig = 0.0
    for _ in range(200):
        m = int(rng.integers(2, 6))
        n, d, k = int(rng.integers(20, 80)), int(rng.integers(2, 8)), int(rng.integers(2, 5))
        labels = random_labels(rng, n, k)
        sources = [
            FeatureMatrix(
                rng.normal(0, 1.5, (k, d))[labels.labels] + rng.standard_normal((n, d))
            )
            for _ in range(m)
        ]
        cms = [conditional_means(f, labels) for f in sources]
        gram = gram_matrix(cms)
        eigs = np.linalg.eigvalsh(gram.g)
        worst_eig = min(worst_eig, float(eigs[0] / max(eigs[-1], 1e-300)))
        v = rng.standard_normal(m)
        alpha = EnsembleWeights(v - v.sum() / m + 1.0 / m)
        quad = ensemble_h_score(gram, alpha).value
        direct = h_score_simplified(
            conditional_means(mix_features(sources, alpha), labels)
        ).value
        worst = max(worst, abs(quad - direct))
    elapsed = time.time() - start
    ok = worst <= 1e-8 and worst_eig >= -1e-9 and elapsed < 10.0
    assert report(
        "ensemble_quadratic_matches_mixed_features",
        ok,
        f"max |quad - direct| = {worst:.3e}, min relative eig = {worst_eig:.3e}, "
        f"{elapsed:.1f}s",
    )


def test_closed_form_encoder_minimizes_chi2():
    rng = np.random.default_rng(303)
    start = time.time()
    ok = True
    for trial in range(20):
        x_support = int(rng.integers(4, 9))
        y_support = int(rng.integers(2, 5))
        dim = int(rng.integers(2, min(4, x_support)))
        spec, _ = random_discrete_instance(
            int(rng.integers(0, 2**31)), x_support, y_support, dim
        )
        emb = optimal_classifier(
            [population_conditional_means(spec)], EnsembleWeights(np.array([1.0]))
        )
        base = chi2_divergence(spec, emb)
        for _ in range(10_000):
            delta = rng.standard_normal(emb.g.shape)
            delta *= rng.uniform(0.0, 0.5) / max(np.linalg.norm(delta), 1e-12)
            other = ClassEmbeddings(g=emb.g + delta, priors=emb.priors)
            if chi2_divergence(spec, other) < base:
                ok = False
                break
        if not ok:
            break
    elapsed = time.time() - start
    ok = ok and elapsed < 30.0
    assert report(
        "closed_form_encoder_minimizes_chi2",
        ok,
        f"20 instances x 10,000 perturbations, {elapsed:.1f}s",
    )


def test_optimizer_matches_grid_oracle():
    rng = np.random.default_rng(2024)
    start = time.time()
    n_converged = 0
    worst_gap = 0.0
    for _ in range(50):
        n = int(rng.integers(30, 61))
        d = int(rng.integers(1, 5))
        k = int(rng.integers(2, 4))
        labels = random_labels(rng, n, k)
        sources = []
        for _ in range(2):
            means = rng.normal(0, rng.uniform(0.3, 2.0), (k, d))
            raw = FeatureMatrix(means[labels.labels] + rng.standard_normal((n, d)))
            sources.append(raw)
        from mcrmix import apply_whitener, fit_whitener

        whitened = [apply_whitener(fit_whitener(f), f) for f in sources]
        cms = [conditional_means(f, labels) for f in whitened]
        rep = optimize_weights(cms, whitened, labels, FIT_CFG)
        if not rep.converged:
            continue
        n_converged += 1
        best = grid_oracle(cms, whitened, labels, "full", [(-2.0, 3.0)], 1e-3)
        objective = mixed_full_objective(whitened, labels)
        gap = objective(best.alpha) - objective(rep.final_alpha.alpha)
        worst_gap = max(worst_gap, gap)
    elapsed = time.time() - start
    ok = worst_gap <= 1e-3 and n_converged > 0 and elapsed < 60.0
    assert report(
        "optimizer_matches_grid_oracle",
        ok,
        f"{n_converged}/50 converged, worst objective gap = {worst_gap:.3e}, "
        f"{elapsed:.1f}s",
    )


def test_quadratic_ascent_fidelity():
    rng = np.random.default_rng(404)
    ok = True
    detail = ""
    for trial in range(20):
        n, d, k = int(rng.integers(20, 60)), int(rng.integers(1, 4)), int(rng.integers(2, 4))
        m = int(rng.integers(2, 5))
        labels = random_labels(rng, n, k)
        sources = [
            FeatureMatrix(
                rng.normal(0, 1.2, (k, d))[labels.labels] + rng.standard_normal((n, d))
            )
            for _ in range(m)
        ]
        cms = [conditional_means(f, labels) for f in sources]
        gram = gram_matrix(cms)
        lam_max = float(np.linalg.eigvalsh(gram.g)[-1])
        cfg = OptimizerConfig(
            learning_rate=0.9 / (2.0 * lam_max), max_iters=300, objective="simplified"
        )
        rep = optimize_weights(cms, sources, labels, cfg)
        values = [h for _, h in rep.trajectory]
        if not all(b >= a - 1e-10 for a, b in zip(values, values[1:])):
            ok = False
            detail = f"trajectory decreased on trial {trial}"
            break
        if abs(rep.final_alpha.alpha.sum() - 1.0) > 1e-9:
            ok = False
            detail = f"iterate left the hyperplane on trial {trial}"
            break
    assert report("quadratic_ascent_fidelity", ok, detail or "20 trajectories monotone")


def test_ablation_pattern_weighted_vs_uniform():
    start = time.time()
    non_inferior = True
    strict = 0
    total = 0
    for seed in range(20):
        for k_shot in (4, 8):
            rows = dict(run_ablation(seed, k_shot, "info_noise"))
            gap = rows["weighted_full"] - rows["uniform"]
            total += 1
            if gap < -0.02:
                non_inferior = False
            if gap > 0.0:
                strict += 1
    elapsed = time.time() - start
    ok = non_inferior and strict >= 0.7 * total and elapsed < 120.0
    assert report(
        "ablation_pattern_weighted_vs_uniform",
        ok,
        f"non-inferior in all {total} runs: {non_inferior}, "
        f"strictly better in {strict}/{total}, {elapsed:.1f}s",
    )


def test_same_domain_weight_mass_pattern():
    start = time.time()
    wins = 0
    for seed in range(20):
        pool = build_pool(seed, "two_domain")
        shots_x, shots_y = draw_target(pool, 8 * pool.n_classes, [seed, 101])
        feats = [FeatureMatrix(e(shots_x)) for e in pool.extractors]
        model, _ = fit_ensemble(feats, shots_y, FIT_CFG)
        same = np.array(pool.same_distribution)
        if model.alpha.alpha[same].sum() > model.alpha.alpha[~same].sum():
            wins += 1
    elapsed = time.time() - start
    ok = wins >= 18
    assert report(
        "same_domain_weight_mass_pattern",
        ok,
        f"same-domain mass larger in {wins}/20 pools, {elapsed:.1f}s",
    )


def test_io_bit_exactness(tmp_path):
    rng = np.random.default_rng(505)
    start = time.time()
    ok = True
    for i in range(1000):
        n, d = int(rng.integers(1, 12)), int(rng.integers(1, 6))
        scale = 10.0 ** rng.integers(-300, 300)
        matrix = FeatureMatrix(rng.standard_normal((n, d)) * scale)
        path = tmp_path / "m.fmx"
        write_fmx(path, matrix)
        if not np.array_equal(read_fmx(path).data, matrix.data):
            ok = False
            break
        n_classes = int(rng.integers(1, 9))
        labels = LabelVector(rng.integers(0, n_classes, n), n_classes)
        lpath = tmp_path / "l.lbl"
        write_lbl(lpath, labels)
        back = read_lbl(lpath)
        if not (np.array_equal(back.labels, labels.labels) and back.n_classes == n_classes):
            ok = False
            break
    features, labels = random_instance(np.random.default_rng(7), d=4, n_classes=3, whiten=False)
    model, _ = fit_ensemble([features, features], labels)
    mpath = tmp_path / "model.json"
    save_model(mpath, model)
    loaded = load_model(mpath)
    probe_rng = np.random.default_rng(8)
    for _ in range(100):
        probe = FeatureMatrix(probe_rng.standard_normal((1, 4)))
        if not np.array_equal(
            predict(model, [probe, probe]).labels, predict(loaded, [probe, probe]).labels
        ):
            ok = False
            break
    elapsed = time.time() - start
    assert report(
        "io_bit_exactness",
        ok,
        f"1000 array round-trips + 100 prediction replays, {elapsed:.1f}s",
    )
