import numpy as np
import pytest

from mcrmix import (
    ClassEmbeddings,
    ConditionalMeans,
    DimMismatch,
    EnsembleWeights,
    FeatureMatrix,
    FittedEnsembleModel,
    LabelVector,
    LengthMismatch,
    OptimizerConfig,
    PriorMismatch,
    WhitenTransform,
    apply_whitener,
    conditional_means,
    evaluate,
    fit_ensemble,
    fit_whitener,
    mix_features,
    optimal_classifier,
    posterior,
    predict,
)
from conftest import random_instance, random_labels


def identity_model(g, priors, n_sources=1):
    dim = g.shape[1]
    whitener = WhitenTransform(mean=np.zeros(dim), transform=np.eye(dim))
    return FittedEnsembleModel(
        alpha=EnsembleWeights(np.full(n_sources, 1.0 / n_sources)),
        whiteners=(whitener,) * n_sources,
        embeddings=ClassEmbeddings(g=g, priors=priors),
        n_sources=n_sources,
        feature_dim=dim,
        n_classes=g.shape[0],
        objective_used="simplified",
        h_score_final=0.0,
    )


class TestOptimalClassifier:
    def test_one_hot_collapse(self, rng):
        p = np.array([0.5, 0.5])
        cms = [
            ConditionalMeans(rng.standard_normal((2, 3)), p) for _ in range(3)
        ]
        emb = optimal_classifier(cms, EnsembleWeights(np.array([0.0, 1.0, 0.0])))
        assert np.max(np.abs(emb.g - cms[1].means)) < 1e-15

    def test_average_example(self):
        p = np.array([0.5, 0.5])
        cm1 = ConditionalMeans(np.array([[2.0], [-2.0]]), p)
        cm2 = ConditionalMeans(np.array([[0.0], [0.0]]), p)
        emb = optimal_classifier([cm1, cm2], EnsembleWeights(np.array([0.5, 0.5])))
        assert emb.g[0, 0] == 1.0

    def test_prior_mismatch(self):
        cm1 = ConditionalMeans(np.zeros((2, 1)), np.array([0.5, 0.5]))
        cm2 = ConditionalMeans(np.zeros((2, 1)), np.array([0.3, 0.7]))
        with pytest.raises(PriorMismatch):
            optimal_classifier([cm1, cm2], EnsembleWeights(np.array([0.5, 0.5])))


class TestMixFeatures:
    def test_one_hot_bit_identical(self, rng):
        mats = [FeatureMatrix(rng.standard_normal((4, 2))) for _ in range(3)]
        out = mix_features(mats, EnsembleWeights(np.array([0.0, 1.0, 0.0])))
        assert np.array_equal(out.data, mats[1].data)

    def test_equal_matrices_fixed_point(self, rng):
        data = rng.standard_normal((5, 2))
        mats = [FeatureMatrix(data), FeatureMatrix(data)]
        out = mix_features(mats, EnsembleWeights(np.array([1.7, -0.7])))
        assert np.max(np.abs(out.data - data)) <= 1e-12

    def test_blend(self):
        mats = [FeatureMatrix(np.array([[1.0, 0.0]])), FeatureMatrix(np.array([[0.0, 1.0]]))]
        out = mix_features(mats, EnsembleWeights(np.array([0.5, 0.5])))
        assert np.array_equal(out.data, np.array([[0.5, 0.5]]))

    def test_shape_mismatch(self, rng):
        mats = [FeatureMatrix(np.zeros((2, 2))), FeatureMatrix(np.zeros((3, 2)))]
        with pytest.raises(DimMismatch):
            mix_features(mats, EnsembleWeights(np.array([0.5, 0.5])))


class TestPosterior:
    def test_zero_correlation_returns_priors(self):
        g = np.zeros((3, 2))
        priors = np.array([0.2, 0.3, 0.5])
        model = identity_model(g, priors)
        out = posterior(model, np.array([1.0, -1.0]))
        assert np.array_equal(out, priors)

    def test_hand_example(self):
        # raw = (0.5*1.6, 0.5*0.4) = (0.8, 0.2), already normalized
        g = np.array([[0.6], [-0.6]])
        model = identity_model(g, np.array([0.5, 0.5]))
        out = posterior(model, np.array([1.0]))
        assert np.max(np.abs(out - np.array([0.8, 0.2]))) < 1e-15

    def test_clipping(self):
        # raw = (-1, 1) -> clipped (0, 1)
        g = np.array([[-3.0], [1.0]])
        model = identity_model(g, np.array([0.5, 0.5]))
        out = posterior(model, np.array([1.0]))
        assert np.array_equal(out, np.array([0.0, 1.0]))

    def test_rows_are_distributions(self, rng):
        g = rng.standard_normal((4, 3))
        priors = rng.dirichlet(np.ones(4))
        model = identity_model(g, priors)
        for _ in range(50):
            out = posterior(model, rng.standard_normal(3))
            assert abs(out.sum() - 1.0) <= 1e-12
            assert np.all(out >= 0.0)

    def test_argmax_agrees_with_predict_when_raws_positive(self, rng):
        features, labels = random_instance(rng, d=4, n_classes=3)
        model, _ = fit_ensemble([features], labels)
        white = apply_whitener(model.whiteners[0], features)
        scores = white.data @ model.embeddings.g.T
        for i in range(20):
            row = white.data[i] * 0.05  # small correlations keep raws positive
            p = posterior(model, row)
            assert np.argmax(p) == np.argmax(model.embeddings.priors * (1 + model.embeddings.g @ row))


class TestPredict:
    def test_axis_aligned(self):
        g = np.eye(2)
        model = identity_model(g, np.array([0.5, 0.5]))
        out = predict(model, [FeatureMatrix(np.array([[1.0, 0.0]]))])
        assert out.labels.tolist() == [0]

    def test_tie_breaks_to_lowest_class(self):
        g = np.array([[0.0, 1.0], [0.0, 2.0], [0.0, -1.0]])
        model = identity_model(g, np.full(3, 1 / 3))
        out = predict(model, [FeatureMatrix(np.array([[5.0, 0.0]]))])
        assert out.labels.tolist() == [0]

    def test_training_accuracy_on_separated_task_with_ncm_oracle(self, rng):
        means = np.array([[4.0, 0.0], [-4.0, 0.0], [0.0, 4.0]])
        labels = random_labels(rng, 60, 3)
        features = FeatureMatrix(means[labels.labels] + 0.3 * rng.standard_normal((60, 2)))
        model, _ = fit_ensemble([features], labels)
        pred = predict(model, [features])
        assert evaluate(pred, labels) == 1.0
        # independent oracle: nearest class mean in the whitened space
        white = apply_whitener(model.whiteners[0], features)
        centers = conditional_means(white, labels).means
        dists = ((white.data[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        ncm = np.argmin(dists, axis=1)
        assert np.mean(ncm == labels.labels) == 1.0

    def test_one_hot_alpha_equals_single_source_model(self, rng):
        labels = random_labels(rng, 40, 2)
        f1 = FeatureMatrix(
            np.where(labels.labels == 0, 1.5, -1.5)[:, None]
            + rng.standard_normal((40, 1))
        )
        f2 = FeatureMatrix(rng.standard_normal((40, 1)))
        single_model, _ = fit_ensemble([f1], labels)
        w1 = fit_whitener(f1)
        white1 = apply_whitener(w1, f1)
        cm1 = conditional_means(white1, labels)
        pair_model = FittedEnsembleModel(
            alpha=EnsembleWeights(np.array([1.0, 0.0])),
            whiteners=(w1, fit_whitener(f2)),
            embeddings=ClassEmbeddings(g=cm1.means, priors=cm1.priors),
            n_sources=2,
            feature_dim=1,
            n_classes=2,
            objective_used="simplified",
            h_score_final=0.0,
        )
        test = FeatureMatrix(rng.standard_normal((30, 1)))
        noise = FeatureMatrix(rng.standard_normal((30, 1)))
        assert np.array_equal(
            predict(single_model, [test]).labels,
            predict(pair_model, [test, noise]).labels,
        )


class TestEvaluate:
    def test_identical(self):
        lv = LabelVector(np.array([0, 1, 2]), 3)
        assert evaluate(lv, lv) == 1.0

    def test_disjoint(self):
        a = LabelVector(np.array([0, 0]), 2)
        b = LabelVector(np.array([1, 1]), 2)
        assert evaluate(a, b) == 0.0

    def test_three_of_four(self):
        a = LabelVector(np.array([0, 1, 0, 1]), 2)
        b = LabelVector(np.array([0, 1, 0, 0]), 2)
        assert evaluate(a, b) == 0.75

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            evaluate(LabelVector(np.array([0]), 2), LabelVector(np.array([0, 1]), 2))


class TestFitEnsemble:
    def test_model_is_dimensionally_consistent(self, rng):
        features, labels = random_instance(rng, d=3, n_classes=3, whiten=False)
        model, report = fit_ensemble([features, features], labels)
        assert model.n_sources == 2
        assert model.feature_dim == 3
        assert model.n_classes == 3
        assert model.objective_used == "full"
        assert np.isfinite(model.h_score_final)
        assert report.trajectory[0][0] == 0

    def test_model_validation_rejects_inconsistency(self):
        whitener = WhitenTransform(mean=np.zeros(2), transform=np.eye(2))
        with pytest.raises(DimMismatch):
            FittedEnsembleModel(
                alpha=EnsembleWeights(np.array([1.0])),
                whiteners=(whitener,),
                embeddings=ClassEmbeddings(g=np.zeros((2, 3)), priors=np.array([0.5, 0.5])),
                n_sources=1,
                feature_dim=2,
                n_classes=2,
                objective_used="full",
                h_score_final=0.0,
            )
