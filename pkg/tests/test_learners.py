import numpy as np
import pytest

from ambigufair import learners
from ambigufair.learners import (
    ClassifierConfig,
    TrainingError,
    default_config,
    fit,
    loss_gradient,
    loss_value,
    model_from_dict,
    model_to_dict,
    predict,
    predict_proba,
)
from ambigufair.learners.gbdt import hessian_diag
from ambigufair.learners.logistic import LogisticModel
from oracles import central_difference, second_difference

KINDS = ("lr", "svm", "gbdt")


def separable(n=24, margin=1.0, seed=0):
    rng = np.random.default_rng(seed)
    x = np.concatenate([-margin - rng.random(n // 2), margin + rng.random(n // 2)])
    X = np.column_stack([x, rng.normal(size=n)])
    y = (x > 0).astype(int)
    return X, y


def gaussian_task(n=200, d=5, seed=1):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    w = rng.normal(size=d)
    y = (X @ w + 0.3 * rng.normal(size=n) > 0).astype(int)
    return X, y


class TestConfig:
    def test_bounds_enforced(self):
        with pytest.raises(ValueError):
            ClassifierConfig(kind="lr", l2=-1.0)
        with pytest.raises(ValueError):
            ClassifierConfig(kind="lr", learning_rate=0.0)
        with pytest.raises(ValueError):
            ClassifierConfig(kind="gbdt", max_depth=0)
        with pytest.raises(ValueError):
            ClassifierConfig(kind="gbdt", n_bins=1)
        with pytest.raises(ValueError):
            ClassifierConfig(kind="nope")

    def test_defaults_by_kind(self):
        for kind in KINDS:
            cfg = default_config(kind, seed=3)
            assert cfg.kind == kind and cfg.seed == 3


class TestFitBasics:
    def test_lr_zero_epochs_is_uninformative(self):
        X, y = gaussian_task()
        model = fit(default_config("lr", epochs=0), X, y)
        assert np.all(model.weights == 0.0) and model.intercept == 0.0
        assert np.all(predict_proba(model, X) == 0.5)

    @pytest.mark.parametrize("kind", KINDS)
    def test_separable_data_fits_perfectly(self, kind):
        X, y = separable()
        model = fit(default_config(kind), X, y)
        assert np.array_equal(predict(model, X), y)

    def test_gbdt_effectively_constant_labels_clamped(self):
        # Both label values present, but weights zero out class 0 entirely:
        # the clamp keeps the base score finite and no split is informative.
        X, y = separable()
        w = y.astype(float)
        model = fit(default_config("gbdt", n_trees=4), X, y, weights=w)
        rate = 1.0 - 1e-6
        assert model.base_score == pytest.approx(np.log(rate / (1 - rate)))
        assert all(np.all(t.feature == -1) for t in model.trees)
        assert np.all(predict_proba(model, X) > 0.999)

    def test_gbdt_zero_trees_predicts_base_rate(self):
        X, y = gaussian_task()
        model = fit(default_config("gbdt", n_trees=0), X, y)
        assert np.allclose(predict_proba(model, X), y.mean(), atol=1e-9)

    @pytest.mark.parametrize("kind", KINDS)
    def test_single_class_rejected(self, kind):
        X, _ = gaussian_task(n=40)
        with pytest.raises(TrainingError):
            fit(default_config(kind), X, np.ones(40, dtype=int))

    @pytest.mark.parametrize("kind", KINDS)
    def test_non_finite_input_rejected(self, kind):
        X, y = gaussian_task(n=30)
        X = X.copy()
        X[0, 0] = np.nan
        with pytest.raises(TrainingError):
            fit(default_config(kind), X, y)

    def test_bad_weights_rejected(self):
        X, y = gaussian_task(n=30)
        with pytest.raises(TrainingError):
            fit(default_config("lr"), X, y, weights=-np.ones(30))
        with pytest.raises(TrainingError):
            fit(default_config("lr"), X, y, weights=np.zeros(30))
        with pytest.raises(TrainingError):
            fit(default_config("lr"), X, y, weights=np.ones(29))


class TestPredict:
    def test_sigmoid_of_linear_score(self):
        model = LogisticModel(
            config=default_config("lr"), weights=np.array([2.0, -1.0]), intercept=0.5
        )
        x = np.array([[0.3, 0.7]])
        expected = 1.0 / (1.0 + np.exp(-(0.3 * 2.0 - 0.7 + 0.5)))
        assert predict_proba(model, x)[0] == pytest.approx(expected, rel=1e-15)

    def test_tie_goes_positive(self):
        model = LogisticModel(config=default_config("lr"), weights=np.zeros(2), intercept=0.0)
        assert predict(model, np.zeros((1, 2)))[0] == 1

    def test_below_half_is_negative(self):
        model = LogisticModel(
            config=default_config("lr"), weights=np.array([1.0]), intercept=0.0
        )
        assert predict(model, np.array([[-0.05]]))[0] == 0

    def test_width_mismatch_rejected(self):
        X, y = gaussian_task()
        model = fit(default_config("lr", epochs=5), X, y)
        with pytest.raises(TrainingError):
            predict_proba(model, X[:, :3])

    @pytest.mark.parametrize("kind", KINDS)
    def test_probabilities_in_unit_interval(self, kind):
        X, y = gaussian_task(n=120)
        model = fit(default_config(kind), X, y)
        fuzz = np.random.default_rng(9).normal(scale=5.0, size=(300, X.shape[1]))
        p = predict_proba(model, fuzz)
        assert np.all(np.isfinite(p)) and np.all(p >= 0.0) and np.all(p <= 1.0)


class TestGradients:
    def test_lr_symmetry_at_origin(self):
        X = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
        y = np.array([1, 1, 0, 0])
        cfg = ClassifierConfig(kind="lr", l2=0.0)
        grad = loss_gradient(cfg, np.zeros(3), X, y)
        assert grad[-1] == 0.0  # balanced labels: intercept gradient vanishes

    def test_l2_term_is_linear_in_weights(self):
        X, y = gaussian_task(n=50)
        params = np.random.default_rng(2).normal(size=X.shape[1] + 1)
        g0 = loss_gradient(ClassifierConfig(kind="lr", l2=0.0), params, X, y)
        g1 = loss_gradient(ClassifierConfig(kind="lr", l2=0.3), params, X, y)
        delta = g1 - g0
        assert np.allclose(delta[:-1], 2 * 0.3 * params[:-1], atol=1e-12)
        assert delta[-1] == 0.0  # intercept unpenalized

    @pytest.mark.parametrize("kind,l2", [("lr", 0.0), ("lr", 0.1), ("svm", 0.05)])
    def test_matches_finite_differences(self, kind, l2):
        rng = np.random.default_rng(5)
        X, y = gaussian_task(n=60, d=4, seed=3)
        cfg = ClassifierConfig(kind=kind, l2=l2)
        for _ in range(10):
            params = rng.normal(scale=0.8, size=X.shape[1] + 1)
            analytic = loss_gradient(cfg, params, X, y)
            fd = central_difference(lambda p: loss_value(cfg, p, X, y), params, 1e-6)
            assert np.linalg.norm(analytic - fd) <= 1e-5 * max(1.0, np.linalg.norm(analytic))

    def test_gbdt_per_sample_stats_match_finite_differences(self):
        rng = np.random.default_rng(6)
        X, y = gaussian_task(n=40, d=3, seed=4)
        cfg = default_config("gbdt")
        w = rng.random(40) + 0.5
        scores = rng.normal(size=40)
        g = loss_gradient(cfg, scores, X, y, weights=w)
        h = hessian_diag(cfg, scores, X, y, weights=w)
        fd_g = central_difference(lambda f: loss_value(cfg, f, X, y, weights=w), scores, 1e-6)
        fd_h = second_difference(lambda f: loss_value(cfg, f, X, y, weights=w), scores, 1e-3)
        assert np.linalg.norm(g - fd_g) <= 1e-5 * np.linalg.norm(g)
        assert np.linalg.norm(h - fd_h) <= 1e-4 * np.linalg.norm(h)


class TestTrainingProperties:
    @pytest.mark.parametrize("kind", KINDS)
    def test_deterministic_fit(self, kind):
        X, y = gaussian_task(n=150)
        a = fit(default_config(kind), X, y)
        b = fit(default_config(kind), X, y)
        assert model_to_dict(a) == model_to_dict(b)

    def test_lr_loss_non_increasing(self):
        X, y = gaussian_task(n=120)
        cfg = ClassifierConfig(kind="lr", l2=0.01, learning_rate=0.1)
        losses = []
        for epochs in range(0, 40, 5):
            m = fit(ClassifierConfig(kind="lr", l2=0.01, learning_rate=0.1, epochs=epochs), X, y)
            params = np.concatenate([m.weights, [m.intercept]])
            losses.append(loss_value(cfg, params, X, y))
        assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))

    def test_duplicated_row_equals_doubled_weight(self):
        X, y = gaussian_task(n=40, d=3)
        X2 = np.vstack([X, X[5:6]])
        y2 = np.append(y, y[5])
        w = np.ones(40)
        w[5] = 2.0
        cfg = default_config("lr", epochs=120)
        a = fit(cfg, X2, y2)
        b = fit(cfg, X, y, weights=w)
        assert np.allclose(a.weights, b.weights, atol=1e-8)
        assert a.intercept == pytest.approx(b.intercept, abs=1e-8)

    def test_svm_zero_epochs_predicts_the_shrunk_prior(self):
        X, y = gaussian_task(n=100)
        model = fit(default_config("svm", epochs=0), X, y)
        p = predict_proba(model, X)
        # all margins are 0, so the calibrated map collapses to one value
        # near the (regularized) positive rate
        assert len(np.unique(p)) == 1
        assert abs(p[0] - y.mean()) < 0.1

    def test_svm_platt_probabilities_track_margin(self):
        X, y = gaussian_task(n=300, d=4, seed=8)
        model = fit(default_config("svm"), X, y)
        scores = model.raw_scores(X)
        p = predict_proba(model, X)
        order = np.argsort(scores)
        assert np.all(np.diff(p[order]) >= -1e-12)  # monotone in the margin


class TestSerialization:
    @pytest.mark.parametrize("kind", KINDS)
    def test_round_trip(self, kind, tmp_path):
        X, y = gaussian_task(n=80)
        model = fit(default_config(kind), X, y)
        doc = model_to_dict(model)
        clone = model_from_dict(doc)
        assert np.array_equal(predict_proba(clone, X), predict_proba(model, X))
        path = tmp_path / "model.json"
        learners.save_model(model, path)
        again = learners.load_model(path)
        assert np.array_equal(predict_proba(again, X), predict_proba(model, X))

    def test_unknown_format_rejected(self):
        with pytest.raises(ValueError):
            model_from_dict({"format_version": 99, "kind": "lr", "config": {}, "params": {}})
