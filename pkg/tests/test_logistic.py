import numpy as np
import pytest
from scipy import optimize

from shared.exceptions import InputError, NumericError
from shared.models import BasisKind, FitConfig, SmootherKind, SmootherSpec
from smoothers import fit_smoother
from solvers import (
    LogisticFitState,
    fit_logistic,
    fit_smoothers,
    load_model,
    local_scoring_update,
    logistic,
    logistic_lambda_max,
    predict,
    save_model,
)
from tests.conftest import loclin_spec, make_dataset, series_spec


def _state(rng, n):
    eta = rng.normal(scale=1.5, size=n)
    y = (rng.uniform(size=n) < logistic(eta)).astype(float)
    return LogisticFitState.from_predictor(eta, y)


def _newton_logistic(z, y, iters=100):
    """Scalar-covariate logistic regression with intercept, by Newton's method."""
    A = np.column_stack([np.ones_like(z), z])
    theta = np.zeros(2)
    for _ in range(iters):
        p = 1.0 / (1.0 + np.exp(-A @ theta))
        W = p * (1 - p)
        step = np.linalg.solve(A.T @ (W[:, None] * A), A.T @ (y - p))
        theta += step
        if np.max(np.abs(step)) < 1e-14:
            break
    return theta


@pytest.mark.unit
class TestLogisticFitState:
    def test_probabilities_and_weights(self, rng):
        eta = rng.normal(size=50)
        y = (rng.uniform(size=50) < 0.5).astype(float)
        state = LogisticFitState.from_predictor(eta, y)
        np.testing.assert_allclose(state.p_hat, np.exp(eta) / (1 + np.exp(eta)), atol=1e-12)
        assert np.all(state.w > 0) and np.all(state.w <= 0.25)
        np.testing.assert_allclose(state.Z, eta + (y - state.p_hat) / state.w)

    def test_extreme_predictor_is_clamped(self):
        state = LogisticFitState.from_predictor(np.array([-800.0, 800.0]), np.array([0.0, 1.0]))
        assert np.all(np.isfinite(state.w)) and np.all(state.w > 0)
        np.testing.assert_allclose(state.p_hat, [1e-5, 1 - 1e-5])


@pytest.mark.unit
class TestLocalScoringUpdate:
    def test_zero_lambda_local_linear_is_weighted_smooth(self, rng):
        n = 40
        s = fit_smoother(loclin_spec(0.2), rng.uniform(size=n))
        state = _state(rng, n)
        R = rng.normal(size=n)
        H = s.hat_matrix()
        np.testing.assert_allclose(
            local_scoring_update(state, s, R, 0.0), H @ (state.w * R) / (H @ state.w), atol=1e-12
        )

    def test_zero_lambda_series_is_weighted_projection(self, rng):
        n = 40
        s = fit_smoother(series_spec(3), rng.uniform(size=n))
        state = _state(rng, n)
        R = rng.normal(size=n)
        root_w = np.sqrt(state.w)
        coef, *_ = np.linalg.lstsq(root_w[:, None] * s.Psi, root_w * R, rcond=None)
        np.testing.assert_allclose(local_scoring_update(state, s, R, 0.0), s.Psi @ coef, atol=1e-10)

    def test_below_threshold_is_zero(self, rng):
        n = 30
        s = fit_smoother(series_spec(3), rng.uniform(size=n))
        state = _state(rng, n)
        R = rng.normal(size=n)
        lam = 1.01 * np.linalg.norm(s.apply(state.w * R)) / np.sqrt(n)
        assert not np.any(local_scoring_update(state, s, R, lam))

    def test_constant_weights_match_scalar_root(self, rng):
        n, c = 60, 0.2
        s = fit_smoother(series_spec(4), rng.uniform(size=n))
        R = rng.normal(size=n)
        state = LogisticFitState(f=np.zeros(n), p_hat=np.full(n, 0.5), w=np.full(n, c), Z=R)
        P = s.apply(R)
        norm_P = np.linalg.norm(P)
        lam = 0.2 * c * norm_P / np.sqrt(n)

        # ||f|| = a solves c a + lambda sqrt(n) = c ||P||
        a = optimize.bisect(lambda a: c * a + lam * np.sqrt(n) - c * norm_P, 0.0, norm_P, xtol=1e-14)
        expected = (a / norm_P) * P
        np.testing.assert_allclose(local_scoring_update(state, s, R, lam), expected, atol=1e-6 * norm_P)

    def test_monotone_shrinkage(self, rng):
        n = 50
        s = fit_smoother(loclin_spec(0.15), rng.uniform(size=n))
        state = _state(rng, n)
        R = rng.normal(size=n) + 2.0
        top = np.linalg.norm(s.apply(state.w * R)) / np.sqrt(n)
        norms = [
            np.linalg.norm(local_scoring_update(state, s, R, lam, tol=1e-10))
            for lam in np.linspace(0.0, 1.2 * top, 15)
        ]
        assert all(b <= a * (1 + 1e-6) for a, b in zip(norms, norms[1:]))
        zero = [v == 0.0 for v in norms]
        assert sum(x != y for x, y in zip(zero, zero[1:])) <= 1
        assert zero[-1] and not zero[0]

    def test_non_finite_weights(self, rng):
        n = 10
        s = fit_smoother(series_spec(2), rng.uniform(size=n))
        w = np.full(n, 0.2)
        w[3] = np.nan
        state = LogisticFitState(f=np.zeros(n), p_hat=np.full(n, 0.5), w=w, Z=np.zeros(n))
        with pytest.raises(NumericError):
            local_scoring_update(state, s, np.ones(n), 0.1)


@pytest.mark.unit
class TestFitLogistic:
    def test_single_class_rejected(self, rng):
        data = make_dataset(rng.uniform(size=(20, 2)), np.ones(20))
        with pytest.raises(InputError, match="single class"):
            fit_logistic(data, FitConfig(lambda_=0.1, smoother=series_spec(2)))

    def test_non_binary_rejected(self, rng):
        data = make_dataset(rng.uniform(size=(20, 2)), np.arange(20) % 3)
        with pytest.raises(InputError):
            fit_logistic(data, FitConfig(lambda_=0.1, smoother=series_spec(2)))

    def test_large_lambda_is_null_model(self, binary_data):
        model = fit_logistic(binary_data, FitConfig(lambda_=1e6, smoother=series_spec(3)))
        assert model.active_set == []
        assert model.link == "logistic"
        np.testing.assert_allclose(predict(model, binary_data.X), binary_data.y_mean, atol=1e-10)

    def test_lambda_max_is_null_model(self, binary_data):
        cfg = FitConfig(lambda_=0.0, smoother=series_spec(3))
        smoothers = fit_smoothers(binary_data, cfg.smoother)
        lam = logistic_lambda_max(binary_data, smoothers)
        model = fit_logistic(binary_data, cfg.with_lambda(lam * (1 + 1e-6)), smoothers=smoothers)
        assert model.active_set == []
        active = fit_logistic(binary_data, cfg.with_lambda(0.5 * lam), smoothers=smoothers)
        assert active.active_set

    def test_s_hat_is_the_pre_threshold_norm(self, binary_data):
        cfg = FitConfig(lambda_=0.0, smoother=series_spec(3))
        smoothers = fit_smoothers(binary_data, cfg.smoother)
        lam = 0.4 * logistic_lambda_max(binary_data, smoothers)
        model = fit_logistic(binary_data, cfg.with_lambda(lam), smoothers=smoothers)
        assert model.active_set
        for comp in model.components:
            assert comp.s_hat > 0.0
            if comp.active:
                assert comp.s_hat > lam
            else:
                assert comp.s_hat <= lam * (1 + 1e-12)

    def test_selects_relevant_columns(self, binary_data):
        cfg = FitConfig(lambda_=0.0, smoother=series_spec(3))
        smoothers = fit_smoothers(binary_data, cfg.smoother)
        lam = 0.4 * logistic_lambda_max(binary_data, smoothers)
        model = fit_logistic(binary_data, cfg.with_lambda(lam), smoothers=smoothers)
        assert model.converged
        assert {1, 2} <= set(model.support)

    def test_linear_basis_matches_newton(self, rng):
        n = 300
        x = rng.uniform(size=n)
        z = (x - x.mean()) / x.std()
        y = (rng.uniform(size=n) < logistic(0.3 + 1.2 * z)).astype(float)
        spec = SmootherSpec(kind=SmootherKind.ORTHOGONAL_SERIES, basis=BasisKind.LINEAR, truncation=1)
        model = fit_logistic(
            make_dataset(x, y), FitConfig(lambda_=0.0, smoother=spec, tol=1e-12, max_outer_iters=500)
        )
        slope = model.components[0].representation.coefficients[0]
        theta = _newton_logistic(z, y)
        assert abs(slope - theta[1]) < 1e-3
        assert abs(model.intercept - theta[0]) < 1e-3

    def test_zero_lambda_follows_local_scoring(self, binary_data):
        cfg = FitConfig(lambda_=0.0, smoother=series_spec(3), tol=1e-15, max_outer_iters=5)
        smoothers = fit_smoothers(binary_data, cfg.smoother)
        model = fit_logistic(binary_data, cfg, smoothers=smoothers)

        y = binary_data.Y
        alpha = np.log(y.mean() / (1 - y.mean()))
        F = np.zeros((binary_data.p, binary_data.n))
        trace = []
        for _ in range(5):
            state = LogisticFitState.from_predictor(alpha + F.sum(axis=0), y)
            alpha = np.sum(state.w * (state.Z - F.sum(axis=0))) / np.sum(state.w)
            residual = state.Z - alpha - F.sum(axis=0)
            for j, s in enumerate(smoothers):
                R = residual + F[j]
                f = s.apply_weighted(state.w, R)
                F[j] = f - f.mean()
                residual = R - F[j]
            eta = alpha + F.sum(axis=0)
            trace.append(np.mean(np.logaddexp(0, eta) - y * eta))

        assert model.n_iters == 5
        np.testing.assert_allclose(model.objective_trace, trace, atol=1e-10)
        np.testing.assert_allclose(model.fitted_components(), F, atol=1e-10)

    @pytest.mark.parametrize("spec", [series_spec(3), loclin_spec(0.15)])
    def test_prediction_reproduces_training_fit(self, binary_data, spec):
        model = fit_logistic(binary_data, FitConfig(lambda_=0.01, smoother=spec))
        np.testing.assert_allclose(
            predict(model, binary_data.X), logistic(model.fitted_values()), atol=1e-8
        )

    def test_probabilities_in_open_interval(self, binary_data, rng):
        model = fit_logistic(binary_data, FitConfig(lambda_=0.0, smoother=series_spec(3)))
        probs = predict(model, rng.uniform(-5, 5, size=(100, 4)))
        assert np.all(probs > 0) and np.all(probs < 1)

    def test_json_round_trip(self, binary_data, tmp_path):
        model = fit_logistic(binary_data, FitConfig(lambda_=0.01, smoother=loclin_spec(0.2)))
        target = tmp_path / "logistic.json"
        save_model(model, target)
        loaded = load_model(target)
        assert loaded.link == "logistic"
        assert loaded.support == model.support
        np.testing.assert_allclose(predict(loaded, binary_data.X), predict(model, binary_data.X), atol=1e-12)
