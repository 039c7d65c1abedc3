import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shared.exceptions import InputError
from shared.models import (
    IDENTITY_SCALE,
    BasisKind,
    ColumnScale,
    ComponentRepresentation,
    Dataset,
    FitConfig,
    SmootherKind,
    SmootherSpec,
)
from smoothers import build_basis
from solvers import (
    ComponentFunction,
    SpamModel,
    fit,
    fit_smoothers,
    kkt_report,
    lambda_max,
    lasso_cd,
    predict,
    soft_threshold_component,
)
from tests.conftest import loclin_spec, make_dataset, series_spec


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def _tight(lam, spec=None, iters=20000):
    return FitConfig(lambda_=lam, smoother=spec or series_spec(3), tol=1e-12, max_outer_iters=iters)


@pytest.mark.unit
class TestSoftThreshold:
    def test_below_threshold_is_zero(self):
        f, s_hat = soft_threshold_component(np.array([0.5, -0.5]), 1.0)
        assert s_hat == pytest.approx(0.5)
        assert not np.any(f)

    def test_zero_lambda_is_identity(self):
        P = np.array([1.0, -2.0, 3.5])
        f, _ = soft_threshold_component(P, 0.0)
        np.testing.assert_array_equal(f, P)

    def test_worked_example(self):
        f, s_hat = soft_threshold_component(np.array([3.0, -3.0, 3.0, -3.0]), 1.0)
        assert s_hat == pytest.approx(3.0)
        np.testing.assert_allclose(f, [2.0, -2.0, 2.0, -2.0])

    def test_zero_vector(self):
        f, s_hat = soft_threshold_component(np.zeros(4), 0.0)
        assert s_hat == 0.0
        assert not np.any(f)

    def test_negative_lambda(self):
        with pytest.raises(InputError):
            soft_threshold_component(np.ones(3), -0.1)

    @settings(max_examples=200, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(1, 50), frac=st.floats(0.0, 0.999))
    def test_post_threshold_norm(self, seed, n, frac):
        P = _rng(seed).normal(size=n)
        s_hat = np.sqrt(np.mean(P ** 2))
        lam = frac * s_hat
        f, reported = soft_threshold_component(P, lam)
        assert reported == pytest.approx(s_hat, rel=1e-12)
        assert abs(np.sqrt(np.mean(f ** 2)) - (s_hat - lam)) < 1e-10


@pytest.mark.unit
class TestFit:
    def test_lambda_max_gives_null_model(self, synthetic_small):
        data = synthetic_small.dataset
        cfg = FitConfig(lambda_=0.0, smoother=series_spec(3))
        smoothers = fit_smoothers(data, cfg.smoother)
        model = fit(data, cfg.with_lambda(lambda_max(data, smoothers)), smoothers=smoothers)
        assert model.active_set == []
        np.testing.assert_allclose(predict(model, data.X), np.full(data.n, data.y_mean))

    def test_zero_lambda_is_least_squares(self, rng):
        n = 50
        X = rng.uniform(size=(n, 2))
        Y = np.sin(3 * X[:, 0]) + X[:, 1] ** 2 + 0.1 * rng.normal(size=n)
        data = make_dataset(X, Y)
        model = fit(data, _tight(0.0))

        blocks = []
        for j in range(2):
            Psi = build_basis(X[:, j], 3)
            blocks.append(Psi - Psi.mean(axis=0))
        A = np.hstack(blocks)
        coef, *_ = np.linalg.lstsq(A, Y - Y.mean(), rcond=None)
        np.testing.assert_allclose(model.fitted_values(), Y.mean() + A @ coef, atol=1e-6)

    def test_objective_non_increasing(self, synthetic_small):
        data = synthetic_small.dataset
        model = fit(data, FitConfig(lambda_=0.05, smoother=series_spec(3), tol=1e-8, max_outer_iters=500))
        trace = np.array(model.objective_trace)
        assert np.all(np.diff(trace) <= 1e-10)
        assert model.objective == trace[-1]

    def test_active_components_centred(self, synthetic_small):
        model = fit(synthetic_small.dataset, FitConfig(lambda_=0.05, smoother=series_spec(3)))
        assert model.active_set
        for comp in model.components:
            if comp.active:
                assert abs(comp.fitted.mean()) < 1e-8
            else:
                assert not np.any(comp.fitted)

    def test_training_prediction_is_sum_of_components(self, synthetic_small):
        data = synthetic_small.dataset
        model = fit(data, FitConfig(lambda_=0.05, smoother=series_spec(3)))
        np.testing.assert_allclose(
            model.fitted_values(), model.intercept + model.fitted_components().sum(axis=0)
        )
        np.testing.assert_allclose(predict(model, data.X), model.fitted_values(), atol=1e-8)

    def test_local_linear_fit(self, synthetic_small):
        data = synthetic_small.dataset
        model = fit(data, FitConfig(lambda_=0.05, smoother=loclin_spec(0.15)))
        assert set(model.support) >= {1, 2}
        np.testing.assert_allclose(predict(model, data.X), model.fitted_values(), atol=1e-8)

    def test_non_convergence_is_flagged(self, synthetic_small):
        model = fit(synthetic_small.dataset, FitConfig(lambda_=0.01, smoother=series_spec(3), max_outer_iters=1))
        assert model.n_iters == 1
        assert not model.converged

    def test_warm_start_shape_mismatch(self, synthetic_small, rng):
        model = fit(synthetic_small.dataset, FitConfig(lambda_=0.05, smoother=series_spec(3)))
        other = make_dataset(rng.uniform(size=(100, 5)), rng.normal(size=100))
        with pytest.raises(InputError):
            fit(other, FitConfig(lambda_=0.05, smoother=series_spec(3)), warm_start=model)

    def test_non_finite_input(self, rng):
        X = rng.uniform(size=(20, 3))
        X[4, 1] = np.nan
        with pytest.raises(InputError, match="column 2"):
            fit(make_dataset(X, rng.normal(size=20)), FitConfig(lambda_=0.1))

    def test_empty_dataset(self):
        data = Dataset(X=np.empty((10, 0)), Y=np.zeros(10), column_scales=[])
        with pytest.raises(InputError):
            fit(data, FitConfig(lambda_=0.1))

    def test_constant_column_stays_inactive(self, rng):
        X = rng.uniform(size=(60, 3))
        X[:, 1] = 0.0
        Y = 2 * X[:, 0] + 0.1 * rng.normal(size=60)
        model = fit(make_dataset(X, Y), FitConfig(lambda_=0.0, smoother=series_spec(3)))
        assert 2 not in model.support
        assert 1 in model.support

    def test_column_permutation_equivariance(self, synthetic_small, rng):
        data = synthetic_small.dataset
        perm = rng.permutation(data.p)
        permuted = make_dataset(data.X[:, perm], data.Y)
        cfg = _tight(0.05)
        base = fit(data, cfg)
        moved = fit(permuted, cfg)
        assert sorted(perm[j] + 1 for j in moved.active_set) == base.support
        np.testing.assert_allclose(moved.component_norms(), base.component_norms()[perm], atol=1e-6)


@pytest.mark.unit
class TestKKT:
    def test_certificate_at_convergence(self, synthetic_small):
        data = synthetic_small.dataset
        cfg = FitConfig(lambda_=0.0, smoother=series_spec(3))
        smoothers = fit_smoothers(data, cfg.smoother)
        lam = 0.3 * lambda_max(data, smoothers)
        model = fit(data, _tight(lam), smoothers=smoothers)
        assert model.converged
        for entry in kkt_report(model, data, smoothers):
            if entry.active:
                assert entry.stationarity < 1e-6
            else:
                assert entry.threshold_gap <= 1e-8

    def test_local_linear_not_supported(self, synthetic_small):
        data = synthetic_small.dataset
        cfg = FitConfig(lambda_=0.05, smoother=loclin_spec(0.2))
        smoothers = fit_smoothers(data, cfg.smoother)
        model = fit(data, cfg, smoothers=smoothers)
        with pytest.raises(InputError):
            kkt_report(model, data, smoothers)


@pytest.mark.unit
class TestPredict:
    def test_null_model_is_constant(self, rng):
        comps = [
            ComponentFunction(j=j, representation=ComponentRepresentation(kind=SmootherKind.ORTHOGONAL_SERIES),
                              scale=IDENTITY_SCALE)
            for j in range(3)
        ]
        model = SpamModel(intercept=1.25, components=comps, lambda_=1.0, converged=True, n_iters=1, objective=0.0)
        np.testing.assert_array_equal(predict(model, rng.uniform(size=(7, 3))), np.full(7, 1.25))

    def test_hand_expanded_cosine_component(self):
        beta = np.array([0.7, -1.2, 0.3])
        means = np.array([0.1, -0.05, 0.02])
        rep = ComponentRepresentation(
            kind=SmootherKind.ORTHOGONAL_SERIES, basis=BasisKind.COSINE,
            coefficients=beta.tolist(), basis_means=means.tolist(), offset=0.0,
        )
        comps = [
            ComponentFunction(j=0, active=True, representation=rep, scale=IDENTITY_SCALE,
                              fitted=np.zeros(5)),
            ComponentFunction(j=1, representation=ComponentRepresentation(kind=SmootherKind.ORTHOGONAL_SERIES),
                              scale=IDENTITY_SCALE),
        ]
        model = SpamModel(intercept=0.5, components=comps, lambda_=0.1, converged=True, n_iters=3, objective=0.0)
        probes = np.array([0.0, 0.13, 0.5, 0.77, 1.0])
        expected = 0.5 + sum(
            beta[k] * (np.sqrt(2) * np.cos((k + 1) * np.pi * probes) - means[k]) for k in range(3)
        )
        X_new = np.column_stack([probes, np.full(5, 0.3)])
        np.testing.assert_allclose(predict(model, X_new), expected, atol=1e-10)

    def test_column_mismatch(self, synthetic_small):
        model = fit(synthetic_small.dataset, FitConfig(lambda_=0.05, smoother=series_spec(3)))
        with pytest.raises(InputError):
            predict(model, np.zeros((2, 3)))

    def test_original_units_are_rescaled_and_clipped(self, rng):
        X = rng.uniform(size=(80, 2))
        Y = np.sin(4 * X[:, 0]) + 0.05 * rng.normal(size=80)
        scales = [ColumnScale(min=10.0, max=20.0), ColumnScale(min=0.0, max=1.0)]
        data = Dataset(X=X, Y=Y, column_scales=scales)
        model = fit(data, FitConfig(lambda_=0.01, smoother=series_spec(4)))
        original = data.original_X()
        np.testing.assert_allclose(predict(model, original), model.fitted_values(), atol=1e-8)
        beyond = np.array([[25.0, 0.5]])
        edge = np.array([[20.0, 0.5]])
        np.testing.assert_allclose(predict(model, beyond), predict(model, edge))


@pytest.mark.unit
class TestLassoDegeneration:
    def test_linear_basis_matches_coordinate_descent(self, rng):
        n, p = 40, 8
        X = rng.uniform(size=(n, p))
        Y = X @ rng.normal(size=p) + 0.3 * rng.normal(size=n)
        data = make_dataset(X, Y)
        spec = SmootherSpec(kind=SmootherKind.ORTHOGONAL_SERIES, basis=BasisKind.LINEAR, truncation=1)
        smoothers = fit_smoothers(data, spec)
        lam = 0.2 * lambda_max(data, smoothers)
        model = fit(data, _tight(lam, spec, iters=100000), smoothers=smoothers)

        Xc = X - X.mean(axis=0)
        U = Xc / np.linalg.norm(Xc, axis=0)
        spam_coef = np.array([U[:, j] @ model.components[j].fitted for j in range(p)])
        lasso = lasso_cd(Xc, Y - Y.mean(), lam * np.sqrt(n))
        np.testing.assert_allclose(spam_coef, lasso.beta_normalized, atol=1e-6)
