import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from negmix import NegativeGaussianMixture, TensorPowerDecomposition
from negmix.gaussian import analytic_moment_tensors, sample_mixture


@pytest.fixture(scope="module")
def running_data():
    from conftest import RUNNING_MEANS, RUNNING_VARIANCES, RUNNING_WEIGHTS
    from negmix.gaussian import SphericalMixture

    model = SphericalMixture(RUNNING_WEIGHTS, RUNNING_MEANS, RUNNING_VARIANCES)
    return sample_mixture(model, 100_000, seed=12).samples


def test_params_roundtrip():
    est = NegativeGaussianMixture(n_components=3, restarts=4, random_state=7)
    params = est.get_params()
    assert params["n_components"] == 3 and params["restarts"] == 4
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(tol=1e-10)
    assert est.tol == 1e-10


def test_unfitted_use_raises():
    with pytest.raises(NotFittedError):
        NegativeGaussianMixture().score_samples(np.zeros((2, 2)))


def test_fit_and_score(running_data):
    est = NegativeGaussianMixture(n_components=2, random_state=0).fit(running_data)
    assert est.candidate_index_ == 1
    assert est.weights_.min() < 0
    assert est.weights_.sum() == pytest.approx(1.0, abs=0.2)
    ll = est.score_samples(running_data[:10])
    assert ll.shape == (10,) and np.all(np.isfinite(ll))
    assert est.score(running_data[:1000]) == pytest.approx(ll.mean(), abs=10)
    assert est.pdf(running_data[:5]).shape == (5,)


def test_sample_from_fitted(running_data):
    est = NegativeGaussianMixture(random_state=0).fit(running_data)
    X = est.sample(200, random_state=3)
    assert X.shape == (200, 2)
    np.testing.assert_array_equal(X, est.sample(200, random_state=3))


def test_feature_mismatch(running_data):
    est = NegativeGaussianMixture(random_state=0).fit(running_data)
    with pytest.raises(ValueError, match="features"):
        est.score_samples(np.zeros((3, 5)))


def test_bad_parameters(running_data):
    with pytest.raises(TypeError):
        NegativeGaussianMixture(n_components=1.5).fit(running_data)
    with pytest.raises(ValueError):
        NegativeGaussianMixture(restarts=0).fit(running_data)
    with pytest.raises(ValueError):
        NegativeGaussianMixture(n_components=2).fit(np.array([[np.nan, 1.0]] * 100))


def test_tensor_decomposition(running_model):
    am = analytic_moment_tensors(running_model)
    est = TensorPowerDecomposition(n_components=2, random_state=0).fit(am.M2, am.M3)
    order = np.argsort(-est.weights_)
    np.testing.assert_allclose(est.weights_[order], [1.5, -0.5], atol=1e-8)
    np.testing.assert_allclose(est.means_[order], running_model.means, atol=1e-8)
    assert max(est.n_iter_) <= 15


def test_tensor_decomposition_checks_shapes(running_model):
    am = analytic_moment_tensors(running_model)
    with pytest.raises(ValueError, match="dimensional"):
        TensorPowerDecomposition().fit(am.M2, np.zeros((3, 3, 3)))
    with pytest.raises(ValueError, match="symmetric"):
        T = np.zeros((2, 2, 2))
        T[0, 0, 1] = 1.0
        TensorPowerDecomposition().fit(am.M2, T)
