"""scikit-learn style front ends."""

import numpy as np
from sklearn.base import BaseEstimator, DensityMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import gaussian
from ._validation import check_int, check_nonneg_float, check_symmetric_tensor3, seed_sequence
from .power import decompose, recover_parameters
from .whitening import whitening_from_moments


class NegativeGaussianMixture(DensityMixin, BaseEstimator):
    """Signed mixture of spherical Gaussians fitted by the moment method.

    Parameters
    ----------
    n_components : int
        Number of components ``k``; must not exceed the data dimension.
    restarts : int
        Power-method start vectors per component.
    random_state : int or None
    tol, max_iter : power-method stopping rule.
    rank_tol : float or None
        Threshold on the ``k``-th eigenvalue of ``M2`` (default relative ``1e-9``).
    imag_tol : float
        Relative imaginary part below which recovered values count as real.

    Attributes
    ----------
    weights_, means_, variances_ : fitted parameters (weights may be negative)
    candidate_index_ : int
        0-based position of the chosen average variance among the ascending
        covariance eigenvalues.
    fit_result_ : FitResult with per-candidate diagnostics.
    """

    def __init__(self, n_components=2, restarts=10, random_state=0, tol=1e-12, max_iter=100, rank_tol=None,
                 imag_tol=1e-6):
        self.n_components = n_components
        self.restarts = restarts
        self.random_state = random_state
        self.tol = tol
        self.max_iter = max_iter
        self.rank_tol = rank_tol
        self.imag_tol = imag_tol

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64, ensure_min_samples=2)
        k = check_int(self.n_components, "n_components")
        res = gaussian.fit(
            X,
            k,
            restarts=check_int(self.restarts, "restarts"),
            seed=seed_sequence(self.random_state),
            tol=check_nonneg_float(self.tol, "tol"),
            max_iter=check_int(self.max_iter, "max_iter"),
            rank_tol=self.rank_tol,
            imag_tol=check_nonneg_float(self.imag_tol, "imag_tol"),
        )
        self.fit_result_ = res
        self.model_ = res.model
        self.weights_ = res.model.weights
        self.means_ = res.model.means
        self.variances_ = res.model.variances
        self.candidate_index_ = res.candidate_index
        self.n_features_in_ = X.shape[1]
        return self

    def _check_X(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, model expects {self.n_features_in_}")
        return X

    def pdf(self, X):
        X = self._check_X(X)
        return gaussian.pdf(self.model_, X)

    def score_samples(self, X):
        """Log density per sample, floored at ``PDF_FLOOR`` where the fit dips below zero."""
        vals = self.pdf(X)
        return np.log(np.maximum(vals, gaussian.PDF_FLOOR))

    def score(self, X, y=None):
        return float(np.mean(self.score_samples(X)))

    def sample(self, n_samples=1, random_state=None):
        """Draw by rejection sampling; requires ``sum(weights_) == 1``."""
        check_is_fitted(self, "model_")
        model = gaussian.SphericalMixture(self.weights_ / self.weights_.sum(), self.means_, self.variances_)
        seed = self.random_state if random_state is None else random_state
        return gaussian.sample_mixture(model, check_int(n_samples, "n_samples"), seed=seed).samples


class TensorPowerDecomposition(BaseEstimator):
    """Recover ``(w_i, mu_i)`` from ``M2 = sum w mu mu^T`` and ``M3 = sum w mu^{(x)3}``.

    ``fit`` takes the pair ``(M2, M3)``; results are in ``weights_``,
    ``means_``, ``eigenpairs_`` and ``imag_residues_``.
    """

    def __init__(self, n_components=2, restarts=10, random_state=0, tol=1e-12, max_iter=100, rank_tol=None,
                 imag_tol=1e-6):
        self.n_components = n_components
        self.restarts = restarts
        self.random_state = random_state
        self.tol = tol
        self.max_iter = max_iter
        self.rank_tol = rank_tol
        self.imag_tol = imag_tol

    def fit(self, M2, M3):
        M2 = check_array(M2, dtype=np.float64)
        M3 = check_symmetric_tensor3(np.asarray(M3, dtype=np.float64), "M3")
        if M3.shape[0] != M2.shape[0]:
            raise ValueError(f"M2 is {M2.shape[0]}-dimensional but M3 is {M3.shape[0]}-dimensional")
        k = check_int(self.n_components, "n_components")
        wp, T = whitening_from_moments(M2, M3, k, rank_tol=self.rank_tol)
        pairs, traces = decompose(
            T,
            k,
            restarts=check_int(self.restarts, "restarts"),
            seed=seed_sequence(self.random_state),
            tol=check_nonneg_float(self.tol, "tol"),
            max_iter=check_int(self.max_iter, "max_iter"),
            return_traces=True,
        )
        comps = recover_parameters(pairs, wp, imag_tol=check_nonneg_float(self.imag_tol, "imag_tol"))
        self.whitening_ = wp
        self.eigenpairs_ = pairs
        self.n_iter_ = [t.iterations for t in traces]
        self.components_ = comps
        is_cplx = any(c.is_complex for c in comps)
        dtype = complex if is_cplx else float
        self.weights_ = np.array([c.weight for c in comps], dtype=dtype)
        self.means_ = np.array([c.mean for c in comps], dtype=dtype)
        self.imag_residues_ = np.array([c.imag_residue for c in comps])
        return self
