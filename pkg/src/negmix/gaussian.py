"""Negative mixtures of spherical Gaussians.

``f(x) = sum_i w_i N(x; mu_i, sigma_i^2 I)`` with ``sum_i w_i = 1`` and some
``w_i < 0``. This module covers density evaluation, validity bounds for a
two-density signed mixture, rejection sampling, and the moment-based fitting
pipeline (candidate average variance -> moment tensors -> whitening ->
power method -> variances from ``m1``).
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import FitError, LowAcceptanceError, NegMixError
from .power import decompose, recover_parameters
from .tensor import outer3, symmetrize
from .whitening import whitening_from_moments

logger = logging.getLogger(__name__)

VAR_FLOOR = 1e-6
PDF_FLOOR = 1e-300


@dataclass(frozen=True)
class SphericalMixture:
    """Signed mixture of spherical Gaussians.

    Construction checks shapes, nonzero weights and positive variances. The
    weights-sum-to-one invariant is only enforced with ``strict=True``
    because fitted models report ``sum(w)`` as a diagnostic instead of
    renormalizing.
    """

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def __init__(self, weights, means, variances, strict=True):
        w = np.atleast_1d(np.asarray(weights, dtype=float))
        mu = np.atleast_2d(np.asarray(means, dtype=float))
        var = np.atleast_1d(np.asarray(variances, dtype=float))
        if not (len(w) == mu.shape[0] == len(var)):
            raise ValueError("weights, means and variances disagree on the number of components")
        if np.any(w == 0):
            raise ValueError("weights must be nonzero")
        if np.any(var <= 0):
            raise ValueError("variances must be positive")
        if strict and abs(w.sum() - 1) > 1e-10:
            raise ValueError(f"weights sum to {w.sum()!r}, expected 1")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "variances", var)

    @property
    def k(self):
        return len(self.weights)

    @property
    def n(self):
        return self.means.shape[1]

    @property
    def mean(self):
        return self.weights @ self.means

    def to_json(self):
        return {
            "k": self.k,
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
        }

    @classmethod
    def from_json(cls, obj, strict=True):
        if int(obj["k"]) != len(obj["weights"]):
            raise ValueError("'k' does not match the number of weights")
        return cls(obj["weights"], obj["means"], obj["variances"], strict=strict)

    def split(self):
        """Group positive and negative weights: ``f = A p - B q`` with ``A - B = sum(w)``.

        Returns ``(p, q, A)`` where ``p`` and ``q`` are ordinary (positive)
        mixtures; ``q`` is ``None`` when no weight is negative.
        """
        pos, neg = self.weights > 0, self.weights < 0
        A = self.weights[pos].sum()
        p = SphericalMixture(self.weights[pos] / A, self.means[pos], self.variances[pos])
        if not neg.any():
            return p, None, A
        B = -self.weights[neg].sum()
        q = SphericalMixture(-self.weights[neg] / B, self.means[neg], self.variances[neg])
        return p, q, A


def _component_densities(model, X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.n:
        raise ValueError(f"expected points of dimension {model.n}, got {X.shape[1]}")
    sq = ((X[:, None, :] - model.means[None, :, :]) ** 2).sum(axis=2)
    var = model.variances[None, :]
    return (2 * np.pi * var) ** (-model.n / 2) * np.exp(-sq / (2 * var))


def pdf(model, X):
    """Signed density at each row of ``X`` (a scalar for a single point)."""
    X = np.asarray(X, dtype=float)
    vals = _component_densities(model, X) @ model.weights
    return float(vals[0]) if X.ndim == 1 else vals


def alpha_max_spherical(muf, sigf2, mug, sigg2, n=None):
    """Largest ``alpha`` such that ``alpha f - (alpha - 1) g`` is a density.

    ``f = N(muf, sigf2 I)``, ``g = N(mug, sigg2 I)``. Returns ``None`` when no
    ``alpha > 1`` exists (``sigf2 <= sigg2``).
    """
    muf, mug = np.atleast_1d(np.asarray(muf, float)), np.atleast_1d(np.asarray(mug, float))
    n = len(muf) if n is None else n
    gap2 = float(np.sum((muf - mug) ** 2))
    if gap2 == 0 and sigf2 == sigg2:
        raise ValueError("distributions must be distinct")
    if sigf2 <= sigg2:
        return None
    ratio = (sigg2 / sigf2) ** (n / 2)
    return 1.0 / (1.0 - ratio * math.exp(-gap2 / (2 * (sigf2 - sigg2))))


@dataclass(frozen=True)
class GaussPairEnvelope:
    """Validity data for ``alpha f - (alpha - 1) g`` with general Gaussians.

    ``status`` is ``"ok"``, ``"not_psd"`` (no ``alpha > 1`` works) or
    ``"semidefinite"`` (PSD but singular; no closed-form bound).
    """

    status: str
    Sigma0: np.ndarray = None
    mu0: np.ndarray = None
    m: float = None
    alpha_max: float = None


def gauss_envelope(muf, Sigmaf, mug, Sigmag, tol=1e-12):
    muf, mug = np.asarray(muf, float), np.asarray(mug, float)
    Sf, Sg = np.asarray(Sigmaf, float), np.asarray(Sigmag, float)
    Sf_inv, Sg_inv = np.linalg.inv(Sf), np.linalg.inv(Sg)
    P = Sg_inv - Sf_inv
    eig = np.linalg.eigvalsh(0.5 * (P + P.T))
    scale = max(np.abs(Sf_inv).max(), np.abs(Sg_inv).max())
    if eig.min() < -tol * scale:
        return GaussPairEnvelope("not_psd")
    if eig.min() <= tol * scale:
        return GaussPairEnvelope("semidefinite")
    Sigma0 = np.linalg.inv(P)
    mu0 = Sigma0 @ (Sg_inv @ mug - Sf_inv @ muf)
    d = muf - mug
    m = float(-d @ Sf_inv @ Sigma0 @ Sg_inv @ d)
    det_ratio = np.linalg.det(Sg) / np.linalg.det(Sf)
    alpha = 1.0 / (1.0 - math.sqrt(det_ratio) * math.exp(m / 2))
    return GaussPairEnvelope("ok", Sigma0, mu0, m, alpha)


def sample_positive(model, size, rng):
    """Draw from an all-positive mixture (component index, then Gaussian)."""
    if np.any(model.weights < 0):
        raise ValueError("direct sampling needs nonnegative weights")
    idx = rng.choice(model.k, size=size, p=model.weights / model.weights.sum())
    noise = rng.standard_normal((size, model.n))
    return model.means[idx] + noise * np.sqrt(model.variances[idx])[:, None]


@dataclass
class RejectionResult:
    samples: np.ndarray
    n_proposed: int

    @property
    def acceptance_rate(self):
        return len(self.samples) / self.n_proposed if self.n_proposed else float("nan")


def rejection_sample(f, g, alpha, N, seed=0, batch=10_000):
    """Sample ``alpha f - (alpha - 1) g`` by rejection from ``f``.

    A proposal ``x ~ f`` is kept when ``e alpha f(x) >= (alpha - 1) g(x)`` for
    ``e ~ U[0, 1]``; the expected acceptance rate is ``1/alpha``. Proposals
    are processed in windows of ``batch``; a window accepting fewer than
    ``1/(10 alpha)`` of its proposals raises :class:`LowAcceptanceError`.
    """
    if alpha <= 1:
        raise ValueError("alpha must be > 1")
    rng = np.random.default_rng(seed)
    chunks, accepted, proposed = [], 0, 0
    while accepted < N:
        x = sample_positive(f, batch, rng)
        e = rng.random(batch)
        keep = e * alpha * pdf(f, x) >= (alpha - 1) * pdf(g, x)
        proposed += batch
        if keep.mean() < 1 / (10 * alpha):
            raise LowAcceptanceError("suspiciously low acceptance; model may be invalid")
        take = x[keep][: N - accepted]
        chunks.append(take)
        accepted += len(take)
        if accepted == N:
            # count proposals only up to the last accepted one
            last = np.flatnonzero(keep)[len(take) - 1]
            proposed -= batch - (last + 1)
    return RejectionResult(np.concatenate(chunks, axis=0), proposed)


def sample_mixture(model, N, seed=0):
    """Sample a signed mixture by splitting it into ``A p - (A - 1) q``."""
    p, q, A = model.split()
    if q is None:
        rng = np.random.default_rng(seed)
        return RejectionResult(sample_positive(p, N, rng), N)
    return rejection_sample(p, q, A, N, seed=seed)


@dataclass(frozen=True)
class RawMoments:
    mean: np.ndarray
    cov: np.ndarray
    E2: np.ndarray
    E3: np.ndarray


def sample_raw_moments(X):
    """Empirical mean, covariance, ``E[x x]`` and ``E[x x x]`` (all ``1/N``)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    N = X.shape[0]
    if N < 2:
        raise ValueError("need at least two samples")
    mean = X.mean(axis=0)
    E2 = X.T @ X / N
    E3 = symmetrize(np.einsum("ni,nj,nk->ijk", X, X, X, optimize=True) / N)
    cov = E2 - np.outer(mean, mean)
    return RawMoments(mean, 0.5 * (cov + cov.T), 0.5 * (E2 + E2.T), E3)


def candidate_sigmas(cov):
    """All eigenpairs of the covariance in ascending order of eigenvalue."""
    vals, vecs = np.linalg.eigh(np.asarray(cov, dtype=float))
    return [(float(vals[i]), vecs[:, i]) for i in range(len(vals))]


@dataclass(frozen=True)
class MomentSet:
    m1: np.ndarray
    M2: np.ndarray
    M3: np.ndarray
    sigma_bar2: float
    v: np.ndarray
    candidate_index: int = -1


def build_moment_tensors(raw, sigma_bar2, v, candidate_index=-1):
    """Correct raw moments by a candidate average variance.

    ``m1 = E[x (v^T (x - E x))^2]`` is expanded in raw moments so the data
    itself is not needed: with ``mu = E x``,
    ``E[x_i (x - mu)_j (x - mu)_k] = E3_ijk - mu_j E2_ik - mu_k E2_ij + mu_i mu_j mu_k``.
    """
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.norm(v) - 1) > 1e-12:
        raise ValueError("v must have unit norm")
    mu, E2, E3 = raw.mean, raw.E2, raw.E3
    n = len(mu)
    vv = v @ mu
    m1 = np.einsum("ijk,j,k->i", E3, v, v) - 2 * vv * (E2 @ v) + vv**2 * mu
    M2 = E2 - sigma_bar2 * np.eye(n)
    eye = np.eye(n)
    corr = (
        np.einsum("i,jk->ijk", m1, eye) + np.einsum("j,ik->ijk", m1, eye) + np.einsum("k,ij->ijk", m1, eye)
    )
    M3 = E3 - corr
    return MomentSet(m1, M2, M3, float(sigma_bar2), v, candidate_index)


@dataclass(frozen=True)
class AnalyticMoments:
    """Population quantities of a signed spherical mixture.

    ``mean``, ``cov``, ``E2`` and ``E3`` come from per-component Gaussian
    moments; ``m1``, ``M2`` and ``M3`` are the corrected closed forms
    ``sum w s^2 mu``, ``sum w mu mu`` and ``sum w mu^{(x)3}``. ``r`` counts the
    negative eigenvalues of ``sum w (mu - mean)(mu - mean)^T``.
    """

    raw: RawMoments
    m1: np.ndarray
    M2: np.ndarray
    M3: np.ndarray
    sigma_bar2: float
    r: int

    @property
    def mean(self):
        return self.raw.mean

    @property
    def cov(self):
        return self.raw.cov


def analytic_moment_tensors(model, rtol=1e-9):
    w, mu, var = model.weights, model.means, model.variances
    n = model.n
    eye = np.eye(n)
    mean = w @ mu
    E2 = sum(wi * (np.outer(m, m) + s * eye) for wi, m, s in zip(w, mu, var))
    # E[(m + z)^{(x)3}] = m^{(x)3} + s (m (x) I + perms) for z ~ N(0, s I)
    E3 = sum(
        wi
        * (
            outer3(m)
            + s * (np.einsum("i,jk->ijk", m, eye) + np.einsum("j,ik->ijk", m, eye) + np.einsum("k,ij->ijk", m, eye))
        )
        for wi, m, s in zip(w, mu, var)
    )
    cov = E2 - np.outer(mean, mean)
    sigma_bar2 = float(w @ var)
    centered = mu - mean
    Mc = (centered.T * w) @ centered
    eig = np.linalg.eigvalsh(Mc)
    thresh = rtol * max(np.abs(eig).max(), 1e-300)
    r = int(np.sum(eig < -thresh))
    return AnalyticMoments(
        raw=RawMoments(mean, cov, E2, E3),
        m1=(w * var) @ mu,
        M2=(mu.T * w) @ mu,
        M3=sum(wi * outer3(m) for wi, m in zip(w, mu)),
        sigma_bar2=sigma_bar2,
        r=r,
    )


@dataclass
class RecoveryReport:
    """Diagnostics attached to a recovered model."""

    weight_sum: float
    imag_residue: float
    is_complex: bool
    raw_variances: np.ndarray
    negative_variance: bool
    iterations: list = field(default_factory=list)


def recover_model(ms, k, restarts=10, seed=0, tol=1e-12, max_iter=100, rank_tol=None, imag_tol=1e-6):
    """Recover ``(w_i, mu_i, sigma_i^2)`` from a :class:`MomentSet`.

    Weights and means come from whitening ``M2``/``M3`` and the power method.
    Variances solve ``m1 = sum_i (w_i sigma_i^2) mu_i`` by least squares in the
    products ``w_i sigma_i^2`` (real parts of the means). Variances below
    ``VAR_FLOOR`` are clamped in the returned model; the unclamped values are
    in the report.

    Returns
    -------
    (SphericalMixture, RecoveryReport)
    """
    n = len(ms.m1)
    if k > n:
        raise ValueError(f"k={k} exceeds the data dimension {n}")
    wp, T = whitening_from_moments(ms.M2, ms.M3, k, rank_tol=rank_tol)
    pairs, traces = decompose(T, k, restarts=restarts, seed=seed, tol=tol, max_iter=max_iter, return_traces=True)
    comps = recover_parameters(pairs, wp, imag_tol=imag_tol)
    w = np.array([complex(c.weight).real for c in comps])
    mu = np.array([np.real(c.mean) for c in comps])
    coef, *_ = np.linalg.lstsq(mu.T, ms.m1, rcond=None)
    raw_var = coef / w
    report = RecoveryReport(
        weight_sum=float(w.sum()),
        imag_residue=max(c.imag_residue for c in comps),
        is_complex=any(c.is_complex for c in comps),
        raw_variances=raw_var,
        negative_variance=bool(np.any(raw_var < VAR_FLOOR)),
        iterations=[t.iterations for t in traces],
    )
    if report.negative_variance:
        logger.info("recovered variances below floor: %s", raw_var)
    model = SphericalMixture(w, mu, np.maximum(raw_var, VAR_FLOOR), strict=False)
    return model, report


def log_likelihood(model, X, pdf_floor=PDF_FLOOR):
    """``sum_j log max(f(x_j), pdf_floor)`` and the number of floored points."""
    vals = np.atleast_1d(pdf(model, np.atleast_2d(X)))
    floored = vals < pdf_floor
    return float(np.log(np.where(floored, pdf_floor, vals)).sum()), int(floored.sum())


@dataclass
class CandidateResult:
    index: int
    eigenvalue: float
    log_likelihood: float = None
    n_floored: int = None
    score: float = None
    model: SphericalMixture = None
    report: RecoveryReport = None
    error: str = None


@dataclass
class FitResult:
    model: SphericalMixture
    candidate_index: int
    candidates: list

    @property
    def best(self):
        return self.candidates[self.candidate_index]


def density_scale(model):
    """``sum_i |w_i| (2 pi sigma_i^2)^{-n/2}``, an upper bound on ``|f|``."""
    return float(np.abs(model.weights) @ (2 * np.pi * model.variances) ** (-model.n / 2))


def fit(
    X,
    k,
    restarts=10,
    seed=0,
    tol=1e-12,
    max_iter=100,
    rank_tol=None,
    imag_tol=1e-6,
    min_samples=None,
    score_rel_floor=1e-3,
):
    """Fit a signed spherical mixture by the moment method.

    Every covariance eigenvalue is tried as the average variance; each
    candidate's model is scored by log-likelihood on ``X`` and the best one
    wins. Candidate indices are 0-based positions in ascending eigenvalue
    order.

    For scoring, densities are floored at ``score_rel_floor * density_scale(model)``
    rather than at ``PDF_FLOOR``: a fitted model that dips slightly below zero
    near the data would otherwise lose ~690 nats per such point to a far
    worse but nonnegative candidate. ``score_rel_floor=0`` scores with the
    plain ``PDF_FLOOR``. The reported ``log_likelihood`` of each candidate is
    the unmodified one.
    """
    X = np.asarray(X, dtype=float)
    N, n = X.shape
    if k > n:
        raise ValueError(f"k={k} exceeds the data dimension {n}")
    min_samples = 10 * n * n if min_samples is None else min_samples
    if N < min_samples:
        raise ValueError(f"need at least {min_samples} samples, got {N}")
    raw = sample_raw_moments(X)
    candidates = []
    for idx, (val, vec) in enumerate(candidate_sigmas(raw.cov)):
        cand = CandidateResult(idx, val)
        try:
            ms = build_moment_tensors(raw, val, vec, candidate_index=idx)
            cand.model, cand.report = recover_model(
                ms, k, restarts=restarts, seed=seed, tol=tol, max_iter=max_iter, rank_tol=rank_tol, imag_tol=imag_tol
            )
            cand.log_likelihood, cand.n_floored = log_likelihood(cand.model, X)
            floor = max(PDF_FLOOR, score_rel_floor * density_scale(cand.model))
            cand.score = log_likelihood(cand.model, X, pdf_floor=floor)[0]
        except (NegMixError, ValueError, ZeroDivisionError, np.linalg.LinAlgError) as exc:
            cand.error = f"{type(exc).__name__}: {exc}"
            logger.info("candidate %d failed: %s", idx, cand.error)
        candidates.append(cand)
    ok = [c for c in candidates if c.error is None]
    if not ok:
        raise FitError(
            "all candidates failed: " + "; ".join(f"[{c.index}] {c.error}" for c in candidates),
            failures={c.index: c.error for c in candidates},
        )
    best = max(ok, key=lambda c: c.score)
    return FitResult(best.model, best.index, candidates)
