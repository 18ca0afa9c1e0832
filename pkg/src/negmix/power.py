"""Tensor power method for complex pseudo-orthonormally decomposable tensors.

The iteration is ``theta <- T(I, theta, theta) / [T(I,theta,theta)^T T(I,theta,theta)]^{1/2}``
with the bilinear (non-conjugated) product and the principal square root.
It converges to ``+-nu_1`` where ``nu_1`` maximizes ``|z_i nu_i^T theta_0|``.
Because ``z nu^{(x)3} = (-z)(-nu)^{(x)3}``, every result is only defined up to
that joint sign, and all convergence tests are sign-aligned.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    BoundHypothesisError,
    ConvergenceError,
    DegenerateNormalizerError,
    GapAssumptionError,
)
from .tensor import contract2, eval3, fro_norm, outer3, principal_sqrt, pseudo_normalize

logger = logging.getLogger(__name__)

__all__ = [
    "EigenPair",
    "IterationTrace",
    "ConvergenceBound",
    "RecoveredComponent",
    "power_iterate",
    "deflate",
    "decompose",
    "random_start",
    "recover_parameters",
    "convergence_bound",
    "sqrt_perturb_bound",
    "sign_aligned_distance",
]


@dataclass(frozen=True)
class EigenPair:
    z: complex
    nu: np.ndarray

    def flipped(self):
        return EigenPair(-self.z, -self.nu)


@dataclass
class IterationTrace:
    """Per-iteration diagnostics of one power-method run.

    ``lambdas[t-1]`` and ``thetas[t-1]`` hold the values after iteration ``t``;
    ``normalizers`` the modulus of ``[T(theta)^T T(theta)]^{1/2}`` used at that step.
    """

    lambdas: list = field(default_factory=list)
    normalizers: list = field(default_factory=list)
    displacements: list = field(default_factory=list)
    thetas: list = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self):
        return len(self.lambdas)


@dataclass(frozen=True)
class ConvergenceBound:
    M: float
    epsilon_t: float
    lambda_err_bound: float
    theta_err_bound: float
    valid: bool


@dataclass(frozen=True)
class RecoveredComponent:
    """One ``(w, mu)`` pair. ``weight``/``mean`` are real unless ``is_complex``."""

    weight: complex
    mean: np.ndarray
    imag_residue: float
    is_complex: bool


def sign_aligned_distance(a, b):
    """``min(||a - b||, ||a + b||)``."""
    a, b = np.asarray(a), np.asarray(b)
    return min(float(np.linalg.norm(a - b)), float(np.linalg.norm(a + b)))


def power_iterate(T, theta0, tol=1e-12, max_iter=100, degenerate_tol=None):
    """Run the complex power iteration from ``theta0``.

    Stops once the sign-aligned displacement between consecutive iterates is
    below ``tol``.

    Returns
    -------
    (EigenPair, IterationTrace)

    Raises
    ------
    DegenerateNormalizerError
        When ``|T(theta)^T T(theta)|`` drops below ``degenerate_tol``
        (default ``1e-14 * ||T||_F^2``).
    """
    T = np.asarray(T)
    theta = np.asarray(theta0, dtype=complex)
    if theta.shape != (T.shape[0],):
        raise ValueError(f"theta0 has shape {theta.shape}, tensor dimension is {T.shape[0]}")
    if not np.any(theta):
        raise ValueError("theta0 must be nonzero")
    if degenerate_tol is None:
        degenerate_tol = 1e-14 * fro_norm(T) ** 2
    trace = IterationTrace()
    for _ in range(max_iter):
        v = contract2(T, theta)
        norm2 = v @ v
        if abs(norm2) <= degenerate_tol:
            raise DegenerateNormalizerError("degenerate normalizer; restart with new theta0")
        root = principal_sqrt(norm2)
        new = v / root
        disp = sign_aligned_distance(new, theta)
        theta = new
        trace.lambdas.append(complex(eval3(T, theta)))
        trace.normalizers.append(float(abs(root)))
        trace.displacements.append(disp)
        trace.thetas.append(theta)
        if disp < tol:
            trace.converged = True
            break
    return EigenPair(trace.lambdas[-1], theta), trace


def deflate(T, pair):
    """``T - z nu^{(x)3}``."""
    nu = np.asarray(pair.nu)
    if abs(nu @ nu - 1) > 1e-8:
        raise ValueError("eigenvector is not pseudo-normalized (nu^T nu != 1)")
    return np.asarray(T) - pair.z * outer3(nu)


def random_start(rng, k, real=False):
    """Gaussian start vector (complex unless ``real``), pseudo-normalized."""
    theta = rng.standard_normal(k)
    if not real:
        theta = theta + 1j * rng.standard_normal(k)
    return pseudo_normalize(theta)


def decompose(T, k, restarts=10, seed=0, tol=1e-12, max_iter=100, return_traces=False):
    """Extract ``k`` pairs by power iteration and deflation.

    For each component ``restarts`` start vectors are tried; among the runs
    that converge the one with the largest ``|lambda|`` is kept. Each restart
    draws from its own child of ``SeedSequence(seed)``, so the outcome does
    not depend on evaluation order. A tensor with no imaginary part gets real
    start vectors, which keeps every iterate real.
    """
    if k < 1 or restarts < 1:
        raise ValueError("k and restarts must be >= 1")
    T = np.asarray(T, dtype=complex)
    real = not np.any(T.imag)
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = root.spawn(k * restarts)
    pairs, traces = [], []
    for comp in range(k):
        best = None
        for r in range(restarts):
            rng = np.random.default_rng(children[comp * restarts + r])
            try:
                pair, trace = power_iterate(T, random_start(rng, T.shape[0], real=real), tol=tol, max_iter=max_iter)
            except DegenerateNormalizerError:
                logger.debug("component %d restart %d hit a degenerate normalizer", comp, r)
                continue
            if trace.converged and (best is None or abs(pair.z) > abs(best[0].z)):
                best = (pair, trace)
        if best is None:
            raise ConvergenceError(f"component {comp} did not converge", partial=pairs)
        pairs.append(best[0])
        traces.append(best[1])
        T = deflate(T, best[0])
    return (pairs, traces) if return_traces else pairs


def _realify(x, imag_tol):
    x = np.asarray(x, dtype=complex)
    mag = float(np.linalg.norm(x))
    imag = float(np.linalg.norm(x.imag))
    if imag <= imag_tol * mag:
        return x.real.copy(), imag, False
    return x, imag, True


def recover_parameters(pairs, wp, imag_tol=1e-6):
    """Map whitened pairs back to ``w = 1/z^2`` and ``mu = z (W^T)^+ nu``.

    Both formulas are invariant under ``(z, nu) -> (-z, -nu)``. Values whose
    imaginary part is below ``imag_tol`` relative to their magnitude are
    returned as reals.
    """
    out = []
    for pair in pairs:
        z = complex(pair.z)
        if z == 0:
            raise ZeroDivisionError("zero eigenvalue; cannot invert")
        w, w_imag, w_cplx = _realify(1.0 / z**2, imag_tol)
        mu, mu_imag, mu_cplx = _realify(z * (wp.Wpinv @ pair.nu), imag_tol)
        weight = complex(w) if w_cplx else float(w)
        out.append(RecoveredComponent(weight, mu, max(w_imag, mu_imag), w_cplx or mu_cplx))
    return out


def convergence_bound(zs, nus, theta0, t):
    """Error bounds on the ``t``-th power iterate for an exact decomposition.

    Components are first sorted by ``|z_i nu_i^T theta0|``. With
    ``M = max{1, |z_1|^2/|z_i|^2, |z_1| ||nu_i|| / |z_i|}`` and
    ``eps_t = k M |z_2 c_2 / z_1 c_1|^{2^t}``, the sign-aligned errors satisfy
    ``|lambda_t - z_1| <= 7 |z_1| eps_t`` and
    ``||theta_t - nu_1|| <= eps_t (||nu_1|| + sqrt(2))`` for ``t >= 2`` whenever
    ``eps_t < 1/2``; ``valid`` reports whether those conditions hold.
    """
    zs = np.asarray(zs, dtype=complex)
    nus = [np.asarray(nu, dtype=complex) for nu in nus]
    theta0 = np.asarray(theta0, dtype=complex)
    k = len(zs)
    proj = np.array([abs(z * (nu @ theta0)) for z, nu in zip(zs, nus)])
    order = np.argsort(-proj, kind="stable")
    zs, nus, proj = zs[order], [nus[i] for i in order], proj[order]
    if proj[-1] == 0:
        raise GapAssumptionError("gap assumption violated: a component has zero projection")
    if k > 1 and proj[0] <= proj[1] * (1 + 1e-15):
        raise GapAssumptionError("gap assumption violated: |z_1 c_1| = |z_2 c_2|")
    z1 = abs(zs[0])
    M = max([1.0] + [max(z1**2 / abs(z) ** 2, z1 * np.linalg.norm(nu) / abs(z)) for z, nu in zip(zs, nus)])
    ratio = proj[1] / proj[0] if k > 1 else 0.0
    eps = k * M * ratio ** (2**t) if ratio > 0 else 0.0
    return ConvergenceBound(
        M=float(M),
        epsilon_t=float(eps),
        lambda_err_bound=7 * z1 * eps,
        theta_err_bound=eps * (float(np.linalg.norm(nus[0])) + math.sqrt(2)),
        valid=bool(t >= 2 and eps < 0.5),
    )


def sqrt_perturb_bound(z, kexp):
    """Upper bound ``2|z|(2^kexp - 1)`` on ``|(1 + z)^{-kexp} - 1|`` for ``|z| < 1/2``."""
    if abs(z) >= 0.5:
        raise BoundHypothesisError("bound hypothesis violated: |z| must be < 1/2")
    if kexp <= 0:
        raise ValueError("kexp must be positive")
    return 2 * abs(z) * (2**kexp - 1)
