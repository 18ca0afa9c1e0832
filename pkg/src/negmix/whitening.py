"""Whitening of a signed second-moment matrix.

For ``M2 = sum_i w_i mu_i mu_i^T`` with some ``w_i < 0`` the usual
``U D^{-1/2}`` whitening needs square roots of negative eigenvalues. Using
the principal branch gives a complex ``W`` with ``W^T M2 W = I`` (plain
transpose, not conjugate), and ``M3(W, W, W)`` then has a pseudo-orthonormal
decomposition.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import RankDeficiencyError, SingularWhiteningError
from .tensor import apply3, principal_sqrt

__all__ = ["WhiteningPair", "truncated_sym_eig", "build_whitening", "whiten", "whitening_from_moments"]


@dataclass(frozen=True)
class WhiteningPair:
    """``W = U D^{-1/2}`` together with ``Wpinv = U D^{1/2}``, i.e. ``(W^T)^+``."""

    W: np.ndarray
    Wpinv: np.ndarray
    eigvals: np.ndarray

    @property
    def d(self):
        return self.W.shape[0]

    @property
    def k(self):
        return self.W.shape[1]

    @property
    def is_real(self):
        return bool(np.all(self.eigvals > 0))


def truncated_sym_eig(M, k, rank_tol=None):
    """Keep the ``k`` eigenpairs of largest modulus of a symmetric matrix.

    Eigenvalues come back sorted by descending modulus; ties are broken by
    descending signed value, then by the solver's original index. Negative
    eigenvalues keep their sign.

    Raises
    ------
    RankDeficiencyError
        If the k-th retained eigenvalue has modulus below ``rank_tol``
        (default ``1e-9 * ||M||_2``).
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    scale = max(np.abs(M).max(), 1.0)
    if np.abs(M - M.T).max() > 1e-10 * scale:
        raise ValueError("matrix is not symmetric")
    if not 1 <= k <= M.shape[0]:
        raise ValueError(f"k={k} must lie in [1, {M.shape[0]}]")
    M = 0.5 * (M + M.T)
    vals, vecs = np.linalg.eigh(M)
    order = np.lexsort((np.arange(len(vals)), -vals, -np.abs(vals)))[:k]
    D, U = vals[order], vecs[:, order]
    if rank_tol is None:
        rank_tol = 1e-9 * np.abs(vals).max() if vals.size else 0.0
    if abs(D[-1]) < rank_tol or D[-1] == 0:
        raise RankDeficiencyError(f"M2 has numerical rank < {k}")
    return U, D


def build_whitening(U, D):
    """Form ``W = U diag(D)^{-1/2}`` and ``Wpinv = U diag(D)^{1/2}``."""
    U = np.asarray(U, dtype=float)
    D = np.asarray(D, dtype=float)
    if np.any(D == 0):
        raise SingularWhiteningError("cannot whiten: singular M2")
    roots = principal_sqrt(D)
    return WhiteningPair(W=U / roots, Wpinv=U * roots, eigvals=D.copy())


def whiten(M3, wp):
    """``M3(W, W, W)``, a ``k x k x k`` complex tensor."""
    M3 = np.asarray(M3)
    if M3.shape != (wp.d,) * 3:
        raise ValueError(f"M3 has shape {M3.shape}, whitening expects dimension {wp.d}")
    return apply3(M3, wp.W, wp.W, wp.W)


def whitening_from_moments(M2, M3, k, rank_tol=None):
    """Truncated eigendecomposition, whitening and whitened tensor in one call."""
    U, D = truncated_sym_eig(M2, k, rank_tol=rank_tol)
    wp = build_whitening(U, D)
    return wp, whiten(M3, wp)
