import numpy as np
import pytest

from negmix.gaussian import SphericalMixture

RUNNING_WEIGHTS = (1.5, -0.5)
RUNNING_MEANS = ((11.4, -3.4), (11.9, -1.9))
RUNNING_VARIANCES = (8.0, 4.0)


@pytest.fixture
def running_model():
    return SphericalMixture(RUNNING_WEIGHTS, RUNNING_MEANS, RUNNING_VARIANCES)


def random_negative_mixture(rng, k, n):
    """A valid signed spherical mixture with ``k <= n`` components.

    Negative components are each paired with a wider positive component
    ``c (a f - (a - 1) g)`` where ``a`` stays below the pair's validity bound,
    so the total density is nonnegative by construction.
    """
    from negmix.gaussian import alpha_max_spherical

    while True:
        n_neg = int(rng.integers(1, k // 2 + 1)) if k >= 2 else 0
        means = rng.normal(scale=3.0, size=(k, n))
        variances = rng.uniform(0.5, 3.0, size=k)
        weights = np.empty(k)
        mass = rng.dirichlet(np.ones(k - n_neg))
        for j in range(n_neg):
            f, g = 2 * j, 2 * j + 1
            variances[f] = variances[g] * rng.uniform(1.2, 2.0)
            means[g] = means[f] + rng.normal(scale=0.5 * np.sqrt(variances[g]), size=n)
            amax = alpha_max_spherical(means[f], variances[f], means[g], variances[g])
            a = 1 + (amax - 1) * rng.uniform(0.2, 0.95)
            weights[f] = mass[j] * a
            weights[g] = -mass[j] * (a - 1)
        weights[2 * n_neg:] = mass[n_neg:]
        if np.abs(weights).min() > 1e-2 and np.linalg.svd(means, compute_uv=False).min() > 1e-2:
            return SphericalMixture(weights, means, variances)


def pseudo_orthonormal_instance(rng, k, scale=0.3, z=None):
    """``T = sum z_i nu_i^{(x)3}`` with ``nu_i^T nu_j = delta_ij`` (complex).

    ``expm`` of a complex skew-symmetric matrix is complex orthogonal.
    """
    from scipy.linalg import expm

    from negmix.tensor import outer3

    A = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) * scale
    Q = expm(A - A.T)
    z = rng.standard_normal(k) + 1j * rng.standard_normal(k) if z is None else np.asarray(z, dtype=complex)
    T = sum(z[j] * outer3(Q[:, j]) for j in range(k))
    return T, z, [Q[:, j] for j in range(k)]
