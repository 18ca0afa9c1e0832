import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import pseudo_orthonormal_instance
from negmix.exceptions import (
    BoundHypothesisError,
    ConvergenceError,
    DegenerateNormalizerError,
    GapAssumptionError,
)
from negmix.gaussian import analytic_moment_tensors
from negmix.power import (
    EigenPair,
    convergence_bound,
    decompose,
    deflate,
    power_iterate,
    random_start,
    recover_parameters,
    sign_aligned_distance,
    sqrt_perturb_bound,
)
from negmix.tensor import fro_norm, outer3
from negmix.whitening import whitening_from_moments


@pytest.fixture
def running_whitened(running_model):
    am = analytic_moment_tensors(running_model)
    return whitening_from_moments(am.M2, am.M3, 2)


def _sorted_params(comps):
    w = np.array([complex(c.weight).real for c in comps])
    mu = np.array([np.real(c.mean) for c in comps])
    order = np.argsort(-w)
    return w[order], mu[order]


def test_exact_recovery_running_example(running_model, running_whitened):
    wp, T = running_whitened
    pairs = decompose(T, 2, restarts=3, seed=11)
    comps = recover_parameters(pairs, wp)
    assert not any(c.is_complex for c in comps)
    w, mu = _sorted_params(comps)
    np.testing.assert_allclose(w, [1.5, -0.5], atol=1e-8)
    np.testing.assert_allclose(mu, running_model.means, atol=1e-8)


def test_negative_weight_gives_imaginary_eigenvalue(running_whitened):
    _, T = running_whitened
    zs = sorted((p.z for p in decompose(T, 2, seed=0)), key=lambda z: abs(z.imag))
    # w = 1/z^2: w = 1.5 -> real z, w = -0.5 -> purely imaginary z
    assert abs(zs[0].imag) < 1e-10 and abs(abs(zs[0].real) - 1.5**-0.5) < 1e-10
    assert abs(zs[1].real) < 1e-10 and abs(abs(zs[1].imag) - 2**0.5) < 1e-10


def test_recovery_is_sign_invariant(running_whitened):
    wp, T = running_whitened
    pairs = decompose(T, 2, seed=1)
    a = recover_parameters(pairs, wp)
    b = recover_parameters([p.flipped() for p in pairs], wp)
    for ca, cb in zip(a, b):
        assert ca.weight == pytest.approx(cb.weight)
        np.testing.assert_allclose(ca.mean, cb.mean)


def test_zero_eigenvalue_cannot_be_inverted(running_whitened):
    wp, _ = running_whitened
    with pytest.raises(ZeroDivisionError):
        recover_parameters([EigenPair(0j, np.array([1.0, 0.0]))], wp)


def test_decompose_is_deterministic(running_whitened):
    _, T = running_whitened
    a = decompose(T, 2, seed=5)
    b = decompose(T, 2, seed=5)
    for pa, pb in zip(a, b):
        assert pa.z == pb.z
        np.testing.assert_array_equal(pa.nu, pb.nu)


def test_deflation_removes_component():
    rng = np.random.default_rng(0)
    T, z, nus = pseudo_orthonormal_instance(rng, 3)
    rest = deflate(T, EigenPair(z[0], nus[0]))
    expected = sum(z[j] * outer3(nus[j]) for j in (1, 2))
    np.testing.assert_allclose(rest, expected, atol=1e-12)


def test_deflation_requires_normalized_vector():
    with pytest.raises(ValueError, match="pseudo-normalized"):
        deflate(outer3(np.ones(2)), EigenPair(1.0, np.ones(2)))


def test_degenerate_normalizer():
    T = outer3(np.array([1.0, 0.0]))
    with pytest.raises(DegenerateNormalizerError, match="degenerate normalizer"):
        power_iterate(T, np.array([0.0, 1.0]))


def test_nonconvergence_carries_partial_result():
    rng = np.random.default_rng(3)
    T, _, _ = pseudo_orthonormal_instance(rng, 3)
    with pytest.raises(ConvergenceError) as info:
        decompose(T, 3, restarts=2, max_iter=1)
    assert info.value.partial == []


def test_quadratic_convergence():
    rng = np.random.default_rng(7)
    T, z, nus = pseudo_orthonormal_instance(rng, 4)
    theta0 = random_start(rng, 4)
    _, trace = power_iterate(T, theta0, tol=0.0, max_iter=12)
    target = nus[int(np.argmax([abs(zi * (nu @ theta0)) for zi, nu in zip(z, nus)]))]
    err = np.array([sign_aligned_distance(th, target) for th in trace.thetas])
    assert err[-1] < 1e-12
    # once in the basin, e_{t+1} <= C e_t^2 with a modest C
    basin = [(a, b) for a, b in zip(err, err[1:]) if 1e-7 < a < 0.1]
    assert basin
    assert max(b / a**2 for a, b in basin) < 50


def test_degenerate_normalizers_are_rare(running_whitened):
    _, T = running_whitened
    rng = np.random.default_rng(0)
    hits = 0
    for _ in range(500):
        try:
            power_iterate(T, random_start(rng, 2), max_iter=30)
        except DegenerateNormalizerError:
            hits += 1
    assert hits <= 5


def test_real_tensor_keeps_iterates_real():
    v = np.array([[1.0, 0.0], [0.0, 1.0]])
    T = 2 * outer3(v[0]) + 0.5 * outer3(v[1])
    _, traces = decompose(T, 2, seed=0, return_traces=True)
    for tr in traces:
        assert all(np.all(th.imag == 0) for th in tr.thetas)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
def test_convergence_bound_holds(seed, k):
    rng = np.random.default_rng(seed)
    T, z, nus = pseudo_orthonormal_instance(rng, k)
    theta0 = random_start(rng, k)
    try:
        convergence_bound(z, nus, theta0, 2)
    except GapAssumptionError:
        return
    _, trace = power_iterate(T, theta0, tol=0.0, max_iter=10)
    j1 = int(np.argmax([abs(zi * (nu @ theta0)) for zi, nu in zip(z, nus)]))
    for t in range(2, 11):
        b = convergence_bound(z, nus, theta0, t)
        if not b.valid:
            continue
        th, lam = trace.thetas[t - 1], trace.lambdas[t - 1]
        s = 1 if np.linalg.norm(th - nus[j1]) <= np.linalg.norm(th + nus[j1]) else -1
        floor = 1e-12 * max(1.0, fro_norm(T))
        assert abs(lam - s * z[j1]) <= b.lambda_err_bound + floor
        assert np.linalg.norm(th - s * nus[j1]) <= b.theta_err_bound + floor


def test_convergence_bound_tie_and_single_component():
    nus = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    with pytest.raises(GapAssumptionError, match="gap assumption"):
        convergence_bound([1.0, 1.0], nus, np.array([1.0, 1.0]) / np.sqrt(2), 3)
    b = convergence_bound([2.0], [np.array([1.0])], np.array([1.0]), 2)
    assert b.epsilon_t == 0 and b.valid


def test_convergence_bound_validity_flag():
    nus = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    theta0 = np.array([1.0, 0.9])
    assert not convergence_bound([1.0, 1.0 + 0j], nus, theta0, 1).valid
    assert convergence_bound([1.0, 1.0 + 0j], nus, theta0, 6).valid


@settings(max_examples=300)
@given(
    st.floats(0, 0.4999, allow_nan=False),
    st.floats(-np.pi, np.pi, allow_nan=False),
    st.sampled_from([0.5, 1.0, 1.5]),
)
def test_sqrt_perturb_bound(r, phi, kexp):
    z = r * np.exp(1j * phi)
    assert abs((1 + z) ** (-kexp) - 1) <= sqrt_perturb_bound(z, kexp) + 1e-15


def test_sqrt_perturb_bound_hypothesis_enforced():
    with pytest.raises(BoundHypothesisError):
        sqrt_perturb_bound(0.5, 1)
