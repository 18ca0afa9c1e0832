import numpy as np

from negmix.experiments import RUNNING_EXAMPLE, convergence_curve, learning_curve, matched_errors
from negmix.gaussian import SphericalMixture


def test_matched_errors_ignores_order():
    swapped = SphericalMixture(
        RUNNING_EXAMPLE.weights[::-1], RUNNING_EXAMPLE.means[::-1], RUNNING_EXAMPLE.variances[::-1]
    )
    assert matched_errors(RUNNING_EXAMPLE, swapped) == (0.0, 0.0)


def test_convergence_curve_shape_and_limit():
    curve = convergence_curve(R=40, iterations=20, seed=1)
    assert curve.shape == (20, 3)
    np.testing.assert_array_equal(curve[:, 0], np.arange(1, 21))
    assert curve[14, 1] < 1e-8 and curve[14, 2] < 1e-8
    assert curve[0, 2] > curve[-1, 2]


def test_convergence_curve_deterministic():
    np.testing.assert_array_equal(convergence_curve(R=5, seed=3), convergence_curve(R=5, seed=3))


def test_learning_curve_small():
    rows = learning_curve(sizes=(2_000, 50_000), R=3, seed=0, restarts=3)
    assert [r["size"] for r in rows] == [2_000, 50_000]
    assert all(r["runs"] == 3 for r in rows)
    assert rows[1]["median_error"] < rows[0]["median_error"]
