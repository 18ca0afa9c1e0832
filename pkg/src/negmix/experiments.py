"""Reproducible experiments on the two-component running example.

``convergence_curve`` tracks the parameter error of the first extracted
component along power iterations on exact moment tensors;
``learning_curve`` fits models on sampled datasets of increasing size.
Both derive every random stream from one integer seed.
"""

import itertools
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from .exceptions import NegMixError
from .gaussian import SphericalMixture, analytic_moment_tensors, fit, sample_mixture
from .power import power_iterate, random_start
from .whitening import whitening_from_moments

RUNNING_EXAMPLE = SphericalMixture([1.5, -0.5], [[11.4, -3.4], [11.9, -1.9]], [8.0, 4.0])

DEFAULT_SIZES = (1_000, 10_000, 100_000, 400_000)


def matched_errors(true, est):
    """Best-permutation errors ``(||w - w_hat||_2, ||U - U_hat||_F)``.

    Only real parts of the estimate are used. The permutation minimizes the
    combined squared error.
    """
    w, U = np.asarray(true.weights), np.asarray(true.means)
    w_hat, U_hat = np.real(est.weights), np.real(est.means)
    best = None
    for perm in itertools.permutations(range(len(w))):
        perm = list(perm)
        ew = float(np.linalg.norm(w - w_hat[perm]))
        eu = float(np.linalg.norm(U - U_hat[perm]))
        if best is None or ew**2 + eu**2 < best[0] ** 2 + best[1] ** 2:
            best = (ew, eu)
    return best


def convergence_curve(R=500, iterations=20, seed=0, model=RUNNING_EXAMPLE):
    """Average first-component error per iteration over ``R`` random starts.

    Returns an array with columns ``(iteration, weight_error, mean_error)``.
    Each run is compared with the component it ends up on.
    """
    am = analytic_moment_tensors(model)
    wp, T = whitening_from_moments(am.M2, am.M3, model.k)
    werr = np.zeros(iterations)
    merr = np.zeros(iterations)
    for child in np.random.SeedSequence(seed).spawn(R):
        rng = np.random.default_rng(child)
        _, trace = power_iterate(T, random_start(rng, model.k), tol=0.0, max_iter=iterations)
        lam = np.array(trace.lambdas)
        w_t = 1.0 / lam**2
        mu_t = lam[:, None] * (np.array(trace.thetas) @ wp.Wpinv.T)
        j = int(np.argmin(np.abs(model.weights - w_t[-1])))
        werr += np.abs(w_t - model.weights[j])
        merr += np.linalg.norm(mu_t - model.means[j], axis=1)
    return np.column_stack([np.arange(1, iterations + 1), werr / R, merr / R])


@dataclass
class LearningRun:
    size: int
    rep: int
    weight_error: float
    mean_error: float
    pathological: bool
    failed: bool

    @property
    def error(self):
        return float(np.hypot(self.weight_error, self.mean_error))


def _learning_run(model, size, rep, seq, restarts):
    data_seq, fit_seq = seq.spawn(2)
    X = sample_mixture(model, size, seed=data_seq).samples
    try:
        res = fit(X, model.k, restarts=restarts, seed=fit_seq)
    except NegMixError:
        return LearningRun(size, rep, float("nan"), float("nan"), True, True)
    ew, eu = matched_errors(model, res.model)
    return LearningRun(size, rep, ew, eu, res.best.report.is_complex, False)


def learning_runs(sizes=DEFAULT_SIZES, R=20, seed=0, restarts=10, model=RUNNING_EXAMPLE, n_jobs=1):
    seqs = np.random.SeedSequence(seed).spawn(len(sizes) * R)
    jobs = [(size, rep, seqs[i * R + rep]) for i, size in enumerate(sizes) for rep in range(R)]
    return Parallel(n_jobs=n_jobs)(delayed(_learning_run)(model, s, r, q, restarts) for s, r, q in jobs)


def summarize_learning(runs):
    """One row per size: median/mean errors and the pathological-run count."""
    rows = []
    for size in sorted({r.size for r in runs}):
        sel = [r for r in runs if r.size == size]
        ok = [r for r in sel if not r.failed]
        err = np.array([r.error for r in ok]) if ok else np.array([np.nan])
        rows.append(
            {
                "size": size,
                "runs": len(sel),
                "median_error": float(np.median(err)),
                "mean_error": float(np.mean(err)),
                "median_weight_error": float(np.median([r.weight_error for r in ok])) if ok else float("nan"),
                "median_mean_error": float(np.median([r.mean_error for r in ok])) if ok else float("nan"),
                "pathological": sum(r.pathological for r in sel),
                "failed": sum(r.failed for r in sel),
            }
        )
    return rows


def learning_curve(sizes=DEFAULT_SIZES, R=20, seed=0, restarts=10, model=RUNNING_EXAMPLE, n_jobs=1):
    return summarize_learning(learning_runs(sizes, R, seed, restarts, model, n_jobs))
