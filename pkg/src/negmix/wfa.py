"""Rational series on strings and signed mixtures of probabilistic automata.

A linear representation ``<iota, {M_x}, tau>`` computes
``r(u_1 ... u_l) = iota^T M_{u_1} ... M_{u_l} tau``. Any such representation
splits into two nonnegative ones with ``r = r+ - r-``; when both converge and
``r`` is a distribution, each part normalizes to a probabilistic automaton
(PA) and ``r = s+ p+ - s- p-`` with ``s+ - s- = 1``.
"""

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DivergenceError, NormalizationError

SPECTRAL_TOL = 1e-8


@dataclass(frozen=True)
class LinearRep:
    alphabet: tuple
    iota: np.ndarray
    tau: np.ndarray
    matrices: dict

    def __init__(self, alphabet, iota, tau, matrices):
        alphabet = tuple(alphabet)
        iota = np.asarray(iota, dtype=float).ravel()
        tau = np.asarray(tau, dtype=float).ravel()
        n = len(iota)
        if len(tau) != n:
            raise ValueError(f"iota has {n} entries but tau has {len(tau)}")
        mats = {}
        for x in alphabet:
            if x not in matrices:
                raise ValueError(f"no matrix for symbol {x!r}")
            M = np.asarray(matrices[x], dtype=float).reshape(n, n) if n else np.zeros((0, 0))
            mats[x] = M
        extra = set(matrices) - set(alphabet)
        if extra:
            raise ValueError(f"matrices given for symbols outside the alphabet: {sorted(extra)}")
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "iota", iota)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "matrices", mats)

    @property
    def dim(self):
        return len(self.iota)

    @property
    def total_matrix(self):
        """``M_Sigma``, the sum of all symbol matrices."""
        return sum(self.matrices.values(), np.zeros((self.dim, self.dim)))

    def is_nonnegative(self):
        return bool(
            np.all(self.iota >= 0) and np.all(self.tau >= 0) and all(np.all(M >= 0) for M in self.matrices.values())
        )

    def scaled(self, c):
        """Representation of ``c * r`` (scales ``iota``)."""
        return LinearRep(self.alphabet, c * self.iota, self.tau, self.matrices)

    def restrict(self, states):
        idx = np.asarray(sorted(states), dtype=int)
        return LinearRep(
            self.alphabet, self.iota[idx], self.tau[idx], {x: M[np.ix_(idx, idx)] for x, M in self.matrices.items()}
        )

    def to_json(self):
        return {
            "alphabet": list(self.alphabet),
            "dim": self.dim,
            "iota": self.iota.tolist(),
            "tau": self.tau.tolist(),
            "matrices": {x: M.tolist() for x, M in self.matrices.items()},
        }

    @classmethod
    def from_json(cls, obj):
        rep = cls(obj["alphabet"], obj["iota"], obj["tau"], obj["matrices"])
        if "dim" in obj and int(obj["dim"]) != rep.dim:
            raise ValueError(f"declared dim {obj['dim']} but iota has {rep.dim} entries")
        return rep


def eval_word(rep, word):
    """``r(word)``; a string is read one character per symbol."""
    v = rep.iota
    for x in word:
        try:
            v = v @ rep.matrices[x]
        except KeyError:
            raise KeyError(f"unknown symbol {x!r}") from None
    return float(v @ rep.tau)


def spectral_radius(M):
    M = np.asarray(M)
    return float(np.abs(np.linalg.eigvals(M)).max()) if M.size else 0.0


def series_sum(rep, tol=SPECTRAL_TOL):
    """``r(Sigma*) = iota^T (I - M_Sigma)^{-1} tau``.

    Raises :class:`DivergenceError` unless the spectral radius of
    ``M_Sigma`` is below ``1 - tol``.
    """
    if rep.dim == 0:
        return 0.0
    MS = rep.total_matrix
    rho = spectral_radius(MS)
    if rho >= 1 - tol:
        raise DivergenceError(f"series sum divergent or marginal (spectral radius {rho:.6g})")
    return float(rep.iota @ np.linalg.solve(np.eye(rep.dim) - MS, rep.tau))


def split_difference(rep):
    """Two nonnegative ``2n``-dimensional representations with ``r = r+ - r-``.

    With ``x+ = max(x, 0)`` and ``x- = max(-x, 0)`` applied entrywise, both
    use ``[[M+, M-], [M-, M+]]`` and ``(tau+; tau-)``; ``r+`` starts from
    ``(iota+; iota-)`` and ``r-`` from ``(iota-; iota+)``.
    """
    pos = lambda a: np.maximum(a, 0.0)  # noqa: E731
    neg = lambda a: np.maximum(-a, 0.0)  # noqa: E731
    mats = {x: np.block([[pos(M), neg(M)], [neg(M), pos(M)]]) for x, M in rep.matrices.items()}
    tau = np.concatenate([pos(rep.tau), neg(rep.tau)])
    plus = LinearRep(rep.alphabet, np.concatenate([pos(rep.iota), neg(rep.iota)]), tau, mats)
    minus = LinearRep(rep.alphabet, np.concatenate([neg(rep.iota), pos(rep.iota)]), tau, mats)
    return plus, minus


@dataclass
class PAReport:
    """Violations of the PA conditions; empty means the representation is a PA."""

    negative_entries: list = field(default_factory=list)
    iota_sum_deviation: float = 0.0
    singular: bool = False
    termination_deviation: float = 0.0
    tol: float = 1e-8

    @property
    def violations(self):
        out = []
        if self.negative_entries:
            out.append(f"negative coefficients at {self.negative_entries}")
        if self.iota_sum_deviation > 1e-10:
            out.append(f"iota^T 1 deviates from 1 by {self.iota_sum_deviation:.3g}")
        if self.singular:
            out.append("I - M_Sigma is not invertible")
        elif self.termination_deviation > self.tol:
            out.append(f"(I - M_Sigma)^-1 tau deviates from 1 by {self.termination_deviation:.3g}")
        return out

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return self.ok


def pa_check(rep, tol=1e-8):
    """Check the PA conditions: nonnegativity, ``iota^T 1 = 1`` and ``(I - M_Sigma)^{-1} tau = 1``.

    Negative entries are reported as ``("iota", i)``, ``("tau", i)`` or
    ``(symbol, i, j)``.
    """
    report = PAReport(tol=tol)
    for i in np.flatnonzero(rep.iota < 0):
        report.negative_entries.append(("iota", int(i)))
    for i in np.flatnonzero(rep.tau < 0):
        report.negative_entries.append(("tau", int(i)))
    for x, M in rep.matrices.items():
        for i, j in zip(*np.nonzero(M < 0)):
            report.negative_entries.append((x, int(i), int(j)))
    report.iota_sum_deviation = abs(rep.iota.sum() - 1)
    A = np.eye(rep.dim) - rep.total_matrix
    if rep.dim and np.linalg.cond(A) > 1e12:
        report.singular = True
    elif rep.dim:
        lam = np.linalg.solve(A, rep.tau)
        report.termination_deviation = float(np.abs(lam - 1).max())
    return report


def _reachable(adj, start):
    seen = set(start)
    queue = deque(start)
    while queue:
        i = queue.popleft()
        for j in np.flatnonzero(adj[i]):
            if j not in seen:
                seen.add(int(j))
                queue.append(int(j))
    return seen


def trim(rep):
    """Drop states that are not accessible from ``iota`` or cannot reach ``tau``.

    Works on the support graph, so it is exact for any sign pattern and keeps
    a nonnegative representation nonnegative.
    """
    if rep.dim == 0:
        return rep
    adj = np.abs(rep.total_matrix) > 0
    for M in rep.matrices.values():
        adj |= M != 0
    acc = _reachable(adj, [int(i) for i in np.flatnonzero(rep.iota)])
    coacc = _reachable(adj.T, [int(i) for i in np.flatnonzero(rep.tau)])
    return rep.restrict(acc & coacc)


def _project(rep, basis_rows):
    """Re-express ``rep`` on the row space of ``basis_rows`` (an r x n matrix)."""
    B = basis_rows
    pinv = np.linalg.pinv(B)
    return LinearRep(
        rep.alphabet,
        np.linalg.lstsq(B.T, rep.iota, rcond=None)[0],
        B @ rep.tau,
        {x: B @ M @ pinv for x, M in rep.matrices.items()},
    )


def _forward_basis(iota, mats, tol):
    basis = []
    queue = deque([iota])
    while queue:
        v = queue.popleft()
        r = v.copy()
        for b in basis:
            r = r - (r @ b) * b
        nrm = np.linalg.norm(r)
        if nrm > tol * max(1.0, np.linalg.norm(v)):
            basis.append(r / nrm)
            queue.extend(v @ M for M in mats)
    return np.array(basis).reshape(len(basis), len(iota))


def minimize(rep, tol=1e-10):
    """Rank-based minimization: restrict to the forward space, then the backward space.

    The result computes the same series with the smallest dimension but may
    have negative coefficients, so it is only a preprocessing step for
    signed inputs.
    """
    if rep.dim == 0:
        return rep
    mats = [rep.matrices[x] for x in rep.alphabet]
    F = _forward_basis(rep.iota, mats, tol)
    fwd = _project(rep, F) if len(F) else LinearRep(rep.alphabet, [], [], {x: [] for x in rep.alphabet})
    if fwd.dim == 0:
        return fwd
    # backward space of fwd: span of M_w tau, handled by transposing
    tr = LinearRep(fwd.alphabet, fwd.tau, fwd.iota, {x: M.T for x, M in fwd.matrices.items()})
    Bb = _forward_basis(tr.iota, [tr.matrices[x] for x in tr.alphabet], tol)
    if len(Bb) == 0:
        return LinearRep(rep.alphabet, [], [], {x: [] for x in rep.alphabet})
    back = _project(tr, Bb)
    return LinearRep(back.alphabet, back.tau, back.iota, {x: M.T for x, M in back.matrices.items()})


def normalize_to_pa(rep, zero_tol=1e-10):
    """Turn a nonnegative representation of a distribution into a PA.

    With ``lam = (I - M_Sigma)^{-1} tau`` and ``D = diag(lam)`` the result is
    ``<D iota, D^{-1} M_x D, D^{-1} tau>``; it computes the same series.
    """
    if not rep.is_nonnegative():
        raise NormalizationError("representation has negative coefficients")
    A = np.eye(rep.dim) - rep.total_matrix
    try:
        lam = np.linalg.solve(A, rep.tau)
    except np.linalg.LinAlgError:
        raise NormalizationError("I - M_Sigma is singular") from None
    if np.any(np.abs(lam) < zero_tol):
        raise NormalizationError("representation not normalizable (non-minimal or degenerate)")
    return ProbAutomaton(
        rep.alphabet,
        lam * rep.iota,
        rep.tau / lam,
        {x: M * lam[None, :] / lam[:, None] for x, M in rep.matrices.items()},
    )


class ProbAutomaton(LinearRep):
    """A :class:`LinearRep` that passed :func:`pa_check` at construction."""

    def __init__(self, alphabet, iota, tau, matrices, tol=1e-8):
        super().__init__(alphabet, iota, tau, matrices)
        report = pa_check(self, tol=tol)
        if not report.ok:
            raise NormalizationError("not a probabilistic automaton: " + "; ".join(report.violations))

    @classmethod
    def from_rep(cls, rep, tol=1e-8):
        return cls(rep.alphabet, rep.iota, rep.tau, rep.matrices, tol=tol)


@dataclass(frozen=True)
class PAMixture:
    """``r = s_plus * pa_plus - s_minus * pa_minus`` (``pa_minus`` is ``None`` if ``s_minus == 0``)."""

    s_plus: float
    pa_plus: LinearRep
    s_minus: float = 0.0
    pa_minus: LinearRep = None

    def __post_init__(self):
        if self.s_plus <= 0 or self.s_minus < 0:
            raise ValueError("need s_plus > 0 and s_minus >= 0")
        if abs(self.s_plus - self.s_minus - 1) > 1e-8:
            raise ValueError(f"s_plus - s_minus = {self.s_plus - self.s_minus!r}, expected 1")
        if (self.pa_minus is None) != (self.s_minus == 0):
            raise ValueError("pa_minus must be given exactly when s_minus > 0")

    def evaluate(self, word):
        val = self.s_plus * eval_word(self.pa_plus, word)
        if self.pa_minus is not None:
            val -= self.s_minus * eval_word(self.pa_minus, word)
        return val

    def to_json(self):
        return {
            "s_plus": self.s_plus,
            "s_minus": self.s_minus,
            "pa_plus": self.pa_plus.to_json(),
            "pa_minus": None if self.pa_minus is None else self.pa_minus.to_json(),
        }

    @classmethod
    def from_json(cls, obj):
        minus = obj.get("pa_minus")
        return cls(
            float(obj["s_plus"]),
            ProbAutomaton.from_rep(LinearRep.from_json(obj["pa_plus"])),
            float(obj.get("s_minus", 0.0)),
            None if minus is None else ProbAutomaton.from_rep(LinearRep.from_json(minus)),
        )


def to_pa_mixture(rep, assume_distribution=True, sum_tol=1e-6, zero_tol=1e-12):
    """Write a rational distribution as a signed mixture of at most two PAs.

    The representation is split into nonnegative parts, each part is
    trimmed, divided by its total mass and normalized into a PA.
    """
    if assume_distribution:
        total = series_sum(rep)
        if abs(total - 1) > sum_tol:
            raise ValueError(f"series sums to {total!r}, not to 1")
    plus, minus = (trim(r) for r in split_difference(rep))
    try:
        s_plus = series_sum(plus)
        s_minus = series_sum(minus)
    except DivergenceError:
        raise DivergenceError("split diverges; supply an absolutely-convergent representation") from None
    if s_plus <= 0:
        raise NormalizationError("positive part has zero mass")
    pa_plus = normalize_to_pa(plus.scaled(1 / s_plus))
    if s_minus <= zero_tol:
        return PAMixture(s_plus, pa_plus, 0.0, None)
    pa_minus = normalize_to_pa(minus.scaled(1 / s_minus))
    return PAMixture(s_plus, pa_plus, s_minus, pa_minus)


def one_letter_lambda(rho, cos_alpha, sin_alpha):
    """Initial weight making the one-letter rotation series sum to one."""
    root2 = math.sqrt(2)
    rotating = (1 - rho * (cos_alpha + sin_alpha)) / (1 + rho**2 - 2 * rho * cos_alpha)
    return 1.0 / (rotating + root2 / (1 - rho))


def one_letter_example(rho, cos_alpha, sin_alpha, symbol="a"):
    """Three-state rational distribution on a one-letter alphabet.

    ``M = rho * [[c, -s, 0], [s, c, 0], [0, 0, 1]]``, ``tau = (1, 1, 1)`` and
    ``iota = (lam, 0, sqrt(2) lam)``, so that
    ``r(a^n) = rho^n sqrt(2) lam (cos(n alpha + pi/4) + 1) >= 0``. It is a PA
    series only when ``alpha / pi`` is rational.
    """
    if abs(cos_alpha**2 + sin_alpha**2 - 1) > 1e-12:
        raise ValueError("cos_alpha^2 + sin_alpha^2 must equal 1")
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    lam = one_letter_lambda(rho, cos_alpha, sin_alpha)
    c, s = cos_alpha, sin_alpha
    M = rho * np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return LinearRep((symbol,), [lam, 0.0, math.sqrt(2) * lam], [1.0, 1.0, 1.0], {symbol: M})


# Absolutely convergent 6-state representation of the rho = 0.75,
# cos = 3/5, sin = 4/5 member of the family above (entries rounded to 4 places).
_RHO075_M = np.zeros((6, 6))
_RHO075_M[0, 1] = 0.5675
_RHO075_M[1, 2] = 0.7125
_RHO075_M[2, 3] = 0.9566
_RHO075_M[3, 4] = 0.9753
_RHO075_M[4, 5] = 0.8334
_RHO075_M[5, 0] = 0.5662
_RHO075_M[5, 1] = -0.1571
_RHO075_M[5, 5] = 0.2750


def rho075_fixture(symbol="a"):
    return LinearRep(
        (symbol,),
        [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.4325, 0.2875, 0.0434, 0.0247, 0.1666, 0.3159],
        {symbol: _RHO075_M.copy()},
    )
