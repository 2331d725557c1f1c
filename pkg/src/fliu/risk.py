"""Closed-form risk of the functional Liu estimator and a Monte-Carlo oracle.

The mean squared error of the estimator at biasing parameter d is the
convex quadratic ``g(d) = (c2+c3) d^2 + (c1-2c3) d + (c0+c3)`` whose
coefficients are traces and norms built from the Gram matrix S, the penalty
Q, the true coefficients and the noise variance.  ``risk_scan`` tabulates
the closed form against a simulation estimate on the same inputs.

Matrices may live in the penalized block or the full augmented space (with
a zero intercept row in Q); the formulas are identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .exceptions import DegeneratePlugIn

MC_DEFAULT_REPLICATIONS = 100_000
MC_DEFAULT_SEED = 20240915
_MC_CHUNK = 50_000


@dataclass(frozen=True)
class RiskProfile:
    """Coefficients of the risk quadratic with the noise variance attached.

    ``c0`` is the base variance term, ``c1`` the linear variance term,
    ``c2`` the quadratic variance term and ``c3`` the squared shrinkage
    bias scale; all are nonnegative, making ``g`` convex.
    """

    c0: float
    c1: float
    c2: float
    c3: float
    sigma2: float

    def g(self, d):
        """Mean squared error at biasing parameter ``d`` (vectorized)."""
        d = np.asarray(d, dtype=float)
        out = (self.c2 + self.c3) * d**2 + (self.c1 - 2.0 * self.c3) * d + (self.c0 + self.c3)
        return float(out) if out.ndim == 0 else out

    @property
    def curvature(self):
        """Second derivative of g, ``2 (c2 + c3)``; positive when strongly convex."""
        return 2.0 * (self.c2 + self.c3)


@dataclass(frozen=True)
class EstimatorMoments:
    """Mean, bias and covariance of the estimator at fixed parameters.

    ``identifiable`` records whether the Gram matrix was numerically
    nonsingular; when it is not, the mean and bias use the general
    projection form with the minimum-norm least-squares anchor.
    """

    mean: np.ndarray
    bias: np.ndarray
    cov: np.ndarray
    identifiable: bool


def _prepare(s, q, b):
    s = linalg.as_matrix(s, "S")
    q = linalg.as_matrix(q, "Q")
    b = np.asarray(b, dtype=float).ravel()
    if s.shape != q.shape or s.shape[0] != b.size:
        raise ValueError(f"incompatible shapes S{s.shape}, Q{q.shape}, b({b.size},)")
    return s, q, b


def fliu_moments(s, q, b, sigma2, d):
    """Moments of the estimator: mean, bias and covariance at ``d``.

    On identifiable designs the mean is ``(S+Q)^-1 (S + d Q) b`` and the
    bias ``(d-1)(S+Q)^-1 Q b``; with singular S the anchor is only the
    projection of the truth onto the row space, so the general forms
    ``A_d S^+ S b`` and its offset from b apply.  The covariance is
    ``sigma2 * A_d S^+ A_d'`` in both regimes.
    """
    s, q, b = _prepare(s, q, b)
    m = s.shape[0]
    a_d = linalg.solve_sym(s + q, s + d * q)
    s_pinv = linalg.pinv(s)
    identifiable = linalg.svd_factors(s).rank == m
    if identifiable:
        mean = a_d @ b
        bias = (d - 1.0) * linalg.solve_sym(s + q, q @ b)
    else:
        mean = a_d @ (s_pinv @ (s @ b))
        bias = mean - b
    cov = sigma2 * (a_d @ s_pinv @ a_d.T)
    return EstimatorMoments(mean=mean, bias=bias, cov=cov, identifiable=identifiable)


def mse_coefficients(s, q, b, sigma2):
    """Risk-quadratic coefficients from (S, Q, b, sigma2).

    ``c0 = sigma2 tr(P S P)``, ``c1 = 2 sigma2 tr(P Q P)``,
    ``c2 = sigma2 tr(P Q S^+ Q P)``, ``c3 = ||P Q b||^2`` with
    ``P = (S+Q)^-1``.  Raises DegeneratePlugIn when Q is zero (g would be
    linear, not strongly convex).
    """
    s, q, b = _prepare(s, q, b)
    if not np.any(q):
        raise DegeneratePlugIn("Q = 0 makes the risk quadratic degenerate")
    p = linalg.solve_sym(s + q, np.eye(s.shape[0]))
    pq = p @ q
    c0 = sigma2 * float(np.trace(p @ s @ p))
    c1 = 2.0 * sigma2 * float(np.trace(pq @ p))
    c2 = sigma2 * float(np.trace(pq @ linalg.pinv(s) @ pq.T))
    c3 = float(np.sum((pq @ b) ** 2))
    return RiskProfile(c0=c0, c1=c1, c2=c2, c3=c3, sigma2=float(sigma2))


def d_opt(profile):
    """Unique minimizer of the risk quadratic: ``(2 c3 - c1) / (2 (c2 + c3))``.

    Always at most 1, and strictly below 1 whenever ``c1`` or ``c2`` is
    positive.  Raises DegeneratePlugIn when ``c2 + c3 = 0``.
    """
    if not profile.c2 + profile.c3 > 0:
        raise DegeneratePlugIn("c2 + c3 = 0: risk quadratic has no unique minimizer")
    return (2.0 * profile.c3 - profile.c1) / (2.0 * (profile.c2 + profile.c3))


def _factor_design(s):
    """Any matrix Z with Z'Z = S (symmetric eigen square root)."""
    w, v = np.linalg.eigh(0.5 * (s + s.T))
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.T


def monte_carlo_mse(design, q, b, sigma2, d_grid, n_rep=MC_DEFAULT_REPLICATIONS,
                    seed=MC_DEFAULT_SEED):
    """Simulation estimate of ``E ||bhat_d - b||^2`` on a d grid.

    Draws Gaussian noise around ``design @ b``, computes the estimator by
    its defining linear algebra for every replication, and returns
    ``(means, stderrs)`` arrays aligned with ``d_grid``.
    """
    z = linalg.as_matrix(design, "design")
    q = linalg.as_matrix(q, "Q")
    b = np.asarray(b, dtype=float).ravel()
    d_grid = np.atleast_1d(np.asarray(d_grid, dtype=float))
    n, m = z.shape
    s = z.T @ z
    z_pinv = linalg.pinv(z)
    # estimator as a linear map of y:  bhat_d = P (Z' + d Q Z^+) y
    maps = [linalg.solve_sym(s + q, z.T + d * (q @ z_pinv)) for d in d_grid]
    shift = [t @ (z @ b) - b for t in maps]

    rng = np.random.default_rng(seed)
    sums = np.zeros(d_grid.size)
    sums_sq = np.zeros(d_grid.size)
    done = 0
    sigma = np.sqrt(sigma2)
    while done < n_rep:
        block = min(_MC_CHUNK, n_rep - done)
        eps = sigma * rng.standard_normal((n, block))
        for j, t in enumerate(maps):
            err = shift[j][:, None] + t @ eps
            vals = np.sum(err * err, axis=0)
            sums[j] += vals.sum()
            sums_sq[j] += (vals * vals).sum()
        done += block
    means = sums / n_rep
    var = np.maximum(sums_sq / n_rep - means**2, 0.0) * n_rep / max(n_rep - 1, 1)
    stderr = np.sqrt(var / n_rep)
    return means, stderr


@dataclass(frozen=True)
class RiskScan:
    """Closed-form vs Monte-Carlo risk on a d grid, plus the OLS endpoint.

    ``improves_over_ols`` records whether the minimum of g over a fine grid
    on [0, 1) beats g(1); it is None when the noise variance is zero (the
    risk-improvement statement needs a stochastic component).
    """

    d_grid: np.ndarray
    g_values: np.ndarray
    mc_values: np.ndarray
    mc_stderr: np.ndarray
    profile: RiskProfile
    g_at_1: float
    improves_over_ols: bool | None

    def rows(self):
        for i in range(self.d_grid.size):
            yield (self.d_grid[i], self.g_values[i], self.mc_values[i], self.mc_stderr[i])

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("d,g_closed_form,g_mc,mc_stderr\n")
            for d, g, mc, se in self.rows():
                fh.write("%.17g,%.17g,%.17g,%.17g\n" % (d, g, mc, se))


def risk_scan(s, q, b, sigma2, d_grid, n_rep=MC_DEFAULT_REPLICATIONS,
              seed=MC_DEFAULT_SEED, design=None):
    """Tabulate closed-form risk against a Monte-Carlo estimate.

    ``design`` defaults to a symmetric square root of S, which induces the
    same estimator distribution; pass the actual design to simulate the
    original sample size.
    """
    s, q, b = _prepare(s, q, b)
    d_grid = np.atleast_1d(np.asarray(d_grid, dtype=float))
    profile = mse_coefficients(s, q, b, sigma2)
    g_values = profile.g(d_grid)
    if design is None:
        design = _factor_design(s)
    mc_values, mc_stderr = monte_carlo_mse(design, q, b, sigma2, d_grid,
                                           n_rep=n_rep, seed=seed)
    g1 = profile.g(1.0)
    improves = None
    if sigma2 > 0:
        fine = np.linspace(0.0, 1.0, 2001)[:-1]
        improves = bool(np.min(profile.g(fine)) < g1)
    return RiskScan(
        d_grid=d_grid,
        g_values=np.atleast_1d(g_values),
        mc_values=mc_values,
        mc_stderr=mc_stderr,
        profile=profile,
        g_at_1=g1,
        improves_over_ols=improves,
    )
