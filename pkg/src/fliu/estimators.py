"""Penalized estimators on the augmented design: OLS, ridge, classical Liu,
generalized ridge, and the functional Liu (fLiu) shrinkage estimator.

All fits work on the intercept-augmented design ``Ztilde = [1 Z]`` and
return coefficient vectors of length m+1 with the intercept first.  The
intercept is never penalized: penalties act through ``I0`` (identity with
a zero intercept slot) and the padded roughness matrix ``R0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .exceptions import DimensionError, InvalidParam

METHODS = ("OLS", "Ridge", "Liu", "GenRidge", "FLiu")


@dataclass(frozen=True)
class PenaltyParams:
    """Tuning triple: overall strength, Liu biasing parameter, geometry mix.

    ``d`` is unconstrained; ``alpha`` lives in [0, 1]; fields that an
    estimator does not use are None.
    """

    lam: float | None = None
    d: float | None = None
    alpha: float | None = None


@dataclass(frozen=True)
class EstimatorFit:
    """A fitted estimator: coefficients, fitted values and smoother matrix."""

    method: str
    beta: np.ndarray
    params: PenaltyParams
    fitted: np.ndarray
    residuals: np.ndarray
    smoother: np.ndarray
    bundle: object

    @property
    def intercept(self):
        return float(self.beta[0])

    @property
    def training_loss(self):
        """Mean squared training residual."""
        return float(np.mean(self.residuals**2))


def intercept_identity(size):
    """Identity with a zeroed intercept slot: diag(0, 1, ..., 1)."""
    i0 = np.eye(size)
    i0[0, 0] = 0.0
    return i0


def build_Q(bundle, lam, alpha):
    """Hybrid penalty ``lam * (alpha * I0 + (1 - alpha) * R0)`` on the
    augmented space.

    Positive definite on the non-intercept block whenever ``alpha > 0`` or
    the roughness matrix is.  Raises InvalidParam outside ``lam > 0``,
    ``alpha in [0, 1]``.
    """
    if not lam > 0:
        raise InvalidParam(f"lam must be positive, got {lam}")
    if not 0.0 <= alpha <= 1.0:
        raise InvalidParam(f"alpha must be in [0, 1], got {alpha}")
    m1 = bundle.n_coef
    return lam * (alpha * intercept_identity(m1) + (1.0 - alpha) * bundle.penalty_aug)


def min_norm_ls(bundle, y):
    """Minimum-norm least-squares coefficients ``pinv(Ztilde) @ y``."""
    return linalg.pinv(bundle.design_aug) @ np.asarray(y, dtype=float)


def _finish(method, bundle, y, beta, params, smoother):
    y = np.asarray(y, dtype=float)
    fitted = bundle.design_aug @ beta
    return EstimatorFit(
        method=method,
        beta=beta,
        params=params,
        fitted=fitted,
        residuals=y - fitted,
        smoother=smoother,
        bundle=bundle,
    )


def fit_ols(bundle, y):
    """Minimum-norm least squares on the augmented design."""
    zt = bundle.design_aug
    zt_pinv = linalg.pinv(zt)
    beta = zt_pinv @ np.asarray(y, dtype=float)
    return _finish("OLS", bundle, y, beta, PenaltyParams(), zt @ zt_pinv)


def fit_gen_ridge(bundle, y, lam, alpha=1.0):
    """Generalized ridge: ``(S + Q)^-1 Ztilde' y`` with the hybrid penalty.

    ``alpha = 1`` is classical ridge with an unpenalized intercept;
    ``lam = 0`` falls back to the minimum-norm least-squares solution.
    """
    method = "Ridge" if alpha == 1.0 else "GenRidge"
    params = PenaltyParams(lam=lam, alpha=None if alpha == 1.0 else alpha)
    if lam == 0:
        fit = fit_ols(bundle, y)
        return _finish(method, bundle, y, fit.beta, params, fit.smoother)
    zt = bundle.design_aug
    q = build_Q(bundle, lam, alpha)
    y = np.asarray(y, dtype=float)
    beta = linalg.solve_sym(bundle.gram + q, zt.T @ y)
    h = zt @ linalg.solve_sym(bundle.gram + q, zt.T)
    return _finish(method, bundle, y, beta, params, h)


def fit_ridge(bundle, y, lam):
    """Classical ridge (isotropic penalty, intercept unpenalized)."""
    return fit_gen_ridge(bundle, y, lam, alpha=1.0)


def fit_liu(bundle, y, d):
    """Classical Liu estimator with unit penalty on the non-intercept block.

    Solves ``(S + I0) b = Ztilde' y + d * I0 @ b_ls`` with the minimum-norm
    least-squares anchor, so d=0 recovers ridge at lam=1 and d=1 recovers
    least squares on full-column-rank designs.
    """
    zt = bundle.design_aug
    i0 = intercept_identity(bundle.n_coef)
    y = np.asarray(y, dtype=float)
    bls = min_norm_ls(bundle, y)
    beta = linalg.solve_sym(bundle.gram + i0, zt.T @ y + d * (i0 @ bls))
    h = _hat_fliu(bundle, i0, d)
    return _finish("Liu", bundle, y, beta, PenaltyParams(d=d), h)


def fit_fliu(bundle, y, lam, d, alpha):
    """Functional Liu estimator ``(S + Q)^-1 (Ztilde' y + d Q b_ls)``.

    The anchor ``b_ls`` is the minimum-norm least-squares solution, so the
    estimator is defined in the underdetermined regime as well.  ``d = 0``
    gives generalized ridge, ``d = 1`` gives least squares whenever the
    design has full column rank; ``lam = 0`` falls back to least squares.
    """
    params = PenaltyParams(lam=lam, d=d, alpha=alpha)
    if lam == 0:
        fit = fit_ols(bundle, y)
        return _finish("FLiu", bundle, y, fit.beta, params, fit.smoother)
    zt = bundle.design_aug
    q = build_Q(bundle, lam, alpha)
    y = np.asarray(y, dtype=float)
    bls = min_norm_ls(bundle, y)
    beta = linalg.solve_sym(bundle.gram + q, zt.T @ y + d * (q @ bls))
    return _finish("FLiu", bundle, y, beta, params, _hat_fliu(bundle, q, d))


def _hat_fliu(bundle, q, d):
    """Smoother ``Ztilde (S+Q)^-1 (I + d Q S^+) Ztilde'`` for penalty ``q``."""
    zt = bundle.design_aug
    s = bundle.gram
    inner = np.eye(bundle.n_coef)
    if d != 0:
        inner = inner + d * (q @ linalg.pinv(s))
    return zt @ linalg.solve_sym(s + q, inner @ zt.T)


def smoother_matrix(bundle, lam, d, alpha):
    """Hat matrix of the fLiu fit: fitted values are ``H @ y``.

    ``lam = 0`` yields the least-squares projection hat matrix.
    """
    if lam == 0:
        zt = bundle.design_aug
        return zt @ linalg.pinv(zt)
    return _hat_fliu(bundle, build_Q(bundle, lam, alpha), d)


def hat_matrix(bundle, method, lam=None, d=None, alpha=None):
    """Smoother matrix of any supported estimator at the given parameters."""
    zt = bundle.design_aug
    if method == "OLS":
        return zt @ linalg.pinv(zt)
    if method == "Ridge":
        return smoother_matrix(bundle, lam, 0.0, 1.0)
    if method == "Liu":
        return _hat_fliu(bundle, intercept_identity(bundle.n_coef), d)
    if method == "GenRidge":
        return smoother_matrix(bundle, lam, 0.0, alpha)
    if method == "FLiu":
        return smoother_matrix(bundle, lam, d, alpha)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def fit(bundle, y, method, lam=None, d=None, alpha=None):
    """Dispatch to the fit function for ``method`` with its parameters."""
    if method == "OLS":
        return fit_ols(bundle, y)
    if method == "Ridge":
        return fit_ridge(bundle, y, lam)
    if method == "Liu":
        return fit_liu(bundle, y, d)
    if method == "GenRidge":
        return fit_gen_ridge(bundle, y, lam, alpha)
    if method == "FLiu":
        return fit_fliu(bundle, y, lam, d, alpha)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def predict(fit, rows):
    """Predict responses for augmented design rows (intercept column first)."""
    x = np.asarray(rows, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != fit.beta.size:
        raise DimensionError(
            f"rows have {x.shape[1]} columns, expected {fit.beta.size}"
        )
    return x @ fit.beta
