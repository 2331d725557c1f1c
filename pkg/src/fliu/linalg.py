"""Dense linear-algebra kernel.

SVD-based pseudo-inverse with an explicit rank tolerance, symmetric solves
that never materialize an inverse, and the spectral diagnostics (condition
number, spectral norm) the estimators rely on.  All functions accept plain
``numpy`` arrays, validate finiteness on entry, and are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateInput, DimensionError, SingularSystem

_EPS = np.finfo(float).eps

#: Symmetry tolerance for solve_sym (relative to the largest entry).
SYMMETRY_TOL = 1e-10

#: Relative singular-value floor below which solve_sym refuses to solve.
SOLVE_COND_FLOOR = 1e-12


def as_matrix(a, name="matrix"):
    """Validate and return ``a`` as a finite 2-d float array.

    Raises ValueError on non-finite entries or empty dimensions.
    """
    m = np.asarray(a, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional, got ndim={m.ndim}")
    if m.shape[0] == 0 or m.shape[1] == 0:
        raise ValueError(f"{name} must have positive dimensions, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return m


def default_rtol(shape):
    """Default relative rank tolerance: max(rows, cols) * machine epsilon."""
    return max(shape) * _EPS


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD of a matrix together with its numeric-rank tolerance.

    ``u @ diag(s) @ vt`` reconstructs the input; singular values are
    nonincreasing and nonnegative.  ``rank`` counts values above
    ``rtol * s[0]``.
    """

    u: np.ndarray
    s: np.ndarray
    vt: np.ndarray
    rtol: float

    @property
    def cutoff(self):
        return self.rtol * (self.s[0] if self.s.size else 0.0)

    @property
    def rank(self):
        return int(np.sum(self.s > self.cutoff))


def svd_factors(a, rtol=None):
    """Compute the thin SVD of ``a`` with rank tolerance attached."""
    m = as_matrix(a)
    if rtol is None:
        rtol = default_rtol(m.shape)
    if rtol <= 0:
        raise ValueError(f"rtol must be positive, got {rtol}")
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    return SvdFactors(u=u, s=s, vt=vt, rtol=float(rtol))


def pinv(a, rtol=None):
    """Moore-Penrose pseudo-inverse via SVD.

    Singular values below ``rtol * s_max`` are treated as zero;
    ``rtol`` defaults to ``max(rows, cols) * eps``.
    """
    f = svd_factors(a, rtol)
    s_inv = np.where(f.s > f.cutoff, 1.0 / np.where(f.s > 0, f.s, 1.0), 0.0)
    return (f.vt.T * s_inv) @ f.u.T


def solve_sym(a, b, *, sym_tol=SYMMETRY_TOL, cond_floor=SOLVE_COND_FLOOR):
    """Solve ``a @ x = b`` for symmetric ``a`` via eigendecomposition.

    Parameters
    ----------
    a : (n, n) array, symmetric to ``sym_tol`` (relative to its largest entry).
    b : (n,) or (n, k) array.

    Raises
    ------
    SingularSystem
        If ``sigma_min / sigma_max <= cond_floor``.
    """
    m = as_matrix(a, "a")
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"a must be square, got {m.shape}")
    scale = np.max(np.abs(m))
    if scale > 0 and np.max(np.abs(m - m.T)) > sym_tol * max(1.0, scale):
        raise ValueError("a is not symmetric to tolerance")
    rhs = np.asarray(b, dtype=float)
    vec = rhs.ndim == 1
    if rhs.shape[0] != m.shape[0]:
        raise DimensionError(f"b has {rhs.shape[0]} rows, expected {m.shape[0]}")
    if not np.all(np.isfinite(rhs)):
        raise ValueError("b contains NaN or Inf entries")

    w, v = np.linalg.eigh(0.5 * (m + m.T))
    absw = np.abs(w)
    sigma_max = float(absw.max())
    sigma_min = float(absw.min())
    if sigma_max == 0.0 or sigma_min / sigma_max <= cond_floor:
        raise SingularSystem("symmetric system is singular to tolerance",
                             sigma_min=sigma_min, sigma_max=sigma_max)
    x = v @ ((v.T @ (rhs if not vec else rhs[:, None])) / w[:, None])
    return x[:, 0] if vec else x


def cond2(a, rtol=None):
    """Spectral condition number over singular values above the rank cutoff.

    Raises DegenerateInput for an (effectively) zero matrix.
    """
    f = svd_factors(a, rtol)
    if f.s.size == 0 or f.s[0] == 0.0:
        raise DegenerateInput("condition number of a zero matrix is undefined")
    kept = f.s[f.s > f.cutoff]
    return float(f.s[0] / kept[-1])


def spectral_norm(a):
    """Largest singular value of ``a``."""
    m = as_matrix(a)
    return float(np.linalg.svd(m, compute_uv=False)[0])
