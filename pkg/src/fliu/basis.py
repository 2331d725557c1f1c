"""Basis systems, roughness penalties, curve scores and design matrices.

Supports an orthonormal Fourier system on ``[0, period]`` and clamped
B-splines of arbitrary order.  Curve scores are least-squares coefficients
of each observed curve in the basis evaluated on the observation grid;
the regression design stacks per-predictor score blocks (times the basis
Gram matrix when the basis is not orthonormal).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline

from . import linalg
from .exceptions import (
    BasisKindError,
    DimensionError,
    DomainError,
    GridMismatch,
    InvalidBasis,
    UnderdeterminedCurveFit,
)


@dataclass(frozen=True)
class FourierBasis:
    """Orthonormal Fourier system: constant plus sin/cos pairs.

    The ``nbasis`` functions are ``1/sqrt(T)``, then
    ``sqrt(2/T) sin(w_k t)`` and ``sqrt(2/T) cos(w_k t)`` for
    ``w_k = 2 pi k / T`` with ``k = 1 .. (nbasis-1)/2``, orthonormal under
    ``integral over [0, T]``.  ``nbasis`` must be odd and at least 3.
    """

    nbasis: int
    period: float

    kind = "fourier"

    def __post_init__(self):
        if self.nbasis % 2 == 0 or self.nbasis < 3:
            raise InvalidBasis(f"Fourier basis size must be odd and >= 3, got {self.nbasis}")
        if self.period <= 0:
            raise InvalidBasis(f"period must be positive, got {self.period}")

    @property
    def npairs(self):
        return (self.nbasis - 1) // 2

    @property
    def domain(self):
        return (0.0, float(self.period))

    @property
    def frequencies(self):
        """Angular frequency of each basis column: 0, w1, w1, w2, w2, ..."""
        k = np.arange(1, self.npairs + 1)
        w = 2.0 * np.pi * k / self.period
        return np.concatenate([[0.0], np.repeat(w, 2)])

    def evaluate(self, grid, derivative=0):
        """Sample the basis (or its ``derivative``-th derivative) on ``grid``.

        Returns an array of shape ``(len(grid), nbasis)``; column ``k``
        holds the k-th basis function.  Derivatives are analytic.
        """
        t = np.atleast_1d(np.asarray(grid, dtype=float))
        out = np.empty((t.size, self.nbasis))
        out[:, 0] = (1.0 / np.sqrt(self.period)) if derivative == 0 else 0.0
        amp = np.sqrt(2.0 / self.period)
        shift = derivative * np.pi / 2.0
        for k in range(1, self.npairs + 1):
            w = 2.0 * np.pi * k / self.period
            scale = amp * w**derivative
            out[:, 2 * k - 1] = scale * np.sin(w * t + shift)
            out[:, 2 * k] = scale * np.cos(w * t + shift)
        return out


@dataclass(frozen=True)
class BSplineBasis:
    """Clamped B-spline basis defined by a full knot vector and order.

    ``nbasis = len(knots) - order``.  The domain is the base interval
    ``[knots[order-1], knots[-order]]``; evaluation outside it raises
    DomainError.
    """

    knots: np.ndarray
    order: int = 4

    kind = "bspline"

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        if self.order < 1:
            raise InvalidBasis(f"order must be >= 1, got {self.order}")
        if knots.ndim != 1 or knots.size < 2 * self.order:
            raise InvalidBasis("knot vector too short for the given order")
        if np.any(np.diff(knots) < 0):
            raise InvalidBasis("knot vector must be nondecreasing")
        if knots[self.order - 1] >= knots[-self.order]:
            raise InvalidBasis("base interval of the knot vector is empty")
        object.__setattr__(self, "knots", knots)

    @classmethod
    def uniform(cls, nbasis, domain, order=4):
        """Basis with equally spaced interior knots on ``domain``.

        ``nbasis = #interior knots + order``; boundary knots are repeated
        ``order`` times (clamped).
        """
        lo, hi = float(domain[0]), float(domain[1])
        if hi <= lo:
            raise InvalidBasis(f"empty domain ({lo}, {hi})")
        n_interior = nbasis - order
        if n_interior < 0:
            raise InvalidBasis(f"nbasis={nbasis} requires at least order={order} functions")
        interior = np.linspace(lo, hi, n_interior + 2)[1:-1]
        knots = np.concatenate([np.full(order, lo), interior, np.full(order, hi)])
        return cls(knots=knots, order=order)

    @property
    def nbasis(self):
        return self.knots.size - self.order

    @property
    def domain(self):
        return (float(self.knots[self.order - 1]), float(self.knots[-self.order]))

    def evaluate(self, grid, derivative=0):
        """Sample all basis functions (or a derivative) on ``grid``."""
        t = np.atleast_1d(np.asarray(grid, dtype=float))
        lo, hi = self.domain
        tol = 1e-12 * max(1.0, abs(lo), abs(hi))
        if np.any(t < lo - tol) or np.any(t > hi + tol):
            raise DomainError(f"grid leaves the knot span [{lo}, {hi}]")
        t = np.clip(t, lo, hi)
        spl = BSpline(self.knots, np.eye(self.nbasis), self.order - 1, extrapolate=False)
        if derivative > 0:
            spl = spl.derivative(derivative)
        out = spl(t)
        return np.nan_to_num(out, copy=False)


def build_fourier_basis(nbasis, period):
    """Construct an orthonormal Fourier basis (odd ``nbasis``, period ``period``)."""
    return FourierBasis(nbasis=int(nbasis), period=float(period))


def eval_basis(basis, grid):
    """Sample ``basis`` on ``grid``: column k holds the k-th basis function."""
    return basis.evaluate(grid)


def eval_coefficient_function(coefs, basis, grid):
    """Evaluate ``sum_k coefs[k] * phi_k`` on ``grid`` (intercept excluded by caller)."""
    b = np.asarray(coefs, dtype=float).ravel()
    if b.size != basis.nbasis:
        raise DimensionError(f"got {b.size} coefficients for a basis of size {basis.nbasis}")
    return basis.evaluate(grid) @ b


def _gauss_legendre_rule(basis, points_per_span=5):
    """Quadrature nodes/weights over the knot spans (exact for splines)."""
    lo, hi = basis.domain
    if basis.kind == "bspline":
        breaks = np.unique(basis.knots[(basis.knots >= lo) & (basis.knots <= hi)])
    else:
        breaks = np.linspace(lo, hi, 2)
    x, w = np.polynomial.legendre.leggauss(points_per_span)
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        half = 0.5 * (b - a)
        nodes.append(half * x + 0.5 * (a + b))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def basis_gram(basis):
    """Gram matrix of the basis under the L2 inner product on its domain.

    Identity (analytically) for the Fourier system; Gauss-Legendre
    quadrature over knot spans for B-splines, exact for the polynomial
    degrees involved.
    """
    if basis.kind == "fourier":
        return np.eye(basis.nbasis)
    nodes, weights = _gauss_legendre_rule(basis)
    phi = basis.evaluate(nodes)
    return phi.T @ (weights[:, None] * phi)


def fourier_penalty(basis):
    """Diagonal curvature penalty of the Fourier system, scaled to max entry 1.

    The raw penalty is ``diag(frequencies**2)``; dividing by the largest
    squared frequency makes the spectral norm exactly 1.
    """
    if basis.kind != "fourier":
        raise BasisKindError("fourier_penalty requires a Fourier basis")
    raw = basis.frequencies**2
    return np.diag(raw / raw.max())


def bspline_penalty(basis, mode="curvature"):
    """Roughness penalty for a B-spline basis.

    ``curvature`` builds the Gram matrix of second derivatives by exact
    quadrature; ``second_difference`` builds ``D2.T @ D2`` from the
    second-order difference operator on coefficients.  Either result is
    divided by its spectral norm when that norm exceeds 1.
    """
    if basis.kind != "bspline":
        raise BasisKindError("bspline_penalty requires a B-spline basis")
    if mode == "curvature":
        if basis.order < 3:
            raise InvalidBasis("curvature penalty requires order >= 3")
        nodes, weights = _gauss_legendre_rule(basis)
        d2 = basis.evaluate(nodes, derivative=2)
        raw = d2.T @ (weights[:, None] * d2)
        raw = 0.5 * (raw + raw.T)
    elif mode == "second_difference":
        k = basis.nbasis
        if k < 3:
            raise InvalidBasis("second-difference penalty requires at least 3 basis functions")
        d2 = np.zeros((k - 2, k))
        for i in range(k - 2):
            d2[i, i : i + 3] = (1.0, -2.0, 1.0)
        raw = d2.T @ d2
    else:
        raise ValueError(f"unknown penalty mode {mode!r}")
    norm = linalg.spectral_norm(raw)
    return raw / norm if norm > 1.0 else raw


@dataclass(frozen=True)
class FunctionalDataset:
    """Discretized curves on a common grid plus scalar responses.

    ``curves`` holds one ``(n, T)`` value matrix per functional predictor;
    all predictors share the strictly increasing time ``grid``.
    """

    grid: np.ndarray
    curves: list
    y: np.ndarray
    labels: list | None = None

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
            raise GridMismatch("time grid must be 1-d and strictly increasing")
        curves = [np.asarray(w, dtype=float) for w in self.curves]
        n = curves[0].shape[0]
        for w in curves:
            if w.ndim != 2 or w.shape != (n, grid.size):
                raise GridMismatch(
                    f"every predictor needs shape ({n}, {grid.size}), got {w.shape}"
                )
            if not np.all(np.isfinite(w)):
                raise ValueError("curve values contain NaN or Inf")
        y = np.asarray(self.y, dtype=float).ravel()
        if y.size != n:
            raise DimensionError(f"{y.size} responses for {n} curves")
        if not np.all(np.isfinite(y)):
            raise ValueError("responses contain NaN or Inf")
        if n < 2:
            raise ValueError("need at least 2 samples")
        if self.labels is not None and len(self.labels) != n:
            raise DimensionError("labels length does not match sample count")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "curves", curves)
        object.__setattr__(self, "y", y)

    @property
    def n_samples(self):
        return self.curves[0].shape[0]

    @property
    def n_predictors(self):
        return len(self.curves)

    def take(self, indices):
        """Row-subset dataset (used by train/test splits)."""
        idx = np.asarray(indices, dtype=int)
        return FunctionalDataset(
            grid=self.grid,
            curves=[w[idx] for w in self.curves],
            y=self.y[idx],
            labels=None if self.labels is None else [self.labels[i] for i in idx],
        )


def curve_scores(data, basis, predictor=0):
    """Least-squares basis scores of each curve on the observation grid.

    Row i of the result holds the coefficients of curve i in ``basis``;
    curves lying in the basis span are reproduced exactly.  Requires at
    least as many grid points as basis functions.
    """
    if isinstance(data, FunctionalDataset):
        values, grid = data.curves[predictor], data.grid
    else:
        raise TypeError("curve_scores expects a FunctionalDataset")
    if grid.size < basis.nbasis:
        raise UnderdeterminedCurveFit(
            f"{grid.size} grid points cannot identify {basis.nbasis} scores"
        )
    phi = basis.evaluate(grid)
    scores, _, rank, _ = np.linalg.lstsq(phi, values.T, rcond=None)
    if rank < basis.nbasis:
        raise UnderdeterminedCurveFit(
            f"basis evaluated on the grid has rank {rank} < {basis.nbasis}"
        )
    return scores.T


@dataclass(frozen=True)
class DesignBundle:
    """Design and penalty matrices derived from a dataset and basis choice.

    ``design`` is the n x m score design (m = sum of basis sizes),
    ``design_aug`` prepends the intercept column of ones, ``gram`` is
    ``design_aug.T @ design_aug``, ``penalty`` the m x m roughness matrix
    with spectral norm <= 1, and ``penalty_aug`` its intercept-padded
    (m+1) x (m+1) version with zero first row and column.
    """

    design: np.ndarray
    design_aug: np.ndarray
    gram: np.ndarray
    penalty: np.ndarray
    penalty_aug: np.ndarray
    bases: list
    quadrature: str = "least-squares scores; exact basis Gram"
    grid: np.ndarray | None = None

    @property
    def n_samples(self):
        return self.design_aug.shape[0]

    @property
    def n_coef(self):
        """Augmented coefficient count m+1 (intercept first)."""
        return self.design_aug.shape[1]

    def take(self, indices):
        """Bundle restricted to a row subset (same bases and penalty)."""
        idx = np.asarray(indices, dtype=int)
        zt = self.design_aug[idx]
        return DesignBundle(
            design=self.design[idx],
            design_aug=zt,
            gram=zt.T @ zt,
            penalty=self.penalty,
            penalty_aug=self.penalty_aug,
            bases=self.bases,
            quadrature=self.quadrature,
            grid=self.grid,
        )


def from_design(design_aug, penalty=None):
    """Wrap a raw augmented design (intercept column first) into a bundle.

    Intended for synthetic and test problems where the design is given
    directly; ``penalty`` defaults to zero.
    """
    zt = linalg.as_matrix(design_aug, "design")
    m = zt.shape[1] - 1
    r = np.zeros((m, m)) if penalty is None else np.asarray(penalty, dtype=float)
    r0 = np.zeros((m + 1, m + 1))
    r0[1:, 1:] = r
    return DesignBundle(
        design=zt[:, 1:],
        design_aug=zt,
        gram=zt.T @ zt,
        penalty=r,
        penalty_aug=r0,
        bases=[],
        quadrature="raw design",
    )


def build_design(data, bases, penalty="auto"):
    """Assemble the score design, Gram and penalty matrices.

    Per predictor j, the design block is ``scores_j @ gram_j`` (the Gram is
    the identity for the orthonormal Fourier system).  ``penalty`` selects
    the roughness matrix: ``auto`` uses the curvature penalty natural to
    each basis kind, ``fourier`` / ``curvature`` / ``second_difference``
    force a specific construction.  Penalty blocks are block-diagonal over
    predictors with a final scaling pass keeping the spectral norm <= 1.
    """
    if isinstance(bases, (FourierBasis, BSplineBasis)):
        bases = [bases]
    if len(bases) != data.n_predictors:
        raise DimensionError(
            f"{len(bases)} bases for {data.n_predictors} predictors"
        )
    blocks, penalties = [], []
    for j, basis in enumerate(bases):
        scores = curve_scores(data, basis, predictor=j)
        gram = basis_gram(basis)
        blocks.append(scores if basis.kind == "fourier" else scores @ gram)
        if penalty == "auto":
            mode = "fourier" if basis.kind == "fourier" else "curvature"
        else:
            mode = penalty
        if mode == "fourier":
            penalties.append(fourier_penalty(basis))
        else:
            penalties.append(bspline_penalty(basis, mode=mode))

    z = np.hstack(blocks)
    n, m = z.shape
    r = np.zeros((m, m))
    at = 0
    for p in penalties:
        k = p.shape[0]
        r[at : at + k, at : at + k] = p
        at += k
    norm = linalg.spectral_norm(r) if m else 0.0
    if norm > 1.0:
        r = r / norm
    r0 = np.zeros((m + 1, m + 1))
    r0[1:, 1:] = r
    zt = np.hstack([np.ones((n, 1)), z])
    quad = "least-squares scores on the observation grid; " + (
        "analytic Fourier Gram"
        if all(b.kind == "fourier" for b in bases)
        else "Gauss-Legendre(5/span) Gram"
    )
    return DesignBundle(
        design=z,
        design_aug=zt,
        gram=zt.T @ zt,
        penalty=r,
        penalty_aug=r0,
        bases=list(bases),
        quadrature=quad,
        grid=data.grid,
    )
