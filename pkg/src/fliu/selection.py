"""Criterion-based parameter selection: GCV and PRESS scoring, coarse-grid
seeded continuous tuning over (lam, d, alpha), the plug-in rule for the Liu
parameter, and the underdetermined-regime degeneracy diagnostic.

The tuner evaluates a small cartesian grid (5 points per free axis by
default), then refines the incumbent with a bounded quasi-Newton step using
central finite-difference gradients on transformed coordinates (log-lambda,
raw d, raw alpha).  When the criterion is flat in d (full-row-rank designs),
the reported d comes from the plug-in rule instead of an arbitrary argmin.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import estimators, linalg
from .exceptions import (
    DegeneratePlugIn,
    FliuError,
    InsufficientDof,
    InvalidParam,
    LeverageOne,
    SaturatedSmoother,
    TuningFailed,
)

#: Relative criterion spread over d below which tuning treats d as unidentified.
DEGENERACY_RTOL = 1e-12

#: Central-difference step on transformed coordinates.
FD_STEP = 1e-6

_BIG = 1e50

#: Free tuning axes per estimator.
FREE_AXES = {
    "OLS": (),
    "Ridge": ("lam",),
    "Liu": ("d",),
    "GenRidge": ("lam", "alpha"),
    "FLiu": ("lam", "d", "alpha"),
}


def gcv_from_smoother(h, y):
    """GCV score of a linear smoother: ``(RSS/n) / (1 - tr(H)/n)^2``."""
    y = np.asarray(y, dtype=float)
    n = y.size
    tr = float(np.trace(h))
    if abs(tr - n) <= 1e-10:
        raise SaturatedSmoother(f"smoother trace {tr} equals the sample size {n}")
    resid = y - h @ y
    return float((resid @ resid / n) / (1.0 - tr / n) ** 2)


def press_from_smoother(h, y):
    """PRESS of a linear smoother: ``sum ((y_i - yhat_i) / (1 - H_ii))^2``."""
    y = np.asarray(y, dtype=float)
    diag = np.diag(h)
    bad = np.nonzero(np.abs(1.0 - diag) <= 1e-10)[0]
    if bad.size:
        raise LeverageOne(f"leverage equals one at index {bad[0]}", index=int(bad[0]))
    resid = y - h @ y
    return float(np.sum((resid / (1.0 - diag)) ** 2))


def gcv(bundle, y, lam, d, alpha):
    """GCV of the fLiu fit at ``(lam, d, alpha)`` on ``(bundle, y)``."""
    return gcv_from_smoother(estimators.smoother_matrix(bundle, lam, d, alpha), y)


def press(bundle, y, lam, d, alpha):
    """PRESS of the fLiu fit at ``(lam, d, alpha)`` on ``(bundle, y)``."""
    return press_from_smoother(estimators.smoother_matrix(bundle, lam, d, alpha), y)


def criterion_value(bundle, y, method, criterion, lam=None, d=None, alpha=None):
    """Evaluate GCV or PRESS for any estimator at the given parameters."""
    h = estimators.hat_matrix(bundle, method, lam=lam, d=d, alpha=alpha)
    if criterion == "GCV":
        return gcv_from_smoother(h, y)
    if criterion == "PRESS":
        return press_from_smoother(h, y)
    raise InvalidParam(f"criterion must be 'GCV' or 'PRESS', got {criterion!r}")


def sigma2_hat(fit):
    """Residual variance with effective degrees of freedom: RSS / (n - tr(H))."""
    n = fit.residuals.size
    tr = float(np.trace(fit.smoother))
    if n - tr <= 0:
        raise InsufficientDof(f"tr(H) = {tr:.3f} >= n = {n}")
    return float(fit.residuals @ fit.residuals / (n - tr))


def plug_in_d(bundle, y, lam, alpha, sigma2):
    """Plug-in estimate of the risk-optimal Liu parameter at fixed (lam, alpha).

    Estimates the risk-quadratic coefficients with the generalized-ridge
    coefficients standing in for the truth and ``sigma2`` for the noise
    variance, then returns ``(d_plug, d_proj)`` where
    ``d_plug = (2 c3 - c1) / (2 (c2 + c3)) <= 1`` and
    ``d_proj = max(0, d_plug)``.
    """
    q = estimators.build_Q(bundle, lam, alpha)
    s = bundle.gram
    zt = bundle.design_aug
    y = np.asarray(y, dtype=float)
    p = linalg.solve_sym(s + q, np.eye(s.shape[0]))
    b_ridge = linalg.solve_sym(s + q, zt.T @ y)
    c1 = 2.0 * sigma2 * float(np.trace(p @ q @ p))
    c2 = sigma2 * float(np.trace(p @ q @ linalg.pinv(s) @ q @ p))
    c3 = float(np.sum((p @ q @ b_ridge) ** 2))
    if not c2 + c3 > 0:
        raise DegeneratePlugIn("c2 + c3 = 0: zero penalty or zero coefficients")
    d_plug = (2.0 * c3 - c1) / (2.0 * (c2 + c3))
    return d_plug, max(0.0, d_plug)


@dataclass(frozen=True)
class TuningBounds:
    """Search box: lam on a log scale, d and alpha raw, plus grid size."""

    lam: tuple = (1e-6, 1e6)
    d: tuple = (-1000.0, 1.0)
    alpha: tuple = (0.0, 1.0)
    grid_points: int = 5

    def __post_init__(self):
        for name in ("lam", "d", "alpha"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise InvalidParam(f"{name} bounds must satisfy lo < hi, got ({lo}, {hi})")
        if self.lam[0] <= 0:
            raise InvalidParam("lam bounds must be positive (log-scale search)")
        if self.grid_points < 2:
            raise InvalidParam("need at least 2 grid points per axis")

    def axis(self, name):
        lo, hi = getattr(self, name)
        return Axis(name=name, lo=float(lo), hi=float(hi), log=(name == "lam"))


@dataclass(frozen=True)
class Axis:
    """One search axis; ``log=True`` optimizes the coordinate in log space."""

    name: str
    lo: float
    hi: float
    log: bool = False

    def grid(self, points):
        if self.log:
            return np.geomspace(self.lo, self.hi, points)
        return np.linspace(self.lo, self.hi, points)

    def to_internal(self, x):
        return np.log(x) if self.log else x

    def to_external(self, u):
        x = np.exp(u) if self.log else u
        return float(min(max(x, self.lo), self.hi))


@dataclass
class TuningResult:
    """Outcome of a tuning run (refined score never above the coarse one)."""

    method: str
    criterion: str
    lam: float | None
    d: float | None
    alpha: float | None
    score: float
    coarse: dict
    coarse_score: float
    n_eval: int
    degenerate: bool = False
    d_plug: float | None = None
    d_proj: float | None = None
    trace: list = field(default_factory=list)

    @property
    def params(self):
        return estimators.PenaltyParams(lam=self.lam, d=self.d, alpha=self.alpha)


def coarse_to_fine(fn, axes, grid_points=5, fd_step=FD_STEP):
    """Minimize ``fn`` over a box: coarse cartesian grid, then L-BFGS-B
    seeded at the grid incumbent with central-difference gradients.

    ``fn`` maps a dict of axis values to a float and may raise FliuError
    (treated as an inadmissible point).  Returns
    ``(best, best_val, coarse_best, coarse_val)`` where the best point is
    never worse than the coarse incumbent.
    """
    if not axes:
        return {}, fn({}), {}, fn({})

    def safe(point):
        try:
            v = fn(point)
        except FliuError:
            return _BIG
        return v if np.isfinite(v) else _BIG

    grids = [ax.grid(grid_points) for ax in axes]
    best_val, best = np.inf, None
    for combo in itertools.product(*grids):
        point = {ax.name: float(v) for ax, v in zip(axes, combo)}
        v = safe(point)
        if v < best_val:
            best_val, best = v, point
    if best is None or best_val >= _BIG:
        raise TuningFailed("criterion failed at every coarse-grid point")
    coarse_best, coarse_val = dict(best), best_val

    u0 = np.array([ax.to_internal(best[ax.name]) for ax in axes])
    ubounds = [(ax.to_internal(ax.lo), ax.to_internal(ax.hi)) for ax in axes]

    def from_internal(u):
        return {ax.name: ax.to_external(ui) for ax, ui in zip(axes, u)}

    def obj(u):
        return safe(from_internal(u))

    def grad(u):
        g = np.zeros_like(u)
        for i in range(u.size):
            up, um = u.copy(), u.copy()
            up[i] += fd_step
            um[i] -= fd_step
            g[i] = (obj(up) - obj(um)) / (2.0 * fd_step)
        return g

    res = optimize.minimize(obj, u0, jac=grad, method="L-BFGS-B", bounds=ubounds)
    refined = from_internal(res.x)
    refined_val = safe(refined)
    if refined_val < best_val:
        best, best_val = refined, refined_val
    return best, best_val, coarse_best, coarse_val


def tune(bundle, y, criterion="GCV", bounds=None, method="FLiu", collect_trace=False):
    """Select tuning parameters for ``method`` by minimizing GCV or PRESS.

    Runs the coarse-grid-seeded continuous search over the estimator's free
    axes.  If the criterion is flat in d at the incumbent (lam, alpha)
    (relative spread below 1e-12, the full-row-rank degeneracy), the
    remaining axes are refined with d held fixed and the reported d comes
    from the plug-in rule (projected to [0, 1]).
    """
    bounds = bounds or TuningBounds()
    y = np.asarray(y, dtype=float)
    free = FREE_AXES[method]
    state = {"n": 0, "trace": []}

    def evaluate(point):
        state["n"] += 1
        value = criterion_value(bundle, y, method, criterion, **point)
        if collect_trace:
            state["trace"].append((state["n"], point.get("lam"), point.get("d"),
                                   point.get("alpha"), value))
        return value

    axes = [bounds.axis(name) for name in free]
    best, best_val, coarse_best, coarse_val = coarse_to_fine(
        evaluate, axes, grid_points=bounds.grid_points
    )

    degenerate = False
    d_plug = d_proj = None
    if "d" in free:
        probe = dict(best)
        values = []
        for dv in bounds.axis("d").grid(bounds.grid_points):
            probe["d"] = float(dv)
            try:
                values.append(evaluate(probe))
            except FliuError:
                pass
        if values:
            level = max(abs(v) for v in values)
            spread = max(values) - min(values)
            degenerate = level > 0 and spread < DEGENERACY_RTOL * level

    if degenerate:
        other = [ax for ax in axes if ax.name != "d"]
        d_fixed = best.get("d", 0.0)
        if other:
            sub, sub_val, _, _ = coarse_to_fine(
                lambda pt: evaluate({**pt, "d": d_fixed}),
                other,
                grid_points=bounds.grid_points,
            )
            if sub_val < best_val:
                best = {**sub, "d": d_fixed}
                best_val = sub_val
        lam_q = best.get("lam", 1.0)
        alpha_q = best.get("alpha", 1.0)
        ridge_fit = estimators.fit_gen_ridge(bundle, y, lam_q, alpha_q)
        d_plug, d_proj = plug_in_d(bundle, y, lam_q, alpha_q, sigma2_hat(ridge_fit))
        best = {**best, "d": d_proj}
        best_val = evaluate(best)

    return TuningResult(
        method=method,
        criterion=criterion,
        lam=best.get("lam"),
        d=best.get("d"),
        alpha=best.get("alpha"),
        score=best_val,
        coarse=coarse_best,
        coarse_score=coarse_val,
        n_eval=state["n"],
        degenerate=degenerate,
        d_plug=d_plug,
        d_proj=d_proj,
        trace=state["trace"],
    )


@dataclass(frozen=True)
class DegeneracyReport:
    """Outcome of the full-row-rank degeneracy diagnostic over a d grid.

    In the degenerate regime (rank equal to the sample size) the GCV and
    PRESS curves are flat in d, ``H_d = I - (1 - d) B`` with
    ``B = Ztilde (S+Q)^-1 Q pinv(Ztilde)``, and the constant GCV value is
    ``n ||B y||^2 / tr(B)^2`` in the 1/n-normalized GCV convention.
    """

    n_samples: int
    n_coef: int
    rank: int
    full_row_rank: bool
    d_grid: np.ndarray
    gcv_values: np.ndarray
    press_values: np.ndarray
    gcv_spread_rel: float
    press_spread_rel: float
    identity_error: float | None
    gcv_constant: float | None
    press_constant: float | None


def _rel_spread(values):
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return np.nan
    level = np.max(np.abs(finite))
    if level == 0:
        return 0.0
    return float((np.max(finite) - np.min(finite)) / level)


def degeneracy_check(bundle, y, lam, alpha, d_grid):
    """Probe GCV/PRESS flatness in d and the rank-n smoother identity."""
    y = np.asarray(y, dtype=float)
    d_grid = np.asarray(d_grid, dtype=float)
    zt = bundle.design_aug
    n = zt.shape[0]
    rank = linalg.svd_factors(zt).rank

    gcv_vals = np.full(d_grid.size, np.nan)
    press_vals = np.full(d_grid.size, np.nan)
    identity_error = None
    q = estimators.build_Q(bundle, lam, alpha)
    b_mat = None
    if rank == n:
        b_mat = zt @ linalg.solve_sym(bundle.gram + q, q @ linalg.pinv(zt))
        identity_error = 0.0
    for i, d in enumerate(d_grid):
        h = estimators.smoother_matrix(bundle, lam, float(d), alpha)
        try:
            gcv_vals[i] = gcv_from_smoother(h, y)
        except SaturatedSmoother:
            pass
        try:
            press_vals[i] = press_from_smoother(h, y)
        except LeverageOne:
            pass
        if b_mat is not None:
            ident = np.eye(n) - (1.0 - d) * b_mat
            err = np.max(np.abs(h - ident)) / max(1.0, np.max(np.abs(h)))
            identity_error = max(identity_error, float(err))

    gcv_constant = press_constant = None
    if b_mat is not None:
        by = b_mat @ y
        tr_b = float(np.trace(b_mat))
        if tr_b != 0:
            gcv_constant = float(n * (by @ by) / tr_b**2)
        diag_b = np.diag(b_mat)
        if np.all(diag_b != 0):
            press_constant = float(np.sum((by / diag_b) ** 2))

    return DegeneracyReport(
        n_samples=n,
        n_coef=zt.shape[1],
        rank=rank,
        full_row_rank=(rank == n),
        d_grid=d_grid,
        gcv_values=gcv_vals,
        press_values=press_vals,
        gcv_spread_rel=_rel_spread(gcv_vals),
        press_spread_rel=_rel_spread(press_vals),
        identity_error=identity_error,
        gcv_constant=gcv_constant,
        press_constant=press_constant,
    )
