"""Functional Liu shrinkage regression for scalar-on-function models.

Fits a scalar response on functional predictors through basis expansion,
combining roughness penalization with a Liu-type biasing parameter, and
ships the machinery around it: baseline estimators (OLS, ridge, classical
Liu, generalized ridge), GCV/PRESS tuning, a closed-form risk analysis with
a plug-in rule for the biasing parameter, and diagnostics for the
underdetermined regime where cross-validation cannot identify it.
"""

from .basis import (
    BSplineBasis,
    DesignBundle,
    FourierBasis,
    FunctionalDataset,
    basis_gram,
    bspline_penalty,
    build_design,
    build_fourier_basis,
    curve_scores,
    eval_basis,
    eval_coefficient_function,
    fourier_penalty,
    from_design,
)
from .dataio import FitReport, SplitSpec, export_report, load_dataset, read_report, save_dataset, split
from .estimators import (
    EstimatorFit,
    PenaltyParams,
    build_Q,
    fit,
    fit_fliu,
    fit_gen_ridge,
    fit_liu,
    fit_ols,
    fit_ridge,
    hat_matrix,
    min_norm_ls,
    predict,
    smoother_matrix,
)
from .linalg import SvdFactors, cond2, pinv, solve_sym, spectral_norm, svd_factors
from .risk import (
    EstimatorMoments,
    RiskProfile,
    RiskScan,
    d_opt,
    fliu_moments,
    monte_carlo_mse,
    mse_coefficients,
    risk_scan,
)
from .selection import (
    DegeneracyReport,
    TuningBounds,
    TuningResult,
    degeneracy_check,
    gcv,
    plug_in_d,
    press,
    sigma2_hat,
    tune,
)
from .simulate import simulate_dataset

__version__ = "0.1.0"
