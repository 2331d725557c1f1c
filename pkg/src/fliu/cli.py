"""Command-line interface: fit, tune, risk, degeneracy, simulate.

Every subcommand writes its resolved configuration to ``config.json`` in the
output directory and emits plot-ready CSVs; given the same configuration and
seed the data artifacts are byte-identical (timestamps only appear in
``run.log``).

Exit codes: 0 success; 2 data/format errors; 3 numerical failures;
4 tuning failures; 5 invalid configuration or parameters; 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import dataio, estimators, linalg, risk, selection, simulate
from .basis import BSplineBasis, FourierBasis, FunctionalDataset, build_design
from .basis import eval_coefficient_function
from .exceptions import (
    BasisKindError,
    DegenerateInput,
    DegeneratePlugIn,
    DimensionError,
    DomainError,
    FliuError,
    GridMismatch,
    InsufficientDof,
    InvalidBasis,
    InvalidParam,
    InvalidSplit,
    JoinError,
    LeverageOne,
    ParseError,
    SaturatedSmoother,
    SingularSystem,
    TuningFailed,
    UnderdeterminedCurveFit,
)

_DATA_ERRORS = (ParseError, GridMismatch, JoinError, InvalidSplit, DimensionError)
_NUMERIC_ERRORS = (SingularSystem, SaturatedSmoother, LeverageOne, InsufficientDof,
                   DegenerateInput, DegeneratePlugIn, UnderdeterminedCurveFit)
_CONFIG_ERRORS = (InvalidBasis, BasisKindError, DomainError, InvalidParam)

DEFAULT_ESTIMATORS = "OLS,Ridge,Liu,GenRidge,FLiu"


def _add_common(p):
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0, help="seed for splits and noise")
    p.add_argument("--config", default=None, help="JSON file with flag defaults (flags win)")


def _add_data(p):
    p.add_argument("--curves", required=True,
                   help="curve CSV path (comma-separated list for several predictors)")
    p.add_argument("--response", required=True, help="response CSV path")
    p.add_argument("--layout", choices=("wide", "long"), default="wide")
    p.add_argument("--log-response", action="store_true",
                   help="apply a decimal log to the responses after loading")
    p.add_argument("--basis", choices=("fourier", "bspline"), default="fourier")
    p.add_argument("--K", type=int, nargs="+", default=[11], help="basis size(s)")
    p.add_argument("--period", type=float, default=None,
                   help="basis domain length (defaults to the grid span)")
    p.add_argument("--penalty", choices=("auto", "fourier", "curvature", "second_difference"),
                   default="auto")


def _add_tuning(p):
    p.add_argument("--criterion", choices=("GCV", "PRESS"), default="GCV")
    p.add_argument("--estimators", default=DEFAULT_ESTIMATORS,
                   help="comma-separated subset of OLS,Ridge,Liu,GenRidge,FLiu")
    p.add_argument("--lam", type=float, default=None, help="fixed penalty strength")
    p.add_argument("--d", type=float, default=None, help="fixed Liu parameter")
    p.add_argument("--alpha", type=float, default=None, help="fixed geometry mix")
    p.add_argument("--lam-bounds", type=float, nargs=2, default=[1e-6, 1e6])
    p.add_argument("--d-bounds", type=float, nargs=2, default=[-1000.0, 1.0])
    p.add_argument("--alpha-bounds", type=float, nargs=2, default=[0.0, 1.0])
    p.add_argument("--grid-points", type=int, default=5)


def _add_split(p):
    p.add_argument("--split", type=float, default=0.7, help="train fraction")
    p.add_argument("--train-size", type=int, default=None,
                   help="absolute train size (overrides --split)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fliu",
        description="Functional Liu shrinkage regression for scalar-on-function models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit estimators at given or tuned parameters")
    _add_data(p_fit); _add_tuning(p_fit); _add_split(p_fit); _add_common(p_fit)

    p_tune = sub.add_parser("tune", help="tune estimators by GCV or PRESS")
    _add_data(p_tune); _add_tuning(p_tune); _add_split(p_tune); _add_common(p_tune)
    p_tune.add_argument("--full-sample", action="store_true",
                        help="tune on the full sample instead of the training split")

    p_risk = sub.add_parser("risk", help="closed-form vs Monte-Carlo risk on synthetic truth")
    p_risk.add_argument("--n", type=int, default=25)
    p_risk.add_argument("--T", type=int, default=40, dest="n_grid")
    p_risk.add_argument("--K-true", type=int, default=5, dest="k_true")
    p_risk.add_argument("--sigma2", type=float, default=1.0)
    p_risk.add_argument("--collinearity", type=float, default=0.0)
    p_risk.add_argument("--lam", type=float, default=1.0)
    p_risk.add_argument("--alpha", type=float, default=0.5)
    p_risk.add_argument("--d-grid", default="-1:1:9",
                        help="lo:hi:count grid for the biasing parameter")
    p_risk.add_argument("--n-rep", type=int, default=100_000)
    _add_common(p_risk)

    p_deg = sub.add_parser("degeneracy", help="GCV/PRESS flatness in d per basis size")
    _add_data(p_deg); _add_common(p_deg)
    p_deg.add_argument("--criterion", choices=("GCV", "PRESS"), default="GCV")
    p_deg.add_argument("--lam", type=float, default=None,
                       help="penalty strength (tuned for d=0 when omitted)")
    p_deg.add_argument("--alpha", type=float, default=None)
    p_deg.add_argument("--d-grid", default="-5:0.99:25")

    p_sim = sub.add_parser("simulate", help="write a synthetic dataset with ground truth")
    p_sim.add_argument("--n", type=int, default=50)
    p_sim.add_argument("--T", type=int, default=40, dest="n_grid")
    p_sim.add_argument("--p", type=int, default=1)
    p_sim.add_argument("--K-true", type=int, default=5, dest="k_true")
    p_sim.add_argument("--sigma2", type=float, default=1.0)
    p_sim.add_argument("--collinearity", type=float, default=0.0)
    p_sim.add_argument("--intercept", type=float, default=0.0)
    _add_common(p_sim)
    return parser


def _apply_config(parser, argv):
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config", default=None)
    known, _ = probe.parse_known_args(argv[1:])
    if known.config:
        with open(known.config, encoding="utf-8") as fh:
            defaults = json.load(fh)
        for action in parser._subparsers._group_actions[0].choices.values():
            action.set_defaults(**{k: v for k, v in defaults.items()
                                   if any(a.dest == k for a in action._actions)})
    return parser.parse_args(argv[1:])


def _outdir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = {k: v for k, v in sorted(vars(args).items()) if k != "config"}
    with open(out / "config.json", "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    with open(out / "run.log", "a", encoding="utf-8") as fh:
        fh.write(f"{time.strftime('%Y-%m-%dT%H:%M:%S')} {' '.join(sys.argv)}\n")
    return out


def _load(args):
    paths = [p for p in args.curves.split(",") if p]
    data = dataio.load_dataset(paths if len(paths) > 1 else paths[0],
                               args.response, layout=args.layout)
    if args.log_response:
        if np.any(data.y <= 0):
            raise InvalidParam("--log-response requires positive responses")
        data = FunctionalDataset(grid=data.grid, curves=data.curves,
                                 y=np.log10(data.y), labels=data.labels)
    return data


def _bases(args, data):
    ks = list(args.K) * (data.n_predictors if len(args.K) == 1 else 1)
    if len(ks) != data.n_predictors:
        raise InvalidParam(f"{len(ks)} basis sizes for {data.n_predictors} predictors")
    period = args.period
    if period is None:
        span = data.grid[-1] - data.grid[0]
        step = span / max(1, data.grid.size - 1)
        period = float(data.grid[-1] + step / 2.0)
    if args.basis == "fourier":
        return [FourierBasis(nbasis=k, period=period) for k in ks]
    return [BSplineBasis.uniform(k, (0.0, period)) for k in ks]


def _bounds(args):
    return selection.TuningBounds(
        lam=tuple(args.lam_bounds),
        d=tuple(args.d_bounds),
        alpha=tuple(args.alpha_bounds),
        grid_points=args.grid_points,
    )


def _split_spec(args, n):
    fraction = args.split
    if args.train_size is not None:
        fraction = args.train_size / n
    return dataio.SplitSpec(fraction=fraction, seed=args.seed)


def _needed(method):
    return selection.FREE_AXES[method]


def _params_given(args, method):
    given = {"lam": args.lam, "d": args.d, "alpha": args.alpha}
    needed = _needed(method)
    if all(given[k] is not None for k in needed):
        return {k: given[k] for k in needed}
    return None


def _coef_curve(fit, bases, points=201):
    basis = bases[0]
    lo, hi = basis.domain
    grid = np.linspace(lo, hi, points)
    coefs = fit.beta[1 : 1 + basis.nbasis]
    return grid, eval_coefficient_function(coefs, basis, grid)


def cmd_fit(args):
    out = _outdir(args)
    data = _load(args)
    bases = _bases(args, data)
    bundle = build_design(data, bases, penalty=args.penalty)
    train, test, idx_train, idx_test = dataio.split(data, _split_spec(args, data.n_samples))
    bundle_train = bundle.take(idx_train)
    zt_test = bundle.design_aug[idx_test]
    cond_full = linalg.cond2(bundle.design_aug)
    cond_train = linalg.cond2(bundle_train.design_aug)

    summary = []
    for method in [m.strip() for m in args.estimators.split(",") if m.strip()]:
        params = _params_given(args, method)
        tuning = None
        if params is None and _needed(method):
            tuning = selection.tune(bundle_train, train.y, criterion=args.criterion,
                                    bounds=_bounds(args), method=method, collect_trace=True)
            params = {k: getattr(tuning, k) for k in _needed(method)}
        params = params or {}
        fit = estimators.fit(bundle_train, train.y, method, **params)
        pred = estimators.predict(fit, zt_test)
        testing_loss = float(np.mean((test.y - pred) ** 2))
        scores = {}
        for name, fn in (("gcv", selection.gcv_from_smoother),
                         ("press", selection.press_from_smoother)):
            try:
                scores[name] = fn(fit.smoother, train.y)
            except FliuError:
                scores[name] = None
        grid, beta = _coef_curve(fit, bases)
        report = dataio.FitReport(
            method=method,
            lam=params.get("lam"),
            d=params.get("d"),
            alpha=params.get("alpha"),
            gcv=scores["gcv"],
            press=scores["press"],
            training_loss=fit.training_loss,
            testing_loss=testing_loss,
            cond_design=cond_full,
            cond_train_design=cond_train,
            degenerate=bool(tuning.degenerate) if tuning else False,
            intercept=fit.intercept,
            coef_grid=grid,
            coef_values=beta,
            residuals=fit.residuals,
            trace=tuning.trace if tuning else [],
        )
        dataio.export_report(report, out / f"{method}_report.txt")
        summary.append((method, params.get("lam"), params.get("d"), params.get("alpha"),
                        scores["gcv"], fit.training_loss, testing_loss))

    with open(out / "summary.csv", "w", encoding="utf-8") as fh:
        fh.write("method,lam,d,alpha,gcv,training_loss,testing_loss\n")
        for row in summary:
            cells = [row[0]] + ["" if v is None else dataio.FMT % v for v in row[1:]]
            fh.write(",".join(cells) + "\n")
    return 0


def cmd_tune(args):
    out = _outdir(args)
    data = _load(args)
    bases = _bases(args, data)
    bundle = build_design(data, bases, penalty=args.penalty)
    y = data.y
    if not args.full_sample:
        _, _, idx_train, _ = dataio.split(data, _split_spec(args, data.n_samples))
        bundle = bundle.take(idx_train)
        y = data.y[idx_train]

    rows = []
    for method in [m.strip() for m in args.estimators.split(",") if m.strip()]:
        if not _needed(method):
            continue
        result = selection.tune(bundle, y, criterion=args.criterion,
                                bounds=_bounds(args), method=method, collect_trace=True)
        report = dataio.FitReport(
            method=method, lam=result.lam, d=result.d, alpha=result.alpha,
            degenerate=result.degenerate, trace=result.trace,
            extras={
                "criterion": result.criterion,
                "score": result.score,
                "coarse_score": result.coarse_score,
                "n_eval": float(result.n_eval),
                **({"d_plug": result.d_plug, "d_proj": result.d_proj}
                   if result.degenerate else {}),
            },
        )
        dataio.export_report(report, out / f"{method}_tuning.txt")
        rows.append((method, result.lam, result.d, result.alpha, result.score,
                     int(result.degenerate)))
    with open(out / "summary.csv", "w", encoding="utf-8") as fh:
        fh.write("method,lam,d,alpha,score,degenerate\n")
        for row in rows:
            cells = [row[0]] + ["" if v is None else dataio.FMT % v for v in row[1:-1]]
            fh.write(",".join(cells + [str(row[-1])]) + "\n")
    return 0


def _parse_grid(text):
    lo, hi, count = text.split(":")
    return np.linspace(float(lo), float(hi), int(count))


def cmd_risk(args):
    out = _outdir(args)
    data, truth = simulate.simulate_dataset(
        args.n, args.n_grid, args.k_true, args.sigma2, seed=args.seed,
        collinearity=args.collinearity,
    )
    bases = [FourierBasis(nbasis=args.k_true, period=truth["period"])]
    bundle = build_design(data, bases)
    q = estimators.build_Q(bundle, args.lam, args.alpha)
    b_aug = np.concatenate([[truth["intercept"]], truth["coef"]])
    scan = risk.risk_scan(bundle.gram, q, b_aug, args.sigma2, _parse_grid(args.d_grid),
                          n_rep=args.n_rep, seed=args.seed, design=bundle.design_aug)
    scan.write_csv(out / "risk.csv")

    opt = risk.d_opt(scan.profile)
    ridge_fit = estimators.fit_gen_ridge(bundle, data.y, args.lam, args.alpha)
    d_plug, d_proj = selection.plug_in_d(bundle, data.y, args.lam, args.alpha,
                                         selection.sigma2_hat(ridge_fit))
    with open(out / "risk_summary.txt", "w", encoding="utf-8") as fh:
        for key, value in (
            ("sigma2", args.sigma2), ("lam", args.lam), ("alpha", args.alpha),
            ("c0", scan.profile.c0), ("c1", scan.profile.c1),
            ("c2", scan.profile.c2), ("c3", scan.profile.c3),
            ("d_opt", opt), ("d_plug", d_plug), ("d_proj", d_proj),
            ("g_at_d_opt", scan.profile.g(opt)), ("g_at_1", scan.g_at_1),
        ):
            fh.write(f"{key} = {dataio.FMT % value}\n")
        fh.write(f"improves_over_ols = {str(scan.improves_over_ols).lower()}\n")
    return 0


def cmd_degeneracy(args):
    out = _outdir(args)
    data = _load(args)
    d_grid = _parse_grid(args.d_grid)
    for k in args.K:
        sub = argparse.Namespace(**{**vars(args), "K": [k]})
        bases = _bases(sub, data)
        bundle = build_design(data, bases, penalty=args.penalty)
        lam, alpha = args.lam, args.alpha
        if lam is None or alpha is None:
            tuned = selection.tune(bundle, data.y, criterion=args.criterion,
                                   method="GenRidge")
            lam = lam if lam is not None else tuned.lam
            alpha = alpha if alpha is not None else tuned.alpha
        report = selection.degeneracy_check(bundle, data.y, lam, alpha, d_grid)
        with open(out / f"degeneracy_K{k}.csv", "w", encoding="utf-8") as fh:
            fh.write("d,gcv,press\n")
            for i, d in enumerate(report.d_grid):
                fh.write("%s,%s,%s\n" % (dataio.FMT % d,
                                         dataio.FMT % report.gcv_values[i],
                                         dataio.FMT % report.press_values[i]))
        with open(out / f"degeneracy_K{k}.txt", "w", encoding="utf-8") as fh:
            fh.write(f"K = {k}\nlam = {dataio.FMT % lam}\nalpha = {dataio.FMT % alpha}\n")
            fh.write(f"n_samples = {report.n_samples}\nn_coef = {report.n_coef}\n")
            fh.write(f"rank = {report.rank}\nfull_row_rank = {str(report.full_row_rank).lower()}\n")
            fh.write(f"gcv_spread_rel = {dataio.FMT % report.gcv_spread_rel}\n")
            fh.write(f"press_spread_rel = {dataio.FMT % report.press_spread_rel}\n")
            if report.identity_error is not None:
                fh.write(f"identity_error = {dataio.FMT % report.identity_error}\n")
            if report.gcv_constant is not None:
                fh.write(f"gcv_constant = {dataio.FMT % report.gcv_constant}\n")
    return 0


def cmd_simulate(args):
    out = _outdir(args)
    data, truth = simulate.simulate_dataset(
        args.n, args.n_grid, args.k_true, args.sigma2, p=args.p,
        collinearity=args.collinearity, seed=args.seed, intercept=args.intercept,
    )
    curve_paths = [out / (f"curves_{j}.csv" if args.p > 1 else "curves.csv")
                   for j in range(args.p)]
    dataio.save_dataset(data, [str(p) for p in curve_paths], str(out / "response.csv"))
    bases = [FourierBasis(nbasis=args.k_true, period=truth["period"])] * args.p
    bundle = build_design(data, bases)
    truth_out = dict(truth)
    truth_out["coef"] = [float(v) for v in truth["coef"]]
    truth_out["kappa_design"] = linalg.cond2(bundle.design_aug)
    with open(out / "truth.json", "w", encoding="utf-8") as fh:
        json.dump(truth_out, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


_COMMANDS = {
    "fit": cmd_fit,
    "tune": cmd_tune,
    "risk": cmd_risk,
    "degeneracy": cmd_degeneracy,
    "simulate": cmd_simulate,
}


def main(argv=None):
    argv = list(sys.argv if argv is None else ["fliu"] + list(argv))
    parser = build_parser()
    args = _apply_config(parser, argv)
    try:
        return _COMMANDS[args.command](args)
    except _DATA_ERRORS as exc:
        print(f"fliu: data error: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as exc:
        print(f"fliu: numerical error: {exc}", file=sys.stderr)
        return 3
    except TuningFailed as exc:
        print(f"fliu: tuning failed: {exc}", file=sys.stderr)
        return 4
    except _CONFIG_ERRORS as exc:
        print(f"fliu: invalid configuration: {exc}", file=sys.stderr)
        return 5
    except FliuError as exc:
        print(f"fliu: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
