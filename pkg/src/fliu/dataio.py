"""CSV ingestion, train/test splitting and report serialization.

Interchange formats (all UTF-8, full-precision decimals):

* wide curves:   header ``id,t1,...,tT`` (grid values as column names when
  they parse as numbers, positions 1..T otherwise), one row per sample;
* long curves:   header ``id,t,value`` triples, pivoted onto the grid;
* responses:     header ``id,y``, matched to curves by label;
* reports:       ``key = value`` text plus companion CSVs (coefficient
  function, residuals, tuning trace, risk table).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .basis import FunctionalDataset
from .exceptions import (
    DimensionError,
    GridMismatch,
    InvalidSplit,
    JoinError,
    ParseError,
)

FMT = "%.17g"


def _fmt(x):
    return FMT % float(x)


def _parse_cell(text, row, col):
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"non-numeric cell {text!r}", row=row, column=col) from None


def _read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if len(rows) < 2:
        raise ParseError(f"{path}: expected a header and at least one data row")
    return rows


def _read_wide(path):
    rows = _read_rows(path)
    header = rows[0]
    n_cols = len(header)
    try:
        grid = np.array([float(c) for c in header[1:]])
        if np.any(np.diff(grid) <= 0):
            raise ValueError
    except ValueError:
        grid = np.arange(1.0, n_cols)
    labels, values = [], []
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != n_cols:
            raise GridMismatch(f"{path}: row {r} has {len(row)} cells, expected {n_cols}")
        labels.append(row[0].strip())
        values.append([_parse_cell(c, r, j + 2) for j, c in enumerate(row[1:])])
    return grid, labels, np.asarray(values)


def _read_long(path):
    rows = _read_rows(path)
    if len(rows[0]) != 3:
        raise ParseError(f"{path}: long layout needs exactly 3 columns (id,t,value)")
    triples = {}
    order = []
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise GridMismatch(f"{path}: row {r} has {len(row)} cells, expected 3")
        label = row[0].strip()
        t = _parse_cell(row[1], r, 2)
        v = _parse_cell(row[2], r, 3)
        if label not in triples:
            triples[label] = {}
            order.append(label)
        triples[label][t] = v
    grids = {label: tuple(sorted(d)) for label, d in triples.items()}
    common = grids[order[0]]
    for label, g in grids.items():
        if g != common:
            raise GridMismatch(f"{path}: sample {label!r} does not share the common grid")
    grid = np.array(common)
    values = np.array([[triples[label][t] for t in common] for label in order])
    return grid, order, values


def _read_response(path):
    rows = _read_rows(path)
    out = {}
    order = []
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise ParseError(f"{path}: response rows need exactly 2 cells", row=r)
        label = row[0].strip()
        if label in out:
            raise JoinError(f"{path}: duplicate response id {label!r}")
        out[label] = _parse_cell(row[1], r, 2)
        order.append(label)
    return out, order


def load_dataset(curves_path, response_path, layout="wide"):
    """Load curves (one file per predictor) and responses into a dataset.

    ``curves_path`` may be a single path or a list of paths for multiple
    functional predictors; all must share the grid and the sample labels.
    Responses are joined on the id column.
    """
    paths = [curves_path] if isinstance(curves_path, (str, bytes)) else list(curves_path)
    reader = _read_wide if layout == "wide" else _read_long
    if layout not in ("wide", "long"):
        raise ParseError(f"unknown layout {layout!r}; expected 'wide' or 'long'")
    grid = labels = None
    curves = []
    for path in paths:
        g, lab, vals = reader(path)
        if grid is None:
            grid, labels = g, lab
        else:
            if g.shape != grid.shape or not np.allclose(g, grid):
                raise GridMismatch(f"{path}: grid differs from the first predictor's")
            if lab != labels:
                raise JoinError(f"{path}: sample ids differ from the first predictor's")
        curves.append(vals)
    responses, _ = _read_response(response_path)
    missing = [lab for lab in labels if lab not in responses]
    if missing:
        raise JoinError(f"no response for sample id(s) {missing[:5]!r}")
    y = np.array([responses[lab] for lab in labels])
    return FunctionalDataset(grid=grid, curves=curves, y=y, labels=labels)


def save_dataset(data, curves_path, response_path, layout="wide"):
    """Write a dataset back to CSV (inverse of load_dataset for one predictor).

    ``curves_path`` may be a list matching the number of predictors.
    """
    paths = [curves_path] if isinstance(curves_path, (str, bytes)) else list(curves_path)
    if len(paths) != data.n_predictors:
        raise DimensionError(f"{len(paths)} paths for {data.n_predictors} predictors")
    labels = data.labels or [f"s{i:04d}" for i in range(data.n_samples)]
    for path, values in zip(paths, data.curves):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("id," + ",".join(_fmt(t) for t in data.grid) + "\n")
            for lab, row in zip(labels, values):
                fh.write(lab + "," + ",".join(_fmt(v) for v in row) + "\n")
    with open(response_path, "w", encoding="utf-8") as fh:
        fh.write("id,y\n")
        for lab, v in zip(labels, data.y):
            fh.write(f"{lab},{_fmt(v)}\n")


@dataclass(frozen=True)
class SplitSpec:
    """Train/test partition: a train fraction or explicit index lists."""

    fraction: float | None = None
    train_indices: list | None = None
    test_indices: list | None = None
    seed: int = 0
    shuffle: bool = True


def split(data, spec):
    """Deterministic train/test split; rows stay in ascending original order."""
    n = data.n_samples
    if spec.train_indices is not None:
        train = sorted(int(i) for i in spec.train_indices)
        if spec.test_indices is not None:
            test = sorted(int(i) for i in spec.test_indices)
        else:
            test = sorted(set(range(n)) - set(train))
        if set(train) & set(test):
            raise InvalidSplit("train and test indices overlap")
        if any(i < 0 or i >= n for i in train + test):
            raise InvalidSplit("split index out of range")
    else:
        if spec.fraction is None or not 0 < spec.fraction < 1:
            raise InvalidSplit(f"train fraction must be in (0, 1), got {spec.fraction}")
        n_train = int(round(spec.fraction * n))
        order = (
            np.random.default_rng(spec.seed).permutation(n)
            if spec.shuffle
            else np.arange(n)
        )
        train = sorted(int(i) for i in order[:n_train])
        test = sorted(int(i) for i in order[n_train:])
    if len(train) < 2 or len(test) < 1:
        raise InvalidSplit(f"split sizes ({len(train)}, {len(test)}) too small")
    return data.take(train), data.take(test), train, test


@dataclass
class FitReport:
    """Everything a fitted estimator reports: parameters, scores, losses,
    conditioning and the estimated coefficient function on an output grid."""

    method: str
    lam: float | None = None
    d: float | None = None
    alpha: float | None = None
    gcv: float | None = None
    press: float | None = None
    training_loss: float | None = None
    testing_loss: float | None = None
    cond_design: float | None = None
    cond_train_design: float | None = None
    degenerate: bool = False
    intercept: float | None = None
    coef_grid: np.ndarray | None = None
    coef_values: np.ndarray | None = None
    residuals: np.ndarray | None = None
    trace: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)


def _write_table(path, header, columns):
    columns = [np.asarray(c) for c in columns]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(columns[0].size):
            fh.write(",".join(_fmt(c[i]) for c in columns) + "\n")


def read_table(path):
    """Read a numeric CSV (with header) into a dict of column arrays."""
    rows = _read_rows(path)
    header = [h.strip() for h in rows[0]]
    cols = {h: [] for h in header}
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise GridMismatch(f"{path}: row {r} has {len(row)} cells")
        for h, c in zip(header, row):
            cols[h].append(_parse_cell(c, r, header.index(h) + 1))
    return {h: np.array(v) for h, v in cols.items()}


def export_report(report, path):
    """Write the key-value report to ``path`` plus companion CSVs.

    Companions share the stem of ``path``: ``<stem>_beta.csv`` for the
    coefficient function, ``<stem>_residuals.csv``, ``<stem>_trace.csv``
    and any table under ``report.extras['tables']``.
    """
    path = str(path)
    stem = path[: -len(".txt")] if path.endswith(".txt") else path
    pairs = [("method", report.method)]
    for name in ("lam", "d", "alpha"):
        value = getattr(report, name)
        if value is not None:
            pairs.append((name, _fmt(value)))
    for name in ("gcv", "press", "training_loss", "testing_loss",
                 "cond_design", "cond_train_design", "intercept"):
        value = getattr(report, name)
        if value is not None:
            pairs.append((name, _fmt(value)))
    pairs.append(("degenerate", str(report.degenerate).lower()))
    for key, value in report.extras.items():
        if key == "tables":
            continue
        pairs.append((key, value if isinstance(value, str) else _fmt(value)))
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in pairs:
            fh.write(f"{key} = {value}\n")

    if report.coef_grid is not None and report.coef_values is not None:
        _write_table(stem + "_beta.csv", ["s", "beta"],
                     [report.coef_grid, report.coef_values])
    if report.residuals is not None:
        _write_table(stem + "_residuals.csv",
                     ["index", "residual"],
                     [np.arange(len(report.residuals)), report.residuals])
    if report.trace:
        arr = np.asarray(
            [[t[0], np.nan if t[1] is None else t[1], np.nan if t[2] is None else t[2],
              np.nan if t[3] is None else t[3], t[4]] for t in report.trace]
        )
        _write_table(stem + "_trace.csv",
                     ["evaluation", "lam", "d", "alpha", "score"],
                     [arr[:, i] for i in range(5)])
    for name, (header, columns) in report.extras.get("tables", {}).items():
        _write_table(f"{stem}_{name}.csv", header, columns)


def read_report(path):
    """Parse a ``key = value`` report back into a dict (floats when possible)."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if "=" not in line:
                continue
            key, _, value = line.partition("=")
            value = value.strip()
            try:
                out[key.strip()] = float(value)
            except ValueError:
                out[key.strip()] = value
    return out
