"""Synthetic harness tables shared by the plot tests."""

import csv
import json

from planar_plots import ResultTable, load_schema

SCHEMA = load_schema()


def write_table(path, key, rows, meta=None, columns=None):
    """Write a CSV shaped like the ``key`` table (plus optional sidecar)."""
    cols = list(SCHEMA[key]) if columns is None else list(columns)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        w.writerows(rows)
    if meta is not None:
        path.with_suffix(".meta.json").write_text(json.dumps(meta))
    return path


def as_table(key, rows, columns=None):
    """Build a ResultTable in memory from lists of row values."""
    cols = list(SCHEMA[key]) if columns is None else list(columns)
    return ResultTable(rows=[dict(zip(cols, map(str, r))) for r in rows],
                       columns=cols)


def meas_rows():
    rows = []
    for n in (2, 3, 4):
        for k in (2, 4, 6):
            nbar = 0.5 * n * k
            rows.append(("meas-error", n, k, nbar, "heterodyne", "binning",
                         1000, 0.2 / (1 + nbar), 0.004))
    return rows


def chain_rows():
    rows = []
    for povm in ("canonical", "heterodyne"):
        for g, f in ((0.0, 0.998), (0.05, 0.91), (0.1, 0.80)):
            rows.append((g, 2, 6, povm, "binning", 10000, f, 0.003))
    return rows


def threshold_rows(with_ref=True):
    rows = [(2, 6, 6.0, "ahd", "local-ml", "soft", 0.12, 0.11, 0.13, 0.031),
            (3, 4, 6.0, "ahd", "local-ml", "soft", 0.10, 0.09, 0.11, 0.044),
            (4, 3, 6.0, "ahd", "local-ml", "soft", 0.08, 0.07, 0.09, 0.052)]
    if with_ref:
        rows.append((1, 1, 0.5, "projective", "projective", "unit",
                     0.105, 0.100, 0.110, 0.105))
    return rows


def alpha_rows():
    rows = []
    for dec in ("unit", "soft"):
        for g, a in ((0.01, 1.4), (0.02, 0.9), (0.03, 0.5)):
            rows.append((3, 4, "ahd", "local-ml", dec, g, a, 0.05, 0.97, 3))
    return rows
