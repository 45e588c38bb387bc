"""Table loading for the figure scripts.

Every figure family reads exactly one CSV produced by the sweep harness.
The column contract lives in ``schema.json`` (a copy of the repository-level
``schema/harness_columns.json`` that the harness writers are tested against),
so a schema drift shows up here as a named missing column rather than as a
KeyError deep inside a plotting routine.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

# figure family -> schema key of the table that family consumes
FAMILY_TABLES = {
    "meas-error": "meas-error",
    "chain1d": "chain1d",
    "threshold": "threshold-fits",
    "alpha": "alpha-fits",
}


def load_schema() -> dict:
    """Return the bundled column contract, keyed by table name."""
    text = resources.files("planar_plots").joinpath("schema.json").read_text()
    return json.loads(text)


@dataclass
class ResultTable:
    """Rows of one harness CSV plus its JSON sidecar (if present)."""

    rows: list
    columns: list
    meta: dict = field(default_factory=dict)

    def numbers(self, name: str) -> np.ndarray:
        return np.array([float(r[name]) for r in self.rows])

    @property
    def config_hash(self) -> str:
        return self.meta.get("config_sha256", "")


def read_table(path: str, family: str) -> ResultTable:
    """Load a harness CSV for ``family`` and validate its header.

    A missing column aborts with the offending header name; an empty table
    aborts too, since every figure needs at least one row.  The sidecar
    ``<name>.meta.json`` is picked up from next to the CSV when it exists.
    """
    key = FAMILY_TABLES.get(family)
    if key is None:
        raise ValueError(f"unknown figure family {family!r} "
                         f"(choose from {', '.join(sorted(FAMILY_TABLES))})")
    want = load_schema()[key]
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = list(reader.fieldnames or [])
        for col in want:
            if col not in header:
                raise ValueError(
                    f"{os.path.basename(path)}: missing column {col!r} "
                    f"required by the {key} table contract")
        rows = list(reader)
    if not rows:
        raise ValueError(f"{os.path.basename(path)}: no data rows")
    meta = {}
    sidecar = os.path.splitext(path)[0] + ".meta.json"
    if os.path.exists(sidecar):
        with open(sidecar) as fh:
            meta = json.load(fh)
    return ResultTable(rows=rows, columns=header, meta=meta)
