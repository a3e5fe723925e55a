"""Parsing and validation of simulation run artifacts.

The simulator's run directory contains ``series.csv`` (header row plus one
row per report time; documented fixed column order) and ``summary.json``
(config echo, fitted decay rate under ``fit``, drift maxima).  This module
is read-only: it never recomputes physics, it only checks the schema and
hands typed columns to the renderers.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

import numpy as np

REQUIRED_COLUMNS = ("t", "E", "D", "mass_f", "mass_rho",
                    "entropy_residual", "F_min")


class SchemaError(Exception):
    """series.csv or summary.json does not match the documented interface."""


@dataclass
class SeriesFrame:
    """Parsed series.csv keyed by header names."""

    columns: dict
    path: str = "<memory>"

    def __post_init__(self):
        for name in REQUIRED_COLUMNS:
            if name not in self.columns:
                raise SchemaError(f"{self.path}: missing required column {name!r}")
        if not self.momentum_names():
            raise SchemaError(f"{self.path}: missing required column 'momentum_1'")
        t = self.columns["t"]
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) != 1:
            raise SchemaError(f"{self.path}: ragged columns {sorted(lengths)}")
        if len(t) == 0:
            raise SchemaError(f"{self.path}: empty series")
        if np.any(np.diff(t) <= 0) and len(t) > 1:
            raise SchemaError(f"{self.path}: time column is not strictly increasing")

    @classmethod
    def from_csv(cls, path: str) -> "SeriesFrame":
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError(f"{path}: empty file") from None
            rows = []
            for row in reader:
                if not row:
                    continue
                try:
                    rows.append([float(v) for v in row])
                except ValueError as err:
                    raise SchemaError(f"{path}: non-numeric cell ({err})") from None
        if not rows:
            raise SchemaError(f"{path}: no data rows")
        data = np.array(rows)
        if data.shape[1] != len(header):
            raise SchemaError(f"{path}: row width does not match the header")
        return cls({name: data[:, i] for i, name in enumerate(header)}, path=path)

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise SchemaError(f"{self.path}: missing column {name!r}") from None

    @property
    def t(self) -> np.ndarray:
        return self.columns["t"]

    def momentum_names(self) -> list:
        return sorted(n for n in self.columns if n.startswith("momentum_"))


def load_summary(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as err:
        raise SchemaError(f"{path}:{err.lineno}: {err.msg}") from err
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: summary must be a JSON object")
    return data


def load_run_dir(run_dir: str):
    """(SeriesFrame, summary dict) for one run directory."""
    series_path = os.path.join(run_dir, "series.csv")
    summary_path = os.path.join(run_dir, "summary.json")
    return SeriesFrame.from_csv(series_path), load_summary(summary_path)
