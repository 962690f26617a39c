"""Bundled reference data: protein levels, signalling graph, conditioning points."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .graph import DagSpec, read_dag


def data_path(name: str) -> Path:
    return Path(str(resources.files("vinesem") / "data" / name))


def reference_data(log: bool = True) -> dict:
    """Eleven protein columns (n=845); natural-log scale unless ``log=False``."""
    path = data_path("sachs_cd3cd28_aktinhib.csv")
    header = path.read_text().splitlines()[0].split(",")
    arr = np.loadtxt(path, delimiter=",", skiprows=1)
    if log:
        arr = np.log(arr)
    return {h: arr[:, k] for k, h in enumerate(header)}


def consent_dag() -> DagSpec:
    return read_dag(data_path("consent_dag.json"))
