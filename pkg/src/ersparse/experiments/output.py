"""CSV and JSON artifacts with a provenance header.

CSV files start with ``#`` comment lines (experiment, version, config echo)
followed by one header row.  Floats use ``%.12g``.  Nothing time dependent
goes into a CSV, so identical configs give identical bytes; wall-clock time
is recorded in the JSON summary only.
"""

from __future__ import annotations

import csv
import json
import math
import os
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__


def version_string():
    """Package version plus ``git describe`` of the source tree when available."""
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"], cwd=here,
                             capture_output=True, text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.12g" % v
    return str(v)


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)


@dataclass
class ExperimentResult:
    experiment: str
    tables: dict                         # file stem -> Table
    summary: dict
    soft_failures: list = field(default_factory=list)
    hard_failures: list = field(default_factory=list)

    @property
    def exit_code(self):
        if self.hard_failures:
            return 3
        return 2 if self.soft_failures else 0


def write_table(path, table: Table, experiment, config, version):
    with open(path, "w", newline="") as fh:
        fh.write(f"# experiment={experiment}\n")
        fh.write(f"# version={version}\n")
        for line in config.echo():
            fh.write(f"# config {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([fmt(v) for v in row])


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    return v


def write_result(result: ExperimentResult, config, out_dir, wall_clock):
    """Write every table and ``<experiment>_summary.json``; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    version = version_string()
    paths = []
    for stem, table in result.tables.items():
        path = os.path.join(out_dir, f"{stem}.csv")
        write_table(path, table, result.experiment, config, version)
        paths.append(path)
    summary = {
        "experiment": result.experiment,
        "version": version,
        "config": dict(config.items()),
        "wall_clock_seconds": wall_clock,
        "exit_code": result.exit_code,
        "soft_failures": result.soft_failures,
        "hard_failures": result.hard_failures,
        "summary": result.summary,
    }
    path = os.path.join(out_dir, f"{result.experiment}_summary.json")
    with open(path, "w") as fh:
        json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths.append(path)
    return paths
