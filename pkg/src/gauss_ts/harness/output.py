"""CSV and manifest writers.  Floats are written with ``repr`` (shortest
round-trip form), so equal results give byte-identical files."""
from __future__ import annotations

import csv
import io
import json
import math
import subprocess
from pathlib import Path

import numpy as np

SCHEMA = 1
SUMMARY_COLUMNS = (
    "T",
    "mean_regret",
    "stderr",
    "mean_regret_over_lnT",
    "lower_bound_coef",
    "finite_time_bound",
)


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    buf.write(f"#schema={SCHEMA}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue(), encoding="utf-8")


def summary_rows(result, lower_coef=None, bound_fn=None):
    for c, T in enumerate(result.checkpoints):
        T = int(T)
        mean = float(result.mean[c])
        ratio = mean / math.log(T) if T > 1 else None
        bound = bound_fn(T) if bound_fn is not None and T > 1 else None
        yield (T, mean, float(result.stderr[c]), ratio, lower_coef, bound)


def write_summary(path: Path, result, lower_coef=None, bound_fn=None) -> None:
    _write(path, list(SUMMARY_COLUMNS), summary_rows(result, lower_coef, bound_fn))


def write_reps(path: Path, result) -> None:
    """One row per replication: pulls per arm, then regret at every checkpoint."""
    K = result.pulls.shape[1]
    header = ["rep"] + [f"pulls_{i}" for i in range(K)]
    header += [f"regret_T{int(T)}" for T in result.checkpoints]
    rows = (
        [r] + [int(p) for p in result.pulls[r]] + [float(x) for x in result.regret[r]]
        for r in range(result.reps)
    )
    _write(path, header, rows)


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != f"#schema={SCHEMA}":
        raise ValueError(f"{path}: missing '#schema={SCHEMA}' header")
    rows = list(csv.reader(lines[1:]))
    return rows[0], rows[1:]


def read_reps(path: Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (checkpoints, regret[R, C], pulls[R, K]) from a per-rep CSV."""
    header, rows = read_csv(path)
    k = sum(h.startswith("pulls_") for h in header)
    checkpoints = np.array([int(h[len("regret_T"):]) for h in header[1 + k:]], dtype=np.int64)
    pulls = np.array([[int(v) for v in row[1:1 + k]] for row in rows], dtype=np.int64)
    regret = np.array([[float(v) for v in row[1 + k:]] for row in rows])
    return checkpoints, regret, pulls


def code_version() -> str:
    from .. import __version__

    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+git.{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def write_manifest(path: Path, spec_dict: dict, **extra) -> None:
    doc = {"schema": SCHEMA, "spec": spec_dict, "version": code_version()}
    doc.update(extra)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
