"""Experiment reports: a structured record of inputs, outputs, residuals and
tolerances, serialized losslessly to JSON and to flat CSV, with optional
matplotlib figures rendered next to the delimited output."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path

__all__ = ["ExperimentReport", "write_table", "render_table_figure", "timed_report"]

SCHEMA_VERSION = 1


@dataclass
class ExperimentReport:
    experiment: str
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    runtime_ms: float = 0.0
    seed: int | None = None
    schema: int = SCHEMA_VERSION

    @property
    def passed(self) -> bool:
        return all(abs(self.residuals[k]) <= self.tolerances.get(k, math.inf)
                   for k in self.residuals)

    def to_json(self) -> str:
        payload = asdict(self)
        payload["passed"] = self.passed
        return json.dumps(payload, indent=2, sort_keys=True, default=_coerce)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        data = json.loads(text)
        data.pop("passed", None)
        return cls(**data)

    def write(self, path: Path, fmt: str = "json") -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        if fmt == "json":
            out = path.with_suffix(".json")
            out.write_text(self.to_json())
        elif fmt == "csv":
            out = path.with_suffix(".csv")
            with out.open("w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["section", "name", "value"])
                writer.writerow(["meta", "experiment", self.experiment])
                writer.writerow(["meta", "schema", self.schema])
                writer.writerow(["meta", "passed", self.passed])
                writer.writerow(["meta", "runtime_ms", repr(self.runtime_ms)])
                if self.seed is not None:
                    writer.writerow(["meta", "seed", self.seed])
                for section in ("inputs", "outputs", "residuals", "tolerances"):
                    for name, value in getattr(self, section).items():
                        writer.writerow([section, name, _scalar(value)])
        else:
            raise ValueError(f"unknown format {fmt!r}")
        return out

    def summary_line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        worst = ""
        if self.residuals:
            key = max(self.residuals,
                      key=lambda k: abs(self.residuals[k]) / max(self.tolerances.get(k, math.inf), 1e-300))
            worst = f"  worst: {key}={self.residuals[key]:.3e} (tol {self.tolerances.get(key, math.inf):.1e})"
        return f"[{status}] {self.experiment}{worst}"


def _coerce(obj):
    import numpy as np
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (bool,)):
        return obj
    return repr(obj)


def _scalar(value):
    import numpy as np
    if isinstance(value, (np.floating, np.integer)):
        return repr(value.item())
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return json.dumps(np.asarray(value).tolist())
    return value


def timed_report(experiment: str, fn, inputs: dict, seed: int | None = None) -> ExperimentReport:
    """Run fn() -> (outputs, residuals, tolerances) and wrap it in a report."""
    start = time.perf_counter()
    outputs, residuals, tolerances = fn()
    elapsed = (time.perf_counter() - start) * 1000.0
    return ExperimentReport(experiment, inputs, outputs, residuals, tolerances,
                            runtime_ms=elapsed, seed=seed)


def write_table(path: Path, columns, rows, fmt: str = "csv") -> Path:
    """Write a named table with a stable column schema."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        out = path.with_suffix(".csv")
        with out.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_scalar(v) for v in row])
    elif fmt == "json":
        out = path.with_suffix(".json")
        out.write_text(json.dumps({"columns": list(columns),
                                   "rows": [[_scalar(v) for v in row] for row in rows]},
                                  indent=2))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return out


def render_table_figure(path: Path, name: str, columns, rows, x_col: str,
                        y_cols, logy: bool = False, title: str | None = None) -> Path | None:
    """Render a simple line/marker figure for a table next to its CSV."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path).with_suffix(".png")
    path.parent.mkdir(parents=True, exist_ok=True)
    idx = {c: i for i, c in enumerate(columns)}
    xs = [row[idx[x_col]] for row in rows]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for y in y_cols:
        ys = [abs(row[idx[y]]) if logy else row[idx[y]] for row in rows]
        ax.plot(xs, ys, marker="o", ms=3.5, lw=1.0, label=y)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(x_col)
    ax.legend(frameon=False, fontsize=8)
    ax.set_title(title or name, fontsize=10)
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=140)
    plt.close(fig)
    return path
