"""Run metrics and robust aggregation (interquartile mean and range).

Quartiles use linear interpolation (numpy default), which the IQM/IQR
values depend on.  The ``runtime_s`` field is reported on the console but
excluded from serialized metrics so output files stay byte-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class MetricsReport:
    dead_space_pct: float
    hpwl_um: float
    wirelength_um: float
    vias: int
    routing_iterations: int
    routing_failed: bool
    seed: int
    runtime_s: float = 0.0

    def __post_init__(self):
        if not 0 <= self.dead_space_pct < 100:
            raise ValueError("dead space percent must lie in [0, 100)")
        if min(self.vias, self.routing_iterations) < 0:
            raise ValueError("counts must be non-negative")

    def to_dict(self, include_runtime: bool = False) -> dict:
        data = {
            "dead_space_pct": self.dead_space_pct,
            "hpwl_um": self.hpwl_um,
            "wirelength_um": self.wirelength_um,
            "vias": self.vias,
            "routing_iterations": self.routing_iterations,
            "routing_failed": self.routing_failed,
            "seed": self.seed,
        }
        if include_runtime:
            data["runtime_s"] = self.runtime_s
        return data


def iqm(values: list[float]) -> float:
    """Mean of the values lying within [Q1, Q3] (inclusive)."""
    arr = np.asarray(values, dtype=float)
    q1, q3 = np.percentile(arr, [25, 75])
    inner = arr[(arr >= q1) & (arr <= q3)]
    return float(inner.mean())


def iqr(values: list[float]) -> float:
    q1, q3 = np.percentile(np.asarray(values, dtype=float), [25, 75])
    return float(q3 - q1)


def aggregate_stats(reports: list[MetricsReport]) -> dict:
    """Per-metric IQM/IQR over successful runs; failure rate over all runs."""
    if not reports:
        raise ValueError("need at least one report")
    ok = [r for r in reports if not r.routing_failed]
    out: dict = {
        "runs": len(reports),
        "successful_runs": len(ok),
        "failure_rate_pct": 100.0 * (len(reports) - len(ok)) / len(reports),
        "metrics": {},
    }
    fields = ("dead_space_pct", "hpwl_um", "wirelength_um", "vias",
              "routing_iterations")
    for name in fields:
        vals = [float(getattr(r, name)) for r in ok]
        if vals:
            out["metrics"][name] = {"iqm": iqm(vals), "iqr": iqr(vals)}
        else:
            out["metrics"][name] = {"iqm": None, "iqr": None}
    return out
