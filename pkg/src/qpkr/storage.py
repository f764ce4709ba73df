"""CSV / JSON persistence with byte-stable float formatting.

All floats are written with repr-faithful %.17g formatting so that
re-running a seeded computation reproduces byte-identical files.
"""

from __future__ import annotations

import dataclasses
import json
import time
from pathlib import Path

import numpy as np

from . import __version__
from .classical import DiffusionTensor, Moments
from .core import EnsembleSpec, MomentumDistribution, ObservableSeries, SimParams


def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_distribution_csv(path, dist: MomentumDistribution) -> None:
    lines = ["m,p_over_2hbarkL,prob"]
    for m, p in zip(dist.sites, dist.probs):
        lines.append(f"{m},{_fmt(m + dist.beta)},{_fmt(p)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_distribution_csv(path, time=0) -> MomentumDistribution:
    rows = Path(path).read_text().strip().splitlines()[1:]
    m = np.array([int(r.split(",")[0]) for r in rows])
    p_over = np.array([float(r.split(",")[1]) for r in rows])
    probs = np.array([float(r.split(",")[2]) for r in rows])
    beta = float(p_over[0] - m[0])
    return MomentumDistribution(probs=probs, time=time, beta=beta)


def write_series_csv(path, series: ObservableSeries) -> None:
    lines = ["t,p2_mean,pi0,edge_mass"]
    for t, p2, pi0, em in zip(series.times, series.p2_mean,
                              series.pi0, series.edge_mass):
        lines.append(f"{int(t)},{_fmt(p2)},{_fmt(pi0)},{_fmt(em)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_series_csv(path) -> ObservableSeries:
    rows = Path(path).read_text().strip().splitlines()[1:]
    cols = np.array([[float(v) for v in r.split(",")] for r in rows])
    return ObservableSeries(times=cols[:, 0].astype(int), p2_mean=cols[:, 1],
                            pi0=cols[:, 2], edge_mass=cols[:, 3])


def write_sidecar_json(path, params: SimParams, spec: EnsembleSpec | None,
                       wall_time_s: float, extra: dict | None = None) -> None:
    """Record the full run provenance next to the data files."""
    doc = {
        "params": dataclasses.asdict(params),
        "ensemble": dataclasses.asdict(spec) if spec is not None else None,
        "code_version": __version__,
        "wall_time_s": wall_time_s,
        "written_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def write_moments_csv(path, moments: Moments) -> None:
    lines = ["t,p1sq,p2sq,p1p2"]
    for t, a, b, c in zip(moments.times, moments.p1sq,
                          moments.p2sq, moments.p1p2):
        lines.append(f"{int(t)},{_fmt(a)},{_fmt(b)},{_fmt(c)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_tensor_json(path, tensor: DiffusionTensor) -> None:
    Path(path).write_text(json.dumps(dataclasses.asdict(tensor), indent=2) + "\n")


def write_json(path, obj) -> None:
    def default(o):
        if dataclasses.is_dataclass(o):
            return dataclasses.asdict(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.integer, np.floating)):
            return o.item()
        raise TypeError(f"not JSON serializable: {type(o)}")
    Path(path).write_text(json.dumps(obj, indent=2, default=default) + "\n")


def write_scaling_csv(path, points) -> None:
    """Plot-ready scaling points: x, y, K, hbar, epsilon, t."""
    lines = ["x,y,K,hbar,epsilon,t"]
    for p in points:
        lines.append(f"{_fmt(p.x)},{_fmt(p.y)},{_fmt(p.K)},"
                     f"{_fmt(p.hbar_eff)},{_fmt(p.epsilon)},{int(p.time)}")
    Path(path).write_text("\n".join(lines) + "\n")
