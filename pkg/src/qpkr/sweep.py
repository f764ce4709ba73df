"""Sweep orchestration: run (K, hbar, epsilon) campaigns and build reports.

A sweep cell is one (K, hbar_eff, epsilon) triple run with its full
ensemble.  Every cell gets a seed derived from the sweep master seed and
the cell index, so a killed sweep resumes deterministically and re-runs
produce byte-identical CSVs.  The manifest (manifest.json in the output
directory) is rewritten after every finished cell.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .analysis import ALPHA, ScalingPoint, scaling_fit
from .core import (EnsembleSpec, ParameterError, SimParams, derive_seed,
                   validate, with_overrides)
from .quantum import run_ensemble
from .storage import (_fmt, read_distribution_csv, read_series_csv,
                      write_distribution_csv, write_series_csv,
                      write_sidecar_json)

MANIFEST_NAME = "manifest.json"


@dataclasses.dataclass(frozen=True)
class SweepSpec:
    """A sweep campaign: axes of K, hbar and epsilon over a base run."""

    base: SimParams
    ensemble: EnsembleSpec
    record_times: tuple[int, ...]
    out_dir: str
    epsilon_values: tuple[float, ...] = ()
    K_values: tuple[float, ...] = ()
    hbar_values: tuple[float, ...] = ()

    def cells(self):
        """All (K, hbar, epsilon) combinations, in fixed order."""
        ks = self.K_values or (self.base.K,)
        hbars = self.hbar_values or (self.base.hbar_eff,)
        epss = self.epsilon_values or (self.base.epsilon,)
        return list(itertools.product(ks, hbars, epss))


def _cell_id(index, K, hbar, eps):
    return f"cell{index:03d}_K{K:g}_hb{hbar:g}_eps{eps:g}"


def _cell_params(spec: SweepSpec, K, hbar, eps) -> SimParams:
    return with_overrides(spec.base, K=K, hbar_eff=hbar, epsilon=eps)


def _run_cell(args):
    spec, index, K, hbar, eps = args
    cell_id = _cell_id(index, K, hbar, eps)
    cell_dir = Path(spec.out_dir) / cell_id
    cell_dir.mkdir(parents=True, exist_ok=True)
    params = _cell_params(spec, K, hbar, eps)
    seed = derive_seed(spec.ensemble.master_seed, index)
    ens = dataclasses.replace(spec.ensemble, master_seed=seed)
    t0 = time.perf_counter()
    dists, series = run_ensemble(params, ens, spec.record_times)
    wall = time.perf_counter() - t0
    artifacts = {"series": f"{cell_id}/series.csv",
                 "sidecar": f"{cell_id}/run.json",
                 "distributions": {}}
    write_series_csv(cell_dir / "series.csv", series)
    for dist in dists:
        name = f"dist_t{dist.time}.csv"
        write_distribution_csv(cell_dir / name, dist)
        artifacts["distributions"][str(dist.time)] = f"{cell_id}/{name}"
    write_sidecar_json(cell_dir / "run.json", params, ens, wall)
    return cell_id, seed, artifacts


def _load_manifest(out_dir):
    path = Path(out_dir) / MANIFEST_NAME
    if path.exists():
        return json.loads(path.read_text())
    return None


def _write_manifest(out_dir, manifest):
    path = Path(out_dir) / MANIFEST_NAME
    path.write_text(json.dumps(manifest, indent=2) + "\n")


def _cell_done(out_dir, entry):
    """A completed manifest entry whose artifact files all exist."""
    if entry.get("status") != "completed":
        return False
    arts = entry.get("artifacts", {})
    paths = [arts.get("series"), arts.get("sidecar")]
    paths += list(arts.get("distributions", {}).values())
    return all(p and (Path(out_dir) / p).exists() for p in paths)


def run_sweep(spec: SweepSpec, workers=1) -> dict:
    """Execute all cells and return the summary manifest.

    Every (K, hbar, epsilon) combination is validated before any run
    starts.  Completed cells found in an existing manifest are skipped;
    per-cell failures are recorded without aborting the other cells.
    """
    cells = spec.cells()
    for K, hbar, eps in cells:
        validate(_cell_params(spec, K, hbar, eps))

    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    previous = _load_manifest(out_dir)
    prev_by_id = {}
    if previous:
        prev_by_id = {c["id"]: c for c in previous.get("cells", [])}

    manifest = {
        "base": dataclasses.asdict(spec.base),
        "ensemble": dataclasses.asdict(spec.ensemble),
        "record_times": list(spec.record_times),
        "cells": [],
    }
    todo = []
    for index, (K, hbar, eps) in enumerate(cells):
        cell_id = _cell_id(index, K, hbar, eps)
        entry = {"id": cell_id, "K": K, "hbar_eff": hbar, "epsilon": eps,
                 "seed": derive_seed(spec.ensemble.master_seed, index),
                 "status": "pending", "error": None, "artifacts": {}}
        old = prev_by_id.get(cell_id)
        if old and old.get("seed") == entry["seed"] and _cell_done(out_dir, old):
            entry = old
        else:
            todo.append((index, (spec, index, K, hbar, eps)))
        manifest["cells"].append(entry)
    _write_manifest(out_dir, manifest)

    def finish(index, result, error):
        entry = manifest["cells"][index]
        if error is None:
            cell_id, seed, artifacts = result
            entry.update(status="completed", artifacts=artifacts, error=None)
        else:
            entry.update(status="failed", error=error)
        _write_manifest(out_dir, manifest)

    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_run_cell, args): index
                       for index, args in todo}
            for future in futures:
                index = futures[future]
                try:
                    finish(index, future.result(), None)
                except Exception as exc:
                    finish(index, None, f"{type(exc).__name__}: {exc}")
    else:
        for index, args in todo:
            try:
                finish(index, _run_cell(args), None)
            except Exception as exc:
                traceback.print_exc()
                finish(index, None, f"{type(exc).__name__}: {exc}")
    return manifest


# ---------------------------------------------------------------------------
# reporting


def _final_energy(out_dir, entry):
    """E_kin at the last recorded kick of a completed cell."""
    series = read_series_csv(Path(out_dir) / entry["artifacts"]["series"])
    return int(series.times[-1]), 0.5 * float(series.p2_mean[-1])


def scaling_points(manifest, out_dir):
    """Scaling points E_kin(eps)/E_kin(0) per (K, hbar) group."""
    groups = {}
    for entry in manifest["cells"]:
        if not _cell_done(out_dir, entry):
            continue
        groups.setdefault((entry["K"], entry["hbar_eff"]), []).append(entry)
    points = []
    for (K, hbar), entries in sorted(groups.items()):
        ref = [e for e in entries if e["epsilon"] == 0.0]
        if not ref:
            continue
        t_ref, e_ref = _final_energy(out_dir, ref[0])
        for entry in sorted(entries, key=lambda e: e["epsilon"]):
            t, e_kin = _final_energy(out_dir, entry)
            eps = entry["epsilon"]
            points.append(ScalingPoint(x=eps * K ** 2 / hbar ** 2,
                                       y=e_kin / e_ref, K=K, hbar_eff=hbar,
                                       epsilon=eps, time=t))
    return points


def report(out_dir, make_figures=True) -> Path:
    """Build plot-ready CSV tables and figures from a sweep manifest.

    Emits a final-time distribution table (figure 1), an
    (epsilon, E_kin) table per (K, hbar) pair (figure 2) and the
    scaling table with the exp(2 alpha x) prediction column (figure 3).  Missing
    artifacts are listed, not fatal.  The report is deterministic given
    the same manifest.
    """
    out_dir = Path(out_dir)
    manifest = _load_manifest(out_dir)
    if manifest is None:
        raise ParameterError(f"no {MANIFEST_NAME} in {out_dir}")
    report_dir = out_dir / "report"
    report_dir.mkdir(exist_ok=True)

    done = [e for e in manifest["cells"] if _cell_done(out_dir, e)]
    missing = [e["id"] for e in manifest["cells"] if not _cell_done(out_dir, e)]

    # figure 1: final-time distributions, long format
    dist_lines = ["cell,K,hbar,epsilon,t,m,prob"]
    final_dists = {}
    for entry in done:
        dists = entry["artifacts"].get("distributions", {})
        if not dists:
            continue
        t_last = max(dists, key=int)
        dist = read_distribution_csv(out_dir / dists[t_last], time=int(t_last))
        final_dists[entry["id"]] = (entry, dist)
        for m, p in zip(dist.sites, dist.probs):
            dist_lines.append(
                f"{entry['id']},{_fmt(entry['K'])},{_fmt(entry['hbar_eff'])},"
                f"{_fmt(entry['epsilon'])},{t_last},{m},{_fmt(p)}")
    (report_dir / "fig1_distributions.csv").write_text(
        "\n".join(dist_lines) + "\n")

    # figure 2: E_kin(t_final) vs epsilon per (K, hbar) pair
    energy_lines = ["K,hbar,epsilon,t,e_kin"]
    energies = []
    for entry in sorted(done, key=lambda e: (e["K"], e["hbar_eff"], e["epsilon"])):
        t, e_kin = _final_energy(out_dir, entry)
        energies.append((entry["K"], entry["hbar_eff"], entry["epsilon"], t, e_kin))
        energy_lines.append(
            f"{_fmt(entry['K'])},{_fmt(entry['hbar_eff'])},"
            f"{_fmt(entry['epsilon'])},{t},{_fmt(e_kin)}")
    (report_dir / "fig2_energy.csv").write_text("\n".join(energy_lines) + "\n")

    # figure 3: scaling points with the prediction column
    points = scaling_points(manifest, out_dir)
    scaling_lines = ["x,y,K,hbar,epsilon,t,prediction"]
    for p in points:
        scaling_lines.append(
            f"{_fmt(p.x)},{_fmt(p.y)},{_fmt(p.K)},{_fmt(p.hbar_eff)},"
            f"{_fmt(p.epsilon)},{p.time},{_fmt(np.exp(2.0 * ALPHA * p.x))}")
    (report_dir / "fig3_scaling.csv").write_text("\n".join(scaling_lines) + "\n")

    summary = [
        f"cells completed: {len(done)} / {len(manifest['cells'])}",
    ]
    if missing:
        summary.append("missing or failed cells: " + ", ".join(missing))
    if len(points) >= 5 and any(p.x == 0 for p in points):
        try:
            fit = scaling_fit(points)
            summary.append(
                f"scaling slope: {fit.slope:.4f} +- {fit.stderr:.4f} "
                f"(prediction 2*alpha = {2 * ALPHA:.4f}, {fit.n_points} points)")
        except Exception as exc:
            summary.append(f"scaling fit not available: {exc}")
    (report_dir / "report.txt").write_text("\n".join(summary) + "\n")

    if make_figures:
        from . import plots
        if final_dists:
            plots.plot_distributions(
                [(e, d) for e, d in final_dists.values()],
                report_dir / "fig1_distributions.png")
        if energies:
            plots.plot_energy_vs_epsilon(
                energies, report_dir / "fig2_energy.png")
        if points:
            plots.plot_scaling(points, report_dir / "fig3_scaling.png")
    return report_dir
