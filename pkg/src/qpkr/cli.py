"""Command-line front end.

Verbs: validate, run, sweep, report, verify-mapping, classical.
Parameters are read from a flat JSON configuration file (keys named as
the SimParams / EnsembleSpec fields) and can be overridden by flags.
The QPKR_WORKERS environment variable overrides the worker count.
Exit code is 0 on success; errors are written as JSON on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .anderson import verify_mapping
from .classical import estimate_diffusion, simulate
from .core import (DEFAULT_OMEGA2, EnsembleSpec, QpkrError, SimParams,
                   validate)
from .quantum import run_ensemble
from .storage import (write_distribution_csv, write_json, write_moments_csv,
                      write_series_csv, write_sidecar_json, write_tensor_json)
from .sweep import SweepSpec, report, run_sweep

PARAM_KEYS = ("K", "hbar_eff", "epsilon", "omega2", "phi2", "beta",
              "n_kicks", "grid_n")
ENSEMBLE_KEYS = ("n_realizations", "master_seed", "beta_sampling",
                 "phi2_sampling")


def _load_config(path):
    if path is None:
        return {}
    return json.loads(Path(path).read_text())


def _params_from(config, args) -> SimParams:
    kwargs = {k: config[k] for k in PARAM_KEYS if k in config}
    if getattr(args, "grid", None) is not None:
        kwargs["grid_n"] = args.grid
    if getattr(args, "kicks", None) is not None:
        kwargs["n_kicks"] = args.kicks
    if "K" not in kwargs or "hbar_eff" not in kwargs:
        raise QpkrError("config must define at least K and hbar_eff")
    return SimParams(**kwargs)


def _ensemble_from(config, args) -> EnsembleSpec:
    kwargs = {k: config[k] for k in ENSEMBLE_KEYS if k in config}
    if getattr(args, "seed", None) is not None:
        kwargs["master_seed"] = args.seed
    if getattr(args, "realizations", None) is not None:
        kwargs["n_realizations"] = args.realizations
    return EnsembleSpec(**kwargs)


def _workers(args):
    env = os.environ.get("QPKR_WORKERS")
    if env is not None:
        return int(env)
    return getattr(args, "workers", None) or 1


def _out_dir(config, args, default="qpkr_out"):
    out = getattr(args, "out", None) or config.get("out_dir") or default
    Path(out).mkdir(parents=True, exist_ok=True)
    return Path(out)


def cmd_validate(args):
    config = _load_config(args.config)
    checked = validate(_params_from(config, args))
    doc = {"params": dataclasses.asdict(checked.params),
           "warnings": list(checked.warnings)}
    print(json.dumps(doc, indent=2))
    return 0


def cmd_run(args):
    config = _load_config(args.config)
    params = _params_from(config, args)
    ens = _ensemble_from(config, args)
    record_times = config.get("record_times") or [params.n_kicks]
    out = _out_dir(config, args)
    t0 = time.perf_counter()
    dists, series = run_ensemble(params, ens, record_times)
    wall = time.perf_counter() - t0
    write_series_csv(out / "series.csv", series)
    for dist in dists:
        write_distribution_csv(out / f"dist_t{dist.time}.csv", dist)
    write_sidecar_json(out / "run.json", params, ens, wall)
    print(f"wrote {len(dists)} distribution(s) and series.csv to {out}")
    return 0


def cmd_sweep(args):
    config = _load_config(args.config)
    params = _params_from(config, args)
    ens = _ensemble_from(config, args)
    out = _out_dir(config, args)
    spec = SweepSpec(
        base=params,
        ensemble=ens,
        record_times=tuple(config.get("record_times") or [params.n_kicks]),
        out_dir=str(out),
        epsilon_values=tuple(config.get("epsilon_values", ())),
        K_values=tuple(config.get("K_values", ())),
        hbar_values=tuple(config.get("hbar_values", ())),
    )
    manifest = run_sweep(spec, workers=_workers(args))
    n_done = sum(1 for c in manifest["cells"] if c["status"] == "completed")
    n_failed = sum(1 for c in manifest["cells"] if c["status"] == "failed")
    print(f"sweep finished: {n_done} completed, {n_failed} failed "
          f"(manifest in {out})")
    return 1 if n_failed else 0


def cmd_report(args):
    config = _load_config(args.config)
    out = _out_dir(config, args)
    report_dir = report(out)
    print((report_dir / "report.txt").read_text().strip())
    print(f"report written to {report_dir}")
    return 0


def cmd_verify_mapping(args):
    config = _load_config(args.config)
    rep = verify_mapping(
        K=config.get("K", args.K), hbar_eff=config.get("hbar_eff", args.hbar),
        epsilon=config.get("epsilon", args.epsilon),
        omega2=config.get("omega2", DEFAULT_OMEGA2),
        lattice_n=config.get("lattice_n", args.lattice),
        R=config.get("hopping_range", 8),
        n_sample=config.get("n_sample", 64))
    out = _out_dir(config, args)
    write_json(out / "mapping_report.json", rep)
    print(f"max residual {rep.max_residual:.3e}, "
          f"median {rep.median_residual:.3e} "
          f"({rep.residuals.size} eigenstates, lattice {rep.lattice_n})")
    return 0


def cmd_classical(args):
    config = _load_config(args.config)
    K = config.get("K", args.K)
    epsilon = config.get("epsilon", args.epsilon)
    if K is None:
        raise QpkrError("classical needs K (config or --K)")
    moments = simulate(K=K, epsilon=epsilon,
                       n_traj=config.get("n_traj", args.traj),
                       n_steps=config.get("n_steps", args.steps),
                       seed=config.get("master_seed", args.seed or 0),
                       omega2=config.get("omega2", DEFAULT_OMEGA2))
    tensor = estimate_diffusion(moments, t_min=config.get("t_min", 10))
    out = _out_dir(config, args)
    write_moments_csv(out / "moments.csv", moments)
    write_tensor_json(out / "diffusion.json", tensor)
    print(f"D11 = {tensor.d11:.4f} +- {tensor.d11_err:.4f}, "
          f"D22 = {tensor.d22:.4f} +- {tensor.d22_err:.4f}, "
          f"D12 = {tensor.d12:.4f} +- {tensor.d12_err:.4f}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qpkr",
        description="Quasiperiodic kicked rotor: 2D dynamical localization")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--config", help="flat JSON configuration file")
        if out:
            p.add_argument("--out", help="output directory")
        p.add_argument("--workers", type=int, help="worker process count")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--grid", type=int, help="momentum grid size override")
        p.add_argument("--kicks", type=int, help="kick count override")
        p.add_argument("--realizations", type=int,
                       help="ensemble size override")

    p = sub.add_parser("validate", help="validate a parameter set")
    common(p, out=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="run one ensemble cell")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a (K, hbar, epsilon) sweep")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="build report tables and figures")
    common(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("verify-mapping",
                       help="residual check of the Anderson-lattice mapping")
    common(p)
    p.add_argument("--K", type=float, default=2.0)
    p.add_argument("--hbar", type=float, default=2.89)
    p.add_argument("--epsilon", type=float, default=0.2)
    p.add_argument("--lattice", type=int, default=32)
    p.set_defaults(func=cmd_verify_mapping)

    p = sub.add_parser("classical",
                       help="classical map diffusion Monte Carlo")
    common(p)
    p.add_argument("--K", type=float)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--traj", type=int, default=100000)
    p.add_argument("--steps", type=int, default=200)
    p.set_defaults(func=cmd_classical)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
