"""End-to-end acceptance suite.

Each test covers one numbered criterion and prints a single PASS/FAIL
line (visible with pytest -s, or in the captured output on failure).
Criteria 8 and 12 share one sweep campaign; criterion 12 re-runs it
with the same seeds into a second directory and compares bytes.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats

from qpkr import (ALPHA, EnsembleSpec, SimParams, anisotropy_report,
                  estimate_diffusion, evolve, fit_exponential, hopping_table,
                  initial_state, kick, onsite_field, profile_r_squared,
                  quasilinear_d11, quasilinear_d22, run_ensemble, simulate,
                  verify_mapping)
from qpkr.sweep import SweepSpec, run_sweep, scaling_points
from qpkr.analysis import scaling_fit

K_REF = 5.34
HBAR_REF = 2.89


def _verdict(number, label, ok, detail=""):
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'} - {label}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def _ln_slope(x, y):
    """Slope and R^2 of the least-squares line through ln y vs x."""
    coef = np.polyfit(x, np.log(y), 1)
    resid = np.log(y) - np.polyval(coef, x)
    ss_tot = np.sum((np.log(y) - np.mean(np.log(y))) ** 2)
    return coef[0], 1.0 - np.sum(resid ** 2) / ss_tot


def test_criterion_01_unitarity_and_speed():
    params = SimParams(K=K_REF, hbar_eff=HBAR_REF, epsilon=0.36,
                       n_kicks=1000, grid_n=4096)
    t0 = time.perf_counter()
    dists, _ = evolve(params, beta=0.3, phi2=1.0, record_times=[1000])
    wall = time.perf_counter() - t0
    drift = abs(dists[0].probs.sum() - 1.0)
    ok = drift < 1e-10 and wall < 2.0
    _verdict(1, "unitary evolution, 1000 kicks on 4096 sites", ok,
             f"norm drift {drift:.2e}, {wall:.2f} s")


def test_criterion_02_single_kick_energy():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(10):
        k1 = rng.uniform(0.5, 6.0)
        hbar = rng.uniform(1.0, 4.0)
        beta = rng.random()
        state = kick(initial_state(256, beta=beta), k1, hbar)
        gain = np.sum(state.probs() * (state.sites + beta) ** 2) - beta ** 2
        worst = max(worst, abs(gain - (k1 / hbar) ** 2 / 2.0))
    ok = worst < 1e-8
    _verdict(2, "one-kick energy gain (K1/hbar)^2/2 for 10 random draws",
             ok, f"worst deviation {worst:.2e}")


def test_criterion_03_1d_localization():
    params = SimParams(K=K_REF, hbar_eff=HBAR_REF, epsilon=0.0,
                       n_kicks=1000, grid_n=512)
    ens = EnsembleSpec(n_realizations=100, master_seed=42)
    dists, series = run_ensemble(params, ens, [1000])
    ratio = series.p2_mean[1000] / series.p2_mean[300]
    r2_exp, r2_gauss = profile_r_squared(dists[0])
    ok = ratio < 1.5 and r2_exp > r2_gauss
    _verdict(3, "energy freezes and the frozen profile is exponential", ok,
             f"p2(1000)/p2(300) = {ratio:.3f}, "
             f"R2 exp {r2_exp:.3f} vs gauss {r2_gauss:.3f}")


def test_criterion_04_classical_diffusion_tensor():
    K, eps = 10.0, 0.5
    moments = simulate(K=K, epsilon=eps, n_traj=100_000, n_steps=200, seed=3)
    tensor = estimate_diffusion(moments, t_min=10)
    r11 = tensor.d11 / quasilinear_d11(K, eps)
    r22 = tensor.d22 / quasilinear_d22(K, eps)
    ok11 = abs(r11 - 1.0) < 0.3
    ok22 = abs(r22 - 1.0) < 0.3
    ok12 = abs(tensor.d12) < 3.0 * tensor.d12_err
    _verdict(4, "diffusion tensor near quasilinear at K=10, eps=0.5",
             ok11 and ok22 and ok12,
             f"d11/ql = {r11:.3f}, d22/ql = {r22:.3f}, "
             f"|d12|/err = {abs(tensor.d12) / tensor.d12_err:.2f}; "
             f"oscillatory correlation corrections push d22 outside the "
             f"30% band at this K")


@pytest.mark.parametrize("K", [9.0, 7.0])
def test_criterion_05_quantum_classical_match(K):
    eps = 0.4
    params = SimParams(K=K, hbar_eff=HBAR_REF, epsilon=eps,
                       n_kicks=6, grid_n=256)
    ens = EnsembleSpec(n_realizations=200, master_seed=5)
    _, series = run_ensemble(params, ens, [])
    e_kin = 0.5 * HBAR_REF ** 2 * series.p2_mean
    window = slice(2, 7)
    slope = np.polyfit(series.times[window], e_kin[window], 1)[0]
    moments = simulate(K=K, epsilon=eps, n_traj=100_000, n_steps=200, seed=9)
    d11 = estimate_diffusion(moments, t_min=10).d11
    ratio = slope / d11
    ok = abs(ratio - 1.0) < 0.3
    _verdict(5, f"quantum short-time energy slope matches d11 at K={K:g}",
             ok, f"slope/d11 = {ratio:.3f}")


def test_criterion_06_ploc_increases_with_epsilon():
    eps_values = (0.0, 0.12, 0.24, 0.36, 0.48, 0.6)
    p_locs = []
    for eps in eps_values:
        params = SimParams(K=K_REF, hbar_eff=HBAR_REF, epsilon=eps,
                           n_kicks=1000, grid_n=1024)
        ens = EnsembleSpec(n_realizations=100, master_seed=42)
        dists, _ = run_ensemble(params, ens, [1000])
        p_locs.append(fit_exponential(dists[0]).p_loc)
    ok = all(b > a for a, b in zip(p_locs, p_locs[1:]))
    _verdict(6, "fitted localization length strictly increases with eps",
             ok, "p_loc = " + ", ".join(f"{p:.2f}" for p in p_locs))


def test_criterion_07_energy_slope_orders_with_K_and_hbar():
    pairs = [(5.34, 2.89), (4.33, 2.89), (5.34, 3.46), (7.26, 3.46)]
    eps_values = np.round(0.06 * np.arange(11), 2)
    slopes = {}
    r2s = {}
    for K, hbar in pairs:
        energies = []
        for eps in eps_values:
            params = SimParams(K=K, hbar_eff=hbar, epsilon=float(eps),
                               n_kicks=1000, grid_n=1024)
            ens = EnsembleSpec(n_realizations=100, master_seed=42)
            _, series = run_ensemble(params, ens, [])
            energies.append(0.5 * series.p2_mean[-1])
        slopes[(K, hbar)], r2s[(K, hbar)] = _ln_slope(eps_values, energies)
    ok_linear = all(r2 > 0.9 for r2 in r2s.values())
    ok_k_low = slopes[(4.33, 2.89)] < slopes[(5.34, 2.89)]
    ok_hbar = slopes[(5.34, 3.46)] < slopes[(5.34, 2.89)]
    ok_k_high = slopes[(5.34, 3.46)] < slopes[(7.26, 3.46)]
    ok = ok_linear and ok_k_low and ok_hbar and ok_k_high
    detail = ", ".join(f"({K:g},{h:g}): {slopes[(K, h)]:.2f} "
                       f"R2={r2s[(K, h)]:.3f}" for K, h in pairs)
    _verdict(7, "ln E_kin slope vs eps increases with K, decreases "
                "with hbar, linear", ok, detail)


EPS_SWEEP = (0.0, 0.15, 0.3, 0.45, 0.6, 0.75, 0.9)


def _scaling_sweep_spec(out_dir):
    base = SimParams(K=K_REF, hbar_eff=HBAR_REF, n_kicks=1000, grid_n=2048)
    ens = EnsembleSpec(n_realizations=100, master_seed=42)
    return SweepSpec(base=base, ensemble=ens, record_times=(1000,),
                     out_dir=str(out_dir), epsilon_values=EPS_SWEEP)


@pytest.fixture(scope="module")
def scaling_sweep(tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("scaling_sweep")
    manifest = run_sweep(_scaling_sweep_spec(out_dir))
    return out_dir, manifest


def test_criterion_08_scaling_law(scaling_sweep):
    out_dir, manifest = scaling_sweep
    points = scaling_points(manifest, out_dir)
    in_range = [p for p in points if p.x <= 4.0]
    fit = scaling_fit(points, x_max=4.0)
    span = max(p.y for p in points) / min(p.y for p in points)
    ok_slope = abs(fit.slope - 2.0 * ALPHA) < 0.4 * 2.0 * ALPHA
    ok = len(in_range) >= 6 and ok_slope and span >= 10.0
    _verdict(8, "exponential scaling of the energy ratio in x = eps K^2/hbar^2",
             ok, f"slope {fit.slope:.3f} vs 2*alpha = {2 * ALPHA:.3f}, "
                 f"span {span:.1f}, {len(in_range)} points")


def test_criterion_09_lattice_mapping_residuals():
    report = verify_mapping(K=2.0, hbar_eff=HBAR_REF, epsilon=0.2,
                            lattice_n=32, R=8, n_sample=64)
    frac = float(np.mean(report.residuals <= 1e-6))
    ok = frac >= 0.9
    _verdict(9, "lattice equation residual <= 1e-6 on >= 90% of eigenstates",
             ok, f"{100 * frac:.1f}% pass, max {report.max_residual:.2e}")


def test_criterion_10_onsite_pseudo_randomness():
    field = onsite_field((0, 256), (0, 256), E=0.0, hbar_eff=HBAR_REF)
    values = field.values.ravel()
    ks = stats.kstest(values, stats.cauchy.cdf).statistic
    v = field.values
    corr1 = np.corrcoef(v[:-1, :].ravel(), v[1:, :].ravel())[0, 1]
    corr2 = np.corrcoef(v[:, :-1].ravel(), v[:, 1:].ravel())[0, 1]
    ok = ks < 0.02 and abs(corr1) < 0.05 and abs(corr2) < 0.05
    _verdict(10, "on-site energies Cauchy-distributed and uncorrelated", ok,
             f"KS {ks:.4f}, neighbor corr {corr1:+.4f} / {corr2:+.4f}")


def test_criterion_11_hopping_anisotropy():
    plain = hopping_table(3.0, HBAR_REF, 0.0, R=6)
    c = plain.coefficients.copy()
    c[:, plain.R] = 0.0
    off_axis = float(np.abs(c).max())
    ratios = [anisotropy_report(hopping_table(3.0, HBAR_REF, eps, R=6)) / eps
              for eps in (0.05, 0.1, 0.2)]
    ok_zero = off_axis < 1e-12
    ok_linear = max(ratios) / min(ratios) - 1.0 < 0.1
    _verdict(11, "no transverse hopping at eps=0; anisotropy linear in eps",
             ok_zero and ok_linear,
             f"off-axis max {off_axis:.1e}, ratio/eps spread "
             f"{max(ratios) / min(ratios) - 1.0:.3f}")


def test_criterion_12_byte_identical_rerun(scaling_sweep, tmp_path_factory):
    out_dir, _ = scaling_sweep
    second = tmp_path_factory.mktemp("scaling_sweep_rerun")
    run_sweep(_scaling_sweep_spec(second))
    names = sorted(p.relative_to(out_dir).as_posix()
                   for p in out_dir.rglob("*.csv"))
    names_b = sorted(p.relative_to(second).as_posix()
                     for p in second.rglob("*.csv"))
    same_names = names == names_b and len(names) > 0
    same_bytes = same_names and all(
        (out_dir / n).read_bytes() == (second / n).read_bytes()
        for n in names)
    _verdict(12, "re-running the sweep reproduces byte-identical CSVs",
             same_bytes, f"{len(names)} files compared")
