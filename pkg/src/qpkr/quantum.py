"""Floquet evolution of the quasiperiodic kicked rotor.

One period is kick followed by free flight (this ordering is fixed):

* kick n multiplies the wavefunction, in position representation on the
  N-point uniform grid over [0, 2pi), by exp(-i A_n cos(x) / hbar) with
  A_n = K (1 + epsilon cos(omega2 n + phi2)),
* the free flight multiplies momentum amplitudes by
  exp(-i hbar (m + beta)^2 / 2).

Transforms use the numpy unnormalized forward / inverse FFT pair, with
the 1/N factor applied once per round trip (inside ifft), so the
evolution is exactly unitary up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (EnsembleSpec, MomentumDistribution, ObservableSeries,
                   ParameterError, QpkrError, SimParams, momentum_sites,
                   validate, with_overrides)

#: abort threshold on the probability in the outermost 10% of the grid
EDGE_MASS_LIMIT = 1e-6

#: largest grid used by the auto-doubling retry in run_ensemble
MAX_GRID = 65536


class GridOverflowError(QpkrError):
    """Localized state grew too close to the momentum grid boundary."""

    def __init__(self, grid_n, kick, realization=0, edge_mass=None):
        self.grid_n = grid_n
        self.kick = kick
        self.realization = realization
        self.edge_mass = edge_mass
        super().__init__(
            f"edge mass {edge_mass:.3e} > {EDGE_MASS_LIMIT:g} at kick {kick} "
            f"(realization {realization}, grid_n={grid_n})")


@dataclass(frozen=True)
class WaveState:
    """Complex amplitudes over momentum sites m = -N/2 .. N/2-1."""

    amps: np.ndarray
    beta: float = 0.0
    t: int = 0

    def __post_init__(self):
        object.__setattr__(self, "amps", np.asarray(self.amps, dtype=complex))

    @property
    def sites(self):
        return momentum_sites(self.amps.size)

    def norm(self):
        return float(np.sum(np.abs(self.amps) ** 2))

    def probs(self):
        return np.abs(self.amps) ** 2


def initial_state(grid_n: int, beta: float = 0.0) -> WaveState:
    """Momentum eigenstate m=0 at quasimomentum beta."""
    amps = np.zeros(grid_n, dtype=complex)
    amps[grid_n // 2] = 1.0
    return WaveState(amps=amps, beta=beta, t=0)


def kick(state: WaveState, kick_amplitude: float, hbar_eff: float) -> WaveState:
    """Apply one kick of the given amplitude (position-diagonal phase)."""
    if kick_amplitude == 0.0:
        return state
    n = state.amps.size
    x = 2.0 * np.pi * np.arange(n) / n
    psi = np.fft.ifft(np.fft.ifftshift(state.amps))
    psi *= np.exp(-1j * (kick_amplitude / hbar_eff) * np.cos(x))
    amps = np.fft.fftshift(np.fft.fft(psi))
    return WaveState(amps=amps, beta=state.beta, t=state.t)


def free_flight(state: WaveState, hbar_eff: float) -> WaveState:
    """Advance momentum phases by exp(-i hbar (m+beta)^2 / 2)."""
    m = state.sites
    amps = state.amps * np.exp(-0.5j * hbar_eff * (m + state.beta) ** 2)
    return WaveState(amps=amps, beta=state.beta, t=state.t)


def _edge_indices(n):
    """FFT-order indices of the outermost 10% of the grid (5% per side)."""
    n_edge = max(1, round(0.05 * n))
    m = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    return np.flatnonzero(np.abs(m) >= n // 2 - n_edge)


def _evolve_batch(params: SimParams, betas, phi2s, record_times):
    """Evolve a batch of realizations and average their observables.

    All realizations share (K, hbar, epsilon, omega2, n_kicks, grid_n)
    and differ only in (beta, phi2).  Returns ensemble-mean recorded
    distributions (natural site order) and the mean observable series.
    """
    record_times = sorted(int(t) for t in record_times)
    if record_times and (record_times[0] < 0 or record_times[-1] > params.n_kicks):
        raise ParameterError("record_times must lie in [0, n_kicks]")

    n = params.grid_n
    n_kicks = params.n_kicks
    hbar = params.hbar_eff
    betas = np.asarray(betas, dtype=float)
    phi2s = np.asarray(phi2s, dtype=float)
    n_real = betas.size

    m = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    x = 2.0 * np.pi * np.arange(n) / n
    cos_x = np.cos(x)
    m_beta_sq = (m[None, :] + betas[:, None]) ** 2
    free_phase = np.exp(-0.5j * hbar * m_beta_sq)
    edge_idx = _edge_indices(n)

    amps = np.zeros((n_real, n), dtype=complex)
    amps[:, 0] = 1.0

    p2 = np.empty(n_kicks + 1)
    pi0 = np.empty(n_kicks + 1)
    edge = np.empty(n_kicks + 1)
    recorded = {}
    want = set(record_times)

    def observe(t):
        probs = np.abs(amps) ** 2
        p2[t] = np.einsum("rn,rn->r", probs, m_beta_sq).mean()
        pi0[t] = probs[:, 0].mean()
        per_real_edge = probs[:, edge_idx].sum(axis=1)
        edge[t] = per_real_edge.mean()
        worst = int(np.argmax(per_real_edge))
        if per_real_edge[worst] > EDGE_MASS_LIMIT:
            raise GridOverflowError(n, t, realization=worst,
                                    edge_mass=float(per_real_edge[worst]))
        if t in want:
            mean_probs = np.fft.fftshift(probs.mean(axis=0))
            beta_out = betas[0] if n_real == 1 else 0.0
            recorded[t] = MomentumDistribution(
                probs=mean_probs, time=t, beta=float(beta_out))

    observe(0)
    for t in range(1, n_kicks + 1):
        amplitude = params.K * (1.0 + params.epsilon
                                * np.cos(params.omega2 * (t - 1) + phi2s))
        psi = np.fft.ifft(amps, axis=1)
        psi *= np.exp(-1j * np.outer(amplitude / hbar, cos_x))
        amps = np.fft.fft(psi, axis=1)
        amps *= free_phase
        observe(t)

    series = ObservableSeries(times=np.arange(n_kicks + 1),
                              p2_mean=p2, pi0=pi0, edge_mass=edge)
    dists = [recorded[t] for t in record_times]
    return dists, series


def evolve(params: SimParams, beta: float, phi2: float, record_times):
    """Evolve a single realization from the m=0 momentum eigenstate.

    Returns (distributions at record_times, per-kick ObservableSeries).
    Aborts with GridOverflowError when the edge mass exceeds the limit
    (the localization length is too close to the grid boundary).
    """
    validate(params)
    return _evolve_batch(params, [beta], [phi2], record_times)


def run_ensemble(params: SimParams, spec: EnsembleSpec, record_times,
                 auto_grid: bool = True):
    """Ensemble-averaged evolution over (beta, phi2) draws.

    Realization r draws (beta, phi2) from spec.draw(params, r); observables
    are arithmetic means taken in realization-index order, so results are
    bit-reproducible for a given master seed.  On grid overflow the run
    restarts with a doubled grid, up to grid_n = 65536 (the localization
    length grows exponentially with epsilon).
    """
    validate(params)
    draws = [spec.draw(params, r) for r in range(spec.n_realizations)]
    betas = [b for b, _ in draws]
    phi2s = [p for _, p in draws]
    n = params.grid_n
    while True:
        try:
            return _evolve_batch(with_overrides(params, grid_n=n),
                                 betas, phi2s, record_times)
        except GridOverflowError:
            if not auto_grid or n >= MAX_GRID:
                raise
            n *= 2
