"""Classical map of the quasiperiodic kicked rotor and diffusion estimates.

One period updates momenta first, then angles using the updated p1:

    p1 <- p1 + K sin(x1) (1 + eps cos(x2))
    p2 <- p2 + K eps cos(x1) sin(x2)
    x1 <- x1 + p1        (new p1)
    x2 <- x2 + omega2

Angles are reduced mod 2pi after each step.  Diffusion constants follow
the kinetic-energy convention E_kin = D t, i.e. D_ij is half the growth
rate of <p_i p_j>, so that the quasilinear values are
D11 = K^2/4 (1 + eps^2/2) and D22 = K^2 eps^2 / 8.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_OMEGA2, ParameterError, derive_seed

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ClassicalState:
    x1: float
    x2: float
    p1: float
    p2: float


def step(state: ClassicalState, K, epsilon, omega2=DEFAULT_OMEGA2) -> ClassicalState:
    """One period of the classical map."""
    p1 = state.p1 + K * np.sin(state.x1) * (1.0 + epsilon * np.cos(state.x2))
    p2 = state.p2 + K * epsilon * np.cos(state.x1) * np.sin(state.x2)
    x1 = (state.x1 + p1) % TWO_PI
    x2 = (state.x2 + omega2) % TWO_PI
    return ClassicalState(x1=x1, x2=x2, p1=p1, p2=p2)


def inverse_step(state: ClassicalState, K, epsilon,
                 omega2=DEFAULT_OMEGA2) -> ClassicalState:
    """Exact inverse of step (angles compared mod 2pi)."""
    x2 = (state.x2 - omega2) % TWO_PI
    x1 = (state.x1 - state.p1) % TWO_PI
    p1 = state.p1 - K * np.sin(x1) * (1.0 + epsilon * np.cos(x2))
    p2 = state.p2 - K * epsilon * np.cos(x1) * np.sin(x2)
    return ClassicalState(x1=x1, x2=x2, p1=p1, p2=p2)


@dataclass(frozen=True)
class Moments:
    """Second moments of the trajectory ensemble per kick.

    When n_batches > 1 the per-batch moments (shape (B, n_steps+1)) are
    kept so that estimate_diffusion can form honest standard errors;
    the moment series of one ensemble is strongly autocorrelated in t,
    which makes plain regression errors far too small.
    """

    times: np.ndarray
    p1sq: np.ndarray
    p2sq: np.ndarray
    p1p2: np.ndarray
    batches: dict | None = None


@dataclass(frozen=True)
class DiffusionTensor:
    """Diffusion constants (scaled momentum^2 per kick, E = D t convention)."""

    d11: float
    d22: float
    d12: float
    d11_err: float
    d22_err: float
    d12_err: float
    t_min: int
    t_max: int


def simulate(K, epsilon, n_traj, n_steps, seed=0,
             omega2=DEFAULT_OMEGA2, n_batches=10) -> Moments:
    """Monte Carlo second moments of the classical map.

    Initial ensemble: p1 = p2 = 0, angles independent uniform in [0, 2pi);
    deterministic under a fixed seed.  Trajectories are split into
    n_batches independent batches for error estimation.
    """
    rng = np.random.default_rng(derive_seed(seed, 0))
    x1 = rng.uniform(0.0, TWO_PI, n_traj)
    x2 = rng.uniform(0.0, TWO_PI, n_traj)
    p1 = np.zeros(n_traj)
    p2 = np.zeros(n_traj)

    n_batches = min(n_batches, n_traj)
    bounds = np.linspace(0, n_traj, n_batches + 1).astype(int)
    shape = (n_batches, n_steps + 1)
    batches = {"p1sq": np.zeros(shape), "p2sq": np.zeros(shape),
               "p1p2": np.zeros(shape)}

    def record(t):
        for name, prod in (("p1sq", p1 * p1), ("p2sq", p2 * p2),
                           ("p1p2", p1 * p2)):
            for b in range(n_batches):
                batches[name][b, t] = prod[bounds[b]:bounds[b + 1]].mean()

    for t in range(1, n_steps + 1):
        p1 += K * np.sin(x1) * (1.0 + epsilon * np.cos(x2))
        p2 += K * epsilon * np.cos(x1) * np.sin(x2)
        x1 = (x1 + p1) % TWO_PI
        x2 = (x2 + omega2) % TWO_PI
        record(t)

    weights = np.diff(bounds) / n_traj
    full = {name: weights @ arr for name, arr in batches.items()}
    return Moments(times=np.arange(n_steps + 1), p1sq=full["p1sq"],
                   p2sq=full["p2sq"], p1p2=full["p1p2"],
                   batches=batches if n_batches > 1 else None)


def _slope(t, y):
    """Least-squares slope of y vs t with its standard error."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    a = np.vstack([t, np.ones_like(t)]).T
    coef, res, _, _ = np.linalg.lstsq(a, y, rcond=None)
    dof = t.size - 2
    if dof > 0 and res.size:
        sigma2 = res[0] / dof
    else:
        fit = a @ coef
        sigma2 = np.sum((y - fit) ** 2) / max(dof, 1)
    tt = np.sum((t - t.mean()) ** 2)
    return coef[0], np.sqrt(sigma2 / tt)


def estimate_diffusion(moments: Moments, t_min=10, t_max=None) -> DiffusionTensor:
    """Fit the diffusion tensor from second moments over [t_min, t_max].

    The first few kicks are excluded because kick-to-kick correlations
    decay over a few kicks.  Each D_ij is half the fitted slope of
    <p_i p_j> vs t (kinetic-energy convention).
    """
    if t_max is None:
        t_max = int(moments.times[-1])
    sel = (moments.times >= t_min) & (moments.times <= t_max)
    if sel.sum() < 5:
        raise ParameterError("diffusion fit window shorter than 5 points")
    t = moments.times[sel]

    def fit(name):
        slope, err = _slope(t, getattr(moments, name)[sel])
        if moments.batches is not None:
            # spread of per-batch slopes: honest error in the presence of
            # the strong t-autocorrelation of a single ensemble's moments
            slopes = [_slope(t, series[sel])[0]
                      for series in moments.batches[name]]
            err = np.std(slopes, ddof=1) / np.sqrt(len(slopes))
        return 0.5 * slope, 0.5 * err

    d11, e11 = fit("p1sq")
    d22, e22 = fit("p2sq")
    d12, e12 = fit("p1p2")
    return DiffusionTensor(d11=d11, d22=d22, d12=d12,
                           d11_err=e11, d22_err=e22, d12_err=e12,
                           t_min=int(t_min), t_max=int(t_max))


def quasilinear_d11(K, epsilon):
    """Large-K estimate K^2/4 (1 + eps^2/2)."""
    return K ** 2 / 4.0 * (1.0 + epsilon ** 2 / 2.0)


def quasilinear_d22(K, epsilon):
    """Large-K estimate K^2 eps^2 / 8."""
    return K ** 2 * epsilon ** 2 / 8.0
