"""Localization observables and the exponential scaling-law fit.

The self-consistent weak-localization prediction for the quasiperiodic
kicked rotor is

    p_loc = (K^2 / 4 hbar) * exp(alpha * eps * K^2 / hbar^2),
    alpha = pi / sqrt(32)  (eps -> 0 limit),

in scaled momentum units (divide by hbar for site units, 2*hbar*k_L).
The scaling test compares the slope of ln[E_kin(eps)/E_kin(0)] vs the
scaling parameter x = eps K^2 / hbar^2 with 2*alpha, since E_kin is
proportional to p_loc^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import MomentumDistribution, ParameterError, QpkrError

#: exponential rate of the localization length in the scaling parameter
ALPHA = math.pi / math.sqrt(32.0)

#: statistical resolution below which distribution tails are ignored
NOISE_FLOOR = 1e-8


class NotLocalizedError(QpkrError):
    """Exponential fit found a non-negative slope in the fit window."""


class InsufficientDataError(QpkrError):
    """Too few usable sites for a fit."""


@dataclass(frozen=True)
class LocalizationFit:
    """Fitted localization length of exp(-|p|/p_loc)/2p_loc (site units)."""

    p_loc: float
    stderr: float
    m_min: int
    m_max: int
    r_squared: float


@dataclass(frozen=True)
class ScalingPoint:
    """One point of the scaling plot: x = eps K^2/hbar^2, y = E_kin ratio."""

    x: float
    y: float
    K: float = 0.0
    hbar_eff: float = 0.0
    epsilon: float = 0.0
    time: int = 0

    def __post_init__(self):
        if self.x < 0 or self.y <= 0:
            raise ParameterError("scaling point needs x >= 0 and y > 0")


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    stderr: float
    n_points: int


def _symmetrized(dist: MomentumDistribution):
    """Pi_s(m) = (Pi(m) + Pi(-m))/2 for m = 1 .. N/2 - 1."""
    n = dist.probs.size
    half = n // 2
    pos = dist.probs[half + 1:]              # m = 1 .. half-1
    neg = dist.probs[half - 1:0:-1]          # m = -1 .. -(half-1)
    return np.arange(1, half), 0.5 * (pos + neg)


def _weighted_line(u, y, w):
    """Weighted LSQ of y = a + b u; returns (a, b, b_err, weighted R^2)."""
    sw = w.sum()
    um = np.sum(w * u) / sw
    ym = np.sum(w * y) / sw
    suu = np.sum(w * (u - um) ** 2)
    b = np.sum(w * (u - um) * (y - ym)) / suu
    a = ym - b * um
    resid = y - (a + b * u)
    ss_res = np.sum(w * resid ** 2)
    ss_tot = np.sum(w * (y - ym) ** 2)
    dof = max(u.size - 2, 1)
    b_err = np.sqrt(ss_res / dof / suu)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return a, b, b_err, r2


def _fit_window(dist, m_min):
    m, pi_s = _symmetrized(dist)
    usable = pi_s > NOISE_FLOOR
    if not usable.any():
        raise InsufficientDataError("no sites above the noise floor")
    m_max = int(m[usable][-1])
    sel = (m >= m_min) & (m <= m_max) & usable
    if sel.sum() < 6:
        raise InsufficientDataError(
            f"only {int(sel.sum())} usable sites in [{m_min}, {m_max}]")
    return m[sel].astype(float), pi_s[sel], m_max


def fit_exponential(dist: MomentumDistribution, m_min=3,
                    weighted=True) -> LocalizationFit:
    """Fit ln Pi_s vs m over [m_min, m_max] and return p_loc = -1/slope.

    The distribution is symmetrized first; the center is excluded
    (default |m| > 3, matching the convolution of the center with the
    initial distribution).  m_max is the largest site above the noise
    floor.  Points are weighted by Pi_s (Poisson-like variance proxy)
    unless weighted=False.
    """
    m, pi_s, m_max = _fit_window(dist, m_min)
    w = pi_s if weighted else np.ones_like(pi_s)
    _, slope, slope_err, r2 = _weighted_line(m, np.log(pi_s), w)
    if slope >= 0:
        raise NotLocalizedError("not localized in window: slope >= 0")
    p_loc = -1.0 / slope
    return LocalizationFit(p_loc=float(p_loc),
                           stderr=float(slope_err / slope ** 2),
                           m_min=int(m_min), m_max=int(m_max),
                           r_squared=float(r2))


def profile_r_squared(dist: MomentumDistribution, m_min=3, weighted=True):
    """R^2 of the exponential (ln Pi vs m) and Gaussian (ln Pi vs m^2) fits.

    A localized profile gives a larger exponential R^2; a diffusive
    Gaussian profile the opposite.
    """
    m, pi_s, _ = _fit_window(dist, m_min)
    w = pi_s if weighted else np.ones_like(pi_s)
    y = np.log(pi_s)
    _, _, _, r2_exp = _weighted_line(m, y, w)
    _, _, _, r2_gauss = _weighted_line(m ** 2, y, w)
    return float(r2_exp), float(r2_gauss)


def kinetic_energy(dist: MomentumDistribution, beta=None) -> float:
    """E_kin = (1/2) sum_m Pi(m) (m+beta)^2 in units (2 hbar k_L)^2 / 2."""
    if beta is None:
        beta = dist.beta
    m = dist.sites
    return float(0.5 * np.sum(dist.probs * (m + beta) ** 2))


def pi0_proxy(pi0: float) -> float:
    """Kinetic-energy proxy 1/(4 Pi_0^2).

    Equals E_kin exactly on the continuum exponential family:
    Pi_0 = 1/(2 p_loc) gives 1/(4 Pi_0^2) = p_loc^2 = <p^2>/2.
    """
    if not 0.0 < pi0 <= 1.0:
        raise ParameterError(f"pi0 must be in (0, 1], got {pi0}")
    return 1.0 / (4.0 * pi0 ** 2)


def predicted_ploc(K, hbar_eff, epsilon, site_units=False) -> float:
    """Self-consistent-theory localization length.

    Scaled momentum units by default; site_units=True divides by hbar.
    """
    if K <= 0 or hbar_eff <= 0 or epsilon < 0:
        raise ParameterError("parameters must be positive")
    val = K ** 2 / (4.0 * hbar_eff) * math.exp(
        ALPHA * epsilon * K ** 2 / hbar_eff ** 2)
    return val / hbar_eff if site_units else val


def scaling_fit(points, x_max=4.0) -> ScalingFit:
    """Least squares of ln y vs x through the origin, for x <= x_max.

    The ratio definition pins y(x=0) = 1, so the fit is through the
    origin; compare the slope with 2*ALPHA ~ 1.1107.
    """
    pts = [p for p in points if p.x <= x_max]
    if len(pts) < 5:
        raise InsufficientDataError("need at least 5 points with x <= x_max")
    if not any(p.x == 0.0 for p in pts):
        raise InsufficientDataError("scaling fit requires the x = 0 point")
    x = np.array([p.x for p in pts])
    ly = np.log([p.y for p in pts])
    sxx = np.sum(x ** 2)
    slope = np.sum(x * ly) / sxx
    resid = ly - slope * x
    dof = max(x.size - 1, 1)
    stderr = math.sqrt(np.sum(resid ** 2) / dof / sxx)
    return ScalingFit(slope=float(slope), stderr=stderr, n_points=len(pts))
