"""Shared domain types, parameter validation and deterministic seeding.

Unit conventions used throughout the package:

* momentum is reported in units of 2*hbar*k_L, i.e. one lattice site
  m corresponds to one unit; the scaled canonical momentum is
  p = hbar_eff * (m + beta) and is only used internally,
* time is counted in kicks (one kick period = one unit).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

TWO_PI = 2.0 * math.pi

#: default second drive frequency, omega_2 = 2 pi sqrt(5) (rad per period)
DEFAULT_OMEGA2 = TWO_PI * math.sqrt(5.0)


class QpkrError(Exception):
    """Base class for all package errors."""


class ParameterError(QpkrError, ValueError):
    """Raised when a parameter set violates a hard invariant."""


@dataclass(frozen=True)
class SimParams:
    """Full parameter set of one quasiperiodic kicked rotor run."""

    K: float
    hbar_eff: float
    epsilon: float = 0.0
    omega2: float = DEFAULT_OMEGA2
    phi2: float = 0.0
    beta: float = 0.0
    n_kicks: int = 1000
    grid_n: int = 4096

    def kick_amplitude(self, n):
        """Amplitude of kick n: K * (1 + epsilon*cos(omega2*n + phi2))."""
        return self.K * (1.0 + self.epsilon * np.cos(self.omega2 * n + self.phi2))


@dataclass(frozen=True)
class ValidatedParams:
    """A parameter set that passed validation, with attached warnings."""

    params: SimParams
    warnings: tuple[str, ...] = ()


def _near_rational(x, max_den=64, tol=1e-9):
    """Return (p, q) if x is within tol of a rational p/q with q <= max_den."""
    frac = Fraction(x).limit_denominator(max_den)
    if abs(x - float(frac)) < tol:
        return frac.numerator, frac.denominator
    return None


def validate(params: SimParams) -> ValidatedParams:
    """Check hard invariants and attach soft warnings.

    Hard errors: non-positive K or hbar_eff, epsilon outside [0, 1),
    odd or tiny momentum grid.  Warnings: K <= 4 (classical phase space
    not fully chaotic) and commensurability of omega2/2pi or hbar_eff/2pi
    (the pseudo-random on-site sequence requires incommensurability).
    """
    if not params.K > 0:
        raise ParameterError(f"K must be positive, got {params.K}")
    if not params.hbar_eff > 0:
        raise ParameterError(f"hbar_eff must be positive, got {params.hbar_eff}")
    if not 0.0 <= params.epsilon < 1.0:
        raise ParameterError(f"epsilon must be in [0, 1), got {params.epsilon}")
    if params.grid_n < 16 or params.grid_n % 2 != 0:
        raise ParameterError(
            f"grid_n must be even and >= 16, got {params.grid_n}")
    if params.n_kicks < 0:
        raise ParameterError(f"n_kicks must be >= 0, got {params.n_kicks}")
    if not 0.0 <= params.beta < 1.0:
        raise ParameterError(f"beta must be in [0, 1), got {params.beta}")

    warnings = []
    if params.K <= 4.0:
        warnings.append("K <= 4: classical phase space not fully chaotic")
    for name, value in (("omega2", params.omega2), ("hbar_eff", params.hbar_eff)):
        hit = _near_rational(value / TWO_PI)
        if hit is not None:
            p, q = hit
            warnings.append(
                f"{name}/2pi is close to {p}/{q}: commensurability risk")
    return ValidatedParams(params=params, warnings=tuple(warnings))


# ---------------------------------------------------------------------------
# deterministic seeding

_GAMMA = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def derive_seed(master_seed: int, realization_index: int) -> int:
    """Derive the seed of one realization from the master seed.

    Uses the SplitMix64 output function on master_seed + GAMMA*(index+1);
    the finalizer is a bijection on 64-bit integers and GAMMA is odd, so
    the map is injective in the index for a fixed master seed.  The
    algorithm is fixed so results reproduce across runs and platforms.
    """
    if realization_index < 0:
        raise ParameterError("realization_index must be >= 0")
    z = (master_seed + _GAMMA * (realization_index + 1)) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


@dataclass(frozen=True)
class EnsembleSpec:
    """How to draw the (beta, phi2) ensemble of one run.

    Sampling modes are "fixed" (use the value stored in SimParams) or
    "uniform" (beta uniform in [0,1), phi2 uniform in [0,2pi)).  The
    draws of realization r depend only on (master_seed, r).
    """

    n_realizations: int = 1
    master_seed: int = 0
    beta_sampling: str = "uniform"
    phi2_sampling: str = "uniform"

    def __post_init__(self):
        if self.n_realizations < 1:
            raise ParameterError("n_realizations must be >= 1")
        for name in ("beta_sampling", "phi2_sampling"):
            if getattr(self, name) not in ("fixed", "uniform"):
                raise ParameterError(f"{name} must be 'fixed' or 'uniform'")

    def draw(self, params: SimParams, r: int) -> tuple[float, float]:
        """Return (beta, phi2) of realization r."""
        rng = np.random.default_rng(derive_seed(self.master_seed, r))
        u_beta, u_phi2 = rng.random(2)
        beta = u_beta if self.beta_sampling == "uniform" else params.beta
        phi2 = TWO_PI * u_phi2 if self.phi2_sampling == "uniform" else params.phi2
        return beta, phi2


# ---------------------------------------------------------------------------
# observable containers


def momentum_sites(n: int) -> np.ndarray:
    """Lattice sites m = -n/2 .. n/2-1 in natural (ascending) order."""
    return np.arange(-(n // 2), n // 2)


@dataclass(frozen=True)
class MomentumDistribution:
    """Probability over momentum sites m (units of 2*hbar*k_L) at one time."""

    probs: np.ndarray           # natural site order, length N
    time: int
    beta: float = 0.0           # fixed quasimomentum, 0 for averaged ensembles
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", p)
        if p.min() < 0.0:
            raise ParameterError("distribution has negative probabilities")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ParameterError(
                f"distribution not normalized: sum = {p.sum()!r}")

    @property
    def sites(self) -> np.ndarray:
        return momentum_sites(self.probs.size)


@dataclass(frozen=True)
class ObservableSeries:
    """Per-kick observables: <p^2> (site units), Pi_0 and edge mass."""

    times: np.ndarray
    p2_mean: np.ndarray
    pi0: np.ndarray
    edge_mass: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times)
        for name in ("p2_mean", "pi0", "edge_mass"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
            if arr.shape != t.shape:
                raise ParameterError(f"series length mismatch for {name}")
        object.__setattr__(self, "times", t)


def with_overrides(params: SimParams, **kwargs) -> SimParams:
    """Copy of params with some fields replaced."""
    return replace(params, **kwargs)
