"""Mapping of the quasiperiodic kicked rotor onto a 2D Anderson-like lattice.

The one-period Floquet eigenproblem of the periodically kicked 2D rotor
(kinetic part hbar m1^2/2 + omega2 m2, kick K cos(x1)(1 + eps cos(x2)))
is equivalent to the lattice equation

    eps_{m1,m2} chi_{m1,m2} + sum_{r != 0} W_{r1,r2} chi_{m+r} = 0

with deterministic pseudo-random on-site energies

    eps_{m1,m2} = tan{ [ (hbar m1^2/2 + omega2 m2) - E/hbar ] / 2 }

and hopping given by the 2D Fourier coefficients of

    W(x1, x2) = tan[ K cos(x1) (1 + eps cos(x2)) / (2 hbar) ],

where chi = (1 + iW)^{-1} phi and phi is a Floquet eigenstate with
eigenvalue exp(-iE/hbar).  W is even in x1 and x2, so W_r is real with
the four-fold symmetry W_{r1,r2} = W_{-r1,r2} = W_{r1,-r2}; it also
vanishes for even r1 (W flips sign under x1 -> x1 + pi), in particular
W_0 = 0.  The mapping requires K(1+eps)/(2 hbar) < pi/2, otherwise tan
diverges on the torus and the mapping is singular.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT_OMEGA2, ParameterError, QpkrError


class MappingSingularError(QpkrError):
    """K(1+eps)/(2 hbar) >= pi/2: tan is unbounded, no lattice mapping."""


class ResonantSiteError(QpkrError):
    """On-site tan argument too close to pi/2 + k pi."""


def _check_regular(K, hbar_eff, epsilon):
    peak = K * (1.0 + epsilon) / (2.0 * hbar_eff)
    if not peak < math.pi / 2.0 - 1e-6:
        raise MappingSingularError(
            f"mapping singular for these parameters: K(1+eps)/2hbar = "
            f"{peak:.4f} >= pi/2")


def onsite_energy(m1, m2, E, hbar_eff, omega2=DEFAULT_OMEGA2):
    """Deterministic pseudo-random on-site energy of site (m1, m2)."""
    theta = 0.5 * ((hbar_eff * m1 ** 2 / 2.0 + omega2 * m2) - E / hbar_eff)
    # distance of theta to the nearest pole of tan
    if abs(((theta - math.pi / 2.0) % math.pi) - math.pi / 2.0) > math.pi / 2.0 - 1e-12:
        raise ResonantSiteError(
            f"resonant site ({m1},{m2}): tan argument within 1e-12 of a pole")
    return math.tan(theta)


@dataclass(frozen=True)
class OnsiteField:
    """On-site energies on a rectangular lattice window."""

    values: np.ndarray
    m1_range: tuple[int, int]
    m2_range: tuple[int, int]
    E: float
    hbar_eff: float
    omega2: float


def onsite_field(m1_range, m2_range, E, hbar_eff,
                 omega2=DEFAULT_OMEGA2) -> OnsiteField:
    """Vectorized on-site energies for m1 in m1_range, m2 in m2_range."""
    m1 = np.arange(*m1_range)
    m2 = np.arange(*m2_range)
    theta = 0.5 * ((hbar_eff * m1[:, None] ** 2 / 2.0 + omega2 * m2[None, :])
                   - E / hbar_eff)
    dist = np.abs(((theta - np.pi / 2.0) % np.pi) - np.pi / 2.0)
    if np.any(dist > np.pi / 2.0 - 1e-12):
        bad = np.argwhere(dist > np.pi / 2.0 - 1e-12)[0]
        raise ResonantSiteError(
            f"resonant site (m1={m1[bad[0]]}, m2={m2[bad[1]]})")
    return OnsiteField(values=np.tan(theta), m1_range=tuple(m1_range),
                       m2_range=tuple(m2_range), E=E, hbar_eff=hbar_eff,
                       omega2=omega2)


@dataclass(frozen=True)
class HoppingTable:
    """Fourier coefficients W_{r1,r2} on r in [-R, R]^2 (real by symmetry)."""

    coefficients: np.ndarray     # shape (2R+1, 2R+1), index [r1+R, r2+R]
    R: int
    K: float
    hbar_eff: float
    epsilon: float

    def coeff(self, r1, r2):
        return self.coefficients[r1 + self.R, r2 + self.R]


def _w_samples(K, hbar_eff, epsilon, n):
    x = 2.0 * np.pi * np.arange(n) / n
    arg = K * np.cos(x)[:, None] * (1.0 + epsilon * np.cos(x)[None, :])
    return np.tan(arg / (2.0 * hbar_eff))


def hopping_table(K, hbar_eff, epsilon, R=8, quadrature_n=None) -> HoppingTable:
    """Hopping coefficients by trapezoidal quadrature on the torus.

    The uniform grid is spectrally accurate for the smooth periodic
    integrand; quadrature_n defaults to max(64, 8R).
    """
    _check_regular(K, hbar_eff, epsilon)
    if quadrature_n is None:
        quadrature_n = max(64, 8 * R)
    if quadrature_n < 8 * R:
        raise ParameterError("quadrature_n must be >= 8R")
    w = _w_samples(K, hbar_eff, epsilon, quadrature_n)
    c = np.fft.fft2(w) / quadrature_n ** 2
    r = np.arange(-R, R + 1)
    coeffs = c[np.ix_(r % quadrature_n, r % quadrature_n)]
    if np.max(np.abs(coeffs.imag)) > 1e-10:
        raise QpkrError("hopping coefficients unexpectedly complex")
    return HoppingTable(coefficients=coeffs.real.copy(), R=R, K=K,
                        hbar_eff=hbar_eff, epsilon=epsilon)


def anisotropy_report(table: HoppingTable) -> float:
    """RMS hopping along direction 2 relative to direction 1.

    Ratio of the RMS of coefficients that move the state along m2
    (r2 != 0) to the RMS of the pure direction-1 coefficients
    (r2 = 0, r1 != 0).  Proportional to epsilon for small epsilon.
    """
    c = table.coefficients
    R = table.R
    mask2 = np.ones_like(c, dtype=bool)
    mask2[:, R] = False                      # r2 == 0
    a2 = np.sqrt(np.sum(c[mask2] ** 2))
    axis1 = c[:, R].copy()
    axis1[R] = 0.0                           # drop r = 0
    a1 = np.sqrt(np.sum(axis1 ** 2))
    if a1 == 0.0:
        raise ParameterError("no direction-1 hopping: degenerate table")
    return float(a2 / a1)


# ---------------------------------------------------------------------------
# residual verification of the lattice mapping


@dataclass(frozen=True)
class MappingReport:
    """Relative lattice-equation residuals over sampled Floquet states."""

    residuals: np.ndarray        # relative residual per sampled eigenstate
    max_residual: float
    median_residual: float
    lattice_n: int
    R: int
    n_excluded_sites: int
    params: dict = field(default_factory=dict)


def _floquet_operator(K, hbar_eff, epsilon, omega2, n):
    """Dense one-period operator (kick then free flight) on the n x n
    plane-wave basis, in FFT ordering flattened row-major."""
    m = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    x = 2.0 * np.pi * np.arange(n) / n
    kick_phase = np.exp(-1j * K * np.cos(x)[:, None]
                        * (1.0 + epsilon * np.cos(x)[None, :]) / hbar_eff)
    free_phase = np.exp(-1j * (hbar_eff * m[:, None] ** 2 / 2.0
                               + omega2 * m[None, :]))
    dim = n * n
    basis = np.eye(dim, dtype=complex).reshape(dim, n, n)
    pos = np.fft.ifft2(basis, axes=(1, 2))
    pos *= kick_phase[None, :, :]
    out = np.fft.fft2(pos, axes=(1, 2))
    out *= free_phase[None, :, :]
    # columns of U are the images of the basis vectors
    return out.reshape(dim, dim).T, kick_phase


def verify_mapping(K, hbar_eff, epsilon, omega2=DEFAULT_OMEGA2, lattice_n=32,
                   R=8, n_sample=64, pole_tol=1e-8) -> MappingReport:
    """Check the Anderson-lattice equation on Floquet eigenstates.

    Diagonalizes the one-period evolution operator on the truncated
    plane-wave basis, transforms each sampled eigenvector phi to
    chi = (1 + iW)^{-1} phi, and evaluates the relative residual of the
    lattice equation on interior sites (margin >= R from every edge).
    Sites whose on-site tan argument is within pole_tol of a pole are
    excluded and reported.
    """
    if lattice_n > 48:
        raise ParameterError("lattice_n > 48: dense diagonalization too large")
    _check_regular(K, hbar_eff, epsilon)
    if lattice_n <= 2 * R + 4:
        raise ParameterError("lattice_n too small for the hopping range R")

    n = lattice_n
    u, _ = _floquet_operator(K, hbar_eff, epsilon, omega2, n)
    eigvals, eigvecs = np.linalg.eig(u)

    w_pos = _w_samples(K, hbar_eff, epsilon, n)  # grid matches the basis
    table = hopping_table(K, hbar_eff, epsilon, R=R)
    w_r = table.coefficients

    m = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    t_free = hbar_eff * m[:, None] ** 2 / 2.0 + omega2 * m[None, :]

    dim = n * n
    idx = np.linspace(0, dim - 1, min(n_sample, dim)).astype(int)
    interior = slice(R, n - R)
    residuals = []
    n_excluded = 0
    for j in idx:
        phi = eigvecs[:, j].reshape(n, n)
        e_quasi = -hbar_eff * np.angle(eigvals[j])
        theta = 0.5 * (t_free - e_quasi / hbar_eff)
        pole_dist = np.abs(((theta - np.pi / 2.0) % np.pi) - np.pi / 2.0)
        good = pole_dist <= np.pi / 2.0 - pole_tol
        n_excluded += int(np.size(good) - np.count_nonzero(good))
        eps_site = np.where(good, np.tan(theta), 0.0)

        chi = np.fft.fft2(np.fft.ifft2(phi) / (1.0 + 1j * w_pos))
        chi_nat = np.fft.fftshift(chi)
        eps_nat = np.fft.fftshift(eps_site)
        good_nat = np.fft.fftshift(good)

        lhs = eps_nat[interior, interior] * chi_nat[interior, interior]
        for r1 in range(-R, R + 1):
            for r2 in range(-R, R + 1):
                if r1 == 0 and r2 == 0:
                    continue
                c = w_r[r1 + R, r2 + R]
                if c == 0.0:
                    continue
                lhs = lhs + c * chi_nat[R + r1:n - R + r1, R + r2:n - R + r2]
        mask = good_nat[interior, interior]
        num = np.linalg.norm(lhs[mask])
        # normalize by the full state norm: interior-normalization would
        # blow up for eigenstates localized near the grid edge, whose
        # interior weight is exponentially small
        den = np.linalg.norm(chi_nat)
        residuals.append(num / den)

    residuals = np.array(residuals)
    return MappingReport(residuals=residuals,
                         max_residual=float(residuals.max()),
                         median_residual=float(np.median(residuals)),
                         lattice_n=n, R=R, n_excluded_sites=n_excluded,
                         params={"K": K, "hbar_eff": hbar_eff,
                                 "epsilon": epsilon, "omega2": omega2})
