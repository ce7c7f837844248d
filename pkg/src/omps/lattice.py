"""Micromirror lattice: quadrature weights, nearest-neighbour elastic
coupling, radiation-pressure drive, and the exact damped-oscillator step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class LatticeState:
    """Displacements and velocities of the mirror chain."""

    z: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.z.shape != self.v.shape or self.z.ndim != 1:
            raise ValueError("z and v must be 1-d arrays of equal length")

    @property
    def n(self) -> int:
        return self.z.size

    def copy(self) -> "LatticeState":
        return LatticeState(self.z.copy(), self.v.copy())


def quadrature_weights(points_per_mirror: int) -> np.ndarray:
    """Intensity-averaging weights over one mirror cell.

    Returns M+2 weights {1, 23, 24, ..., 24, 23, 1}/(24*M) spanning the
    last sample of the previous cell through the first sample of the next;
    they integrate cell averages of cubics exactly on a centred grid and
    sum to one.
    """
    m = int(points_per_mirror)
    if m < 2:
        raise ValueError("points_per_mirror must be >= 2")
    d = np.full(m + 2, 24.0)
    d[0] = d[-1] = 1.0
    d[1] = d[-2] = 23.0
    d /= 24.0 * m
    # push rounding residue into the central weight so the sum is exactly one
    mid = (m + 2) // 2
    for _ in range(3):
        residue = 1.0 - math.fsum(d)
        if residue == 0.0:
            break
        d[mid] += residue
    return d


class RadiationStencil:
    """Precomputed gather indices mapping grid intensities to per-mirror
    weighted averages.

    Out-of-range neighbours at the array ends are clipped onto the nearest
    existing sample, which folds the boundary weight back and preserves the
    unit weight sum.
    """

    def __init__(self, n_mirrors: int, points_per_mirror: int):
        n = n_mirrors * points_per_mirror
        self.weights = quadrature_weights(points_per_mirror)
        first = np.arange(n_mirrors) * points_per_mirror - 1
        idx = first[:, None] + np.arange(points_per_mirror + 2)[None, :]
        self.indices = np.clip(idx, 0, n - 1)

    def average(self, intensity: np.ndarray) -> np.ndarray:
        """Weighted intensity average over each mirror."""
        return intensity[self.indices] @ self.weights


def radiation_accel(intensity: np.ndarray, j: int, stencil: RadiationStencil,
                    Omega: float) -> float:
    """Radiation-pressure acceleration Omega^2 <|F|^2>_j on mirror j."""
    row = stencil.indices[j]
    return Omega**2 * float(intensity[row] @ stencil.weights)


def coupling_accel(z: np.ndarray, j: int, rho: float, Omega: float,
                   abar: float) -> float:
    """Elastic acceleration on mirror j from its existing neighbours."""
    acc = 0.0
    if j > 0:
        acc += z[j - 1] - z[j]
    if j < z.size - 1:
        acc += z[j + 1] - z[j]
    return (rho * Omega / abar) ** 2 * acc


def coupling_accel_all(z: np.ndarray, rho: float, Omega: float,
                       abar: float) -> np.ndarray:
    """Elastic acceleration of every mirror; free ends carry one bond."""
    acc = np.zeros_like(z)
    if z.size > 1:
        d = np.diff(z)
        acc[:-1] += d
        acc[1:] -= d
    return (rho * Omega / abar) ** 2 * acc


def elastic_energy(z: np.ndarray, rho: float, Omega: float, abar: float) -> float:
    """Potential energy stored in the nearest-neighbour bonds (per unit mass)."""
    if z.size < 2:
        return 0.0
    return 0.5 * (rho * Omega / abar) ** 2 * float(np.sum(np.diff(z) ** 2))


def oscillator_propagator(gamma: float, Omega: float, dtau: float):
    """Exact flow of u'' + gamma u' + Omega^2 u = 0 over dtau.

    Returns the 2x2 matrix entries (p00, p01, p10, p11) acting on (u, u').
    Omega may be an array (one propagator per mode).
    """
    Omega = np.asarray(Omega, dtype=float)
    half = 0.5 * gamma
    wd2 = Omega**2 - half**2
    decay = np.exp(-half * dtau)

    wd = np.sqrt(np.abs(wd2))
    arg = wd * dtau
    # s = sin(wd t)/wd continued through wd -> 0 (cosh/sinh when overdamped)
    with np.errstate(invalid="ignore", divide="ignore"):
        s_osc = np.where(arg > 1e-8, np.sin(arg) / np.where(wd > 0, wd, 1.0),
                         dtau * (1.0 - arg * arg / 6.0))
        s_hyp = np.where(arg > 1e-8, np.sinh(arg) / np.where(wd > 0, wd, 1.0),
                         dtau * (1.0 + arg * arg / 6.0))
    s = np.where(wd2 >= 0.0, s_osc, s_hyp)
    cc = np.where(wd2 >= 0.0, np.cos(arg), np.cosh(arg))

    p00 = decay * (cc + half * s)
    p01 = decay * s
    p10 = -(Omega**2) * decay * s
    p11 = decay * (cc - half * s)
    return p00, p01, p10, p11


def step_lattice(state: LatticeState, drive: np.ndarray, dtau: float,
                 gamma: float, Omega: float,
                 propagator=None) -> LatticeState:
    """Advance the chain one step with the drive frozen.

    Each mirror evolves under z'' + gamma z' + Omega^2 z = drive_j exactly
    (shift to the equilibrium drive_j/Omega^2, apply the homogeneous flow,
    shift back), so the step is exact for constant drive and the elastic
    force enters through the frozen drive.
    """
    if dtau <= 0.0:
        raise ValueError("dtau must be positive")
    drive = np.asarray(drive, dtype=float)
    if drive.shape != state.z.shape:
        raise ValueError("drive must match the lattice length")
    if propagator is None:
        propagator = oscillator_propagator(gamma, Omega, dtau)
    p00, p01, p10, p11 = propagator
    zeq = drive / Omega**2
    u = state.z - zeq
    return LatticeState(p00 * u + p01 * state.v + zeq,
                        p10 * u + p11 * state.v)


class ChainPropagator:
    """Exact flow of the damped coupled chain under a frozen external drive.

    The free-end chain diagonalizes in the cosine basis cos(pi*m*(j+1/2)/N)
    (a DCT-II), where mode m oscillates at
    omega_m^2 = Omega^2 (1 + 2 rho^2 (1 - cos(pi m/N))/abar^2); each mode is
    advanced with the exact damped-oscillator propagator, so only the drive
    is approximated (held constant over the step).
    """

    def __init__(self, n_mirrors: int, rho: float, Omega: float, abar: float,
                 gamma: float, dtau: float):
        from scipy.fft import dct, idct
        self._dct, self._idct = dct, idct
        m = np.arange(n_mirrors)
        self.omega_m = Omega * np.sqrt(
            1.0 + 2.0 * rho**2 * (1.0 - np.cos(np.pi * m / n_mirrors)) / abar**2)
        self.props = oscillator_propagator(gamma, self.omega_m, dtau)
        self.dtau = dtau

    def step(self, state: LatticeState, drive: np.ndarray) -> LatticeState:
        p00, p01, p10, p11 = self.props
        zk = self._dct(state.z, type=2, norm="ortho")
        vk = self._dct(state.v, type=2, norm="ortho")
        dk = self._dct(np.asarray(drive, float), type=2, norm="ortho")
        zeq = dk / self.omega_m**2
        u = zk - zeq
        z1 = self._idct(p00 * u + p01 * vk + zeq, type=2, norm="ortho")
        v1 = self._idct(p10 * u + p11 * vk, type=2, norm="ortho")
        return LatticeState(z1, v1)


def chain_mode_frequency(n_mirrors: int, mode: int, rho: float, Omega: float,
                         abar: float) -> float:
    """Eigenfrequency of free-chain mode cos(kappa*(j+1/2)), kappa = pi*mode/N."""
    kappa = np.pi * mode / n_mirrors
    return Omega * np.sqrt(1.0 + 2.0 * rho**2 * (1.0 - np.cos(kappa)) / abar**2)


def chain_mode_shape(n_mirrors: int, mode: int) -> np.ndarray:
    """Displacement profile of the free-chain eigenmode."""
    j = np.arange(n_mirrors)
    kappa = np.pi * mode / n_mirrors
    return np.cos(kappa * (j + 0.5))
