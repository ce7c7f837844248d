"""Round-trip cavity map, kept independent of the mean-field solver.

One trip applies the mirror phase, free-space diffraction, the coupling
mirror's losses and the detuning phase, then adds the injected beam:

    A' = sqrt(1-T) e^{i delta_trip} D[e^{i phi(x)} A] + sqrt(T) A_inj

with D the spectral diffraction factor.  Averaging over many trips at small
T reproduces the mean-field equations; the residual scales linearly in T.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import LatticeState, step_lattice
from .model import hss_intensities


@dataclass
class RoundtripParams:
    """One-trip map data on a periodic grid of n points, spacing dx.

    transmission   power transmission T of the coupler (reflection 1-T)
    delta_trip     detuning phase accumulated per trip (rad)
    diff_coeff     diffraction strength: spectral factor exp(-2i*diff_coeff*k^2)
    mirror_phase   phase profile picked up at the segmented mirror (rad)
    injection      injected amplitude profile (enters as sqrt(T)*injection)
    """

    transmission: float
    delta_trip: float
    diff_coeff: float
    mirror_phase: np.ndarray
    injection: np.ndarray
    dx: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.transmission < 1.0:
            raise ValueError("transmission must lie in [0, 1)")
        self.mirror_phase = np.atleast_1d(np.asarray(self.mirror_phase, float))
        self.injection = np.atleast_1d(np.asarray(self.injection, complex))
        if self.mirror_phase.shape != self.injection.shape:
            raise ValueError("mirror_phase and injection must share a grid")

    @property
    def n(self) -> int:
        return self.mirror_phase.size

    @property
    def k(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    @classmethod
    def from_meanfield(cls, transmission: float, delta: float,
                       pump: np.ndarray, zprofile: np.ndarray,
                       dx: float = 1.0) -> "RoundtripParams":
        """Build the trip map matching normalized parameters (Delta, E, Z).

        Per trip the cavity accumulates half a transit of every slow rate:
        delta_trip = Delta*T/2, phi = (T/2) Z, diffraction (T/2) k^2, and
        the injection sqrt(T)*A_inj = (T/2) E.
        """
        half = 0.5 * transmission
        return cls(transmission=transmission,
                   delta_trip=half * delta,
                   diff_coeff=0.5 * half,
                   mirror_phase=half * np.asarray(zprofile, float),
                   injection=0.5 * np.sqrt(transmission) * np.asarray(pump, complex),
                   dx=dx)


def roundtrip(amplitude: np.ndarray, p: RoundtripParams) -> np.ndarray:
    """Apply one full trip to the intracavity amplitude."""
    a = np.asarray(amplitude, dtype=complex)
    if a.shape != p.mirror_phase.shape:
        raise ValueError("amplitude grid does not match the trip map")
    a = a * np.exp(1j * p.mirror_phase)
    a = np.fft.ifft(np.fft.fft(a) * np.exp(-2j * p.diff_coeff * p.k**2))
    a = np.sqrt(1.0 - p.transmission) * np.exp(1j * p.delta_trip) * a
    return a + np.sqrt(p.transmission) * p.injection


@dataclass
class ResidualRow:
    """Mean-field comparison at one transmission."""

    transmission: float
    intensity_map: float
    intensity_meanfield: float
    residual: float
    trips: int
    converged: bool


def meanfield_residual(transmissions, delta: float, e0: float,
                       gamma: float, Omega: float,
                       max_trips: int = 200_000, tol: float = 1e-12,
                       n_points: int = 8) -> list[ResidualRow]:
    """Iterate the trip map with mirror co-evolution to its fixed point and
    compare against the resonance cubic, for each transmission.

    The mirror is stepped once per trip (dtau = T/2) under the frozen
    radiation drive, so the mechanical back-action closes the loop exactly
    as in the coupled map.  The relative intensity discrepancy against the
    matching cubic root shrinks linearly with T.
    """
    roots = hss_intensities(delta, e0 * e0)
    rows = []
    for T in transmissions:
        dtau = 0.5 * T
        pump = np.full(n_points, e0, dtype=complex)
        a = np.zeros(n_points, dtype=complex)
        mirror = LatticeState(np.zeros(1), np.zeros(1))
        p = RoundtripParams.from_meanfield(T, delta, pump,
                                           np.full(n_points, mirror.z[0]))
        converged = False
        trips = 0
        for trips in range(1, max_trips + 1):
            drive = np.array([Omega**2 * float(np.mean(np.abs(a) ** 2))])
            a_new = roundtrip(a, p)
            mirror = step_lattice(mirror, drive, dtau, gamma, Omega)
            p.mirror_phase = np.full(n_points, 0.5 * T * mirror.z[0])
            move = np.max(np.abs(a_new - a))
            a = a_new
            if not np.all(np.isfinite(np.abs(a))) or np.max(np.abs(a)) > 1e6:
                break
            if move < tol * max(1.0, np.max(np.abs(a))):
                converged = True
                break
        i_map = float(np.mean(np.abs(a) ** 2))
        i_mf = float(roots[np.argmin(np.abs(roots - i_map))])
        resid = abs(i_map - i_mf) / max(i_mf, 1e-300)
        rows.append(ResidualRow(transmission=float(T), intensity_map=i_map,
                                intensity_meanfield=i_mf, residual=resid,
                                trips=trips, converged=converged))
    return rows


def residual_slope(rows: list[ResidualRow]) -> float:
    """Log-log slope of residual versus transmission."""
    t = np.log([r.transmission for r in rows])
    r = np.log([max(r.residual, 1e-300) for r in rows])
    return float(np.polyfit(t, r, 1)[0])
