"""Continuum limit of the mirror chain: Z(xbar, tau) obeys a damped wave
equation with stiffness Omega^2(1 + rho^2 k^2) per transverse mode, driven
by the local intensity.  Serves as the reference the finite lattice
converges to at O(abar^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import Grid1D, PumpSchedule, build_pump, nonlinear_step
from .lattice import oscillator_propagator
from .model import NormalizedParams
from .snapshots import Snapshot


@dataclass(frozen=True)
class ContinuumParams:
    """Parameters of the continuum run; mirrors NormalizedParams minus the
    lattice discretization."""

    gamma: float
    Omega: float
    Delta: float
    rho: float
    n_points: int
    xbar_max: float

    @classmethod
    def from_lattice(cls, params: NormalizedParams,
                     n_points: int | None = None) -> "ContinuumParams":
        return cls(gamma=params.gamma, Omega=params.Omega, Delta=params.Delta,
                   rho=params.rho, n_points=n_points or 1024,
                   xbar_max=params.xbar_max)


class ContinuumSim:
    """Split-step integrator for the field coupled to the continuum sheet.

    The mechanical update runs per rfft mode with the exact damped-oscillator
    flow at stiffness Omega^2(1 + rho^2 k^2), the intensity drive frozen at
    the step entry, matching the lattice integrator's splitting.
    """

    def __init__(self, params: ContinuumParams, schedule: PumpSchedule,
                 field0: np.ndarray | None = None,
                 z0: np.ndarray | None = None, w0: np.ndarray | None = None):
        self.params = params
        self.schedule = schedule
        self.grid = Grid1D(params.n_points, params.xbar_max)
        self.tau = 0.0
        n = self.grid.n
        if field0 is None:
            from .field import lowest_branch_intensity
            base = schedule.base_profile(self.grid.x)
            isol = lowest_branch_intensity(np.abs(base) ** 2, params.Delta)
            field0 = base / (1.0 - 1j * (params.Delta + isol))
        self.field = np.asarray(field0, dtype=complex).copy()
        self.z = np.zeros(n) if z0 is None else np.asarray(z0, float).copy()
        self.w = np.zeros(n) if w0 is None else np.asarray(w0, float).copy()
        if self.field.size != n or self.z.size != n or self.w.size != n:
            raise ValueError("state arrays must match the grid")

        k_mech = 2.0 * np.pi * np.fft.rfftfreq(n, d=self.grid.dx)
        self._omega_k = params.Omega * np.sqrt(1.0 + (params.rho * k_mech) ** 2)
        self._cache_dtau = None
        self._half_phase = None
        self._mech_prop = None
        self._pump_key = None
        self._pump = None

    @property
    def dtau_max(self) -> float:
        # stiffest mode sets the frozen-drive bound
        return 0.1 / float(self._omega_k[-1])

    def _prepare(self, dtau: float):
        if dtau != self._cache_dtau:
            p = self.params
            self._half_phase = np.exp(0.5 * dtau * (-1.0 + 1j * p.Delta
                                                    - 1j * self.grid.k**2))
            self._mech_prop = oscillator_propagator(p.gamma, self._omega_k,
                                                    0.5 * dtau)
            self._cache_dtau = dtau

    def _mech_half(self, drive_k: np.ndarray) -> None:
        p00, p01, p10, p11 = self._mech_prop
        zeq_k = drive_k / self._omega_k**2
        zk = np.fft.rfft(self.z) - zeq_k
        wk = np.fft.rfft(self.w)
        n = self.grid.n
        self.z = np.fft.irfft(p00 * zk + p01 * wk + zeq_k, n=n)
        self.w = np.fft.irfft(p10 * zk + p11 * wk, n=n)

    def pump_now(self, tau: float) -> np.ndarray:
        key = self.schedule.active_beams(tau)
        if key != self._pump_key:
            self._pump = build_pump(self.schedule, self.grid, tau)
            self._pump_key = key
        return self._pump

    def step(self, dtau: float) -> None:
        if dtau <= 0.0:
            raise ValueError("dtau must be positive")
        self._prepare(dtau)
        p = self.params
        pump = self.pump_now(self.tau + 0.5 * dtau)

        # same palindromic layout as the lattice solver: half a mechanical
        # step each side of the nonlinear update, drive frozen at the step
        # boundaries, Z sampled at the midpoint
        om2 = p.Omega**2
        self._mech_half(np.fft.rfft(om2 * np.abs(self.field) ** 2))
        f = np.fft.ifft(np.fft.fft(self.field) * self._half_phase)
        f = nonlinear_step(f, self.z, pump, dtau)
        self.field = np.fft.ifft(np.fft.fft(f) * self._half_phase)
        self._mech_half(np.fft.rfft(om2 * np.abs(self.field) ** 2))
        self.tau += dtau

        if not np.isfinite(self.field.real.sum() + self.field.imag.sum()
                           + self.z.sum()):
            from .field import DivergedError
            bad = np.flatnonzero(~np.isfinite(self.field))
            idx = int(bad[0]) if bad.size else int(
                np.flatnonzero(~np.isfinite(self.z))[0])
            raise DivergedError(idx, self.tau)

    def snapshot(self) -> Snapshot:
        return Snapshot(tau=self.tau, xbar=self.grid.x,
                        field=self.field.copy(), zgrid=self.z.copy(),
                        z=self.z.copy(), v=self.w.copy(),
                        n_mirrors=self.grid.n, points_per_mirror=1)


def step_continuum(sim: ContinuumSim, dtau: float) -> None:
    """One split step of the continuum system."""
    sim.step(dtau)


def cell_average(values: np.ndarray, n_cells: int) -> np.ndarray:
    """Average a grid profile over n_cells equal cells; the grid must tile."""
    n = values.size
    if n % n_cells:
        raise ValueError(f"grid of {n} points does not tile {n_cells} cells")
    return values.reshape(n_cells, n // n_cells).mean(axis=1)


def lattice_continuum_distance(lat_snap: Snapshot, con_snap: Snapshot) -> dict:
    """L2 distance between a lattice run and the continuum reference.

    Both intensity and displacement are reduced to per-mirror cell averages
    before comparison (the mirror displacement is the cell average of the
    sheet in the continuum limit).
    """
    n_cells = lat_snap.n_mirrors
    abar = (lat_snap.xbar[-1] - lat_snap.xbar[0]
            + (lat_snap.xbar[1] - lat_snap.xbar[0])) / n_cells
    i_lat = cell_average(lat_snap.intensity, n_cells)
    i_con = cell_average(con_snap.intensity, n_cells)
    z_lat = lat_snap.z
    z_con = cell_average(con_snap.zgrid, n_cells)
    d_i = float(np.sqrt(abar * np.sum((i_lat - i_con) ** 2)))
    d_z = float(np.sqrt(abar * np.sum((z_lat - z_con) ** 2)))
    return {"intensity": d_i, "Z": d_z,
            "total": float(np.hypot(d_i, d_z))}


def reference_points(n_list, minimum: int = 1024) -> int:
    """Continuum resolution that tiles every lattice in n_list evenly."""
    m = int(np.lcm.reduce([int(n) for n in n_list]))
    return m * max(1, -(-minimum // m))
