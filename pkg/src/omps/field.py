"""Intracavity field solver.

Strang splitting per step: a spectral half-step of the linear part
(-1 + i*Delta + i*d2/dx2), one exact step of the mirror chain and of the
local nonlinearity i*Z*F + E with Z and the radiation drive frozen at the
step entry, then the closing linear half-step.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .lattice import (
    ChainPropagator,
    LatticeState,
    RadiationStencil,
    coupling_accel_all,
)
from .model import NormalizedParams
from .snapshots import Snapshot


class DivergedError(RuntimeError):
    """Raised when the state stops being finite."""

    def __init__(self, index: int, tau: float):
        self.index = index
        self.tau = tau
        super().__init__(f"non-finite field value at grid index {index}, tau={tau:g}")


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on [-xbar_max, xbar_max), samples at cell centres."""

    n: int
    xbar_max: float

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("grid needs at least two points")
        if self.xbar_max <= 0:
            raise ValueError("xbar_max must be positive")

    @property
    def dx(self) -> float:
        return 2.0 * self.xbar_max / self.n

    @property
    def x(self) -> np.ndarray:
        return -self.xbar_max + (np.arange(self.n) + 0.5) * self.dx

    @property
    def k(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    @classmethod
    def for_params(cls, params: NormalizedParams) -> "Grid1D":
        return cls(n=params.n_points, xbar_max=params.xbar_max)


@dataclass(frozen=True)
class Beam:
    """A timed Gaussian address beam added to the holding pump.

    amplitude carries the beam phase; a phase of pi against the written
    structure acts as an eraser.
    """

    amplitude: complex
    center: float
    width: float
    tau_on: float
    tau_off: float

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("beam width must be positive")
        if not self.tau_on < self.tau_off:
            raise ValueError("beam needs tau_on < tau_off")

    def active(self, tau: float) -> bool:
        return self.tau_on <= tau < self.tau_off

    def profile(self, x: np.ndarray) -> np.ndarray:
        return self.amplitude * np.exp(-((x - self.center) ** 2) / (2.0 * self.width**2))


@dataclass(frozen=True)
class PumpSchedule:
    """Holding pump (super-Gaussian of order ``exponent``) plus address beams."""

    e0: float
    sigma_x: float = np.inf
    exponent: int = 20
    beams: tuple[Beam, ...] = ()

    def __post_init__(self):
        if self.e0 < 0:
            raise ValueError("pump amplitude must be non-negative")
        if self.sigma_x <= 0:
            raise ValueError("sigma_x must be positive")
        if self.exponent < 2 or self.exponent % 2:
            raise ValueError("exponent must be an even integer >= 2")
        object.__setattr__(self, "beams", tuple(self.beams))

    def base_profile(self, x: np.ndarray) -> np.ndarray:
        if not np.isfinite(self.sigma_x):
            return np.full_like(x, self.e0, dtype=complex)
        return self.e0 * np.exp(-0.5 * (np.abs(x) / self.sigma_x) ** self.exponent) \
            .astype(complex)

    def active_beams(self, tau: float) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.beams) if b.active(tau))


def build_pump(schedule: PumpSchedule, grid: Grid1D, tau: float) -> np.ndarray:
    """Complex pump profile E(xbar) at time tau."""
    pump = schedule.base_profile(grid.x)
    for b in schedule.beams:
        if b.active(tau):
            pump = pump + b.profile(grid.x)
    return pump


def linear_halfstep(field: np.ndarray, dtau: float, grid: Grid1D,
                    delta: float, phase: np.ndarray | None = None) -> np.ndarray:
    """Spectral propagation under dF/dtau = (-1 + i*Delta + i d2/dx2) F."""
    if phase is None:
        phase = np.exp(dtau * (-1.0 + 1j * delta - 1j * grid.k**2))
    return np.fft.ifft(np.fft.fft(field) * phase)


def nonlinear_step(field: np.ndarray, zgrid: np.ndarray, pump: np.ndarray,
                   dtau: float) -> np.ndarray:
    """Exact flow of dF/dtau = i*Z*F + E with Z, E frozen."""
    phase = np.exp(1j * zgrid * dtau)
    small = np.abs(zgrid) < 1e-8
    denom = np.where(small, 1.0, zgrid)
    gain = np.where(small, dtau, (phase - 1.0) / (1j * denom))
    return phase * field + pump * gain


def lowest_branch_intensity(e0_sq: np.ndarray, delta: float) -> np.ndarray:
    """Smallest root of I*(1+(Delta+I)^2) = E0^2(x), vectorized.

    The cubic is increasing on [0, I_-], and the lowest root never exceeds
    E0^2, so bisection on [0, E0^2] capped at the first turning point
    always brackets it.
    """
    e0_sq = np.asarray(e0_sq, dtype=float)
    hi = e0_sq.copy()
    disc = delta * delta - 3.0
    if disc > 0.0:
        turn = (-2.0 * delta - np.sqrt(disc)) / 3.0
        if turn > 0.0:
            np.minimum(hi, turn, out=hi)
            # pump beyond the fold: the only root lies above the turning point
            high = e0_sq > turn * (1.0 + (delta + turn) ** 2)
            hi = np.where(high, e0_sq, hi)
    lo = np.zeros_like(hi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        g = mid * (1.0 + (delta + mid) ** 2) - e0_sq
        lo = np.where(g < 0.0, mid, lo)
        hi = np.where(g < 0.0, hi, mid)
    return 0.5 * (lo + hi)


@dataclass
class RunFlags:
    """Bookkeeping produced by simulate()."""

    steady: bool = False
    steady_tau: float | None = None


class Simulation:
    """Coupled field/lattice integrator.

    Parameters
    ----------
    params : NormalizedParams
        Dimensionless model parameters; they fix the grid.
    schedule : PumpSchedule
        Holding pump and address beams.
    field0, lattice0 : optional initial state
        Default is the local lower-branch steady state with zero mirror
        motion; see initial_state() for the noisy variant.
    """

    def __init__(self, params: NormalizedParams, schedule: PumpSchedule,
                 field0: np.ndarray | None = None,
                 lattice0: LatticeState | None = None):
        self.params = params
        self.schedule = schedule
        self.grid = Grid1D.for_params(params)
        self.stencil = RadiationStencil(params.n_mirrors, params.points_per_mirror)
        self.tau = 0.0
        if field0 is None:
            base = schedule.base_profile(self.grid.x)
            isol = lowest_branch_intensity(np.abs(base) ** 2, params.Delta)
            self.field = base / (1.0 - 1j * (params.Delta + isol))
        else:
            self.field = np.asarray(field0, dtype=complex).copy()
        if self.field.shape != (self.grid.n,):
            raise ValueError("field length must match the grid")
        if lattice0 is None:
            lattice0 = LatticeState(np.zeros(params.n_mirrors),
                                    np.zeros(params.n_mirrors))
        if lattice0.n != params.n_mirrors:
            raise ValueError("lattice length must equal n_mirrors")
        self.lattice = lattice0
        self._cache_dtau = None
        self._half_phase = None
        self._osc_prop = None
        self._pump_key = None
        self._pump = None

    @property
    def dtau_max(self) -> float:
        """Step bound 0.1/Omega keeping the frozen-drive mirror step accurate."""
        return 0.1 / self.params.Omega

    def _prepare(self, dtau: float):
        if dtau != self._cache_dtau:
            p = self.params
            self._half_phase = np.exp(0.5 * dtau * (-1.0 + 1j * p.Delta
                                                    - 1j * self.grid.k**2))
            self._chain_half = ChainPropagator(p.n_mirrors, p.rho, p.Omega,
                                               p.abar, p.gamma, 0.5 * dtau)
            self._cache_dtau = dtau

    def pump_now(self, tau: float) -> np.ndarray:
        key = self.schedule.active_beams(tau)
        if key != self._pump_key:
            self._pump = build_pump(self.schedule, self.grid, tau)
            self._pump_key = key
        return self._pump

    def zgrid(self) -> np.ndarray:
        return np.repeat(self.lattice.z, self.params.points_per_mirror)

    def _drive(self, intensity: np.ndarray) -> np.ndarray:
        p = self.params
        drive = coupling_accel_all(self.lattice.z, p.rho, p.Omega, p.abar)
        drive += p.Omega**2 * self.stencil.average(intensity)
        return drive

    def mirror_drive(self) -> np.ndarray:
        """Per-mirror acceleration: elastic coupling plus radiation pressure."""
        return self._drive(np.abs(self.field) ** 2)

    def step(self, dtau: float) -> None:
        """Advance by one split step of size dtau."""
        if dtau <= 0.0:
            raise ValueError("dtau must be positive")
        if dtau > self.dtau_max:
            raise ValueError(f"dtau={dtau:g} exceeds stability bound "
                             f"{self.dtau_max:g} (= 0.1/Omega)")
        self._prepare(dtau)
        pump = self.pump_now(self.tau + 0.5 * dtau)

        # palindromic composition: the chain flows exactly in its eigenbasis
        # for half a step on each side of the nonlinear field update, with
        # the radiation drive frozen at the step boundaries and Z sampled at
        # the midpoint.  A homogeneous steady state sees its exact drive at
        # both ends and stays put to O(dtau^2).
        om2 = self.params.Omega**2
        drive = om2 * self.stencil.average(np.abs(self.field) ** 2)
        f = np.fft.ifft(np.fft.fft(self.field) * self._half_phase)
        self.lattice = self._chain_half.step(self.lattice, drive)
        f = nonlinear_step(f, self.zgrid(), pump, dtau)
        self.field = np.fft.ifft(np.fft.fft(f) * self._half_phase)
        drive = om2 * self.stencil.average(np.abs(self.field) ** 2)
        self.lattice = self._chain_half.step(self.lattice, drive)
        self.tau += dtau

        if not np.isfinite(self.field.real.sum() + self.field.imag.sum()
                           + self.lattice.z.sum()):
            bad = np.flatnonzero(~np.isfinite(self.field))
            idx = int(bad[0]) if bad.size else int(
                np.flatnonzero(~np.isfinite(self.lattice.z))[0])
            raise DivergedError(idx, self.tau)

    def snapshot(self) -> Snapshot:
        return Snapshot(tau=self.tau, xbar=self.grid.x,
                        field=self.field.copy(), zgrid=self.zgrid(),
                        z=self.lattice.z.copy(), v=self.lattice.v.copy(),
                        n_mirrors=self.params.n_mirrors,
                        points_per_mirror=self.params.points_per_mirror)


@dataclass
class SimulationResult:
    """Snapshot series plus run bookkeeping."""

    snapshots: list[Snapshot]
    flags: RunFlags
    params: NormalizedParams
    schedule: PumpSchedule

    @property
    def final(self) -> Snapshot:
        return self.snapshots[-1]


def initial_state(params: NormalizedParams, schedule: PumpSchedule,
                  seed: int, noise_amp: float = 1e-3) -> np.ndarray:
    """Lower-branch field under the holding pump plus complex white noise."""
    grid = Grid1D.for_params(params)
    base = schedule.base_profile(grid.x)
    isol = lowest_branch_intensity(np.abs(base) ** 2, params.Delta)
    field = base / (1.0 - 1j * (params.Delta + isol))
    if noise_amp > 0.0:
        rng = np.random.default_rng(seed)
        field = field + noise_amp * (rng.standard_normal(grid.n)
                                     + 1j * rng.standard_normal(grid.n))
    return field


def simulate(sim, tau_end: float, dtau: float, snap_interval: float = 1.0,
             tol_steady: float = 1e-8, steady_checks: int = 10,
             stop_on_steady: bool = True,
             callback=None) -> SimulationResult:
    """Run sim to tau_end, collecting snapshots every snap_interval.

    The steady flag is raised once max(|dI|, |dZ|)/snap_interval between
    consecutive snapshots stays below tol_steady for ``steady_checks``
    checks in a row; by default the run then stops early.

    Works on any object exposing step/snapshot/tau (lattice or continuum).
    """
    if tau_end <= sim.tau:
        raise ValueError("tau_end must exceed the current time")
    per = max(1, round(snap_interval / dtau))
    snaps = [sim.snapshot()]
    flags = RunFlags()
    quiet = 0
    prev_i = np.abs(snaps[0].field) ** 2
    prev_z = snaps[0].zgrid

    while sim.tau < tau_end - 0.5 * dtau:
        for _ in range(per):
            if sim.tau >= tau_end - 0.5 * dtau:
                break
            sim.step(dtau)
        snap = sim.snapshot()
        snaps.append(snap)
        if callback is not None:
            callback(snap)
        cur_i = np.abs(snap.field) ** 2
        cur_z = snap.zgrid
        elapsed = snap.tau - snaps[-2].tau
        if elapsed > 0:
            rate = max(np.max(np.abs(cur_i - prev_i)),
                       np.max(np.abs(cur_z - prev_z))) / elapsed
            if rate < tol_steady:
                quiet += 1
                if quiet >= steady_checks and not flags.steady:
                    flags.steady = True
                    flags.steady_tau = snap.tau
                    if stop_on_steady:
                        break
            else:
                quiet = 0
        prev_i, prev_z = cur_i, cur_z

    schedule = getattr(sim, "schedule", None)
    return SimulationResult(snapshots=snaps, flags=flags, params=sim.params,
                            schedule=schedule)
