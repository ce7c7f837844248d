"""Cavity model: physical parameters, normalization, homogeneous steady
states and their linear stability.

The normalized field/mirror equations are

    dF/dtau = (-1 + i*Delta + i*d2/dxbar2 + i*Z) F + E
    d2z_j/dtau2 + gamma dz_j/dtau + Omega^2 z_j =
        (rho^2 Omega^2 / abar^2) sum_nn (z_l - z_j) + Omega^2 <|F|^2>_j

with time in cavity decay units 1/gamma_c and transverse lengths in the
diffraction length l_c = sqrt(2L/(k_L T)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import c, epsilon_0, hbar


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional cavity and micromirror-array parameters (SI units).

    Attributes
    ----------
    length : float
        Cavity length L (m).
    transmission : float
        Intensity transmission T of the coupling mirror, 0 < T < 1.
    k_laser : float
        Driving laser wavenumber k_L (1/m).
    k_cavity : float
        Wavenumber of the driven cavity resonance k_c (1/m).
    mass : float
        Mass m of one micromirror (kg).
    gamma_m : float
        Mechanical damping rate (1/s).
    omega_m : float
        Mechanical resonance frequency Omega_m (rad/s).
    kappa_perp : float
        Inter-mirror coupling spring constant (N/m).
    pitch : float
        Micromirror array pitch a (m).
    gap : float
        Gap between adjacent micromirrors (m); must stay below the pitch.
    """

    length: float
    transmission: float
    k_laser: float
    k_cavity: float
    mass: float
    gamma_m: float
    omega_m: float
    kappa_perp: float
    pitch: float
    gap: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.transmission < 1.0:
            raise ValueError(f"transmission must lie in (0, 1), got {self.transmission}")
        for name in ("length", "k_laser", "k_cavity", "mass", "omega_m", "pitch"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.gamma_m < 0.0 or self.kappa_perp < 0.0:
            raise ValueError("gamma_m and kappa_perp must be non-negative")
        if not 0.0 <= self.gap < self.pitch:
            raise ValueError("gap must satisfy 0 <= gap < pitch")

    @property
    def omega_cavity(self) -> float:
        return self.k_cavity * c

    @property
    def quantum_field_scale(self) -> float:
        """Single-photon field scale sqrt(hbar*omega_c / (4 eps0 L)) in V/m
        per unit cross-section normalization; used for intensity conversions."""
        return np.sqrt(hbar * self.omega_cavity / (4.0 * epsilon_0 * self.length))


@dataclass(frozen=True)
class DerivedScales:
    """Scales produced by the normalization chain.

    gamma_c       cavity decay rate cT/(4L)              (1/s)
    t_round       round-trip time 2L/c                   (s)
    l_c           diffraction length sqrt(2L/(k_L T))    (m)
    v_sound       transverse sound speed a*sqrt(kappa_perp/m)  (m/s)
    sigma_mass    line mass density m/a^2... m per pitch squared (kg/m^2)
    z_scale       displacement normalization 4 k_L / T   (1/m, z = scale*q)
    field_scale   pump/field normalization prefactor
    """

    gamma_c: float
    t_round: float
    l_c: float
    v_sound: float
    sigma_mass: float
    z_scale: float
    field_scale: float


@dataclass(frozen=True)
class NormalizedParams:
    """Dimensionless parameters of the coupled field/lattice equations.

    gamma, Omega are the mechanical damping and frequency in units of the
    cavity decay rate; Delta is the detuning (omega_L - omega_c)/gamma_c;
    rho the ratio of transverse sound speed to Omega_m*l_c.  n_mirrors and
    points_per_mirror fix the transverse grid: the window spans
    [-xbar_max, xbar_max) with n_mirrors*points_per_mirror samples.
    """

    gamma: float
    Omega: float
    Delta: float
    rho: float
    n_mirrors: int
    points_per_mirror: int
    xbar_max: float

    def __post_init__(self):
        if self.gamma < 0 or self.Omega <= 0 or self.rho < 0:
            raise ValueError("need gamma >= 0, Omega > 0, rho >= 0")
        if self.n_mirrors < 1:
            raise ValueError("n_mirrors must be >= 1")
        if self.points_per_mirror < 2:
            raise ValueError("points_per_mirror must be >= 2")
        if self.xbar_max <= 0:
            raise ValueError("xbar_max must be positive")

    @property
    def abar(self) -> float:
        """Micromirror pitch in units of l_c; n_mirrors*abar tiles the window."""
        return 2.0 * self.xbar_max / self.n_mirrors

    @property
    def n_points(self) -> int:
        return self.n_mirrors * self.points_per_mirror


def derive_scales(phys: PhysicalParams) -> DerivedScales:
    """Compute the normalization scales from dimensional parameters."""
    gamma_c = c * phys.transmission / (4.0 * phys.length)
    t_round = 2.0 * phys.length / c
    l_c = np.sqrt(2.0 * phys.length / (phys.k_laser * phys.transmission))
    omega_perp = np.sqrt(phys.kappa_perp / phys.mass)
    v_sound = phys.pitch * omega_perp
    sigma_mass = phys.mass / phys.pitch**2
    z_scale = 4.0 * phys.k_laser / phys.transmission
    field_scale = (2.0 / phys.omega_m) * np.sqrt(
        2.0 * hbar * phys.k_cavity * phys.k_laser * phys.pitch
        / (t_round * phys.mass * phys.transmission)
    )
    return DerivedScales(
        gamma_c=gamma_c,
        t_round=t_round,
        l_c=l_c,
        v_sound=v_sound,
        sigma_mass=sigma_mass,
        z_scale=z_scale,
        field_scale=field_scale,
    )


def normalize(
    phys: PhysicalParams,
    omega_laser: float,
    n_mirrors: int,
    points_per_mirror: int,
) -> tuple[NormalizedParams, DerivedScales]:
    """Map dimensional parameters to the dimensionless set.

    The transverse window is the array extent n_mirrors*pitch, centred on
    zero, expressed in diffraction lengths.
    """
    scales = derive_scales(phys)
    params = NormalizedParams(
        gamma=phys.gamma_m / scales.gamma_c,
        Omega=phys.omega_m / scales.gamma_c,
        Delta=(omega_laser - phys.omega_cavity) / scales.gamma_c,
        rho=scales.v_sound / (phys.omega_m * scales.l_c),
        n_mirrors=n_mirrors,
        points_per_mirror=points_per_mirror,
        xbar_max=n_mirrors * phys.pitch / (2.0 * scales.l_c),
    )
    return params, scales


def photon_flux(amplitude: complex | np.ndarray) -> float | np.ndarray:
    """Photon flux |A|^2 carried by a traveling-wave amplitude."""
    return np.abs(amplitude) ** 2


def radiation_pressure(amplitude: complex | np.ndarray, k_cavity: float, t_round: float):
    """Radiation-pressure force hbar*k_c/t_c * |A|^2 on a perfect reflector."""
    if k_cavity <= 0 or t_round <= 0:
        raise ValueError("k_cavity and t_round must be positive")
    return hbar * k_cavity / t_round * np.abs(amplitude) ** 2


# -- homogeneous steady states ------------------------------------------------


@dataclass
class HomogeneousState:
    """One homogeneous steady state: I solves I*(1+(Delta+I)^2) = E0^2,
    F = E0/(1 - i(Delta+I)), Z = I."""

    intensity: float
    field: complex
    displacement: float
    pump: float
    stable: bool | None = None


def _cubic(I, delta, e0_sq):
    return I * (1.0 + (delta + I) ** 2) - e0_sq


def hss_intensities(delta: float, e0_sq: float) -> np.ndarray:
    """All non-negative intensity roots of I*(1+(Delta+I)^2) = E0^2, ascending.

    The resonance cubic is monotone between its critical points
    I_pm = (-2*Delta +- sqrt(Delta^2-3))/3, so bracketing on the monotone
    intervals finds every root; three solutions exist only for
    Delta < -sqrt(3) and pump inside the fold.
    """
    if e0_sq < 0:
        raise ValueError("pump intensity must be non-negative")
    if e0_sq == 0.0:
        return np.array([0.0])

    from scipy.optimize import brentq

    hi = max(20.0, 4.0 * e0_sq, 2.0 * abs(delta))
    edges = [0.0]
    disc = delta * delta - 3.0
    if disc > 0.0:
        for crit in ((-2.0 * delta - np.sqrt(disc)) / 3.0,
                     (-2.0 * delta + np.sqrt(disc)) / 3.0):
            if 0.0 < crit < hi:
                edges.append(crit)
    edges.append(hi)
    edges.sort()

    roots = []
    scale = max(1.0, e0_sq)
    for lo, up in zip(edges[:-1], edges[1:]):
        glo, gup = _cubic(lo, delta, e0_sq), _cubic(up, delta, e0_sq)
        if glo == 0.0:
            roots.append(lo)
        elif glo * gup < 0.0:
            roots.append(brentq(_cubic, lo, up, args=(delta, e0_sq),
                                xtol=1e-14, rtol=1e-14))
    if _cubic(edges[-1], delta, e0_sq) == 0.0:
        roots.append(edges[-1])
    # fold tangency: a critical point sitting on the axis is a double root
    for e in edges[1:-1]:
        if abs(_cubic(e, delta, e0_sq)) <= 1e-12 * scale and \
                not any(abs(e - r) < 1e-9 for r in roots):
            roots.append(e)

    roots = np.array(sorted(set(roots)))
    resid = np.abs(_cubic(roots, delta, e0_sq))
    if np.any(resid > 1e-10 * scale):
        raise RuntimeError(f"steady-state root residual {resid.max():.3e} too large")
    return roots


def hss_field(intensity: float, delta: float, e0: float) -> HomogeneousState:
    """Homogeneous state for a given intensity root of the resonance cubic."""
    if e0 < 0:
        raise ValueError("pump amplitude must be non-negative")
    resid = abs(_cubic(intensity, delta, e0 * e0))
    if resid > 1e-8 * max(1.0, e0 * e0):
        raise ValueError(
            f"intensity {intensity} is not a steady state at Delta={delta}, "
            f"E0^2={e0 * e0} (residual {resid:.3e})")
    field = e0 / (1.0 - 1j * (delta + intensity))
    return HomogeneousState(intensity=intensity, field=field,
                            displacement=intensity, pump=e0)


def stability_matrix(hss: HomogeneousState, kbar: float,
                     params: NormalizedParams) -> np.ndarray:
    """Real 4x4 Jacobian of perturbations (Re dF, Im dF, dZ, dW) at
    transverse wavenumber kbar about a homogeneous state."""
    mu = params.Delta + hss.displacement - kbar * kbar
    fr, fi = hss.field.real, hss.field.imag
    om2 = params.Omega**2
    om2k = om2 * (1.0 + params.rho**2 * kbar * kbar)
    return np.array([
        [-1.0, -mu, -fi, 0.0],
        [mu, -1.0, fr, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [2.0 * om2 * fr, 2.0 * om2 * fi, -om2k, -params.gamma],
    ])


def linear_stability(hss: HomogeneousState, kbar: float,
                     params: NormalizedParams) -> np.ndarray:
    """Growth eigenvalues at wavenumber kbar, sorted by descending real part."""
    lam = np.linalg.eigvals(stability_matrix(hss, kbar, params))
    return lam[np.argsort(-lam.real)]


def max_growth_rate(hss: HomogeneousState, kbars: np.ndarray,
                    params: NormalizedParams) -> np.ndarray:
    """Largest Re(lambda) for each wavenumber in kbars."""
    return np.array([linear_stability(hss, k, params)[0].real for k in kbars])
