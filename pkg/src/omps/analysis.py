"""State classification and structure tracking.

classify() sorts a snapshot into homogeneous / periodic / localized /
mixed / unsteady using only relative measures, so rescaling the intensity
leaves the verdict unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks, peak_widths

from .field import PumpSchedule
from .model import NormalizedParams, hss_field, hss_intensities, linear_stability
from .snapshots import Snapshot


@dataclass(frozen=True)
class Thresholds:
    """Knobs of the classification tree.

    homog_var      relative intensity variance below which the plateau is flat
    contrast_min   peak/background ratio a localized structure must beat
    plateau_frac   fraction of sigma_x treated as the usable plateau
    spectral_frac  share of non-dc power a single mode needs for 'periodic'
    max_peaks      localized verdict allows at most this many peaks
    """

    homog_var: float = 1e-4
    contrast_min: float = 2.0
    plateau_frac: float = 0.8
    spectral_frac: float = 0.5
    max_peaks: int = 8


@dataclass
class Peak:
    position: float
    height: float
    fwhm: float
    contrast: float


@dataclass
class PatternReport:
    label: str
    kstar: float | None = None
    peaks: list[Peak] = field(default_factory=list)
    background: float = 0.0
    contrast: float = 0.0


def _plateau_mask(x: np.ndarray, sigma_x: float | None, frac: float) -> np.ndarray:
    if sigma_x is None or not np.isfinite(sigma_x):
        return np.ones_like(x, dtype=bool)
    return np.abs(x) < frac * sigma_x


def classify(snapshot: Snapshot, thresholds: Thresholds = Thresholds(),
             sigma_x: float | None = None, steady: bool = True) -> PatternReport:
    """Decision tree over the intensity profile.

    Runs that never settled are 'unsteady'.  A flat plateau is
    'homogeneous'; a single dominant transverse mode is 'periodic' with its
    wavenumber in kstar; a handful of well-separated high-contrast maxima
    is 'localized'; everything else is 'mixed'.
    """
    if not steady:
        return PatternReport(label="unsteady")

    x = snapshot.xbar
    mask = _plateau_mask(x, sigma_x, thresholds.plateau_frac)
    if mask.sum() < 8:
        mask = np.ones_like(x, dtype=bool)
    intensity = snapshot.intensity[mask]
    xm = x[mask]
    mean = float(np.mean(intensity))
    if mean == 0.0:
        return PatternReport(label="homogeneous", background=0.0)

    relvar = float(np.var(intensity)) / mean**2
    if relvar < thresholds.homog_var:
        return PatternReport(label="homogeneous", background=mean)

    # spectral test on the detrended plateau
    window = np.hanning(intensity.size)
    spec = np.abs(np.fft.rfft((intensity - mean) * window)) ** 2
    spec[0] = 0.0
    total = float(spec.sum())
    kgrid = 2.0 * np.pi * np.fft.rfftfreq(intensity.size, d=xm[1] - xm[0])
    peak_bin = int(np.argmax(spec))
    pooled = float(spec[max(0, peak_bin - 1):peak_bin + 2].sum())
    periodic = total > 0 and pooled / total > thresholds.spectral_frac

    background = float(np.median(intensity))
    peaks: list[Peak] = []
    if background > 0:
        idx, props = find_peaks(
            intensity,
            height=thresholds.contrast_min * background,
            prominence=(thresholds.contrast_min - 1.0) * background)
        if idx.size:
            widths = peak_widths(intensity, idx, rel_height=0.5)[0]
            dx = xm[1] - xm[0]
            for i, w, h in zip(idx, widths, props["peak_heights"]):
                peaks.append(Peak(position=float(xm[i]), height=float(h),
                                  fwhm=float(w * dx),
                                  contrast=float(h / background)))
    contrast = max((p.contrast for p in peaks), default=0.0)

    if periodic and len(peaks) > thresholds.max_peaks:
        return PatternReport(label="periodic", kstar=float(kgrid[peak_bin]),
                             peaks=peaks, background=background,
                             contrast=contrast)
    if 1 <= len(peaks) <= thresholds.max_peaks:
        return PatternReport(label="localized", peaks=peaks,
                             background=background, contrast=contrast)
    if periodic:
        return PatternReport(label="periodic", kstar=float(kgrid[peak_bin]),
                             peaks=peaks, background=background,
                             contrast=contrast)
    return PatternReport(label="mixed", peaks=peaks, background=background,
                         contrast=contrast)


# -- bistability --------------------------------------------------------------


@dataclass
class BistabilityPoint:
    pump_sq: float
    intensity: float
    stable: bool


def bistability_curve(delta: float, pump_sq_range: tuple[float, float],
                      n_samples: int, params: NormalizedParams | None = None,
                      ) -> list[BistabilityPoint]:
    """Steady-state intensities over a pump scan with k=0 stability flags."""
    if params is None:
        params = NormalizedParams(gamma=0.1, Omega=10.0, Delta=delta, rho=1.0,
                                  n_mirrors=1, points_per_mirror=2, xbar_max=1.0)
    lo, hi = pump_sq_range
    points = []
    for e0_sq in np.linspace(lo, hi, n_samples):
        for root in hss_intensities(delta, e0_sq):
            state = hss_field(root, delta, np.sqrt(e0_sq))
            lam = linear_stability(state, 0.0, params)
            points.append(BistabilityPoint(pump_sq=float(e0_sq),
                                           intensity=float(root),
                                           stable=bool(lam[0].real < 0.0)))
    return points


# -- write/erase tracking -----------------------------------------------------


@dataclass
class PersistenceReport:
    """Outcome of a write(/write/erase) protocol."""

    written: bool
    survived_tau: float
    disturbance_pct: float | None = None
    erased: bool | None = None


def _peak_height_near(snapshot: Snapshot, center: float, halfwidth: float,
                      thresholds: Thresholds) -> float | None:
    """Height of a qualifying intensity peak within halfwidth of center."""
    sel = np.abs(snapshot.xbar - center) <= halfwidth
    if not sel.any():
        return None
    intensity = snapshot.intensity
    background = float(np.median(intensity))
    if background <= 0:
        return None
    local = intensity[sel]
    peak = float(local.max())
    inner = local.argmax()
    if 0 < inner < local.size - 1 and peak >= thresholds.contrast_min * background:
        return peak
    return None


def soliton_persistence(snapshots: list[Snapshot], schedule: PumpSchedule,
                        thresholds: Thresholds = Thresholds(),
                        settle: float = 5.0) -> PersistenceReport:
    """Track written structures through a beam protocol.

    The first (zero-phase) beam writes a structure; it counts as written if
    a qualifying peak sits near its centre after the beam plus settling
    time, and survived_tau measures how long that peak persists afterwards.
    A beam held past the final snapshot is tracked from switch-on instead,
    so holding protocols report presence during the hold.  A second write's
    disturbance is the maximal relative change of the first peak's height
    after it.  A beam whose phase is within pi/2 of pi is an eraser:
    erased reports whether the structure at its centre is gone by the
    final snapshot.
    """
    beams = sorted(schedule.beams, key=lambda b: b.tau_on)
    if not beams:
        raise ValueError("schedule has no address beams to track")

    def is_erase(b):
        return abs(abs(np.angle(b.amplitude)) - np.pi) < 0.5 * np.pi

    writes = [b for b in beams if not is_erase(b)]
    erases = [b for b in beams if is_erase(b)]
    if not writes:
        raise ValueError("schedule has no write beam")
    first = writes[0]
    halfwidth = 3.0 * first.width
    tau_last = snapshots[-1].tau

    def track_start(beam):
        return beam.tau_off if beam.tau_off <= tau_last else beam.tau_on

    def height_series(beam):
        out = []
        for s in snapshots:
            if s.tau >= track_start(beam) + settle:
                out.append((s.tau, _peak_height_near(s, beam.center, halfwidth,
                                                     thresholds)))
        return out

    series = height_series(first)
    written = any(h is not None for _, h in series)
    survived = 0.0
    if written:
        t0 = track_start(first)
        last = t0
        for t, h in series:
            if h is None:
                break
            last = t
        survived = last - t0

    disturbance = None
    if len(writes) > 1 and written:
        second = writes[1]
        # deliberate erasing is not disturbance, so the window closes when
        # the first erase beam switches on
        until = min((b.tau_on for b in erases), default=np.inf)
        before = [h for t, h in series if t < second.tau_on and h is not None]
        after = [h for t, h in series
                 if second.tau_on <= t < until and h is not None]
        if before and after:
            ref = before[-1]
            disturbance = 100.0 * max(abs(h - ref) / ref for h in after)

    erased = None
    if erases:
        target = erases[-1]
        final = snapshots[-1]
        erased = (final.tau >= track_start(target) + settle and
                  _peak_height_near(final, target.center, 3.0 * target.width,
                                    thresholds) is None)

    return PersistenceReport(written=written, survived_tau=survived,
                             disturbance_pct=disturbance, erased=erased)


def erase_phase_scan(run_fn, phases) -> dict[float, float]:
    """Residual contrast at the erase site as a function of the erase phase.

    run_fn(phase) must run the write/erase protocol and return the final
    snapshot plus the erase-beam centre and width: (snapshot, center, width).
    """
    out = {}
    thresholds = Thresholds()
    for phase in phases:
        snap, center, width = run_fn(phase)
        h = _peak_height_near(snap, center, 3.0 * width, thresholds)
        background = float(np.median(snap.intensity))
        out[float(phase)] = 0.0 if h is None else h / max(background, 1e-300)
    return out
