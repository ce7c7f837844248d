"""Classification and protocol tracking on synthetic and simulated states."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from omps import Beam, PumpSchedule
from omps.analysis import (PersistenceReport, Thresholds, bistability_curve,
                           classify, erase_phase_scan, soliton_persistence)
from omps.snapshots import Snapshot


def fold_pumps(delta):
    """Pump powers of the two turning points of the response cubic."""
    disc = math.sqrt(delta**2 - 3.0)
    turning = [(-2.0 * delta + s * disc) / 3.0 for s in (-1.0, 1.0)]
    return tuple(sorted(i * (1.0 + (delta + i) ** 2) for i in turning))


def make_snapshot(intensity, xbar=None, tau=100.0):
    intensity = np.asarray(intensity, float)
    n = intensity.size
    if xbar is None:
        dx = 80.0 / n
        xbar = -40.0 + dx / 2.0 + dx * np.arange(n)
    field = np.sqrt(intensity).astype(complex)
    z = np.zeros(n)
    return Snapshot(tau=tau, xbar=xbar, field=field, zgrid=z, z=z,
                    v=np.zeros(n), n_mirrors=n, points_per_mirror=1)


def test_unsteady_short_circuits():
    snap = make_snapshot(np.ones(64))
    assert classify(snap, steady=False).label == "unsteady"


def test_homogeneous():
    rep = classify(make_snapshot(np.full(128, 0.7)))
    assert rep.label == "homogeneous"
    assert rep.background == pytest.approx(0.7)
    assert classify(make_snapshot(np.zeros(128))).label == "homogeneous"


def test_periodic_reports_the_seeded_wavenumber():
    n = 512
    dx = 80.0 / n
    x = -40.0 + dx / 2.0 + dx * np.arange(n)
    k0 = 2.0 * math.pi * 8 / 80.0
    rep = classify(make_snapshot(1.0 + 0.4 * np.cos(k0 * x), xbar=x))
    assert rep.label == "periodic"
    kgrid = 2.0 * math.pi * np.fft.rfftfreq(n, d=dx)
    assert abs(rep.kstar - k0) <= kgrid[1] + 1e-12


def test_periodic_inside_plateau_only():
    """The window edge must not masquerade as structure when sigma_x crops
    the profile."""
    n = 512
    dx = 80.0 / n
    x = -40.0 + dx / 2.0 + dx * np.arange(n)
    k0 = 2.0 * math.pi * 10 / 80.0
    profile = (1.0 + 0.3 * np.cos(k0 * x)) * np.exp(-0.5 * (x / 23.0) ** 20)
    rep = classify(make_snapshot(profile, xbar=x), sigma_x=23.0)
    assert rep.label == "periodic"
    kgrid = 2.0 * math.pi * np.fft.rfftfreq(n, d=dx)
    assert abs(rep.kstar - k0) <= 2 * kgrid[1]


def test_localized_single_bump():
    n = 512
    dx = 80.0 / n
    x = -40.0 + dx / 2.0 + dx * np.arange(n)
    profile = 0.3 + 2.5 * np.exp(-((x - 5.0) ** 2) / 8.0)
    rep = classify(make_snapshot(profile, xbar=x))
    assert rep.label == "localized"
    assert len(rep.peaks) == 1
    peak = rep.peaks[0]
    assert peak.position == pytest.approx(5.0, abs=dx)
    assert peak.contrast > 2.0
    assert peak.fwhm == pytest.approx(2.0 * math.sqrt(8.0 * math.log(2.0)),
                                      rel=0.1)


def test_two_bumps_still_localized():
    n = 512
    dx = 80.0 / n
    x = -40.0 + dx / 2.0 + dx * np.arange(n)
    profile = (0.3 + 2.5 * np.exp(-((x - 12.0) ** 2) / 8.0)
               + 2.5 * np.exp(-((x + 12.0) ** 2) / 8.0))
    rep = classify(make_snapshot(profile, xbar=x))
    assert rep.label == "localized"
    assert len(rep.peaks) == 2
    assert sorted(p.position for p in rep.peaks) == pytest.approx(
        [-12.0, 12.0], abs=dx)


@given(st.floats(0.1, 1e6))
@settings(max_examples=30, deadline=None)
def test_classification_is_scale_invariant(scale):
    n = 256
    dx = 80.0 / n
    x = -40.0 + dx / 2.0 + dx * np.arange(n)
    profile = 0.3 + 2.5 * np.exp(-((x - 5.0) ** 2) / 8.0)
    base = classify(make_snapshot(profile, xbar=x))
    scaled = classify(make_snapshot(scale * profile, xbar=x))
    assert scaled.label == base.label
    assert scaled.contrast == pytest.approx(base.contrast, rel=1e-9)


def test_bistability_curve_monotone_single_branch():
    pts = bistability_curve(0.0, (0.1, 4.0), 25)
    assert all(p.stable for p in pts)
    by_pump = {}
    for p in pts:
        by_pump.setdefault(p.pump_sq, []).append(p.intensity)
    assert all(len(v) == 1 for v in by_pump.values())


def test_bistability_curve_window_and_stability():
    lo, hi = fold_pumps(-2.2)
    pts = bistability_curve(-2.2, (1.8, 2.8), 201)
    by_pump = {}
    for p in pts:
        by_pump.setdefault(p.pump_sq, []).append(p)
    step = (2.8 - 1.8) / 200
    for pump_sq, group in by_pump.items():
        inside = lo + step < pump_sq < hi - step
        outside = pump_sq < lo - step or pump_sq > hi + step
        if inside:
            assert len(group) == 3
            mid = sorted(group, key=lambda p: p.intensity)[1]
            assert not mid.stable
        elif outside:
            assert len(group) == 1


def test_bistability_curve_zero_pump():
    pts = bistability_curve(-2.2, (0.0, 0.0), 1)
    assert len(pts) == 1
    assert pts[0].intensity == 0.0
    assert pts[0].stable


def synthetic_protocol(hold=False, survive_until=None, disturb=0.0,
                       erase_works=True):
    """Build a snapshot series enacting a write/write/erase protocol."""
    n = 512
    dx = 80.0 / n
    x = -40.0 + dx / 2.0 + dx * np.arange(n)
    off1 = 1e6 if hold else 60.0
    beams = (Beam(amplitude=1.2, center=12.0, width=4.0, tau_on=20.0,
                  tau_off=off1),
             Beam(amplitude=1.2, center=-12.0, width=4.0, tau_on=110.0,
                  tau_off=1e6 if hold else 150.0),
             Beam(amplitude=-1.2, center=12.0, width=4.0, tau_on=210.0,
                  tau_off=1e6 if hold else 250.0))
    sched = PumpSchedule(e0=math.sqrt(1.5), sigma_x=23.0, exponent=20,
                         beams=beams)
    snaps = []
    for tau in np.arange(0.0, 301.0, 2.0):
        profile = np.full(n, 0.33)
        t0 = 20.0 if hold else 60.0
        alive1 = tau >= t0 + 2.0
        if survive_until is not None and tau > survive_until:
            alive1 = False
        if erase_works and tau >= (210.0 if hold else 250.0) + 2.0:
            alive1 = False
        if alive1:
            h = 3.0
            if tau >= (110.0 if hold else 150.0) + 2.0:
                h *= 1.0 + disturb
            profile += h * np.exp(-((x - 12.0) ** 2) / 8.0)
        if tau >= (110.0 if hold else 150.0) + 2.0:
            profile += 3.0 * np.exp(-((x + 12.0) ** 2) / 8.0)
        snaps.append(make_snapshot(profile, xbar=x, tau=float(tau)))
    return snaps, sched


def test_persistence_clean_protocol():
    snaps, sched = synthetic_protocol()
    rep = soliton_persistence(snaps, sched)
    assert rep.written
    assert rep.survived_tau >= 180.0
    assert rep.disturbance_pct == pytest.approx(0.0, abs=1e-9)
    assert rep.erased


def test_persistence_detects_decay():
    snaps, sched = synthetic_protocol(survive_until=100.0)
    rep = soliton_persistence(snaps, sched)
    assert rep.written
    assert 30.0 <= rep.survived_tau <= 45.0


def test_persistence_failed_erase():
    snaps, sched = synthetic_protocol(erase_works=False)
    rep = soliton_persistence(snaps, sched)
    assert rep.written
    assert rep.erased is False


def test_persistence_reports_disturbance():
    snaps, sched = synthetic_protocol(disturb=0.07)
    rep = soliton_persistence(snaps, sched)
    # the tracked height includes the 0.33 background under the bump
    n = 512
    dx = 80.0 / n
    x = -40.0 + dx / 2.0 + dx * np.arange(n)
    g = float(np.max(np.exp(-((x - 12.0) ** 2) / 8.0)))
    expected = 100.0 * 0.07 * 3.0 * g / (0.33 + 3.0 * g)
    assert rep.disturbance_pct == pytest.approx(expected, rel=1e-9)


def test_persistence_held_beams_track_from_switch_on():
    snaps, sched = synthetic_protocol(hold=True)
    rep = soliton_persistence(snaps, sched)
    assert rep.written
    assert rep.survived_tau >= 180.0
    assert rep.erased


def test_persistence_requires_beams():
    snaps, _ = synthetic_protocol()
    bare = PumpSchedule(e0=1.0, sigma_x=23.0, exponent=20)
    with pytest.raises(ValueError):
        soliton_persistence(snaps, bare)


def test_erase_phase_scan_minimum_at_pi():
    """Synthetic residual model: destructive cancellation at phase pi."""
    n = 256
    dx = 80.0 / n
    x = -40.0 + dx / 2.0 + dx * np.arange(n)

    def run(phase):
        # residual peak amplitude |1 + e^{i phase}| of the held write
        amp = abs(1.0 + np.exp(1j * phase))
        profile = 0.33 + 3.0 * amp * np.exp(-((x - 12.0) ** 2) / 8.0)
        return make_snapshot(profile, xbar=x), 12.0, 4.0

    phases = [0.0, math.pi / 2, 3 * math.pi / 4, math.pi,
              5 * math.pi / 4, 3 * math.pi / 2]
    scan = erase_phase_scan(run, phases)
    assert min(scan, key=scan.get) == pytest.approx(math.pi)
    assert scan[math.pi] == 0.0
    assert scan[0.0] > 2.0


def test_fig3_held_protocol_end_to_end(fig3_held):
    """Full write/write/erase run from the shipped preset."""
    res = fig3_held["result"]
    cfg = fig3_held["config"]
    rep = soliton_persistence(res.snapshots, cfg.schedule)
    assert rep.written
    assert rep.disturbance_pct is not None and rep.disturbance_pct <= 5.0
    assert rep.erased
    assert fig3_held["report"].label == "localized"
