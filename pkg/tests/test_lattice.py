"""Mirror-array mechanics: quadrature, exact propagators, chain modes."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from omps.lattice import (LatticeState, quadrature_weights, RadiationStencil,
                          coupling_accel, coupling_accel_all, elastic_energy,
                          oscillator_propagator, step_lattice,
                          ChainPropagator, chain_mode_frequency,
                          chain_mode_shape)


def test_weight_values():
    np.testing.assert_allclose(quadrature_weights(2),
                               np.array([1, 23, 23, 1]) / 48.0, atol=1e-15)
    np.testing.assert_allclose(quadrature_weights(3),
                               np.array([1, 23, 24, 23, 1]) / 72.0,
                               atol=1e-15)
    w11 = quadrature_weights(11)
    assert len(w11) == 13
    assert w11[2] == pytest.approx(24.0 / 264.0, abs=1e-15)


def test_weight_sum_is_exactly_one():
    for m in (2, 3, 5, 11, 24, 97):
        assert math.fsum(quadrature_weights(m)) == 1.0


def test_weights_reject_single_point():
    with pytest.raises(ValueError):
        quadrature_weights(1)


def test_cell_average_exact_for_cubics():
    """The defining property: on a centred grid the stencil reproduces the
    cell average of any cubic exactly (away from the folded ends)."""
    coeffs = (0.3, -1.1, 0.4, 2.0)
    for m in (2, 3, 5, 11):
        n_mirrors = 5
        n = n_mirrors * m
        dx = 1.0 / m                      # pitch 1
        x = -2.5 + (np.arange(n) + 0.5) * dx
        vals = np.polyval(coeffs, x)
        stencil = RadiationStencil(n_mirrors, m)
        got = stencil.average(vals)
        # exact cell average of the cubic over the middle cell [a, a+1]
        anti = np.polyint(np.array(coeffs))
        for j in (1, 2, 3):               # interior mirrors only
            a = -2.5 + j * 1.0
            exact = np.polyval(anti, a + 1.0) - np.polyval(anti, a)
            assert got[j] == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_cell_average_quadrature_order():
    """Error against the analytic cell average falls at least as 1/M^2."""
    n_mirrors = 5
    om = 0.7

    def exact_avg(a, b):
        return (np.sin(om * b + 0.3) - np.sin(om * a + 0.3)) / (om * (b - a)) + 2.0

    errs = []
    ms = (2, 3, 5, 11)
    for m in ms:
        n = n_mirrors * m
        dx = 1.0 / m
        x = -2.5 + (np.arange(n) + 0.5) * dx
        vals = 2.0 + np.cos(om * x + 0.3)
        got = RadiationStencil(n_mirrors, m).average(vals)
        err = max(abs(got[j] - exact_avg(-2.5 + j, -1.5 + j))
                  for j in (1, 2, 3))
        errs.append(err)
    slope = np.polyfit(np.log(ms), np.log(errs), 1)[0]
    assert slope < -1.8


def test_boundary_folding_preserves_constants():
    for m in (2, 5, 11):
        stencil = RadiationStencil(4, m)
        got = stencil.average(np.full(4 * m, 3.7))
        np.testing.assert_allclose(got, 3.7, rtol=1e-14)
        assert np.all(stencil.indices >= 0)
        assert np.all(stencil.indices < 4 * m)


def test_oscillator_propagator_underdamped():
    gamma, Omega, dt = 0.1, 10.0, 0.37
    p00, p01, p10, p11 = oscillator_propagator(gamma, Omega, dt)
    wd = math.sqrt(Omega**2 - gamma**2 / 4.0)
    decay = math.exp(-0.5 * gamma * dt)
    c, s = math.cos(wd * dt), math.sin(wd * dt)
    assert p00 == pytest.approx(decay * (c + 0.5 * gamma * s / wd), rel=1e-12)
    assert p01 == pytest.approx(decay * s / wd, rel=1e-12)
    assert p10 == pytest.approx(-decay * Omega**2 * s / wd, rel=1e-12)
    assert p11 == pytest.approx(decay * (c - 0.5 * gamma * s / wd), rel=1e-12)


def test_oscillator_propagator_overdamped_no_oscillation():
    """Heavily damped motion from rest decays without ever crossing zero
    and follows the biexponential solution exactly."""
    gamma, Omega = 50.0, 2.0
    root = math.sqrt(gamma**2 / 4.0 - Omega**2)
    lam1, lam2 = -gamma / 2.0 + root, -gamma / 2.0 - root
    state = LatticeState(z=np.array([1.0]), v=np.array([0.0]))
    drive = np.zeros(1)
    for step in range(1, 401):
        state = step_lattice(state, drive, 0.05, gamma, Omega)
        assert state.z[0] > 0.0
        t = 0.05 * step
        exact = (lam2 * math.exp(lam1 * t) - lam1 * math.exp(lam2 * t)) \
            / (lam2 - lam1)
        assert state.z[0] == pytest.approx(exact, rel=1e-10)


def test_oscillator_propagator_array_frequencies():
    omegas = np.array([2.0, 10.0, 31.0])
    p00, p01, p10, p11 = oscillator_propagator(0.3, omegas, 0.11)
    for i, om in enumerate(omegas):
        q00, q01, q10, q11 = oscillator_propagator(0.3, float(om), 0.11)
        assert p00[i] == pytest.approx(q00, rel=1e-14)
        assert p01[i] == pytest.approx(q01, rel=1e-14)
        assert p10[i] == pytest.approx(q10, rel=1e-14)
        assert p11[i] == pytest.approx(q11, rel=1e-14)


def test_free_oscillator_energy_decay():
    """Without drive the oscillator energy decays like exp(-gamma*tau) on
    period average; the exact propagator keeps that over many steps."""
    gamma, Omega = 0.1, 10.0
    dt = 2.0 * math.pi / Omega / 1000.0
    state = LatticeState(z=np.array([1.0]), v=np.array([0.0]))
    drive = np.zeros(1)
    period = round(2.0 * math.pi / Omega / dt)
    e0 = None
    for cycle in range(3):
        acc = 0.0
        for _ in range(period):
            state = step_lattice(state, drive, dt, gamma, Omega)
            acc += 0.5 * state.v[0] ** 2 + 0.5 * Omega**2 * state.z[0] ** 2
        acc /= period
        if e0 is None:
            e0 = acc
        else:
            expected = e0 * math.exp(-gamma * cycle * 2.0 * math.pi / Omega)
            assert acc == pytest.approx(expected, rel=2e-3)


def test_step_lattice_fixed_point():
    """Constant drive has the exact equilibrium z = drive/Omega^2."""
    Omega = 10.0
    drive = np.array([3.0, -1.0, 0.5])
    z_eq = drive / Omega**2
    state = LatticeState(z=z_eq.copy(), v=np.zeros(3))
    out = step_lattice(state, drive, 0.7, 0.1, Omega)
    np.testing.assert_allclose(out.z, z_eq, rtol=1e-13)
    np.testing.assert_allclose(out.v, 0.0, atol=1e-13)


def test_coupling_accel_forms_agree():
    rng = np.random.default_rng(3)
    z = rng.standard_normal(9)
    allv = coupling_accel_all(z, 1.13, 10.0, 2.0)
    for j in range(9):
        assert allv[j] == pytest.approx(coupling_accel(z, j, 1.13, 10.0, 2.0),
                                        rel=1e-12, abs=1e-12)


def test_coupling_vanishes_for_uniform_displacement():
    z = np.full(12, 0.8)
    np.testing.assert_allclose(coupling_accel_all(z, 1.13, 10.0, 2.0), 0.0,
                               atol=1e-14)
    assert elastic_energy(z, 1.13, 10.0, 2.0) == 0.0


def test_chain_mode_shapes():
    n = 16
    shapes = [chain_mode_shape(n, m) for m in range(n)]
    # uniform zero mode, orthogonality of the rest
    np.testing.assert_allclose(shapes[0], shapes[0][0], rtol=1e-14)
    for a in range(n):
        for b in range(a + 1, n):
            assert abs(shapes[a] @ shapes[b]) < 1e-10


def test_chain_mode_zero_frequency_is_bare():
    assert chain_mode_frequency(10, 0, 1.13, 10.0, 2.0) == pytest.approx(10.0)


def test_chain_frequencies_increase_with_mode():
    f = [chain_mode_frequency(20, m, 1.13, 10.0, 4.0) for m in range(20)]
    assert all(b > a for a, b in zip(f, f[1:]))


def test_chain_propagator_matches_fine_stepping():
    """One exact chain step equals many small frozen-coupling steps."""
    n, rho, Omega, abar, gamma = 12, 1.13, 10.0, 2.0, 0.1
    rng = np.random.default_rng(11)
    z0 = 0.1 * rng.standard_normal(n)
    v0 = 0.1 * rng.standard_normal(n)
    drive = 0.5 + 0.2 * rng.standard_normal(n)
    dt = 0.05

    chain = ChainPropagator(n, rho, Omega, abar, gamma, dt)
    coarse = chain.step(LatticeState(z0.copy(), v0.copy()), drive)

    fine = LatticeState(z0.copy(), v0.copy())
    sub = 4000
    h = dt / sub
    prop = oscillator_propagator(gamma, Omega, h)
    for _ in range(sub):
        total = drive + coupling_accel_all(fine.z, rho, Omega, abar)
        fine = step_lattice(fine, total, h, gamma, Omega, propagator=prop)
    # the comparison is limited by the frozen-coupling error of the fine
    # reference itself, which shrinks like 1/sub
    np.testing.assert_allclose(coarse.z, fine.z, atol=5e-6)
    np.testing.assert_allclose(coarse.v, fine.v, atol=5e-5)


def test_chain_propagator_fixed_point():
    """Uniform drive leaves the uniform equilibrium exactly in place."""
    n, Omega = 8, 10.0
    drive = np.full(n, 2.0)
    z_eq = drive / Omega**2
    chain = ChainPropagator(n, 1.13, Omega, 2.0, 0.1, 0.3)
    out = chain.step(LatticeState(z_eq.copy(), np.zeros(n)), drive)
    np.testing.assert_allclose(out.z, z_eq, rtol=1e-12)
    np.testing.assert_allclose(out.v, 0.0, atol=1e-12)


def test_measured_mode_frequency_matches_formula():
    """Ring a single chain mode and fit its frequency from zero crossings;
    the stencil and the closed form must agree."""
    n, rho, Omega, abar = 20, 1.13, 10.0, 4.0
    m = 7
    shape = chain_mode_shape(n, m)
    state = LatticeState(z=1e-3 * shape, v=np.zeros(n))
    dt = 2e-5
    prop = oscillator_propagator(0.0, Omega, dt)
    amps = [1e-3]
    for _ in range(round(1.5 / dt)):
        drive = coupling_accel_all(state.z, rho, Omega, abar)
        state = step_lattice(state, drive, dt, 0.0, Omega, propagator=prop)
        amps.append((state.z @ shape) / (shape @ shape))
    amps = np.asarray(amps)
    s = np.sign(amps)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    t_cross = (idx - amps[idx] / (amps[idx + 1] - amps[idx])) * dt
    omega = math.pi / np.mean(np.diff(t_cross))
    assert omega == pytest.approx(chain_mode_frequency(n, m, rho, Omega, abar),
                                  rel=1e-4)


@given(st.integers(2, 40))
@settings(max_examples=40, deadline=None)
def test_stencil_row_sums(m):
    stencil = RadiationStencil(6, m)
    got = stencil.average(np.ones(6 * m))
    np.testing.assert_allclose(got, 1.0, rtol=1e-13)


@given(st.data())
@settings(max_examples=30, deadline=None)
def test_undamped_chain_conserves_energy(data):
    n = data.draw(st.integers(4, 16))
    rho, Omega, abar = 1.13, 10.0, 2.0
    rng = np.random.default_rng(data.draw(st.integers(0, 2**31)))
    state = LatticeState(z=0.3 * rng.standard_normal(n),
                         v=0.5 * rng.standard_normal(n))

    def energy(s):
        kinetic = 0.5 * float(s.v @ s.v)
        potential = 0.5 * Omega**2 * float(s.z @ s.z)
        return kinetic + potential + elastic_energy(s.z, rho, Omega, abar)

    chain = ChainPropagator(n, rho, Omega, abar, 0.0, 0.02)
    drive = np.zeros(n)
    e0 = energy(state)
    for _ in range(100):
        state = chain.step(state, drive)
    assert energy(state) == pytest.approx(e0, rel=1e-10)
