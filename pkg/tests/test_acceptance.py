"""End-to-end gate: one test per shipped guarantee, at the advertised
tolerance. Each test prints as its own pass/fail line; the per-module suites
hold the finer-grained variants."""

import csv
import math
import time

import numpy as np
import pytest
from scipy.special import jv

from conftest import frozen_energy
from radiance.cli import main as cli_main
from radiance.current_series import current_fourier_series
from radiance.kinematics import (
    FieldConfig,
    ParticleParams,
    PhaseWindow,
    Polarization,
    momentum,
    quasimomentum,
    rest_frame_pminus,
    time_from_phase,
)
from radiance.oracle import current_fourier_direct
from radiance.quadrature import GridConfig
from radiance.specfun import bessel_j_table, generalized_bessel, generalized_bessel_table
from radiance.spectrum_circular import (
    classical_rate_circular,
    energy_circular,
    max_energy_circular,
    rest_frame_rate_circular,
    schott_rate,
    spectral_density_circular,
)
from radiance.spectrum_linear import (
    classical_rate_linear,
    energy_linear,
    max_energy_linear,
    nikishov_ritus_rate,
    rate_linear,
    spectral_density_linear,
)

XIS = (0.1, 0.5, 1.0)
TEN_PI = 10.0 * math.pi


def field(pol, xi):
    if pol == "circular":
        return FieldConfig(polarization=Polarization.CIRCULAR, xi=xi, handedness=1)
    return FieldConfig(polarization=Polarization.LINEAR, xi=xi)


def matrix_pminus(f, tag):
    return 1.0 if tag == "unit" else rest_frame_pminus(f)


def test_criterion_01_currents_match_direct_quadrature():
    t0 = time.monotonic()
    k_points = ((0.9, 0.4, 0.7), (0.9, 1.3, 2.1), (2.3, 0.4, 5.0), (2.3, 2.2, 0.0))
    worst = 0.0
    worst_at = None
    for pol in ("circular", "linear"):
        for xi in XIS:
            f = field(pol, xi)
            for tag in ("unit", "rest"):
                p = ParticleParams(p_minus=matrix_pminus(f, tag))
                for dphi in (2.0 * math.pi, TEN_PI):
                    w = PhaseWindow(0.0, dphi)
                    for k in k_points:
                        s = current_fourier_series(f, p, k, w)
                        d = current_fourier_direct(f, p, k, w)
                        sc = np.array([s.j0, s.jx, s.jy, s.jz])
                        dc = np.array([d.j0, d.jx, d.jy, d.jz])
                        rel = float(np.max(np.abs(sc - dc))) / float(np.max(np.abs(dc)))
                        if rel > worst:
                            worst, worst_at = rel, (pol, xi, tag, dphi, k)
    elapsed = time.monotonic() - t0
    assert worst <= 1e-6, f"worst component mismatch {worst:.3e} at {worst_at}"
    assert elapsed < 300.0


@pytest.mark.parametrize("pol", ["circular", "linear"])
def test_criterion_02_energies_match_direct_quadrature(pol):
    t0 = time.monotonic()
    energy_fn = energy_circular if pol == "circular" else energy_linear
    lines = []
    worst = 0.0
    for xi in XIS:
        f = field(pol, xi)
        for tag in ("unit", "rest"):
            p = ParticleParams(p_minus=matrix_pminus(f, tag))
            ref = frozen_energy("circ" if pol == "circular" else "lin", xi, tag, TEN_PI)
            res = energy_fn(f, p, PhaseWindow(0.0, TEN_PI))
            rel = abs(res.total - ref["w_minkowski"]) / abs(ref["w_minkowski"])
            worst = max(worst, rel)
            lines.append(f"xi={xi} {tag}: series={res.total:.9g} direct={ref['w_minkowski']:.9g} rel={rel:.3e}")
    elapsed = time.monotonic() - t0
    assert elapsed < 600.0
    assert worst <= 1e-4, "series vs direct quadrature at 10 pi:\n" + "\n".join(lines)


def test_criterion_03_long_window_rates_reach_classical_limits():
    xi = 0.3
    w = PhaseWindow(0.0, 400.0 * math.pi)
    fc = field("circular", xi)
    got_c = rest_frame_rate_circular(fc, w).total
    want_c = schott_rate(xi).total
    assert abs(got_c - want_c) / want_c <= 1e-2

    fl = field("linear", xi)
    p = ParticleParams(p_minus=rest_frame_pminus(fl))
    # the long-window omega grid is dense, so economize on angles and accept
    # a quadrature estimate far below the 1% bar but above the library default
    cfg = GridConfig(theta_points=8, phi_points=8, rel_tol=1e-4)
    got_l = rate_linear(fl, p, w, cfg).total
    want_l = nikishov_ritus_rate(xi).total
    assert abs(got_l - want_l) / want_l <= 1e-2


def test_criterion_04_factor_two_envelope_relations():
    w = PhaseWindow(0.0, 30.0 * math.pi)
    for xi in (0.3, 1.0):
        fc = field("circular", xi)
        p = ParticleParams(p_minus=1.0)
        dt = time_from_phase(fc, p, w).value
        got = max_energy_circular(fc, p, w) / dt
        want = 2.0 * classical_rate_circular(fc, p).total
        assert got == pytest.approx(want, rel=1e-3)

        fl = field("linear", xi)
        got = max_energy_linear(fl, p, w) / w.delta_phi
        want = 2.0 * classical_rate_linear(fl, p).total
        assert got == pytest.approx(want, rel=1e-3)


def test_criterion_05_dipole_limits():
    xi = 0.01
    circ = classical_rate_circular(field("circular", xi), ParticleParams(p_minus=1.0))
    assert abs(circ.total / xi**2 - 2.0 / 3.0) <= 1e-3
    lin = nikishov_ritus_rate(xi)
    assert abs(lin.total / xi**2 - 1.0 / 3.0) <= 5e-4


def walk_width(omega, dens):
    peak = int(np.argmax(dens))
    right = peak
    while right + 1 < dens.size and dens[right + 1] < dens[right]:
        right += 1
    left = peak
    while left - 1 >= 0 and dens[left - 1] < dens[left]:
        left -= 1
    return peak, omega[right] - omega[left]


def test_criterion_06_resonance_peaks_and_widths():
    dphi = 100.0 * math.pi
    w = PhaseWindow(0.0, dphi)

    fc = field("circular", 0.5)
    pc = ParticleParams(p_minus=rest_frame_pminus(fc))
    dt = time_from_phase(fc, pc, w).value
    half = 3.0 * 2.0 * math.pi / dphi
    omega = np.linspace(1.0 - half, 1.0 + half, 241)
    dens = spectral_density_circular(fc, pc, w, omega)
    peak, width = walk_width(omega, dens)
    assert abs(omega[peak] - 1.0) <= omega[1] - omega[0]
    assert width == pytest.approx(4.0 * math.pi / dt, rel=0.10)

    fl = field("linear", 0.5)
    pl = ParticleParams(p_minus=rest_frame_pminus(fl))
    half = 2.0 * 2.0 * math.pi / dphi
    omega = np.linspace(1.0 - half, 1.0 + half, 121)
    dens = spectral_density_linear(fl, pl, w, omega)
    peak, width = walk_width(omega, dens)
    assert abs(omega[peak] - 1.0) <= omega[1] - omega[0]
    assert width == pytest.approx(4.0 * math.pi / dphi, rel=0.10)


def test_criterion_07_rest_frame_max_energy_relations():
    xi = 0.5
    w = PhaseWindow(0.0, 50.0 * math.pi)

    fc = field("circular", xi)
    pc = ParticleParams(p_minus=rest_frame_pminus(fc))
    dt = time_from_phase(fc, pc, w).value
    got = max_energy_circular(fc, pc, w)
    assert got == pytest.approx(2.0 * dt * schott_rate(xi).total, rel=1e-3)

    fl = field("linear", xi)
    pl = ParticleParams(p_minus=rest_frame_pminus(fl))
    got = max_energy_linear(fl, pl, w)
    want = 8.0 * math.pi * w.delta_phi * nikishov_ritus_rate(
        xi, convention="solid-angle-average"
    ).total
    assert got == pytest.approx(want, rel=1e-3)


def test_criterion_08_kinematic_invariants_and_handedness():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        xi = float(rng.uniform(0.0, 2.0))
        pm = float(rng.uniform(0.3, 3.0))
        phi = float(rng.uniform(0.0, 20.0))
        if rng.integers(2):
            f = FieldConfig(polarization=Polarization.CIRCULAR, xi=xi,
                            handedness=int(rng.choice((-1, 1))))
            kappa = (float(rng.uniform(-1.5, 1.5)), float(rng.uniform(-1.5, 1.5)))
        else:
            f = FieldConfig(polarization=Polarization.LINEAR, xi=xi)
            kappa = (0.0, 0.0)
        p = ParticleParams(p_minus=pm, kappa=kappa)
        P = momentum(f, p, phi)
        assert abs(P.P0**2 - P.Px**2 - P.Py**2 - P.Pz**2 - 1.0) <= 1e-12
        assert abs((P.P0 - P.Pz) - pm) <= 1e-12
        assert abs(quasimomentum(p).shell_residual()) <= 1e-12

    p = ParticleParams(p_minus=1.0)
    w = PhaseWindow(0.0, 2.0 * math.pi)
    plus = energy_circular(FieldConfig(polarization=Polarization.CIRCULAR, xi=0.5, handedness=1), p, w)
    minus = energy_circular(FieldConfig(polarization=Polarization.CIRCULAR, xi=0.5, handedness=-1), p, w)
    assert plus.total == minus.total
    assert plus.per_harmonic == minus.per_harmonic


def test_criterion_09_special_function_identities():
    for x in (0.5, 7.3, 29.0, 50.0):
        t = bessel_j_table(np.asarray(x), int(x) + 40)
        assert abs(t[0] ** 2 + 2.0 * np.sum(t[1:] ** 2) - 1.0) <= 1e-12

    for n, zeta in ((0, 0.7), (3, 4.2), (-5, 11.0), (8, 40.0)):
        assert abs(generalized_bessel(n, 0.0, zeta).A0 - jv(n, zeta)) <= 1e-12

    rng = np.random.default_rng(19)
    rho, zeta = -2.4, 6.9
    span = int(math.ceil(abs(zeta) + 2.0 * abs(rho))) + 25
    ns = np.arange(-span, span + 1)
    a0, _, _ = generalized_bessel_table(rho, zeta, -span, span)
    nu = rng.uniform(0.0, 2.0 * math.pi, size=50)
    lhs = (a0[None, :] * np.exp(1j * ns[None, :] * nu[:, None])).sum(axis=1)
    rhs = np.exp(1j * (rho * np.sin(2.0 * nu) + zeta * np.sin(nu)))
    assert float(np.max(np.abs(lhs - rhs))) <= 1e-8


def test_criterion_10_bitwise_reproducibility_across_workers(tmp_path, monkeypatch):
    blobs = []
    for workers in (1, 4, 8):
        out = tmp_path / f"w{workers}.csv"
        monkeypatch.setenv("RADIANCE_THREADS", str(workers))
        code = cli_main(["sweep", "--param", "xi", "--from", "0.2", "--to", "0.8",
                         "--steps", "6", "--inner", "circular", "--pminus", "1.0",
                         "--dphi", "6.283185307179586", "--out", str(out)])
        assert code == 0
        with open(out, "rb") as fh:
            blobs.append(fh.read())
        rows = list(csv.reader(blobs[-1].decode().splitlines()))
        assert len(rows) == 7
    assert blobs[0] == blobs[1] == blobs[2]
