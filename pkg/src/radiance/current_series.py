"""Bessel-harmonic reconstruction of the windowed current transform.

The dressed momentum is a trig polynomial in the phase with harmonics 0..2,
so the emission phase integral splits into window sinc factors once the
oscillatory exponential is expanded in Bessel series: a single series for
circular polarization, a product of two (the two-argument pattern) for
linear. This is the companion route to the direct panel quadrature in
oracle.py; the two share nothing but the trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .kinematics import FieldConfig, ParticleParams, PhaseWindow, momentum
from .oracle import PREFACTOR, CurrentFourier
from .specfun import bessel_j_table


@dataclass(frozen=True)
class _TrigCoeffs:
    a0: np.ndarray
    c1: np.ndarray
    s1: np.ndarray
    c2: np.ndarray
    s2: np.ndarray


def _momentum_coeffs(f: FieldConfig, p: ParticleParams) -> _TrigCoeffs:
    # eight equispaced samples pin a harmonic-2 trig polynomial exactly
    rows = []
    for j in range(8):
        P = momentum(f, p, 0.25 * math.pi * j)
        rows.append([P.P0, P.Px, P.Py, P.Pz])
    fc = np.fft.fft(np.asarray(rows), axis=0) / 8.0
    return _TrigCoeffs(
        a0=fc[0].real.copy(),
        c1=2.0 * fc[1].real,
        s1=-2.0 * fc[1].imag,
        c2=2.0 * fc[2].real,
        s2=-2.0 * fc[2].imag,
    )


def _signed_j(x: float, n_max: int) -> np.ndarray:
    """J_n(x) for n = -n_max..n_max."""
    table = bessel_j_table(np.asarray(x), n_max)
    signs = np.where(np.arange(n_max + 1) % 2 == 0, 1.0, -1.0)
    return np.concatenate([(table[1:] * signs[1:])[::-1], table])


def current_fourier_series(
    f: FieldConfig,
    p: ParticleParams,
    k: Tuple[float, float, float],
    window: PhaseWindow,
    phi0p: Optional[float] = None,
) -> CurrentFourier:
    """Series evaluation of the same transform as current_fourier_direct."""
    omega, theta, phi_gamma = (float(v) for v in k)
    if omega < 0.0:
        raise ValueError("omega must be nonnegative")
    tc = _momentum_coeffs(f, p)
    pm = p.p_minus
    u = np.array(
        [
            1.0,
            -math.sin(theta) * math.cos(phi_gamma),
            -math.sin(theta) * math.sin(phi_gamma),
            -math.cos(theta),
        ]
    )
    # (k.P)/(omega p_-) as a trig polynomial
    d0 = float(u @ tc.a0) / pm
    dc1 = float(u @ tc.c1) / pm
    ds1 = float(u @ tc.s1) / pm
    dc2 = float(u @ tc.c2) / pm
    ds2 = float(u @ tc.s2) / pm

    # omega * antiderivative = eta*phi + R1 sin(phi+delta1) + R2 sin(2phi+delta2)
    eta = omega * d0
    b_s1, b_c1 = omega * dc1, -omega * ds1
    b_s2, b_c2 = 0.5 * omega * dc2, -0.5 * omega * ds2
    r1, delta1 = math.hypot(b_s1, b_c1), math.atan2(b_c1, b_s1)
    r2, delta2 = math.hypot(b_s2, b_c2), math.atan2(b_c2, b_s2)

    n1 = int(math.ceil(r1)) + 18
    n2 = int(math.ceil(r2)) + 18
    m1 = np.arange(-n1, n1 + 1)
    c_one = _signed_j(r1, n1) * np.exp(1j * m1 * delta1)
    m2 = np.arange(-n2, n2 + 1)
    c_two = _signed_j(r2, n2) * np.exp(1j * m2 * delta2)

    n_lim = n1 + 2 * n2
    coeff = np.zeros(2 * n_lim + 1, dtype=complex)
    for il, l in enumerate(m2):
        coeff[n_lim + 2 * l - n1 : n_lim + 2 * l + n1 + 1] += c_two[il] * c_one
    orders = np.arange(-n_lim, n_lim + 1)

    # velocity P^mu/p_- in the exponential basis, harmonics -2..2
    v = np.zeros((5, 4), dtype=complex)
    v[2] = tc.a0 / pm
    v[3] = 0.5 * (tc.c1 - 1j * tc.s1) / pm
    v[1] = 0.5 * (tc.c1 + 1j * tc.s1) / pm
    v[4] = 0.5 * (tc.c2 - 1j * tc.s2) / pm
    v[0] = 0.5 * (tc.c2 + 1j * tc.s2) / pm

    if phi0p is None:
        phi0p = window.phi_in
    g0 = (
        d0 * phi0p
        + dc1 * math.sin(phi0p)
        - ds1 * math.cos(phi0p)
        + 0.5 * dc2 * math.sin(2.0 * phi0p)
        - 0.5 * ds2 * math.cos(2.0 * phi0p)
    )
    dphi = window.delta_phi
    mid = window.phi_in + 0.5 * dphi

    def window_factor(q: np.ndarray) -> np.ndarray:
        half = 0.5 * q * dphi
        return dphi * np.exp(1j * q * mid) * np.sinc(half / math.pi)

    glob = PREFACTOR * np.exp(-1j * omega * g0)
    j = np.zeros(4, dtype=complex)
    for h in range(-2, 3):
        wf = window_factor(eta + orders + h)
        j += v[h + 2] * (coeff @ wf)
    j *= glob
    return CurrentFourier(
        j0=complex(j[0]),
        jx=complex(j[1]),
        jy=complex(j[2]),
        jz=complex(j[3]),
        k=(omega, theta, phi_gamma),
        window=window,
    )
