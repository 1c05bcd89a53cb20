"""Shared harmonic-count and frequency-cap policy.

The direct-quadrature evaluators and the harmonic-series evaluators must
integrate over the same spectral domain for their results to be comparable,
so the cutoff rules live here and both sides import them.
"""

import math

import numpy as np

from .kinematics import FieldConfig, PhaseWindow, Polarization
from .quadrature import GridConfig
from .specfun import bessel_j_table


def harmonic_cutoff(f: FieldConfig, tail: float) -> int:
    """Highest orbit harmonic kept, from the per-harmonic decay of an ideal
    circular emitter with the same mean-square field."""
    xi_sq = f.xi ** 2
    if f.polarization is Polarization.LINEAR:
        xi_sq *= 0.5
    if xi_sq < 1e-12:
        return 3
    beta = math.sqrt(xi_sq / (1.0 + xi_sq))
    n_hi = 220
    n = np.arange(1, n_hi + 1)
    arg = n * beta
    J = bessel_j_table(arg, n_hi + 1)
    Jp = 0.5 * (J[np.arange(n_hi), n - 1] - J[np.arange(n_hi), n + 1])
    wgt = n * n * Jp * Jp
    total = float(wgt.sum())
    cum = np.cumsum(wgt)
    idx = int(np.searchsorted(cum, (1.0 - tail) * total)) + 1
    return max(3, idx)


def spectral_cap(f: FieldConfig, window: PhaseWindow, cfg: GridConfig) -> float:
    """Upper limit of the scaled frequency eta = omega*d0: the last retained
    resonance plus kernel bandwidth margin."""
    n_t = cfg.n_max_override or harmonic_cutoff(f, cfg.harmonic_tail)
    return 1.5 * n_t + 5.0 + cfg.window_multiplier * 2.0 * math.pi / window.delta_phi


def omega_cap(f: FieldConfig, window: PhaseWindow, cfg: GridConfig, d0: float) -> float:
    return spectral_cap(f, window, cfg) / d0
