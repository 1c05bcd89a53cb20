"""Emission spectra for a linearly polarized plane wave.

Same windowed-harmonic construction as the circular module, but the azimuth
cannot be integrated out: the two-argument Bessel coefficients A0/A1/A2 depend
on phi_gamma through zeta, so the angular integral is a genuine 2D quadrature.
The bracket is even under zeta -> -zeta, which folds phi_gamma onto [0, pi/2]
with weight 4. Rates for this polarization are per unit phase (radian), not
per unit lab time: the phase-to-time map has no closed inverse here, the phase
plays the role of time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .kinematics import (
    ConfigurationError,
    FieldConfig,
    ParticleParams,
    PhaseWindow,
    Polarization,
    rest_frame_pminus,
)
from .quadrature import GridConfig, compensated_sum, gauss_legendre, nested_cc_panels
from .specfun import (
    AccuracyError,
    generalized_bessel_table,
    window_kernel_T,
    window_kernel_sinc,
)
from .spectrum_circular import (
    SpectrumResult,
    _geometric_error,
    _raise_if_unconverged,
    _series_sum,
)
from ._truncation import spectral_cap


@dataclass(frozen=True)
class LinearPhaseParams:
    """Scaled frequency sigma and Bessel arguments (zeta, rho) at one
    emission direction and frequency. rho <= 0 over the physical theta range."""

    sigma: float
    zeta: float
    rho: float

    def __post_init__(self) -> None:
        for name in ("sigma", "zeta", "rho"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError(f"{name} must be finite")


def _lambdas(f: FieldConfig, p_minus: float) -> Tuple[float, float]:
    base = 1.0 + 0.5 * f.xi * f.xi
    return base + p_minus * p_minus, base - p_minus * p_minus


def linear_phase_params(
    f: FieldConfig, p: ParticleParams, omega: float, theta: float, phi_gamma: float
) -> LinearPhaseParams:
    """Expansion parameters of the emission phase for the linear field."""
    if p.kappa_sq != 0.0:
        raise ConfigurationError("linear spectra require kappa = 0")
    if not omega >= 0.0:
        raise ConfigurationError(f"omega must be nonnegative, got {omega!r}")
    lam_p, lam_m = _lambdas(f, p.p_minus)
    ct, st = math.cos(theta), math.sin(theta)
    ratio = f.xi / p.p_minus
    sigma = (lam_p - lam_m * ct) / (2.0 * p.p_minus * p.p_minus) * omega
    zeta = st * math.cos(phi_gamma) * ratio * omega
    rho = (ct - 1.0) / 8.0 * ratio * ratio * omega
    return LinearPhaseParams(sigma=sigma, zeta=zeta, rho=rho)


def resonance_linear(
    p: ParticleParams, f: FieldConfig, theta: float, n: int, window: PhaseWindow
) -> Tuple[float, float]:
    """Resonance frequency of harmonic n toward polar angle theta and the
    kernel bandwidth of the window around it."""
    if n < 1:
        raise ConfigurationError(f"resonances exist for n >= 1 only, got {n}")
    lam_p, lam_m = _lambdas(f, p.p_minus)
    big_lambda = lam_p - lam_m * math.cos(theta)
    pm_sq = p.p_minus * p.p_minus
    omega_res = 2.0 * n * pm_sq / big_lambda
    delta_omega = (pm_sq / big_lambda) * 8.0 * math.pi / window.delta_phi
    return omega_res, delta_omega


def _simpson_weights(n_points: int, h: float) -> np.ndarray:
    # composite Simpson for odd n_points on a uniform grid
    w = np.ones(n_points)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def _windowed_spectrum_linear(
    xi: float,
    pm: float,
    lam_p: float,
    lam_m: float,
    f: FieldConfig,
    window: PhaseWindow,
    cfg: GridConfig,
    peaked: bool,
    endpoint_average: bool = False,
) -> SpectrumResult:
    """(1/(2 pi^2 pm^2)) sum_n int dOmega int domega omega^2 K_n kernel(sigma-n)
    with K_n = -(A0)^2 + xi^2 (A1^2 - A0 A2)."""
    dphi = window.delta_phi
    s_max = cfg.omega_max if cfg.omega_max is not None else spectral_cap(f, window, cfg)
    flat_cap = cfg.omega_max is not None
    endpoint_average = endpoint_average and not flat_cap
    # cap offsets must stay odd-count under both Simpson refinements
    omega_points = 8 * int(math.ceil(cfg.omega_points / 8)) if endpoint_average else cfg.omega_points

    th_nodes, th_w, th_w2, th_w4 = nested_cc_panels(
        4 * max(1, int(math.ceil(cfg.theta_points / 4))), (0.0, 0.5 * math.pi, math.pi)
    )
    # zeta-parity folds the azimuth onto a quarter circle
    ph_nodes, ph_w, ph_w2, ph_w4 = nested_cc_panels(
        4 * max(1, int(math.ceil(cfg.phi_points / 4))), (0.0, 0.5 * math.pi)
    )
    ph_w, ph_w2, ph_w4 = 4.0 * ph_w, 4.0 * ph_w2, 4.0 * ph_w4

    # sigma/omega slope; >= 1 with equality at theta = 0
    slope = (lam_p - lam_m * np.cos(th_nodes)) / (2.0 * pm * pm)
    omega_glob = s_max if flat_cap else s_max / float(np.min(slope))
    zeta_max = (xi / pm) * omega_glob
    rho_max = (xi / pm) ** 2 * omega_glob / 4.0
    support = int(math.ceil(zeta_max + 2.0 * rho_max)) + 15
    n_hi = max(int(math.ceil(s_max if not flat_cap else s_max * float(np.max(slope)))) + 15, support)
    if cfg.n_max_override is not None:
        n_hi = min(n_hi, max(1, cfg.n_max_override + 15))
    n_lo = -min(support, n_hi)
    orders = np.arange(n_lo, n_hi + 1)

    n_nodes = (orders.size, th_nodes.size, ph_nodes.size)
    vals = np.zeros(n_nodes)
    vals2 = np.zeros(n_nodes)
    vals4 = np.zeros(n_nodes)

    for it, theta in enumerate(th_nodes):
        st = math.sin(float(theta))
        ct = math.cos(float(theta))
        sl = float(slope[it])
        omega_max = s_max if flat_cap else s_max / sl
        d_omega = math.pi / (dphi * sl * omega_points)
        # stride-4 Simpson needs 8k+1 points to stay odd at every level
        n_core = 8 * int(math.ceil(omega_max / (8.0 * d_omega))) + 1
        if endpoint_average:
            n_om = n_core + 3 * omega_points
            omega = np.arange(n_om) * d_omega
        else:
            n_om = n_core
            omega = np.linspace(0.0, omega_max, n_om)
            d_omega = omega[1] - omega[0]
        sigma = omega * sl
        w2 = omega * omega
        rho = (ct - 1.0) / 8.0 * (xi / pm) ** 2 * omega
        smn = sigma[None, :] - orders[:, None]
        if peaked:
            kern = window_kernel_T(smn, 0, dphi)
        else:
            kern = window_kernel_sinc(smn, 0, dphi)

        caps = [n_core + k * omega_points for k in (0, 1, 2, 3)] if endpoint_average else [n_om]
        cap_w = (0.125, 0.375, 0.375, 0.125) if endpoint_average else (1.0,)
        rules = []
        for stride in (1, 2, 4):
            rule = np.zeros(n_om)
            for cw, stop in zip(cap_w, caps):
                sub = _simpson_weights((stop - 1) // stride + 1, d_omega * stride)
                rule[:stop:stride] += cw * sub
            rules.append(rule)

        for ip, phig in enumerate(ph_nodes):
            zeta = st * math.cos(float(phig)) * (xi / pm) * omega
            a0, a1, a2 = generalized_bessel_table(rho, zeta, n_lo, n_hi)
            bracket = -a0 * a0 + xi * xi * (a1 * a1 - a0 * a2)
            rows = (w2[None, :] * bracket.T) * kern
            vals[:, it, ip] = rows @ rules[0]
            vals2[:, it, ip] = rows @ rules[1]
            vals4[:, it, ip] = rows @ rules[2]

    scale = 1.0 / (2.0 * math.pi * math.pi * pm * pm)
    sin_th = np.sin(th_nodes)
    ang = (sin_th[None, :, None] * th_w[None, :, None]) * ph_w[None, None, :]
    per_n = scale * (vals * ang).sum(axis=(1, 2))
    per_harmonic = tuple((int(n), float(v)) for n, v in zip(orders, per_n))
    total = _series_sum(per_harmonic)

    def reduce(v: np.ndarray, wt: np.ndarray, wp: np.ndarray) -> float:
        return scale * float((v * (sin_th[None, :, None] * wt[None, :, None]) * wp[None, None, :]).sum())

    t_fine = float(per_n.sum())
    e_theta = _geometric_error(
        reduce(vals, th_w2, ph_w) - reduce(vals, th_w4, ph_w),
        t_fine - reduce(vals, th_w2, ph_w),
    )
    e_phi = _geometric_error(
        reduce(vals, th_w, ph_w2) - reduce(vals, th_w, ph_w4),
        t_fine - reduce(vals, th_w, ph_w2),
    )
    e_omega = _geometric_error(
        reduce(vals4, th_w, ph_w) - reduce(vals2, th_w, ph_w),
        reduce(vals2, th_w, ph_w) - t_fine,
    )
    err = 2.0 * (e_theta + e_phi + e_omega)

    neg = sum(v for n, v in per_harmonic if n <= 0)
    return SpectrumResult(
        total=total,
        per_harmonic=per_harmonic,
        n_max_used=n_hi,
        quadrature_error_estimate=err,
        window=window,
        converged=err <= max(cfg.abs_tol, cfg.rel_tol * abs(total)),
        negative_fraction=abs(neg) / abs(total) if total else math.inf,
        bracket_sign_flag=any(v < 0.0 for _, v in per_harmonic),
    )


def energy_linear(
    f: FieldConfig, p: ParticleParams, window: PhaseWindow, grid_cfg: Optional[GridConfig] = None
) -> SpectrumResult:
    """Energy radiated over the window for the linear field, all harmonics.

    Same finite-window caveats as the circular energy: the n <= 0 terms carry
    the negative edge background of the hard frequency cap. Units e0^2
    omega_w / c.
    """
    if f.polarization is not Polarization.LINEAR:
        raise ConfigurationError("energy_linear requires a linearly polarized field")
    if p.kappa_sq != 0.0:
        raise ConfigurationError("linear spectra require kappa = 0")
    cfg = grid_cfg or GridConfig()
    lam_p, lam_m = _lambdas(f, p.p_minus)
    res = _windowed_spectrum_linear(
        f.xi, p.p_minus, lam_p, lam_m, f, window, cfg, peaked=True
    )
    return _raise_if_unconverged(res, "energy_linear")


def rate_linear(
    f: FieldConfig, p: ParticleParams, window: PhaseWindow, grid_cfg: Optional[GridConfig] = None
) -> SpectrumResult:
    """Energy emission rate per unit phase (radian) over the window.

    The sinc-kernel counterpart of energy_linear; converges to the classical
    limit as the window grows. Units e0^2 omega_w^2 / c per radian.
    """
    if f.polarization is not Polarization.LINEAR:
        raise ConfigurationError("rate_linear requires a linearly polarized field")
    if p.kappa_sq != 0.0:
        raise ConfigurationError("linear spectra require kappa = 0")
    cfg = grid_cfg or GridConfig()
    lam_p, lam_m = _lambdas(f, p.p_minus)
    res = _windowed_spectrum_linear(
        f.xi, p.p_minus, lam_p, lam_m, f, window, cfg, peaked=False, endpoint_average=True
    )
    return _raise_if_unconverged(res, "rate_linear")


def _classical_linear_sum(
    xi: float, pm: float, lam_p: float, lam_m: float, n_cap: Optional[int]
) -> Tuple[float, Tuple[Tuple[int, float], ...], float, bool]:
    """sum_{n>=1} of (4 pm^4 / pi) n^2 int dOmega K_res / Lambda^3 with the
    bracket at the per-(theta, phi_gamma) resonance arguments."""
    if xi == 0.0:
        return 0.0, ((1, 0.0),), 0.0, False
    # theta via paneled Gauss-Legendre, phi_gamma folded to [0, pi/2]
    xg, wg = gauss_legendre(32)
    th, tw = [], []
    for a, b in ((0.0, 0.5 * math.pi), (0.5 * math.pi, math.pi)):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        th.append(mid + half * xg)
        tw.append(half * wg)
    th = np.concatenate(th)
    tw = np.concatenate(tw)
    pg = 0.25 * math.pi * (xg + 1.0)
    pw = 4.0 * 0.25 * math.pi * wg

    ct = np.cos(th)
    st = np.sin(th)
    big_lambda = lam_p - lam_m * ct
    pref = 4.0 * pm**4 / math.pi
    terms = []
    err = 0.0
    running = 0.0
    below = 0
    flagged = False
    n = 0
    while True:
        n += 1
        rho_res = (ct - 1.0) * xi * xi * n / (4.0 * big_lambda)
        zeta_res = 2.0 * n * xi * pm * st[:, None] * np.cos(pg)[None, :] / big_lambda[:, None]
        a0, a1, a2 = generalized_bessel_table(
            np.broadcast_to(rho_res[:, None], zeta_res.shape), zeta_res, n, n
        )
        bracket = (-a0 * a0 + xi * xi * (a1 * a1 - a0 * a2))[..., 0]
        if float(bracket.min()) < 0.0:
            flagged = True
        inner = bracket @ pw
        val = pref * n * n * float((st * inner / big_lambda**3) @ tw)
        terms.append((n, val))
        running += val
        if n_cap is not None and n >= n_cap:
            break
        below = below + 1 if (running > 0.0 and abs(val) < 1e-14 * running) else 0
        if below >= 3 or n >= 400:
            break
    return running, tuple(terms), err, flagged


def classical_rate_linear(f: FieldConfig, p: ParticleParams) -> SpectrumResult:
    """Infinite-window limit of the per-phase emission rate (n >= 1 only)."""
    if p.kappa_sq != 0.0:
        raise ConfigurationError("linear spectra require kappa = 0")
    lam_p, lam_m = _lambdas(f, p.p_minus)
    total, terms, err, flagged = _classical_linear_sum(f.xi, p.p_minus, lam_p, lam_m, None)
    return SpectrumResult(
        total=total,
        per_harmonic=terms,
        n_max_used=terms[-1][0],
        quadrature_error_estimate=err,
        window=None,
        bracket_sign_flag=flagged,
    )


def max_energy_linear(f: FieldConfig, p: ParticleParams, window: PhaseWindow) -> float:
    """Resonance-peak envelope bound: twice the classical per-phase rate
    times the phase interval."""
    if window.delta_phi < 2.0 * math.pi:
        import warnings

        warnings.warn("max_energy_linear assumes a window much longer than one cycle", stacklevel=2)
    lam_p, lam_m = _lambdas(f, p.p_minus)
    total, _, _, _ = _classical_linear_sum(f.xi, p.p_minus, lam_p, lam_m, None)
    return 2.0 * window.delta_phi * total


def nikishov_ritus_rate(
    xi: float, grid_cfg: Optional[GridConfig] = None, convention: str = "integrated"
) -> SpectrumResult:
    """Classical energy rate of the figure-8 orbit in its average rest frame.

    convention="integrated" (default) integrates over the full solid angle
    and reproduces the dipole limit rate/xi^2 -> 1/3; "solid-angle-average"
    divides by 4 pi, matching the alternative normalization in circulation
    for this rate. The two differ by exactly 4 pi.
    """
    if xi < 0.0:
        raise ConfigurationError(f"xi must be nonnegative, got {xi!r}")
    if convention not in ("integrated", "solid-angle-average"):
        raise ConfigurationError(f"unknown convention {convention!r}")
    pm = math.sqrt(1.0 + 0.5 * xi * xi)
    lam_p, lam_m = 2.0 * pm * pm, 0.0
    n_cap = grid_cfg.n_max_override if grid_cfg is not None else None
    total, terms, err, flagged = _classical_linear_sum(xi, pm, lam_p, lam_m, n_cap)
    if convention == "solid-angle-average":
        factor = 1.0 / (4.0 * math.pi)
        total *= factor
        terms = tuple((n, v * factor) for n, v in terms)
    return SpectrumResult(
        total=total,
        per_harmonic=terms,
        n_max_used=terms[-1][0],
        quadrature_error_estimate=err,
        window=None,
        bracket_sign_flag=flagged,
    )


def rest_frame_energy_linear(
    f: FieldConfig,
    window: PhaseWindow,
    grid_cfg: Optional[GridConfig] = None,
    method: str = "rest",
) -> SpectrumResult:
    """Windowed energy in the frame where the figure-8 orbit's average
    momentum rests (sigma = omega exactly).

    method="rest" evaluates the rest-frame form directly; method="lab" goes
    through energy_linear at the rest-frame light-front momentum. The two
    must agree.
    """
    if f.polarization is not Polarization.LINEAR:
        raise ConfigurationError("rest_frame_energy_linear requires linear polarization")
    cfg = grid_cfg or GridConfig()
    pm = rest_frame_pminus(f)
    if method == "lab":
        return energy_linear(f, ParticleParams(p_minus=pm), window, cfg)
    if method != "rest":
        raise ConfigurationError(f"method must be 'rest' or 'lab', got {method!r}")
    res = _windowed_spectrum_linear(
        f.xi, pm, 2.0 * pm * pm, 0.0, f, window, cfg, peaked=True
    )
    return _raise_if_unconverged(res, "rest_frame_energy_linear")


def spectral_density_linear(
    f: FieldConfig,
    p: ParticleParams,
    window: PhaseWindow,
    omega: np.ndarray,
    grid_cfg: Optional[GridConfig] = None,
) -> np.ndarray:
    """dW/domega of the windowed linear-field energy at the given frequencies,
    angles integrated and harmonics summed."""
    if f.polarization is not Polarization.LINEAR:
        raise ConfigurationError("spectral_density_linear requires linear polarization")
    if p.kappa_sq != 0.0:
        raise ConfigurationError("linear spectra require kappa = 0")
    cfg = grid_cfg or GridConfig()
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0.0):
        raise ConfigurationError("omega values must be nonnegative")
    xi, pm = f.xi, p.p_minus
    dphi = window.delta_phi
    lam_p, lam_m = _lambdas(f, pm)

    th_nodes, th_w, _, _ = nested_cc_panels(
        4 * max(1, int(math.ceil(cfg.theta_points / 4))), (0.0, 0.5 * math.pi, math.pi)
    )
    ph_nodes, ph_w, _, _ = nested_cc_panels(
        4 * max(1, int(math.ceil(cfg.phi_points / 4))), (0.0, 0.5 * math.pi)
    )
    ph_w = 4.0 * ph_w

    slope = (lam_p - lam_m * np.cos(th_nodes)) / (2.0 * pm * pm)
    om_pk = float(np.max(omega))
    zeta_max = (xi / pm) * om_pk
    rho_max = (xi / pm) ** 2 * om_pk / 4.0
    support = int(math.ceil(zeta_max + 2.0 * rho_max)) + 15
    n_hi = max(int(math.ceil(om_pk * float(np.max(slope)))) + 15, support)
    n_lo = -min(support, n_hi)
    orders = np.arange(n_lo, n_hi + 1)

    out = np.zeros(omega.size)
    w2 = omega * omega
    for it, theta in enumerate(th_nodes):
        st = math.sin(float(theta))
        ct = math.cos(float(theta))
        sl = float(slope[it])
        sigma = omega * sl
        rho = (ct - 1.0) / 8.0 * (xi / pm) ** 2 * omega
        kern = window_kernel_T(sigma[None, :] - orders[:, None], 0, dphi)
        for ip, phig in enumerate(ph_nodes):
            zeta = st * math.cos(float(phig)) * (xi / pm) * omega
            a0, a1, a2 = generalized_bessel_table(rho, zeta, n_lo, n_hi)
            bracket = -a0 * a0 + xi * xi * (a1 * a1 - a0 * a2)
            out += float(th_w[it]) * st * float(ph_w[ip]) * (bracket.T * kern).sum(axis=0) * w2
    return out / (2.0 * math.pi * math.pi * pm * pm)
