"""Field/particle configuration and exact plane-wave kinematics.

The wave travels along +z and depends on the phase phi = t - z (internal
units). All trajectories and momenta are closed form; p_minus = P0 - Pz and
the transverse combination kappa are the integrals of motion that label a
solution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Tuple

__all__ = [
    "Polarization",
    "ConfigurationError",
    "UnsupportedConfigurationError",
    "FieldConfig",
    "ParticleParams",
    "FourMomentum",
    "QuasiMomentum",
    "PhaseWindow",
    "PhaseTime",
    "quasimomentum",
    "transverse_momentum",
    "complete_lightfront",
    "momentum_circular",
    "momentum_linear",
    "momentum",
    "trajectory",
    "derived_parameters",
    "rest_frame_pminus",
    "time_from_phase",
]


class Polarization(Enum):
    CIRCULAR = "circular"
    LINEAR = "linear"


class ConfigurationError(ValueError):
    """Invalid or inconsistent configuration values."""


class UnsupportedConfigurationError(ConfigurationError):
    """Configuration valid in general but unsupported by this code path."""


@dataclass(frozen=True)
class FieldConfig:
    """Monochromatic plane-wave definition.

    xi is the dimensionless strength e0*E0/(m*c*omega_w). handedness only
    matters for circular polarization. photon_energy_ratio is hbar*omega_w
    over m*c^2 and feeds the purely diagnostic quantum parameters.
    """

    polarization: Polarization
    xi: float
    handedness: int = 1
    photon_energy_ratio: Optional[float] = None

    def __post_init__(self) -> None:
        # xi = 0 is allowed: the free-particle edge cases are exercised on purpose.
        if not (self.xi >= 0.0) or not math.isfinite(self.xi):
            raise ConfigurationError(f"xi must be a finite nonnegative real, got {self.xi!r}")
        if self.handedness not in (1, -1):
            raise ConfigurationError(f"handedness must be +1 or -1, got {self.handedness!r}")
        if self.photon_energy_ratio is not None and not (self.photon_energy_ratio > 0.0):
            raise ConfigurationError(
                f"photon_energy_ratio must be positive, got {self.photon_energy_ratio!r}"
            )


@dataclass(frozen=True)
class ParticleParams:
    """Constants of motion: light-front momentum p_minus and transverse kappa.

    Mass and charge magnitude are 1 in internal units.
    """

    p_minus: float
    kappa: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if not (self.p_minus > 0.0) or not math.isfinite(self.p_minus):
            raise ConfigurationError(f"p_minus must be a positive real, got {self.p_minus!r}")
        kx, ky = self.kappa
        if not (math.isfinite(kx) and math.isfinite(ky)):
            raise ConfigurationError(f"kappa components must be finite, got {self.kappa!r}")

    @property
    def kappa_sq(self) -> float:
        kx, ky = self.kappa
        return kx * kx + ky * ky


@dataclass(frozen=True)
class FourMomentum:
    P0: float
    Px: float
    Py: float
    Pz: float

    def mass_shell_residual(self) -> float:
        return self.P0 ** 2 - (self.Px ** 2 + self.Py ** 2 + self.Pz ** 2) - 1.0


@dataclass(frozen=True)
class QuasiMomentum:
    q0: float
    qx: float
    qy: float
    qz: float

    def shell_residual(self) -> float:
        return self.q0 ** 2 - (self.qx ** 2 + self.qy ** 2 + self.qz ** 2) - 1.0


@dataclass(frozen=True)
class PhaseWindow:
    """Radiation formation interval [phi_in, phi], phi > phi_in."""

    phi_in: float
    phi: float

    def __post_init__(self) -> None:
        if not (self.phi > self.phi_in):
            raise ConfigurationError(
                f"window requires phi > phi_in, got phi_in={self.phi_in!r}, phi={self.phi!r}"
            )

    @property
    def delta_phi(self) -> float:
        return self.phi - self.phi_in


class PhaseTime(NamedTuple):
    """Duration associated with a phase window.

    phase_time is True when the value is the bare phase interval (linear
    polarization has no closed-form phi -> t inversion, the phase plays the
    role of time).
    """

    value: float
    phase_time: bool


def quasimomentum(p: ParticleParams) -> QuasiMomentum:
    """Phase-averaged momentum; satisfies the ordinary mass-shell relation."""
    pm = p.p_minus
    k2 = p.kappa_sq
    q0 = (1.0 + k2 + pm * pm) / (2.0 * pm)
    qz = (1.0 + k2 - pm * pm) / (2.0 * pm)
    return QuasiMomentum(q0=q0, qx=p.kappa[0], qy=p.kappa[1], qz=qz)


def transverse_momentum(f: FieldConfig, p: ParticleParams, phi: float) -> Tuple[float, float]:
    """Exact transverse kinetic momentum at phase phi (general kappa)."""
    kx, ky = p.kappa
    if f.polarization is Polarization.CIRCULAR:
        return kx - f.xi * math.sin(phi), ky + f.handedness * f.xi * math.cos(phi)
    return kx - f.xi * math.sin(phi), ky


def complete_lightfront(p_minus: float, px: float, py: float) -> Tuple[float, float]:
    """(P0, Pz) from the mass shell and P0 - Pz = p_minus."""
    plus = (1.0 + px * px + py * py) / p_minus
    return 0.5 * (p_minus + plus), 0.5 * (plus - p_minus)


def momentum(f: FieldConfig, p: ParticleParams, phi: float) -> FourMomentum:
    """Kinetic four-momentum at phase phi, any polarization, general kappa."""
    px, py = transverse_momentum(f, p, phi)
    p0, pz = complete_lightfront(p.p_minus, px, py)
    return FourMomentum(P0=p0, Px=px, Py=py, Pz=pz)


def momentum_circular(f: FieldConfig, p: ParticleParams, phi: float) -> FourMomentum:
    if f.polarization is not Polarization.CIRCULAR:
        raise UnsupportedConfigurationError("momentum_circular requires circular polarization")
    return momentum(f, p, phi)


def momentum_linear(f: FieldConfig, p: ParticleParams, phi: float) -> FourMomentum:
    if f.polarization is not Polarization.LINEAR:
        raise UnsupportedConfigurationError("momentum_linear requires linear polarization")
    if p.kappa != (0.0, 0.0):
        # The series-path formulas assume kappa = 0; the direct-quadrature
        # evaluator accepts general kappa through momentum().
        raise UnsupportedConfigurationError("momentum_linear supports kappa = 0 only")
    return momentum(f, p, phi)


def trajectory(f: FieldConfig, p: ParticleParams, phi: float) -> Tuple[float, float, float, float]:
    """Worldline point (ct, x, y, z) at phase phi, kappa = 0, z(0) = ct(0) = 0."""
    if p.kappa != (0.0, 0.0):
        raise UnsupportedConfigurationError("closed-form trajectory supports kappa = 0 only")
    pm = p.p_minus
    xi = f.xi
    if f.polarization is Polarization.CIRCULAR:
        r = xi / pm
        q = quasimomentum(p)
        p0 = q.q0 + xi * xi / (2.0 * pm)
        pz = q.qz + xi * xi / (2.0 * pm)
        return p0 * phi / pm, r * math.cos(phi), f.handedness * r * math.sin(phi), pz * phi / pm
    lam_p = 1.0 + xi * xi / 2.0 + pm * pm
    lam_m = 1.0 + xi * xi / 2.0 - pm * pm
    osc = xi * xi / (8.0 * pm * pm) * math.sin(2.0 * phi)
    ct = lam_p * phi / (2.0 * pm * pm) - osc
    z = lam_m * phi / (2.0 * pm * pm) - osc
    return ct, (xi / pm) * math.cos(phi), 0.0, z


def derived_parameters(f: FieldConfig, p: ParticleParams, require_quantum: bool = False) -> dict:
    """Orbit amplitude, lambda_+/-, and (when available) chi_e and xi_cr.

    The transverse amplitude xi/p_minus doubles as the circular orbit radius
    and the linear oscillation amplitude. chi_e and xi_cr need
    photon_energy_ratio; requesting them without one is a configuration error.
    """
    pm = p.p_minus
    xi = f.xi
    out = {
        "r_perp": xi / pm,
        "ell_x": xi / pm,
        "lambda_plus": 1.0 + xi * xi / 2.0 + pm * pm,
        "lambda_minus": 1.0 + xi * xi / 2.0 - pm * pm,
    }
    ratio = f.photon_energy_ratio
    if ratio is None:
        if require_quantum:
            raise ConfigurationError(
                "chi_e / xi_cr require photon_energy_ratio in the field configuration"
            )
        return out
    out["chi_e"] = xi * ratio * pm
    out["xi_cr"] = 1.0 / ratio
    return out


def rest_frame_pminus(f: FieldConfig) -> float:
    """p_minus of the average rest frame (vanishing drift)."""
    if f.polarization is Polarization.CIRCULAR:
        return math.sqrt(1.0 + f.xi * f.xi)
    return math.sqrt(1.0 + f.xi * f.xi / 2.0)


def time_from_phase(f: FieldConfig, p: ParticleParams, window: PhaseWindow) -> PhaseTime:
    """Lab-time duration of a phase window.

    Circular motion has constant P0, so t is linear in phi and
    dt = (P0/p_minus) dphi exactly. For linear polarization the map is not
    invertible in closed form and the phase interval itself is returned,
    flagged; it plays the role of time for the per-phase rate.
    """
    if f.polarization is Polarization.CIRCULAR:
        pk = momentum(f, p, 0.0)
        return PhaseTime(value=(pk.P0 / p.p_minus) * window.delta_phi, phase_time=False)
    return PhaseTime(value=window.delta_phi, phase_time=True)
