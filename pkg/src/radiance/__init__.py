"""Semiclassical emission spectra of an electron in a plane wave.

Internal units throughout: m = c = e0 = omega_w = 1. Energies are reported
in units of e0^2 omega_w / c, rates in e0^2 omega_w^2 / c.
"""

from .kinematics import (
    ConfigurationError,
    FieldConfig,
    FourMomentum,
    ParticleParams,
    PhaseWindow,
    Polarization,
    QuasiMomentum,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "FieldConfig",
    "FourMomentum",
    "ParticleParams",
    "PhaseWindow",
    "Polarization",
    "QuasiMomentum",
    "__version__",
]
