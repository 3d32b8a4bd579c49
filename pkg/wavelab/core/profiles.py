"""Radial initial-data profiles."""
import logging
from typing import Tuple

import numpy as np

from .errors import DomainError
from .grid import Field, SpectralGrid

logger = logging.getLogger(__name__)

PROFILES = ("bump", "gaussian", "zero")


def bump(r: np.ndarray, radius: float, amplitude: float = 1.0) -> np.ndarray:
    """A exp(1 - 1/(1 - (r/R)^2)) inside r < R, zero outside."""
    rho = np.asarray(r, dtype=float) / radius
    out = np.zeros_like(rho)
    inside = rho < 1
    out[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - rho[inside] ** 2))
    return out


def gaussian(r: np.ndarray, width: float, amplitude: float = 1.0) -> np.ndarray:
    return amplitude * np.exp(-((np.asarray(r, dtype=float) / width) ** 2))


def support_radius(profile: str, width: float) -> float:
    """Radius outside which the profile is negligible (6 widths for a Gaussian)."""
    if profile == "bump":
        return width
    if profile == "gaussian":
        return 6.0 * width
    return 0.0


def profile_field(sgrid: SpectralGrid, profile: str, amplitude: float, width: float) -> Field:
    if profile not in PROFILES:
        raise DomainError(f"unknown profile {profile!r}; expected one of {', '.join(PROFILES)}")
    if profile == "zero" or amplitude == 0:
        return Field.zeros(sgrid.spec)
    if width <= 0:
        raise DomainError(f"profile width must be positive, got {width}")
    if profile == "bump":
        return Field(sgrid.spec, bump(sgrid.radius, width, amplitude))
    return Field(sgrid.spec, gaussian(sgrid.radius, width, amplitude))


def initial_data(
    sgrid: SpectralGrid,
    profile: str,
    amplitude: float,
    width: float,
    psi_amplitude: float = 0.0,
    psi_profile: str = "zero",
) -> Tuple[Field, Field]:
    """(phi, psi) centred at the origin; psi shares phi's width."""
    phi = profile_field(sgrid, profile, amplitude, width)
    psi = profile_field(sgrid, psi_profile, psi_amplitude, width)
    return phi, psi
