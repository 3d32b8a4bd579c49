"""Numerical core: exponents, grids, propagators, dynamics, norms, probes and Picard iteration."""
from .errors import (
    ConfigError,
    DivergenceError,
    DomainError,
    EligibilityError,
    PropagationError,
    StabilityError,
    WaveLabError,
)
from .exponents import AdmissiblePair, Params, Theorem, classify_pair, validate_params
from .grid import Field, GridMode, GridSpec, SpectralField, SpectralGrid, Trajectory
from .picard import PicardConfig, PicardEngine, PicardReport
from .propagator import PropagatorPlan, QuadSpec

__all__ = [
    "AdmissiblePair",
    "ConfigError",
    "DivergenceError",
    "DomainError",
    "EligibilityError",
    "Field",
    "GridMode",
    "GridSpec",
    "Params",
    "PicardConfig",
    "PicardEngine",
    "PicardReport",
    "PropagationError",
    "PropagatorPlan",
    "QuadSpec",
    "SpectralField",
    "SpectralGrid",
    "StabilityError",
    "Theorem",
    "Trajectory",
    "WaveLabError",
    "classify_pair",
    "validate_params",
]
