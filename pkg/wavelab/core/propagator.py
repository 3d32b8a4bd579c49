"""Exact Fourier-space wave propagators and the Duhamel integral.

For u_tt - Δu = h the solution is

    u(t) = K̇(t)φ + K(t)ψ + ∫_0^t K(t - τ) h(τ) dτ

with K̇(t) = cos(|ξ|t) and K(t) = sin(|ξ|t)/|ξ| applied as multipliers. Only the
Duhamel integral is discretized in time.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence, Tuple

import numpy as np
from scipy import integrate

from .errors import DomainError, PropagationError
from .grid import Field, SpectralField, SpectralGrid, Trajectory

logger = logging.getLogger(__name__)

QUADRATURE_RULES = ("simpson", "trapezoid")


@dataclass(frozen=True)
class QuadSpec:
    """Composite quadrature rule and node count (endpoints included) on [0, t]."""

    rule: str = "simpson"
    nodes: int = 65

    def __post_init__(self):
        if self.rule not in QUADRATURE_RULES:
            raise DomainError(f"unknown quadrature rule {self.rule!r}")
        if self.nodes < 2:
            raise DomainError("quadrature needs at least two nodes")


@lru_cache(maxsize=256)
def _unit_weights(n_nodes: int, rule: str) -> Tuple[float, ...]:
    if n_nodes == 1:
        return (0.0,)
    identity = np.eye(n_nodes)
    if rule == "trapezoid" or n_nodes == 2:
        w = integrate.trapezoid(identity, dx=1.0, axis=0)
    else:
        w = integrate.simpson(identity, dx=1.0, axis=0)
    return tuple(float(v) for v in w)


def quadrature_weights(n_nodes: int, step: float, rule: str = "simpson") -> np.ndarray:
    """Weights of the composite rule on n_nodes equispaced nodes.

    Simpson on an odd number of intervals uses scipy's end correction.
    """
    if rule not in QUADRATURE_RULES:
        raise DomainError(f"unknown quadrature rule {rule!r}")
    return step * np.asarray(_unit_weights(n_nodes, rule))


class PropagatorPlan:
    """Cached |ξ| and the K̇, K multipliers for one grid.

    Shared read-only between concurrent evaluations.
    """

    def __init__(self, grid: SpectralGrid):
        self.grid = grid
        self.xi = grid.xi_abs
        self._nonzero = self.xi > 0
        self._safe_xi = np.where(self._nonzero, self.xi, 1.0)

    def cos_symbol(self, t: float) -> np.ndarray:
        return np.cos(self.xi * t)

    def sinc_symbol(self, t: float) -> np.ndarray:
        """sin(|ξ|t)/|ξ| with the limit t at ξ = 0."""
        return np.where(self._nonzero, np.sin(self.xi * t) / self._safe_xi, t)

    def apply_kdot(self, phi: Field, t: float) -> Field:
        return self.grid.apply_multiplier(phi, self.cos_symbol(t))

    def apply_k(self, psi: Field, t: float) -> Field:
        return self.grid.apply_multiplier(psi, self.sinc_symbol(t))

    def linear_solve(self, phi: Field, psi: Field, t: float) -> Tuple[Field, Field]:
        """(u, u_t) at time t of the free wave with data (φ, ψ)."""
        Phi = self.grid.forward(phi).coeffs
        Psi = self.grid.forward(psi).coeffs
        u, ut = self._evolve(Phi, Psi, t)
        spec = self.grid.spec
        return self.grid.inverse(SpectralField(spec, u)), self.grid.inverse(SpectralField(spec, ut))

    def _evolve(self, Phi: np.ndarray, Psi: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray]:
        c = self.cos_symbol(t)
        u = c * Phi + self.sinc_symbol(t) * Psi
        ut = -self.xi * np.sin(self.xi * t) * Phi + c * Psi
        return u, ut

    def linear_trajectory(self, phi: Field, psi: Field, times: Sequence[float]) -> Trajectory:
        Phi = self.grid.forward(phi).coeffs
        Psi = self.grid.forward(psi).coeffs
        spec = self.grid.spec
        u = np.empty((len(times),) + spec.shape)
        ut = np.empty_like(u)
        for m, t in enumerate(times):
            cu, cut = self._evolve(Phi, Psi, float(t))
            u[m] = self.grid.inverse(SpectralField(spec, cu)).values
            ut[m] = self.grid.inverse(SpectralField(spec, cut)).values
        return Trajectory(spec, np.asarray(times, dtype=float), u, ut)

    def duhamel(self, h: Callable[[float], Field], t: float, quad: QuadSpec = QuadSpec()) -> Field:
        """∫_0^t K(t - τ) h(τ) dτ by composite quadrature on quad.nodes nodes."""
        spec = self.grid.spec
        if t == 0:
            return Field.zeros(spec)
        taus = np.linspace(0.0, t, quad.nodes)
        weights = quadrature_weights(quad.nodes, t / (quad.nodes - 1), quad.rule)
        acc = np.zeros(spec.shape, dtype=complex)
        for i, tau in enumerate(taus):
            sample = h(float(tau))
            if not sample.is_finite():
                raise PropagationError(i, float(tau))
            acc += weights[i] * self.sinc_symbol(t - tau) * self.grid.forward(sample).coeffs
        return self.grid.inverse(SpectralField(spec, acc))

    def duhamel_trajectory(
        self, forcing: np.ndarray, times: np.ndarray, rule: str = "simpson"
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Duhamel contributions to u and u_t at every node of an equispaced time grid.

        ``forcing[i]`` holds h(times[i]); the integral up to times[m] uses the
        nodes 0..m.
        """
        spec = self.grid.spec
        n_t = len(times)
        if n_t > 1:
            steps = np.diff(times)
            if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
                raise DomainError("Duhamel trajectory needs an equispaced time grid")
            step = float(steps[0])
        else:
            step = 0.0
        hats = []
        for i in range(n_t):
            if not np.all(np.isfinite(forcing[i])):
                raise PropagationError(i, float(times[i]))
            hats.append(self.grid.forward(Field(spec, forcing[i])).coeffs)
        u = np.zeros((n_t,) + spec.shape)
        ut = np.zeros_like(u)
        for m in range(1, n_t):
            weights = quadrature_weights(m + 1, step, rule)
            acc_u = np.zeros(spec.shape, dtype=complex)
            acc_ut = np.zeros(spec.shape, dtype=complex)
            for i in range(m + 1):
                lag = times[m] - times[i]
                acc_u += weights[i] * self.sinc_symbol(lag) * hats[i]
                acc_ut += weights[i] * self.cos_symbol(lag) * hats[i]
            u[m] = self.grid.inverse(SpectralField(spec, acc_u)).values
            ut[m] = self.grid.inverse(SpectralField(spec, acc_ut)).values
        return u, ut
