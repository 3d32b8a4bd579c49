"""Nonlinearity, weighted energy and the Störmer-Verlet reference integrator."""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .errors import DivergenceError, DomainError, StabilityError
from .grid import Field, GridMode, GridSpec, SpectralGrid, Trajectory

logger = logging.getLogger(__name__)

# leapfrog is stable for |xi|_max * dt < 2; keep a margin below it
STABILITY_MARGIN = 0.95
# relative drifts below this are round-off; no convergence order is read from them
ROUNDOFF_DRIFT = 1e-13


@dataclass
class WeightField:
    """Regularized singular weight (|x|^2 + eps^2)^(-b/2)."""

    grid: GridSpec
    values: np.ndarray
    epsilon: float
    b: float
    origin_excluded: bool = False

    @classmethod
    def build(cls, sgrid: SpectralGrid, b: float, epsilon: Optional[float] = None) -> "WeightField":
        """Default epsilon is one grid spacing; epsilon = 0 needs the radial layout."""
        b = float(b)
        eps = sgrid.spec.spacing if epsilon is None else float(epsilon)
        if eps < 0:
            raise DomainError(f"epsilon must be >= 0, got {eps}")
        if eps > 0:
            values = (sgrid.radius**2 + eps**2) ** (-b / 2)
            return cls(sgrid.spec, values, eps, b)
        if sgrid.spec.mode is not GridMode.RADIAL1D:
            raise DomainError("epsilon = 0 is only available on the radial grid")
        values = np.zeros(sgrid.spec.shape)
        nz = sgrid.radius > 0
        values[nz] = sgrid.radius[nz] ** (-b)
        logger.debug("Unregularized weight: origin node excluded")
        return cls(sgrid.spec, values, 0.0, b, origin_excluded=True)

    @classmethod
    def unit(cls, grid: GridSpec) -> "WeightField":
        """w = 1 everywhere (b = 0)."""
        return cls(grid, np.ones(grid.shape), 0.0, 0.0)


@dataclass(frozen=True)
class EnergyRecord:
    t: float
    kinetic: float
    gradient: float
    potential: float
    total: float


def nonlinearity(u: Field, w: Optional[WeightField], alpha: float) -> Field:
    """Pointwise w(x) |u|^alpha u; ``w=None`` switches the term off."""
    if alpha < 0:
        raise DomainError(f"alpha must be >= 0, got {alpha}")
    if w is None:
        return Field.zeros(u.grid)
    if w.grid != u.grid:
        raise DomainError("weight and field live on different grids")
    return Field(u.grid, w.values * np.abs(u.values) ** alpha * u.values)


def potential_energy(u: Field, w: Optional[WeightField], alpha: float, sgrid: SpectralGrid) -> float:
    """∫ w |u|^(alpha+2) / (alpha+2); zero when the nonlinearity is off."""
    if w is None:
        return 0.0
    return sgrid.integrate(w.values * np.abs(u.values) ** (alpha + 2)) / (alpha + 2)


def energy(
    u: Field, ut: Field, w: Optional[WeightField], alpha: float, sgrid: SpectralGrid, t: float = 0.0
) -> EnergyRecord:
    """Kinetic, gradient and weighted potential parts of the conserved energy at time t."""
    kinetic = 0.5 * sgrid.integrate(ut.values**2)
    gradient = 0.5 * sgrid.gradient_energy(u)
    potential = potential_energy(u, w, alpha, sgrid)
    return EnergyRecord(t, kinetic, gradient, potential, kinetic + gradient + potential)


def stability_limit(sgrid: SpectralGrid) -> float:
    """Largest admissible reference time step, margin * 2 / |xi|_max."""
    return STABILITY_MARGIN * 2.0 / sgrid.xi_max


def _acceleration(u: Field, w: Optional[WeightField], alpha: float, sgrid: SpectralGrid) -> Field:
    force = sgrid.dealias(nonlinearity(u, w, alpha))
    return sgrid.laplacian(u) - force


def reference_step(
    state: Tuple[Field, Field], dt: float, w: Optional[WeightField], alpha: float, sgrid: SpectralGrid
) -> Tuple[Field, Field]:
    """One kick-drift-kick Störmer-Verlet step of u_tt = Δu - w|u|^alpha u."""
    limit = stability_limit(sgrid)
    if not 0 < dt <= limit:
        raise StabilityError(dt, limit)
    u, ut = state
    v_half = ut + _acceleration(u, w, alpha, sgrid).scaled(0.5 * dt)
    u_new = u + v_half.scaled(dt)
    ut_new = v_half + _acceleration(u_new, w, alpha, sgrid).scaled(0.5 * dt)
    return u_new, ut_new


def run_reference(
    phi: Field,
    psi: Field,
    times: Sequence[float],
    dt: float,
    w: Optional[WeightField],
    alpha: float,
    sgrid: SpectralGrid,
    progress: bool = False,
) -> Trajectory:
    """Integrate from times[0] and sample the state at every requested time.

    Each output interval is split into equal sub-steps no longer than dt so the
    output times are hit exactly.
    """
    times = np.asarray(times, dtype=float)
    if len(times) == 0:
        raise DomainError("run_reference needs at least one output time")
    if np.any(np.diff(times) < 0):
        raise DomainError("output times must be nondecreasing")
    limit = stability_limit(sgrid)
    if not 0 < dt <= limit:
        raise StabilityError(dt, limit)

    spec = sgrid.spec
    u_out = np.empty((len(times),) + spec.shape)
    ut_out = np.empty_like(u_out)
    state = (phi, psi)
    u_out[0], ut_out[0] = phi.values, psi.values
    step_count = 0
    for m in tqdm(range(1, len(times)), desc="reference", disable=not progress, leave=False):
        span = times[m] - times[m - 1]
        n_sub = max(1, math.ceil(span / dt - 1e-9)) if span > 0 else 0
        for _ in range(n_sub):
            state = reference_step(state, span / n_sub, w, alpha, sgrid)
            step_count += 1
            if not (state[0].is_finite() and state[1].is_finite()):
                logger.error(f"Error in reference run: non-finite state after step {step_count}")
                raise DivergenceError(step_count, what="reference step")
        u_out[m], ut_out[m] = state[0].values, state[1].values
    logger.debug(f"Reference run: {step_count} steps over [{times[0]:g}, {times[-1]:g}]")
    return Trajectory(spec, times, u_out, ut_out)


def energy_series(
    traj: Trajectory, w: Optional[WeightField], alpha: float, sgrid: SpectralGrid
) -> List[EnergyRecord]:
    """One EnergyRecord per snapshot of the trajectory."""
    return [
        energy(traj.field(m), traj.velocity(m), w, alpha, sgrid, float(traj.times[m]))
        for m in range(len(traj))
    ]


def relative_drift(series: List[EnergyRecord]) -> float:
    """max_t |E(t) - E(0)| / E(0); zero for a zero-energy series."""
    e0 = series[0].total
    if e0 == 0:
        return 0.0
    return max(abs(r.total - e0) for r in series) / abs(e0)


def axis_gap(radial: Trajectory, box: Trajectory) -> List[float]:
    """Per-snapshot max |u_radial - u_box| along the box's x axis, relative to max |u_radial|.

    Both grids must share n and L so the radial nodes coincide with the axis nodes.
    """
    if radial.grid.mode is not GridMode.RADIAL1D or box.grid.mode is not GridMode.FULL3D:
        raise DomainError("axis_gap compares a radial1d trajectory against a full3d one")
    if (radial.grid.n_points, radial.grid.box_length) != (box.grid.n_points, box.grid.box_length):
        raise DomainError("axis_gap needs matching n and L")
    if len(radial.times) != len(box.times) or not np.allclose(radial.times, box.times):
        raise DomainError("axis_gap needs matching snapshot times")
    centre = radial.grid.n_points // 2
    line = box.u[:, centre, centre, :]
    scale = float(np.abs(radial.u).max())
    if scale == 0:
        return [float(np.abs(line[m]).max()) for m in range(len(radial.times))]
    return [float(np.abs(radial.u[m] - line[m]).max()) / scale for m in range(len(radial.times))]
