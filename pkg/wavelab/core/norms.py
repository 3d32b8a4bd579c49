"""Mixed space-time Lebesgue norms, the W-norm over a finite pair set, Besov and Sobolev norms."""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate

from .errors import ConfigError, DomainError
from .exponents import AdmissiblePair, classify_pair
from .grid import Field, SpectralGrid, Trajectory
from .propagator import quadrature_weights

logger = logging.getLogger(__name__)

Exponent = Union[float, int]


def _as_exponent(value) -> float:
    if value is None:
        return math.inf
    return float(value)


@dataclass(frozen=True)
class MixedNormSpec:
    """L^q in time over ``time_nodes``, L^p in space. Infinite exponents are maxima."""

    q: float
    p: float
    time_nodes: Optional[Tuple[float, ...]] = None
    rule: str = "simpson"

    def __post_init__(self):
        object.__setattr__(self, "q", _as_exponent(self.q))
        object.__setattr__(self, "p", _as_exponent(self.p))
        if self.q < 1 or self.p < 1:
            raise DomainError(f"mixed norm exponents must be >= 1, got q={self.q}, p={self.p}")

    @classmethod
    def from_pair(cls, pair: AdmissiblePair, space_scale: int = 3, time_nodes=None, rule: str = "simpson"):
        """Time exponent q and spatial exponent space_scale * r of an admissible pair."""
        r = pair.r
        p = math.inf if r is None else float(space_scale * r)
        nodes = None if time_nodes is None else tuple(float(t) for t in time_nodes)
        return cls(_as_exponent(pair.q), p, nodes, rule)


def time_weights(times: np.ndarray, rule: str = "simpson") -> np.ndarray:
    """Quadrature weights on the snapshot grid.

    Falls back to the trapezoid rule when the Simpson end correction yields a
    negative weight, so the resulting norm stays a norm.
    """
    times = np.asarray(times, dtype=float)
    n = len(times)
    if n == 1:
        return np.zeros(1)
    steps = np.diff(times)
    if np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        w = quadrature_weights(n, float(steps[0]), rule)
        if np.any(w < 0):
            w = quadrature_weights(n, float(steps[0]), "trapezoid")
        return w
    return integrate.trapezoid(np.eye(n), x=times, axis=0)


def time_norm(values: Sequence[float], times: np.ndarray, q: float, rule: str = "simpson") -> float:
    values = np.abs(np.asarray(values, dtype=float))
    if values.size == 0:
        raise DomainError("time norm of an empty trajectory")
    if math.isinf(q):
        return float(values.max())
    w = time_weights(times, rule)
    return float(np.sum(w * values**q) ** (1.0 / q))


def _derivative_stack(traj: Trajectory, s: float, sgrid: SpectralGrid) -> np.ndarray:
    if s == 0:
        return traj.u
    return np.stack([sgrid.fractional_derivative(traj.field(m), s).values for m in range(len(traj))])


def _spatial_norms(stack: np.ndarray, p: float, sgrid: SpectralGrid) -> np.ndarray:
    return np.array([sgrid.lp_norm(Field(sgrid.spec, v), p) for v in stack])


def mixed_norm(traj: Trajectory, spec: MixedNormSpec, s: float, sgrid: SpectralGrid) -> float:
    """‖D^s u‖ in L^q_t L^p_x; s = 0 is the plain Lebesgue norm."""
    if len(traj) == 0:
        raise DomainError("mixed norm of an empty trajectory")
    if spec.time_nodes is not None and (
        len(spec.time_nodes) != len(traj) or not np.allclose(spec.time_nodes, traj.times)
    ):
        raise DomainError("trajectory is not sampled on the norm's time nodes")
    space = _spatial_norms(_derivative_stack(traj, s, sgrid), spec.p, sgrid)
    return time_norm(space, traj.times, spec.q, spec.rule)


def check_pair_set(pair_set: Iterable[AdmissiblePair]) -> None:
    pairs = list(pair_set)
    if not pairs:
        raise ConfigError(["pair_set must not be empty"])
    bad = [p.label() for p in pairs if not classify_pair(p).is_optimal]
    if bad:
        raise ConfigError([f"pair {label} is not an optimal admissible pair" for label in bad])


def pair_norms(
    traj: Trajectory,
    pair_set: Sequence[AdmissiblePair],
    s: float,
    sgrid: SpectralGrid,
    space_scale: int = 3,
    rule: str = "simpson",
) -> Dict[str, float]:
    """Mixed norm of the trajectory for every pair of the set, keyed by pair label."""
    check_pair_set(pair_set)
    stack = _derivative_stack(traj, s, sgrid)
    out: Dict[str, float] = {}
    cache: Dict[float, np.ndarray] = {}
    for pair in pair_set:
        spec = MixedNormSpec.from_pair(pair, space_scale, rule=rule)
        if spec.p not in cache:
            cache[spec.p] = _spatial_norms(stack, spec.p, sgrid)
        out[pair.label()] = time_norm(cache[spec.p], traj.times, spec.q, rule)
    return out


def w_norm(
    traj: Trajectory,
    pair_set: Sequence[AdmissiblePair],
    s: float,
    sgrid: SpectralGrid,
    space_scale: int = 3,
    rule: str = "simpson",
) -> float:
    """Maximum of the mixed norms over the finite pair set."""
    return max(pair_norms(traj, pair_set, s, sgrid, space_scale, rule).values())


@dataclass(frozen=True)
class BesovSpec:
    sigma: float
    p: float
    q_dyadic: float
    dyad_range: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        object.__setattr__(self, "p", _as_exponent(self.p))
        object.__setattr__(self, "q_dyadic", _as_exponent(self.q_dyadic))


def besov_blocks(f: Field, spec: BesovSpec, sgrid: SpectralGrid) -> Dict[int, float]:
    """2^(j sigma) ‖P_(2^j) f‖_(L^p) for every dyad of the range."""
    lo, hi = sgrid.dyad_range()
    j_min, j_max = spec.dyad_range if spec.dyad_range is not None else (lo, hi)
    if j_min > j_max or j_min < lo or j_max > hi:
        raise DomainError(f"dyad range [{j_min}, {j_max}] is outside the resolvable band [{lo}, {hi}]")
    return {
        j: 2.0 ** (j * spec.sigma) * sgrid.lp_norm(sgrid.lp_project(f, 2.0**j), spec.p)
        for j in range(j_min, j_max + 1)
    }


def besov_norm(f: Field, spec: BesovSpec, sgrid: SpectralGrid) -> float:
    blocks = np.array(list(besov_blocks(f, spec, sgrid).values()))
    if math.isinf(spec.q_dyadic):
        return float(blocks.max())
    return float(np.sum(blocks**spec.q_dyadic) ** (1.0 / spec.q_dyadic))


def sobolev_norm(f: Field, s: float, sgrid: SpectralGrid) -> float:
    return sgrid.sobolev_norm(f, s)


def data_norm(phi: Field, psi: Field, s: float, sgrid: SpectralGrid) -> float:
    """‖phi‖_(Ḣ^(s+1)) + ‖psi‖_(Ḣ^s)."""
    return sgrid.sobolev_norm(phi, s + 1) + (sgrid.lp_norm(psi, 2) if s == 0 else sgrid.sobolev_norm(psi, s))


def energy_norm(u: Field, ut: Field, sgrid: SpectralGrid) -> float:
    """‖u_t‖_(L^2) + ‖grad u‖_(L^2)."""
    return sgrid.lp_norm(ut, 2) + math.sqrt(sgrid.gradient_energy(u))
