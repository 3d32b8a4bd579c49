"""Bounded-ratio probes for the inequalities the well-posedness argument invokes.

A probe draws ``count`` samples from a documented family, evaluates
LHS/RHS on each and passes when the largest ratio shows no growth trend: the
log-slope of max-ratio between the first count/4 samples and all samples is
at most 0.05, and no sample has RHS = 0 < LHS.

Sample i is drawn from ``numpy.random.default_rng([seed, i])`` so a report
does not depend on execution order or on the number of workers.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from .dynamics import WeightField, nonlinearity
from .errors import DomainError
from .exponents import AdmissiblePair, Params, default_gamma, default_pair_set, theta1, theta2, to_rational
from .grid import Field, GridMode, SpectralField, SpectralGrid, Trajectory
from .norms import BesovSpec, besov_norm, data_norm, time_norm, w_norm
from .propagator import PropagatorPlan

logger = logging.getLogger(__name__)

SLOPE_LIMIT = 0.05
DILATION_DRIFT_LIMIT = 0.15
FAMILIES = ("band_limited", "gaussian", "linear_trajectory")


@dataclass
class ProbeContext:
    """Grid, equation parameters and probe constants shared by all samples."""

    sgrid: SpectralGrid
    params: Params
    T: float = 0.5
    snapshots: int = 33
    rule: str = "simpson"
    pair_set: Optional[List[AdmissiblePair]] = None
    space_scale: int = 3
    gamma: Optional[Fraction] = None
    epsilon: Optional[float] = None
    # Besov embedding: (p, r, sigma, rho, q) with sigma - 3/p = rho - 3/r
    besov: Tuple[float, float, float, float, float] = (2, 4, 1, 0.25, 2)
    product_s: float = 0.5
    chain_s: float = 0.5

    def __post_init__(self):
        if self.pair_set is None:
            self.pair_set = default_pair_set(self.params, self.gamma)

    @property
    def alpha(self) -> float:
        return float(self.params.alpha)

    @cached_property
    def plan(self) -> PropagatorPlan:
        return PropagatorPlan(self.sgrid)

    @cached_property
    def weight(self) -> WeightField:
        return WeightField.build(self.sgrid, float(self.params.b), self.epsilon)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.snapshots)

    def thetas(self) -> Tuple[float, Optional[float]]:
        """(theta1, theta2), with theta2 None when b >= 3/2 leaves no Lebesgue exponent."""
        p = self.params
        t1 = float(theta1(p.alpha, p.b))
        if self.gamma is None and p.b >= Fraction(3, 2):
            return t1, None
        g = to_rational(self.gamma) if self.gamma is not None else default_gamma(p.b)
        return t1, float(theta2(p.alpha, g, p.b))

    def time_factor(self, T: Optional[float] = None) -> float:
        """T^theta1 + T^theta2, the second term dropped when theta2 is undefined."""
        T = self.T if T is None else T
        return sum(T**theta for theta in self.thetas() if theta is not None)

    def w(self, traj: Trajectory, s: float = 0.0) -> float:
        return w_norm(traj, self.pair_set, s, self.sgrid, self.space_scale, self.rule)


# sample families


def band_limited_field(rng: np.random.Generator, sgrid: SpectralGrid, fraction: float = 0.125) -> Field:
    """Random field whose spectrum lives on |xi| <= fraction * pi n / L."""
    spec = sgrid.spec
    k_cut = fraction * math.pi * spec.n_points / spec.box_length
    if spec.mode is GridMode.RADIAL1D:
        # odd w = sum a_m sin(k_m x) so that u = w / x is radial
        m_max = max(2, int(fraction * spec.n_points / 2))
        ks = 2 * math.pi * np.arange(1, m_max + 1) / spec.box_length
        amps = rng.standard_normal(m_max) / (1.0 + np.arange(m_max))
        w = np.sin(np.outer(sgrid.axis, ks)) @ amps
        return sgrid.inverse(SpectralField(spec, np.fft.fft(w)))
    noise = rng.standard_normal(spec.shape)
    coeffs = np.fft.fftn(noise) * (sgrid.xi_abs <= k_cut)
    return Field(spec, np.fft.ifftn(coeffs).real)


def gaussian_field(rng: np.random.Generator, sgrid: SpectralGrid) -> Field:
    """Gaussian of random amplitude and width; random centre in the full box, origin when radial."""
    spec = sgrid.spec
    L = spec.box_length
    amplitude = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
    width = max(rng.uniform(L / 32, L / 12), 4 * spec.spacing)
    if spec.mode is GridMode.RADIAL1D:
        return Field(spec, amplitude * np.exp(-((sgrid.radius / width) ** 2)))
    centre = rng.uniform(-L / 8, L / 8, size=3)
    r2 = sum((c - x0) ** 2 for c, x0 in zip(sgrid.coords, centre))
    return Field(spec, amplitude * np.exp(-r2 / width**2))


def sample_field(family: str, rng: np.random.Generator, ctx: ProbeContext) -> Field:
    if family == "band_limited":
        return band_limited_field(rng, ctx.sgrid)
    if family == "gaussian":
        return gaussian_field(rng, ctx.sgrid)
    if family == "linear_trajectory":
        traj = sample_trajectory("band_limited", rng, ctx)
        return traj.field(int(rng.integers(len(traj))))
    raise DomainError(f"unknown sample family {family!r}; expected one of {', '.join(FAMILIES)}")


def sample_trajectory(family: str, rng: np.random.Generator, ctx: ProbeContext) -> Trajectory:
    """Linear evolution over [0, T] of data drawn from the family."""
    base = "band_limited" if family == "linear_trajectory" else family
    phi = sample_field(base, rng, ctx)
    psi = sample_field(base, rng, ctx)
    return ctx.plan.linear_trajectory(phi, psi, ctx.times)


# probes; each returns (lhs, rhs) for one sample


def _strichartz(rng, ctx: ProbeContext, family: str) -> Tuple[float, float]:
    base = "band_limited" if family == "linear_trajectory" else family
    phi = sample_field(base, rng, ctx)
    psi = sample_field(base, rng, ctx)
    traj = ctx.plan.linear_trajectory(phi, psi, ctx.times)
    return ctx.w(traj), data_norm(phi, psi, 0.0, ctx.sgrid)


def _besov_embedding(rng, ctx: ProbeContext, family: str) -> Tuple[float, float]:
    f = sample_field(family, rng, ctx)
    p, r, sigma, rho, q = ctx.besov
    return besov_norm(f, BesovSpec(rho, r, q), ctx.sgrid), besov_norm(f, BesovSpec(sigma, p, q), ctx.sgrid)


def _fractional_product(rng, ctx: ProbeContext, family: str) -> Tuple[float, float]:
    sg, s = ctx.sgrid, ctx.product_s
    f = sample_field(family, rng, ctx)
    g = sample_field(family, rng, ctx)
    lhs = sg.lp_norm(sg.fractional_derivative(Field(f.grid, f.values * g.values), s), 2)
    rhs = sg.lp_norm(f, math.inf) * sg.lp_norm(sg.fractional_derivative(g, s), 2) + sg.lp_norm(
        sg.fractional_derivative(f, s), 2
    ) * sg.lp_norm(g, math.inf)
    return lhs, rhs


def _fractional_chain(rng, ctx: ProbeContext, family: str) -> Tuple[float, float]:
    sg, s, a = ctx.sgrid, ctx.chain_s, ctx.alpha
    u = sample_field(family, rng, ctx)
    G = Field(u.grid, np.abs(u.values) ** a * u.values)
    G_prime = Field(u.grid, (a + 1) * np.abs(u.values) ** a)
    lhs = sg.lp_norm(sg.fractional_derivative(G, s), 2)
    rhs = sg.lp_norm(G_prime, 4) * sg.lp_norm(sg.fractional_derivative(u, s), 4)
    return lhs, rhs


def _nonlinear_l1l2(traj: Trajectory, ctx: ProbeContext, s: float = 0.0, partner: Optional[Trajectory] = None) -> float:
    sg = ctx.sgrid
    values = []
    for m in range(len(traj)):
        u = traj.field(m)
        if partner is None:
            term = nonlinearity(u, ctx.weight, ctx.alpha)
        else:
            term = Field(u.grid, ctx.weight.values * np.abs(u.values) ** ctx.alpha * partner.u[m])
        if s > 0:
            term = sg.fractional_derivative(term, s)
        values.append(sg.lp_norm(term, 2))
    return time_norm(values, traj.times, 1.0, ctx.rule)


def _nonlinear(rng, ctx: ProbeContext, family: str) -> Tuple[float, float]:
    traj = sample_trajectory(family, rng, ctx)
    return _nonlinear_l1l2(traj, ctx), ctx.time_factor() * ctx.w(traj) ** (ctx.alpha + 1)


def _nonlinear_hs(rng, ctx: ProbeContext, family: str) -> Tuple[float, float]:
    s = float(ctx.params.s)
    traj = sample_trajectory(family, rng, ctx)
    return _nonlinear_l1l2(traj, ctx, s=s), ctx.time_factor() * ctx.w(traj, s) ** (ctx.alpha + 1)


def _nonlinear_bilinear(rng, ctx: ProbeContext, family: str) -> Tuple[float, float]:
    u = sample_trajectory(family, rng, ctx)
    v = sample_trajectory(family, rng, ctx)
    lhs = _nonlinear_l1l2(u, ctx, partner=v)
    return lhs, ctx.time_factor() * ctx.w(u) ** ctx.alpha * ctx.w(v)


def gagliardo_nirenberg_index(alpha: float) -> float:
    """Sobolev index 3/2 - 2/(p-1) with p = alpha + 1."""
    return 1.5 - 2.0 / alpha


def _gagliardo_nirenberg(rng, ctx: ProbeContext, family: str) -> Tuple[float, float]:
    """∫|u|^(alpha+2) against ‖grad u‖^2 times ‖u‖^alpha in L^(3 alpha/2), or in the Sobolev space when its index is >= 0."""
    sg, a = ctx.sgrid, ctx.alpha
    u = sample_field(family, rng, ctx)
    lhs = sg.integrate(np.abs(u.values) ** (a + 2))
    index = gagliardo_nirenberg_index(a)
    if index >= 0:
        tail = sg.sobolev_norm(u, index)
    else:
        tail = sg.lp_norm(u, 1.5 * a)
    return lhs, sg.gradient_energy(u) * tail**a


ProbeFn = Callable[[np.random.Generator, ProbeContext, str], Tuple[float, float]]

PROBES: Dict[str, ProbeFn] = {
    "strichartz": _strichartz,
    "besov_embedding": _besov_embedding,
    "fractional_product": _fractional_product,
    "fractional_chain": _fractional_chain,
    "nonlinear": _nonlinear,
    "nonlinear_hs": _nonlinear_hs,
    "nonlinear_bilinear": _nonlinear_bilinear,
    "gagliardo_nirenberg": _gagliardo_nirenberg,
}


@dataclass
class RatioProbeReport:
    name: str
    family: str
    seed: int
    count: int
    lhs: List[float] = field(default_factory=list)
    rhs: List[float] = field(default_factory=list)
    ratios: List[float] = field(default_factory=list)
    violations: List[int] = field(default_factory=list)

    @property
    def max_ratio(self) -> float:
        finite = [r for r in self.ratios if math.isfinite(r)]
        return max(finite) if finite else 0.0

    @property
    def baseline_max(self) -> float:
        """Largest finite ratio among the first count/4 samples."""
        head = [r for r in self.ratios[: max(1, self.count // 4)] if math.isfinite(r)]
        return max(head) if head else 0.0

    @property
    def slope(self) -> float:
        base, full = self.baseline_max, self.max_ratio
        if full == 0:
            return 0.0
        if base == 0:
            return math.inf
        return math.log(full / base) / math.log(4.0)

    @property
    def passed(self) -> bool:
        return not self.violations and self.slope <= SLOPE_LIMIT

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {"sample": range(len(self.ratios)), "lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratios}
        )

    def summary(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "family": self.family,
            "seed": self.seed,
            "count": self.count,
            "max_ratio": self.max_ratio,
            "baseline_max": self.baseline_max,
            "slope": self.slope,
            "violations": list(self.violations),
            "passed": self.passed,
        }


def probe_inequality(
    name: str,
    family: str,
    count: int,
    seed: int,
    ctx: ProbeContext,
    workers: int = 1,
    progress: bool = False,
) -> RatioProbeReport:
    """Evaluate one registered probe on ``count`` samples of ``family``."""
    if name not in PROBES:
        raise DomainError(f"unknown probe {name!r}; registered: {', '.join(PROBES)}")
    if family not in FAMILIES:
        raise DomainError(f"unknown sample family {family!r}; expected one of {', '.join(FAMILIES)}")
    if count < 4:
        raise DomainError("a probe needs at least 4 samples")
    fn = PROBES[name]

    def one(i: int) -> Tuple[float, float]:
        return fn(np.random.default_rng([seed, i]), ctx, family)

    logger.info(f"Probe {name}: {count} samples of {family} (seed {seed})")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(tqdm(pool.map(one, range(count)), total=count, desc=name, disable=not progress))
    else:
        results = [one(i) for i in tqdm(range(count), desc=name, disable=not progress)]

    report = RatioProbeReport(name, family, seed, count)
    for i, (lhs, rhs) in enumerate(results):
        if rhs == 0:
            ratio = 0.0 if lhs == 0 else math.inf
            if lhs > 0:
                report.violations.append(i)
                logger.warning(f"Probe {name}: sample {i} has RHS = 0 < LHS = {lhs:g}")
        else:
            ratio = lhs / rhs
        report.lhs.append(float(lhs))
        report.rhs.append(float(rhs))
        report.ratios.append(float(ratio))
    logger.info(f"Probe {name}: max ratio {report.max_ratio:.4g}, slope {report.slope:.4f}, passed={report.passed}")
    return report


def dilation_drift(
    ctx: ProbeContext, lambdas: Sequence[float] = (0.5, 1.0, 2.0), width: Optional[float] = None
) -> Dict[str, object]:
    """Besov-embedding ratio on dilates f(lambda x) of a centred Gaussian.

    The indices satisfy sigma - 3/p = rho - 3/r, so the ratio is dilation
    invariant up to truncation at the band edges; drift = max/min - 1.
    """
    sg = ctx.sgrid
    # a third of sqrt(L h) keeps w0/2 resolved by the mesh and 2 w0 small against the box
    w0 = math.sqrt(sg.spec.box_length * sg.spec.spacing) / 3 if width is None else width
    p, r, sigma, rho, q = ctx.besov
    ratios = {}
    for lam in lambdas:
        f = Field(sg.spec, np.exp(-((lam * sg.radius / w0) ** 2)))
        ratios[lam] = besov_norm(f, BesovSpec(rho, r, q), sg) / besov_norm(f, BesovSpec(sigma, p, q), sg)
    values = list(ratios.values())
    return {"ratios": ratios, "drift": max(values) / min(values) - 1.0}


def nonlinear_time_scaling(u: Field, ctx: ProbeContext) -> Dict[str, object]:
    """LHS of the nonlinear estimate on the trajectory frozen at u, over [0, T] and [0, T/2]."""
    full = Trajectory.frozen(u, np.linspace(0.0, ctx.T, ctx.snapshots))
    half = Trajectory.frozen(u, np.linspace(0.0, ctx.T / 2, ctx.snapshots))
    lhs_full = _nonlinear_l1l2(full, ctx)
    lhs_half = _nonlinear_l1l2(half, ctx)
    ratio = lhs_full / lhs_half if lhs_half > 0 else math.nan
    bound = 2.0 ** (min(t for t in ctx.thetas() if t is not None) - 1.0)
    return {
        "lhs_T": lhs_full,
        "lhs_half": lhs_half,
        "ratio": ratio,
        "lower_bound": bound,
        "consistent": bool(ratio >= bound) if math.isfinite(ratio) else False,
    }
