"""Picard iteration of the Duhamel map on [0, T].

The map is

    H(u)(t) = K̇(t)phi + K(t)psi - ∫_0^t K(t - tau) [w |u|^alpha u](tau) dtau

(the minus sign comes from moving the defocusing term to the right-hand side
of u_tt - Δu = h). Distances between iterates are measured in the W-norm over
a finite pair set; in the Ḣ^s regime the ball is measured in
‖u‖_T = W(L^2) + W(Ḣ^s) while the metric stays W(L^2).
"""
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from .dynamics import WeightField, energy, energy_series, nonlinearity, relative_drift, run_reference
from .errors import DivergenceError, DomainError, PropagationError
from .exponents import AdmissiblePair, Params, Theorem, default_gamma, default_pair_set, theta1, theta2, to_rational
from .grid import Field, SpectralGrid, Trajectory
from .norms import check_pair_set, data_norm, energy_norm, w_norm
from .propagator import PropagatorPlan

logger = logging.getLogger(__name__)

# ratios are not formed once the previous difference sits at round-off level
RATIO_FLOOR = 1e-13
SOURCE_HS_TARGET = Fraction(1, 4)


class Outcome(str, Enum):
    CONVERGED = "converged"
    BALL_ESCAPE = "ball_escape"
    MAX_ITERS = "max_iters"


@dataclass(frozen=True)
class PicardConfig:
    T: float
    max_iters: int = 50
    tol: float = 1e-10
    a_policy: Union[str, float] = "auto"
    snapshots: int = 33
    quadrature: str = "simpson"
    contraction_target: float = 0.5
    pair_set: Optional[Tuple[AdmissiblePair, ...]] = None
    space_scale: int = 3

    def __post_init__(self):
        problems = []
        if not self.T > 0:
            problems.append(f"T must be positive, got {self.T}")
        if not self.tol > 0:
            problems.append(f"tol must be positive, got {self.tol}")
        if self.snapshots < 9:
            problems.append(f"snapshots must be >= 9, got {self.snapshots}")
        if self.max_iters < 1:
            problems.append(f"max_iters must be >= 1, got {self.max_iters}")
        if self.a_policy != "auto" and not (isinstance(self.a_policy, (int, float)) and self.a_policy > 0):
            problems.append(f"a_policy must be 'auto' or a positive radius, got {self.a_policy!r}")
        if problems:
            raise DomainError("; ".join(problems))

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.snapshots)


@dataclass(frozen=True)
class IterationRecord:
    k: int
    d_k: float
    ratio_k: Optional[float]
    ball_norm: float


@dataclass
class PicardReport:
    T: float
    a: float
    outcome: Outcome
    iterations: List[IterationRecord] = field(default_factory=list)
    residual: Optional[float] = None

    @property
    def ratios(self) -> List[float]:
        return [r.ratio_k for r in self.iterations if r.ratio_k is not None]

    @property
    def max_ratio(self) -> float:
        """Largest measured contraction ratio; 0 when none could be formed."""
        return max(self.ratios, default=0.0)

    @property
    def final_ratio(self) -> Optional[float]:
        ratios = self.ratios
        return ratios[-1] if ratios else None

    @property
    def final_d(self) -> float:
        return self.iterations[-1].d_k if self.iterations else 0.0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {"k": r.k, "d_k": r.d_k, "ratio_k": r.ratio_k, "ball_norm": r.ball_norm}
                for r in self.iterations
            ],
            columns=["k", "d_k", "ratio_k", "ball_norm"],
        )

    def summary(self) -> Dict[str, object]:
        return {
            "T": self.T,
            "a": self.a,
            "outcome": self.outcome.value,
            "iterations": len(self.iterations),
            "max_ratio": self.max_ratio,
            "final_ratio": self.final_ratio,
            "final_d": self.final_d,
            "residual": self.residual,
        }


@dataclass
class ContinuationInterval:
    index: int
    t_start: float
    length: float
    iterations: int
    outcome: str
    energy_start: float
    energy_end: float
    relative_drift: float
    energy_norm_max: float


@dataclass
class ContinuationReport:
    horizon: float
    reached: float
    intervals: List[ContinuationInterval]
    trajectory: Optional[Trajectory]
    failure: Optional[str] = None

    @property
    def reached_horizon(self) -> bool:
        return self.failure is None and math.isclose(self.reached, self.horizon, rel_tol=1e-9, abs_tol=1e-12)

    @property
    def energy_norm_max(self) -> float:
        return max((iv.energy_norm_max for iv in self.intervals), default=0.0)

    @property
    def shrinking(self) -> bool:
        """Interval lengths strictly decreasing from the first one on.

        A last interval cut short by the horizon is left out of the comparison.
        """
        lengths = self.lengths
        if self.reached_horizon and len(lengths) > 1:
            lengths = lengths[:-1]
        return len(lengths) > 1 and all(b < a for a, b in zip(lengths, lengths[1:]))

    @property
    def lengths(self) -> List[float]:
        return [iv.length for iv in self.intervals]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([iv.__dict__ for iv in self.intervals], columns=list(ContinuationInterval.__annotations__))


@dataclass
class ScalingReport:
    rows: List[Dict[str, object]]
    slopes: List[float]
    theta_min: float

    @classmethod
    def from_rows(cls, rows: List[Dict[str, object]], theta_min: float) -> "ScalingReport":
        """Slopes of log max-ratio against log T between neighbouring rows, largest T first."""
        rows = sorted(rows, key=lambda r: float(r["T"]), reverse=True)
        slopes = []
        for big, small in zip(rows, rows[1:]):
            r_big, r_small = float(big["max_ratio"]), float(small["max_ratio"])
            if r_big > 0 and r_small > 0 and math.isfinite(r_big) and math.isfinite(r_small):
                slopes.append(math.log(r_big / r_small) / math.log(float(big["T"]) / float(small["T"])))
            else:
                slopes.append(math.nan)
        return cls(rows, slopes, theta_min)

    def within(self, tolerance: float = 0.25) -> bool:
        """Every measured log2-slope within ``tolerance`` (relative) of min(theta1, theta2)."""
        finite = [s for s in self.slopes if math.isfinite(s)]
        return bool(finite) and all(abs(s - self.theta_min) <= tolerance * self.theta_min for s in finite)

    def monotone(self, noise: float = 0.05) -> bool:
        """max ratio nondecreasing in T up to a relative noise band."""
        ordered = sorted(self.rows, key=lambda r: r["T"])
        values = [float(r["max_ratio"]) for r in ordered]
        return all(b >= a * (1 - noise) for a, b in zip(values, values[1:]))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=["T", "max_ratio", "final_ratio", "iterations", "outcome"])


@dataclass
class SmallDataReport:
    delta_star: Optional[float]
    trials: List[Dict[str, object]]
    follow_up: Optional[Dict[str, object]] = None


class PicardEngine:
    """Contraction-map experiments for one grid, parameter set and weight."""

    def __init__(
        self,
        sgrid: SpectralGrid,
        params: Params,
        weight: Optional[WeightField] = None,
        theorem: Union[Theorem, str] = Theorem.T1_1,
        gamma: Optional[Fraction] = None,
        progress: bool = False,
    ):
        self.sgrid = sgrid
        self.params = params
        self.alpha = float(params.alpha)
        self.theorem = Theorem(theorem)
        self.s = float(params.s) if self.theorem is Theorem.T1_3 else 0.0
        self.weight = weight if weight is not None else WeightField.build(sgrid, float(params.b))
        self.gamma: Optional[Fraction] = None
        if gamma is not None:
            self.gamma = to_rational(gamma)
        elif params.b < Fraction(3, 2):
            self.gamma = default_gamma(params.b)
        self.plan = PropagatorPlan(sgrid)
        self.progress = progress
        self.logger = logging.getLogger(self.__class__.__name__)

    # exponents

    @property
    def thetas(self) -> Tuple[float, Optional[float]]:
        """(theta1, theta2); theta2 is None when (2, 3/b) is empty, i.e. b >= 3/2."""
        t1 = float(theta1(self.params.alpha, self.params.b))
        if self.gamma is None:
            return t1, None
        return t1, float(theta2(self.params.alpha, self.gamma, self.params.b))

    @property
    def theta_min(self) -> float:
        return min(t for t in self.thetas if t is not None)

    def pair_set(self, cfg: PicardConfig) -> List[AdmissiblePair]:
        pairs = list(cfg.pair_set) if cfg.pair_set is not None else default_pair_set(self.params, self.gamma)
        check_pair_set(pairs)
        return pairs

    # norms

    def metric(self, diff: Trajectory, cfg: PicardConfig) -> float:
        """d_T = W(L^2) norm of a difference."""
        return w_norm(diff, self.pair_set(cfg), 0.0, self.sgrid, cfg.space_scale, cfg.quadrature)

    def ball_norm(self, u: Trajectory, cfg: PicardConfig) -> float:
        pairs = self.pair_set(cfg)
        value = w_norm(u, pairs, 0.0, self.sgrid, cfg.space_scale, cfg.quadrature)
        if self.s > 0:
            value += w_norm(u, pairs, self.s, self.sgrid, cfg.space_scale, cfg.quadrature)
        return value

    def radius(self, phi: Field, psi: Field, cfg: PicardConfig) -> float:
        """Ball radius; auto is twice the data norm matching the ball norm."""
        if cfg.a_policy != "auto":
            return float(cfg.a_policy)
        a = 2 * data_norm(phi, psi, 0.0, self.sgrid)
        if self.s > 0:
            a += 2 * data_norm(phi, psi, self.s, self.sgrid)
        return a

    # the map

    def forcing(self, u: Trajectory) -> np.ndarray:
        """h = -w |u|^alpha u at every snapshot."""
        return np.stack(
            [
                -self.sgrid.dealias(nonlinearity(u.field(m), self.weight, self.alpha)).values
                for m in range(len(u))
            ]
        )

    def contraction_map(
        self,
        u: Trajectory,
        phi: Field,
        psi: Field,
        cfg: PicardConfig,
        iteration: int = 0,
        linear: Optional[Trajectory] = None,
    ) -> Trajectory:
        """H(u) on the snapshot grid of u, velocity included."""
        if linear is None:
            linear = self.plan.linear_trajectory(phi, psi, u.times)
        try:
            du, dut = self.plan.duhamel_trajectory(self.forcing(u), u.times, cfg.quadrature)
        except PropagationError as e:
            self.logger.error(f"Error applying contraction map: {e}")
            raise DivergenceError(iteration) from e
        out = Trajectory(u.grid, u.times, linear.u + du, linear.ut + dut)
        if not out.is_finite():
            raise DivergenceError(iteration)
        return out

    def solve_local(self, phi: Field, psi: Field, cfg: PicardConfig) -> Tuple[Trajectory, PicardReport]:
        """Iterate from the linear solution until d_k <= tol, escape from the ball, or max_iters."""
        times = cfg.times
        linear = self.plan.linear_trajectory(phi, psi, times)
        a = self.radius(phi, psi, cfg)
        slack = 1e-12 * max(a, 1.0)
        u = linear
        report = PicardReport(cfg.T, a, Outcome.MAX_ITERS)
        prev_d: Optional[float] = None
        for k in tqdm(range(1, cfg.max_iters + 1), desc=f"picard T={cfg.T:g}", disable=not self.progress, leave=False):
            new = self.contraction_map(u, phi, psi, cfg, iteration=k, linear=linear)
            d_k = self.metric(new - u, cfg)
            ratio = None
            if prev_d is not None and prev_d > RATIO_FLOOR * max(a, 1.0):
                ratio = d_k / prev_d
            ball = self.ball_norm(new, cfg)
            report.iterations.append(IterationRecord(k, d_k, ratio, ball))
            self.logger.debug(f"k={k} d_k={d_k:.3e} ratio={ratio} ball={ball:.4g} a={a:.4g}")
            u = new
            if ball > a + slack:
                report.outcome = Outcome.BALL_ESCAPE
                self.logger.warning(f"Iterate {k} left the ball: {ball:.4g} > a = {a:.4g}")
                break
            if d_k <= cfg.tol:
                report.outcome = Outcome.CONVERGED
                report.residual = self.metric(self.contraction_map(u, phi, psi, cfg, k + 1, linear) - u, cfg)
                break
            prev_d = d_k
        self.logger.info(
            f"Picard T={cfg.T:g}: {report.outcome.value} after {len(report.iterations)} iterations, "
            f"max ratio {report.max_ratio:.4g}"
        )
        return u, report

    # experiments

    def measured_ratio(self, phi: Field, psi: Field, cfg: PicardConfig) -> Tuple[float, PicardReport]:
        """Max contraction ratio, infinite when the run fails."""
        try:
            _, report = self.solve_local(phi, psi, cfg)
        except DivergenceError:
            return math.inf, PicardReport(cfg.T, self.radius(phi, psi, cfg), Outcome.MAX_ITERS)
        if report.outcome is Outcome.BALL_ESCAPE:
            return math.inf, report
        return report.max_ratio, report

    def find_contraction_time(
        self, phi: Field, psi: Field, cfg: PicardConfig, T_max: float, target: Optional[float] = None, steps: int = 12
    ) -> Tuple[float, List[Tuple[float, float]]]:
        """Largest T <= T_max (bisection in log T) whose measured max ratio is <= target."""
        target = cfg.contraction_target if target is None else target
        history: List[Tuple[float, float]] = []

        def ok(T: float) -> bool:
            ratio, _ = self.measured_ratio(phi, psi, replace(cfg, T=T))
            history.append((T, ratio))
            return ratio <= target

        if ok(T_max):
            return T_max, history
        lo, hi = math.log(T_max) - 10 * math.log(2), math.log(T_max)
        if not ok(math.exp(lo)):
            self.logger.warning(f"No contraction time found down to T = {math.exp(lo):.3g}")
            return 0.0, history
        for _ in range(steps):
            mid = 0.5 * (lo + hi)
            if ok(math.exp(mid)):
                lo = mid
            else:
                hi = mid
        return math.exp(lo), history

    def contraction_scaling(self, phi: Field, psi: Field, cfg: PicardConfig, T_values: Sequence[float]) -> ScalingReport:
        """Max ratio across a T sweep and the log2-slopes between consecutive T."""
        rows = []
        for T in sorted(T_values, reverse=True):
            ratio, report = self.measured_ratio(phi, psi, replace(cfg, T=T))
            rows.append(
                {
                    "T": T,
                    "max_ratio": ratio,
                    "final_ratio": report.final_ratio,
                    "iterations": len(report.iterations),
                    "outcome": report.outcome.value,
                }
            )
        return ScalingReport.from_rows(rows, self.theta_min)

    def continue_solution(
        self,
        phi: Field,
        psi: Field,
        horizon: float,
        cfg: PicardConfig,
        max_retries: int = 4,
        max_intervals: int = 1000,
        keep_trajectory: bool = True,
    ) -> ContinuationReport:
        """Chain local solutions up to ``horizon``.

        Each interval length follows the smallness rule T ~ a^(-alpha/theta_min)
        relative to the first interval and is halved on failure.
        """
        a0 = self.radius(phi, psi, replace(cfg, a_policy="auto"))
        theta = self.theta_min
        t, u0, u1 = 0.0, phi, psi
        intervals: List[ContinuationInterval] = []
        pieces: List[Trajectory] = []
        failure = None
        while t < horizon * (1 - 1e-12):
            if len(intervals) >= max_intervals:
                failure = f"reached max_intervals = {max_intervals} at t = {t:g}"
                break
            a_i = self.radius(u0, u1, replace(cfg, a_policy="auto"))
            T_i = cfg.T if a_i == 0 or a0 == 0 else cfg.T * (a0 / a_i) ** (self.alpha / theta)
            T_i = min(T_i, horizon - t)
            piece, report = None, None
            for attempt in range(max_retries + 1):
                try:
                    piece, report = self.solve_local(u0, u1, replace(cfg, T=T_i))
                except DivergenceError as e:
                    self.logger.warning(f"Interval {len(intervals)} diverged at T = {T_i:g}: {e}")
                    report = None
                if report is not None and report.outcome is Outcome.CONVERGED:
                    break
                T_i /= 2
                piece = None
            if piece is None or report is None:
                failure = f"no converging interval from t = {t:g} after {max_retries} halvings"
                self.logger.warning(f"Continuation stopped: {failure}")
                break
            series = energy_series(piece, self.weight, self.alpha, self.sgrid)
            norms = [energy_norm(piece.field(m), piece.velocity(m), self.sgrid) for m in range(len(piece))]
            intervals.append(
                ContinuationInterval(
                    index=len(intervals),
                    t_start=t,
                    length=piece.times[-1],
                    iterations=len(report.iterations),
                    outcome=report.outcome.value,
                    energy_start=series[0].total,
                    energy_end=series[-1].total,
                    relative_drift=relative_drift(series),
                    energy_norm_max=max(norms),
                )
            )
            if keep_trajectory:
                pieces.append(piece.shifted(t))
            u0, u1 = piece.field(len(piece) - 1), piece.velocity(len(piece) - 1)
            t += float(piece.times[-1])
        traj = Trajectory.concatenate(pieces) if pieces else None
        self.logger.info(f"Continuation reached t = {t:g} of {horizon:g} in {len(intervals)} intervals")
        return ContinuationReport(horizon, t, intervals, traj, failure)

    def linear_energy_norm_max(self, phi: Field, psi: Field, times: Sequence[float]) -> float:
        lin = self.plan.linear_trajectory(phi, psi, times)
        return max(energy_norm(lin.field(m), lin.velocity(m), self.sgrid) for m in range(len(lin)))

    def small_data_threshold(
        self,
        data: Callable[[float], Tuple[Field, Field]],
        horizon: float,
        cfg: PicardConfig,
        delta_low: float = 1e-3,
        delta_high: float = 1.0,
        steps: int = 8,
        max_retries: int = 4,
    ) -> SmallDataReport:
        """Bisect (in log delta) the largest amplitude whose continuation reaches the horizon
        with sup energy norm <= 2x the linear evolution's, then rerun at 10 delta*."""
        trials: List[Dict[str, object]] = []

        def trial(delta: float) -> Dict[str, object]:
            phi, psi = data(delta)
            cont = self.continue_solution(phi, psi, horizon, cfg, max_retries=max_retries, keep_trajectory=False)
            times = np.linspace(0.0, horizon, max(cfg.snapshots, 9))
            linear_max = self.linear_energy_norm_max(phi, psi, times)
            within = cont.energy_norm_max <= 2 * linear_max * (1 + 1e-12)
            record = {
                "delta": delta,
                "reached_horizon": cont.reached_horizon,
                "reached": cont.reached,
                "intervals": len(cont.intervals),
                "energy_norm_max": cont.energy_norm_max,
                "linear_energy_norm_max": linear_max,
                "within_bound": within,
                "intervals_shrinking": cont.shrinking,
                "passed": cont.reached_horizon and within,
            }
            trials.append(record)
            return record

        if trial(delta_high)["passed"]:
            self.logger.info(f"Upper amplitude {delta_high:g} already passes; delta* = {delta_high:g}")
            return SmallDataReport(delta_high, trials, trial(10 * delta_high))
        if not trial(delta_low)["passed"]:
            self.logger.warning(f"Lower amplitude {delta_low:g} fails; no small-data threshold found")
            return SmallDataReport(None, trials)
        lo, hi = math.log(delta_low), math.log(delta_high)
        for _ in range(steps):
            mid = 0.5 * (lo + hi)
            if trial(math.exp(mid))["passed"]:
                lo = mid
            else:
                hi = mid
        delta_star = math.exp(lo)
        follow_up = trial(10 * delta_star)
        return SmallDataReport(delta_star, trials, follow_up)

    def reference_gap(self, traj: Trajectory, phi: Field, psi: Field, dt: float) -> float:
        """Discrete L^inf_t L^2_x distance to the reference integrator on the same snapshots."""
        ref = run_reference(phi, psi, traj.times, dt, self.weight, self.alpha, self.sgrid, progress=self.progress)
        diff = traj - ref
        return max(self.sgrid.lp_norm(diff.field(m), 2) for m in range(len(diff)))

    def initial_energy(self, phi: Field, psi: Field) -> float:
        return energy(phi, psi, self.weight, self.alpha, self.sgrid).total
