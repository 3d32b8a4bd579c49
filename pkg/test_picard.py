import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from wavelab.core.dynamics import WeightField
from wavelab.core.errors import DivergenceError, DomainError
from wavelab.core.exponents import Params, Theorem
from wavelab.core.grid import Field, Trajectory
from wavelab.core.picard import (
    ContinuationInterval,
    ContinuationReport,
    Outcome,
    PicardConfig,
    PicardEngine,
    PicardReport,
    ScalingReport,
)
from wavelab.core.profiles import initial_data


@pytest.fixture
def engine(radial, params):
    return PicardEngine(radial, params)


@pytest.fixture
def cfg():
    return PicardConfig(T=0.5, snapshots=9)


def small_data(sgrid, amplitude=0.05):
    return initial_data(sgrid, "bump", amplitude, 2.0)


@pytest.mark.parametrize(
    "kwargs",
    [{"T": 0.0}, {"T": 1.0, "snapshots": 5}, {"T": 1.0, "tol": 0.0}, {"T": 1.0, "a_policy": -1.0}],
)
def test_config_validation(kwargs):
    with pytest.raises(DomainError):
        PicardConfig(**kwargs)


def test_thetas(engine):
    assert engine.thetas == (1.75, 1.0)
    assert engine.theta_min == 1.0


def test_large_b_has_no_lebesgue_exponent(radial):
    engine = PicardEngine(radial, Params(Fraction(1, 4), Fraction(3, 2)))
    assert engine.gamma is None
    assert engine.thetas == (1.875, None)
    assert engine.theta_min == 1.875


def test_large_b_eligible_parameters_solve(radial):
    engine = PicardEngine(radial, Params(Fraction(1, 10), Fraction(7, 4)))
    assert engine.gamma is None
    assert engine.thetas == (1.95, None)
    assert engine.theta_min == 1.95
    short = PicardConfig(T=0.125, snapshots=9)
    phi, psi = small_data(radial, 0.01)
    _, report = engine.solve_local(phi, psi, short)
    assert report.outcome is Outcome.CONVERGED
    scaling = engine.contraction_scaling(phi, psi, short, [0.0625, 0.125])
    assert scaling.theta_min == 1.95
    cont = engine.continue_solution(phi, psi, 0.25, short)
    assert cont.reached_horizon


def test_zero_data_converges_at_once(engine, radial, cfg):
    zero = Field.zeros(radial.spec)
    traj, report = engine.solve_local(zero, zero, cfg)
    assert report.outcome is Outcome.CONVERGED
    assert len(report.iterations) == 1
    assert report.a == 0.0
    assert report.residual == 0.0
    assert not traj.u.any()


def test_small_data_converges(engine, radial, cfg):
    phi, psi = small_data(radial)
    traj, report = engine.solve_local(phi, psi, cfg)
    assert report.outcome is Outcome.CONVERGED
    assert report.final_d <= cfg.tol
    assert report.residual <= 2 * cfg.tol
    assert 0 < report.max_ratio < 1
    assert all(r.ball_norm <= report.a * (1 + 1e-12) for r in report.iterations)
    assert list(report.to_frame().columns) == ["k", "d_k", "ratio_k", "ball_norm"]
    assert traj.is_finite() and len(traj) == cfg.snapshots


def test_solution_matches_reference_integrator(engine, radial, cfg):
    phi, psi = small_data(radial)
    traj, _ = engine.solve_local(phi, psi, cfg)
    assert engine.reference_gap(traj, phi, psi, dt=1e-3) < 1e-4


def _gap(engine, radial, snapshots, dt):
    phi, psi = small_data(radial)
    traj, report = engine.solve_local(phi, psi, PicardConfig(T=0.5, snapshots=snapshots, tol=1e-12))
    assert report.outcome is Outcome.CONVERGED
    return engine.reference_gap(traj, phi, psi, dt)


def test_reference_gap_shrinks_under_refinement(engine, radial):
    coarse = _gap(engine, radial, 9, 2e-3)
    fine = _gap(engine, radial, 17, 5e-4)
    assert fine < coarse < 1e-4
    assert math.log2(coarse / fine) >= 2


def test_hs_solution_matches_reference_integrator(radial):
    engine = PicardEngine(radial, Params(Fraction(1, 2), 1, Fraction(1, 4)), theorem=Theorem.T1_3)
    phi, psi = initial_data(radial, "gaussian", 0.05, 1.0)
    traj, report = engine.solve_local(phi, psi, PicardConfig(T=0.25, snapshots=9))
    assert report.outcome is Outcome.CONVERGED
    assert engine.reference_gap(traj, phi, psi, dt=1e-3) < 1e-4


def test_auto_radius_is_homogeneous(engine, radial, cfg):
    phi, psi = small_data(radial)
    a = engine.radius(phi, psi, cfg)
    assert engine.radius(phi.scaled(2), psi.scaled(2), cfg) == pytest.approx(2 * a, rel=1e-12)
    assert engine.radius(phi, psi, replace(cfg, a_policy=3.0)) == 3.0


def test_correction_scales_with_power(radial, params, cfg):
    engine = PicardEngine(radial, params, weight=WeightField.unit(radial.spec))
    phi, psi = small_data(radial, 1.0)
    corrections = []
    deltas = (1e-1, 1e-2, 1e-3)
    for delta in deltas:
        lin = engine.plan.linear_trajectory(phi.scaled(delta), psi.scaled(delta), cfg.times)
        image = engine.contraction_map(lin, phi.scaled(delta), psi.scaled(delta), cfg, linear=lin)
        corrections.append(engine.metric(image - lin, cfg))
    slopes = [math.log(corrections[i] / corrections[i + 1]) / math.log(10) for i in range(2)]
    assert slopes == pytest.approx([engine.alpha + 1] * 2, abs=1e-6)


def test_non_finite_iterate_diverges(engine, radial, cfg):
    zero = Field.zeros(radial.spec)
    bad = Trajectory.frozen(Field(radial.spec, np.full(radial.spec.shape, np.nan)), cfg.times)
    with pytest.raises(DivergenceError):
        engine.contraction_map(bad, zero, zero, cfg, iteration=3)


def test_hs_regime(radial):
    params = Params(Fraction(1, 2), 1, Fraction(1, 4))
    engine = PicardEngine(radial, params, theorem=Theorem.T1_3)
    cfg = PicardConfig(T=0.25, snapshots=9)
    phi, psi = initial_data(radial, "gaussian", 0.05, 1.0)
    assert engine.s == 0.25
    traj, report = engine.solve_local(phi, psi, cfg)
    assert report.outcome is Outcome.CONVERGED
    assert engine.ball_norm(traj, cfg) >= engine.metric(traj, cfg)


def test_contraction_time_of_zero_data(engine, radial, cfg):
    zero = Field.zeros(radial.spec)
    T, history = engine.find_contraction_time(zero, zero, cfg, T_max=1.0)
    assert T == 1.0
    assert history == [(1.0, 0.0)]


def test_contraction_time_shrinks_for_doubled_data(engine, radial, cfg):
    phi, psi = small_data(radial)
    target, _ = engine.measured_ratio(phi, psi, cfg)
    assert 0 < target < 1
    T, _ = engine.find_contraction_time(phi, psi, cfg, T_max=cfg.T, target=target)
    T_doubled, history = engine.find_contraction_time(phi.scaled(2), psi.scaled(2), cfg, T_max=cfg.T, target=target)
    assert T == cfg.T
    assert 0 < T_doubled < T
    assert history[0][1] > target


def test_scaling_report_slopes():
    rows = [
        {"T": 0.5, "max_ratio": 0.1, "final_ratio": 0.1, "iterations": 5, "outcome": "converged"},
        {"T": 1.0, "max_ratio": 0.4, "final_ratio": 0.4, "iterations": 9, "outcome": "converged"},
        {"T": 0.25, "max_ratio": math.inf, "final_ratio": None, "iterations": 0, "outcome": "ball_escape"},
    ]
    report = ScalingReport.from_rows(rows, theta_min=2.0)
    assert [r["T"] for r in report.rows] == [1.0, 0.5, 0.25]
    assert report.slopes[0] == pytest.approx(2.0)
    assert math.isnan(report.slopes[1])
    assert report.within(0.25)
    assert not ScalingReport.from_rows(rows, theta_min=1.0).within(0.25)
    assert list(report.to_frame().columns) == ["T", "max_ratio", "final_ratio", "iterations", "outcome"]


def test_scaling_report_monotone():
    rows = [{"T": 1.0, "max_ratio": 0.2}, {"T": 0.5, "max_ratio": 0.3}]
    assert not ScalingReport.from_rows(rows, 1.0).monotone()
    assert ScalingReport.from_rows(rows[:1], 1.0).monotone()


def test_contraction_scaling_rows(engine, radial, cfg):
    phi, psi = small_data(radial)
    report = engine.contraction_scaling(phi, psi, cfg, [0.25, 0.5])
    assert [r["T"] for r in report.rows] == [0.5, 0.25]
    assert all(r["outcome"] == Outcome.CONVERGED.value for r in report.rows)
    assert len(report.slopes) == 1 and math.isfinite(report.slopes[0])
    assert report.monotone()


def test_contraction_scaling_is_monotone_over_four_times(engine, radial, cfg):
    phi, psi = small_data(radial)
    report = engine.contraction_scaling(phi, psi, cfg, [0.0625, 0.125, 0.25, 0.5])
    assert [r["T"] for r in report.rows] == [0.5, 0.25, 0.125, 0.0625]
    assert all(r["outcome"] == Outcome.CONVERGED.value for r in report.rows)
    assert len(report.slopes) == 3
    assert report.monotone()


def test_empty_report_defaults():
    report = PicardReport(T=1.0, a=0.0, outcome=Outcome.MAX_ITERS)
    assert report.max_ratio == 0.0
    assert report.final_ratio is None
    assert report.final_d == 0.0


def test_continuation_of_zero_data(engine, radial):
    zero = Field.zeros(radial.spec)
    cont = engine.continue_solution(zero, zero, 1.0, PicardConfig(T=0.25, snapshots=9))
    assert cont.reached_horizon
    assert len(cont.intervals) == 4
    assert cont.energy_norm_max == 0.0
    assert cont.trajectory.times[-1] == pytest.approx(1.0)


def test_continuation_conserves_energy(engine, radial):
    phi, psi = small_data(radial, 0.01)
    cont = engine.continue_solution(phi, psi, 1.0, PicardConfig(T=0.5, snapshots=17))
    assert cont.reached_horizon
    assert cont.failure is None
    assert all(iv.relative_drift <= 1e-4 for iv in cont.intervals)
    assert len(cont.trajectory) == 1 + 16 * len(cont.intervals)
    assert list(cont.to_frame().columns)[:3] == ["index", "t_start", "length"]


def _continuation(lengths, horizon, failure=None):
    intervals, t = [], 0.0
    for i, length in enumerate(lengths):
        intervals.append(ContinuationInterval(i, t, length, 3, "converged", 1.0, 1.0, 0.0, 1.0))
        t += length
    return ContinuationReport(horizon, t, intervals, None, failure=failure)


def test_continuation_shrinking_compares_the_first_interval():
    assert not _continuation([0.5, 0.5, 0.25], 10.0, failure="no contraction").shrinking
    assert _continuation([0.5, 0.25, 0.125], 10.0, failure="no contraction").shrinking
    assert _continuation([0.5, 0.25, 0.25], 1.0).shrinking
    assert not _continuation([0.5, 0.5], 1.0).shrinking


def test_small_data_threshold_accepts_tiny_data(engine, radial):
    cfg = PicardConfig(T=0.25, snapshots=9)
    report = engine.small_data_threshold(
        lambda delta: small_data(radial, delta), 0.5, cfg, delta_low=1e-4, delta_high=1e-3
    )
    assert report.delta_star == 1e-3
    assert report.trials[0]["passed"]
    assert report.follow_up["delta"] == pytest.approx(1e-2)
