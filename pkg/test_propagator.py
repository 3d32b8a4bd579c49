import math

import numpy as np
import pytest

from conftest import box_mode, gaussian
from wavelab.core.dynamics import energy, energy_series, relative_drift
from wavelab.core.errors import DomainError, PropagationError
from wavelab.core.grid import Field
from wavelab.core.profiles import initial_data
from wavelab.core.propagator import PropagatorPlan, QuadSpec, quadrature_weights


def low_modes(box):
    """Band-limited field with |xi| <= 3."""
    x, y, z = box.coords
    return Field(box.spec, np.cos(x) + 0.5 * np.sin(2 * y + z) + 0.3 * np.cos(3 * z))


def test_quad_spec_validation():
    with pytest.raises(DomainError):
        QuadSpec(rule="midpoint")
    with pytest.raises(DomainError):
        QuadSpec(nodes=1)


@pytest.mark.parametrize("rule", ["simpson", "trapezoid"])
@pytest.mark.parametrize("n", [2, 3, 4, 5, 8, 17])
def test_quadrature_weights_integrate_constants(rule, n):
    assert quadrature_weights(n, 0.25, rule).sum() == pytest.approx(0.25 * (n - 1), rel=1e-13)


def test_propagators_at_time_zero(box_plan, box, rng):
    f = Field(box.spec, rng.standard_normal(box.spec.shape))
    assert np.abs(box_plan.apply_kdot(f, 0.0).values - f.values).max() < 1e-12
    assert np.abs(box_plan.apply_k(f, 0.0).values).max() < 1e-15


def test_k_of_constant_grows_linearly(box_plan, box):
    c = Field(box.spec, np.full(box.spec.shape, 2.0))
    assert np.allclose(box_plan.apply_k(c, 0.75).values, 1.5, atol=1e-12)


def test_single_mode_oscillates(box_plan, box):
    f = box_mode(box, 2, 1)
    t = 0.9
    assert np.abs(box_plan.apply_kdot(f, t).values - math.cos(math.sqrt(5) * t) * f.values).max() < 1e-12
    assert (
        np.abs(box_plan.apply_k(f, t).values - math.sin(math.sqrt(5) * t) / math.sqrt(5) * f.values).max() < 1e-12
    )


def test_k_differentiates_to_kdot(box_plan, box):
    psi = low_modes(box)
    t, h = 0.7, 1e-5
    derivative = (box_plan.apply_k(psi, t + h).values - box_plan.apply_k(psi, t - h).values) / (2 * h)
    assert np.abs(derivative - box_plan.apply_kdot(psi, t).values).max() < 1e-8


def test_group_property(box_plan, box, rng):
    phi = Field(box.spec, rng.standard_normal(box.spec.shape))
    psi = Field(box.spec, rng.standard_normal(box.spec.shape))
    u, ut = box_plan.linear_solve(phi, psi, 0.4)
    u2, ut2 = box_plan.linear_solve(u, ut, 0.6)
    v, vt = box_plan.linear_solve(phi, psi, 1.0)
    scale = np.abs(phi.values).max() * box.xi_max
    assert np.abs(u2.values - v.values).max() < 1e-11 * scale
    assert np.abs(ut2.values - vt.values).max() < 1e-11 * scale


def test_time_reversal(box_plan, box, rng):
    phi = Field(box.spec, rng.standard_normal(box.spec.shape))
    psi = Field(box.spec, rng.standard_normal(box.spec.shape))
    u, ut = box_plan.linear_solve(phi, psi, 1.3)
    back, back_t = box_plan.linear_solve(u, -ut, 1.3)
    scale = np.abs(phi.values).max() * box.xi_max
    assert np.abs(back.values - phi.values).max() < 1e-11 * scale
    assert np.abs(back_t.values + psi.values).max() < 1e-11 * scale


def test_linear_energy_is_conserved(radial):
    plan = PropagatorPlan(radial)
    phi, psi = initial_data(radial, "bump", 1.0, 2.0, psi_amplitude=0.5, psi_profile="bump")
    traj = plan.linear_trajectory(phi, psi, np.linspace(0.0, 10.0, 21))
    series = energy_series(traj, None, 0.0, radial)
    assert series[0].total > 0
    assert relative_drift(series) < 1e-10


def test_linear_trajectory_matches_linear_solve(radial):
    plan = PropagatorPlan(radial)
    phi = gaussian(radial, 2.0)
    psi = Field.zeros(radial.spec)
    traj = plan.linear_trajectory(phi, psi, [0.0, 0.5, 1.0])
    u, ut = plan.linear_solve(phi, psi, 1.0)
    assert np.array_equal(traj.u[2], u.values)
    assert np.array_equal(traj.ut[2], ut.values)
    assert energy(u, ut, None, 0.0, radial).potential == 0.0


def test_duhamel_of_zero_forcing(box_plan, box):
    out = box_plan.duhamel(lambda tau: Field.zeros(box.spec), 1.0)
    assert not out.values.any()
    assert not box_plan.duhamel(lambda tau: Field.zeros(box.spec), 0.0).values.any()


def test_duhamel_of_constant_forcing(box_plan, box):
    c = Field(box.spec, np.full(box.spec.shape, 3.0))
    out = box_plan.duhamel(lambda tau: c, 1.0, QuadSpec("simpson", 9))
    assert np.allclose(out.values, 1.5, atol=1e-12)


def test_duhamel_rejects_non_finite_forcing(box_plan, box):
    bad = Field(box.spec, np.full(box.spec.shape, np.nan))
    with pytest.raises(PropagationError):
        box_plan.duhamel(lambda tau: bad if tau > 0.5 else Field.zeros(box.spec), 1.0, QuadSpec("simpson", 5))


def _manufactured_error(box_plan, box, nodes, rule):
    """u*(t) = t^3 e(x) with e of wavenumber sqrt(5), forced by h = u*_tt - Δu*."""
    e = box_mode(box, 2, 1)
    h = lambda tau: e.scaled(6 * tau + 5 * tau**3)
    out = box_plan.duhamel(h, 1.0, QuadSpec(rule, nodes))
    return np.abs(out.values - e.values).max()


@pytest.mark.parametrize("rule, order", [("simpson", 2.0), ("trapezoid", 1.8)])
def test_duhamel_convergence_order(box_plan, box, rule, order):
    coarse = _manufactured_error(box_plan, box, 9, rule)
    fine = _manufactured_error(box_plan, box, 17, rule)
    assert math.log2(coarse / fine) >= order


def test_duhamel_trajectory_matches_pointwise(box_plan, box):
    e = box_mode(box, 2, 1)
    times = np.linspace(0.0, 1.0, 17)
    forcing = np.stack([(6 * t + 5 * t**3) * e.values for t in times])
    u, ut = box_plan.duhamel_trajectory(forcing, times)
    direct = box_plan.duhamel(lambda tau: e.scaled(6 * tau + 5 * tau**3), 1.0, QuadSpec("simpson", 17))
    assert not u[0].any() and not ut[0].any()
    assert np.abs(u[-1] - direct.values).max() < 1e-12
    assert np.abs(u[-1] - e.values).max() < 1e-4
    assert np.abs(ut[-1] - 3 * e.values).max() < 1e-3


def test_duhamel_trajectory_needs_equispaced_times(box_plan, box):
    times = np.array([0.0, 0.1, 0.3])
    with pytest.raises(DomainError):
        box_plan.duhamel_trajectory(np.zeros((3,) + box.spec.shape), times)
