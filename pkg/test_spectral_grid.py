import math

import numpy as np
import pytest

from conftest import box_mode, gaussian
from wavelab.core.errors import DomainError
from wavelab.core.grid import (
    Field,
    GridSpec,
    SpectralGrid,
    Trajectory,
    littlewood_paley_bump,
    read_snapshot,
    write_snapshot,
)


@pytest.mark.parametrize("n, L", [(12, 1.0), (4, 1.0), (16, 0.0)])
def test_grid_spec_rejects_bad_shapes(n, L):
    with pytest.raises(DomainError):
        GridSpec("full3d", n, L)


def test_field_shape_must_match():
    with pytest.raises(DomainError):
        Field(GridSpec("radial1d", 16, 1.0), np.zeros(8))


def test_constant_field_has_only_zero_mode(box):
    F = box.forward(Field(box.spec, np.full(box.spec.shape, 3.0))).coeffs
    assert abs(F[0, 0, 0]) == pytest.approx(3.0 * 16**3)
    F[0, 0, 0] = 0
    assert np.abs(F).max() < 1e-9


def test_roundtrip_full3d(box, rng):
    f = Field(box.spec, rng.standard_normal(box.spec.shape))
    back = box.inverse(box.forward(f))
    assert np.abs(back.values - f.values).max() < 1e-12 * np.abs(f.values).max()


def test_roundtrip_radial(radial_fine):
    f = gaussian(radial_fine, width=1.5)
    back = radial_fine.inverse(radial_fine.forward(f))
    assert np.abs(back.values - f.values).max() < 1e-10


def test_forward_of_real_field_is_conjugate_symmetric(box, rng):
    f = Field(box.spec, rng.standard_normal(box.spec.shape))
    assert box.is_conjugate_symmetric(box.forward(f))


@pytest.mark.parametrize("mode", ["full3d", "radial1d"])
def test_parseval_gaussian(mode):
    sg = SpectralGrid(GridSpec(mode, 64, 16.0))
    f = Field(sg.spec, np.exp(-(sg.radius**2)))
    expected = (math.pi / 2) ** 0.75
    assert sg.lp_norm(f, 2) == pytest.approx(expected, rel=1e-8)
    assert math.sqrt(sg.spectral_sum(sg.forward(f))) == pytest.approx(sg.lp_norm(f, 2), rel=1e-10)


def test_fractional_derivative_of_single_mode(box):
    f = box_mode(box, 2, 1)
    for s in (0.5, 1.0, 2.0):
        d = box.fractional_derivative(f, s)
        assert np.abs(d.values - 5 ** (s / 2) * f.values).max() < 1e-11


def test_zero_order_derivative_removes_mean(box, rng):
    f = Field(box.spec, rng.standard_normal(box.spec.shape) + 2.0)
    d = box.fractional_derivative(f, 0)
    assert np.abs(d.values - (f.values - f.values.mean())).max() < 1e-12


def test_negative_order_is_rejected(box):
    with pytest.raises(DomainError):
        box.fractional_symbol(-0.5)


def test_radial_laplacian_of_gaussian(radial_fine):
    r = radial_fine.radius
    lap = radial_fine.laplacian(gaussian(radial_fine))
    exact = (4 * r**2 - 6) * np.exp(-(r**2))
    assert np.abs(lap.values - exact).max() < 1e-8
    assert lap.values[radial_fine.origin] == pytest.approx(-6.0, abs=1e-8)


def test_gradient_energy_of_gaussian(radial_fine):
    expected = 3 * (math.pi / 2) ** 1.5
    assert radial_fine.gradient_energy(gaussian(radial_fine)) == pytest.approx(expected, rel=1e-8)


def test_littlewood_paley_bump_profile():
    rho = np.array([0.0, 1.0, 1.5, 2.0, 3.0])
    values = littlewood_paley_bump(rho)
    assert values[0] == values[1] == 1.0
    assert 0 < values[2] < 1
    assert values[3] == values[4] == 0.0


def test_dyad_range_of_unit_box(box):
    assert box.dyad_range() == (0, 4)


def test_projection_selects_annulus(box):
    f = box_mode(box, 4)
    assert np.abs(box.lp_project(f, 4).values - f.values).max() < 1e-12
    assert np.abs(box.lp_project(f, 1).values).max() < 1e-12


def test_projections_telescope(box, rng):
    f = Field(box.spec, rng.standard_normal(box.spec.shape))
    lo, hi = box.dyad_range()
    total = sum(box.lp_project(f, 2.0**j).values for j in range(lo, hi + 1))
    assert np.abs(total - (f.values - f.values.mean())).max() < 1e-10


def test_projection_commutes_with_derivative(box, rng):
    f = Field(box.spec, rng.standard_normal(box.spec.shape))
    a = box.fractional_derivative(box.lp_project(f, 4), 0.5).values
    b = box.lp_project(box.fractional_derivative(f, 0.5), 4).values
    assert np.abs(a - b).max() < 1e-12 * max(np.abs(a).max(), 1.0)


def test_projection_rejects_non_dyadic(box, rng):
    f = Field(box.spec, rng.standard_normal(box.spec.shape))
    with pytest.raises(DomainError):
        box.lp_project(f, 3)


def test_projection_outside_band_is_zero(box, rng, caplog):
    f = Field(box.spec, rng.standard_normal(box.spec.shape))
    assert not box.lp_project(f, 2.0**10).values.any()
    assert "outside resolvable range" in caplog.text


def test_dealias_is_identity_when_off(box, rng):
    f = Field(box.spec, rng.standard_normal(box.spec.shape))
    assert box.dealias(f) is f


def test_dealias_truncates_high_modes():
    sg = SpectralGrid(GridSpec("full3d", 16, 2 * math.pi), dealias=True)
    high = box_mode(sg, 7)
    low = box_mode(sg, 2)
    assert np.abs(sg.dealias(high).values).max() < 1e-12
    assert np.abs(sg.dealias(low).values - low.values).max() < 1e-12


def test_trajectory_concatenate_drops_junctions(box):
    f = Field.zeros(box.spec)
    first = Trajectory.frozen(f, [0.0, 0.5, 1.0])
    second = Trajectory.frozen(f, [0.0, 0.5]).shifted(1.0)
    joined = Trajectory.concatenate([first, second])
    assert list(joined.times) == [0.0, 0.5, 1.0, 1.5]


def test_snapshot_layout(tmp_path, radial):
    f = gaussian(radial)
    path = tmp_path / "u.bin"
    write_snapshot(path, f, 0.25)
    assert path.stat().st_size == 32 + 8 * 128
    back, t = read_snapshot(path)
    assert t == 0.25
    assert back.grid == radial.spec
    assert np.array_equal(back.values, f.values)
