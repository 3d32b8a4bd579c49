import math
from fractions import Fraction

import numpy as np
import pytest

from wavelab.core.errors import DomainError
from wavelab.core.exponents import Params
from wavelab.core.grid import GridSpec, SpectralGrid
from wavelab.core.probes import (
    DILATION_DRIFT_LIMIT,
    FAMILIES,
    SLOPE_LIMIT,
    ProbeContext,
    RatioProbeReport,
    band_limited_field,
    dilation_drift,
    gagliardo_nirenberg_index,
    gaussian_field,
    nonlinear_time_scaling,
    probe_inequality,
)


@pytest.fixture
def ctx(radial, params):
    return ProbeContext(radial, params, T=0.5, snapshots=9)


def test_context_defaults(ctx):
    assert ctx.thetas() == (1.75, 1.0)
    assert [p.label() for p in ctx.pair_set] == ["(∞, 2)", "(4, 4)"]
    assert ctx.time_factor(1.0) == 2.0


def test_context_without_lebesgue_exponent(radial):
    ctx = ProbeContext(radial, Params(Fraction(1, 10), Fraction(7, 4)), T=0.5, snapshots=9)
    assert ctx.thetas() == (1.95, None)
    assert ctx.time_factor(1.0) == 1.0
    assert ctx.time_factor(0.25) == pytest.approx(0.25**1.95)


def test_sample_families_are_finite_and_radial(radial, rng):
    f = band_limited_field(rng, radial)
    g = gaussian_field(rng, radial)
    for field in (f, g):
        assert field.is_finite()
        assert np.allclose(field.values[1:], field.values[1:][::-1], atol=1e-12)


def test_band_limited_box_field_respects_cutoff(box, rng):
    f = band_limited_field(rng, box)
    coeffs = np.abs(np.fft.fftn(f.values))
    cut = 0.125 * math.pi * 16 / box.spec.box_length
    assert coeffs[box.xi_abs > cut + 1e-12].max() < 1e-10


@pytest.mark.parametrize("family", FAMILIES)
def test_probes_are_reproducible(ctx, family):
    first = probe_inequality("nonlinear", family, 6, seed=7, ctx=ctx)
    second = probe_inequality("nonlinear", family, 6, seed=7, ctx=ctx, workers=2)
    assert first.ratios == second.ratios
    assert all(r > 0 and math.isfinite(r) for r in first.ratios)


def test_seed_changes_samples(ctx):
    a = probe_inequality("strichartz", "band_limited", 4, seed=1, ctx=ctx)
    b = probe_inequality("strichartz", "band_limited", 4, seed=2, ctx=ctx)
    assert a.ratios != b.ratios


@pytest.mark.parametrize(
    "name",
    ["strichartz", "besov_embedding", "fractional_product", "fractional_chain", "nonlinear_bilinear", "gagliardo_nirenberg"],
)
def test_every_probe_yields_finite_ratios(ctx, name):
    report = probe_inequality(name, "gaussian", 4, seed=3, ctx=ctx)
    assert len(report.ratios) == 4
    assert not report.violations
    assert all(math.isfinite(r) and r >= 0 for r in report.ratios)
    assert list(report.to_frame().columns) == ["sample", "lhs", "rhs", "ratio"]


@pytest.mark.parametrize("name", ["besov_embedding", "gagliardo_nirenberg"])
def test_scale_invariant_ratios_stay_flat(ctx, name):
    report = probe_inequality(name, "gaussian", 400, seed=0, ctx=ctx)
    assert report.passed
    assert not report.violations
    assert report.slope <= SLOPE_LIMIT


def test_probe_input_validation(ctx):
    with pytest.raises(DomainError):
        probe_inequality("hardy", "gaussian", 8, 0, ctx)
    with pytest.raises(DomainError):
        probe_inequality("nonlinear", "white_noise", 8, 0, ctx)
    with pytest.raises(DomainError):
        probe_inequality("nonlinear", "gaussian", 3, 0, ctx)


def test_flat_ratios_pass():
    report = RatioProbeReport("nonlinear", "gaussian", 0, 8, ratios=[1.0] * 8)
    assert report.slope == 0.0
    assert report.passed


def test_late_growth_fails():
    report = RatioProbeReport("nonlinear", "gaussian", 0, 8, ratios=[1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 1.0, 1.0])
    assert report.baseline_max == 1.0
    assert report.slope == pytest.approx(0.5)
    assert not report.passed


def test_violation_fails_even_when_flat():
    report = RatioProbeReport("nonlinear", "gaussian", 0, 4, ratios=[1.0, 1.0, 1.0, 1.0], violations=[2])
    assert not report.passed


def test_gagliardo_nirenberg_index():
    assert gagliardo_nirenberg_index(1.0) == -0.5
    assert gagliardo_nirenberg_index(4.0) == 1.0


def test_besov_ratio_is_dilation_stable(params):
    ctx = ProbeContext(SpectralGrid(GridSpec("radial1d", 512, 80.0)), params)
    result = dilation_drift(ctx, width=1.0)
    assert set(result["ratios"]) == {0.5, 1.0, 2.0}
    assert result["drift"] <= 0.15


def test_default_dilation_width_is_resolved(radial, params):
    result = dilation_drift(ProbeContext(radial, params))
    assert result["drift"] <= DILATION_DRIFT_LIMIT


def test_time_scaling_of_frozen_trajectory(radial, params):
    ctx = ProbeContext(radial, params, T=0.5, snapshots=9)
    u = band_limited_field(np.random.default_rng(0), radial)
    result = nonlinear_time_scaling(u, ctx)
    assert result["ratio"] == pytest.approx(2.0, rel=1e-12)
    assert result["lower_bound"] == pytest.approx(1.0)
    assert result["consistent"]


def test_hs_probe_yields_finite_ratios():
    sg = SpectralGrid(GridSpec("radial1d", 64, 40.0))
    hs = ProbeContext(sg, Params(Fraction(1, 2), 1, Fraction(1, 4)), T=0.25, snapshots=9)
    report = probe_inequality("nonlinear_hs", "band_limited", 4, seed=5, ctx=hs)
    assert all(math.isfinite(r) for r in report.ratios)
