import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from forkoam.analysis import phase_winding
from forkoam.errors import DomainError, SamplingError, ShapeError
from forkoam.field import (BeamSpec, ComplexField, GridSpec, apply_mask, electron_wavelength, make_beam,
                           multiply, normalize, plane_wave, power, reflect_x, scale, superpose)
from forkoam.masks import ForkedGratingSpec, complement, full_mask, render_forked_grating

from conftest import LAM_200KV

# E = m c^2 + eV, (pc)^2 = E^2 - (m c^2)^2, lambda = h c / pc, evaluated with mpmath at 40 digits
ORACLE_200KV = 2.5079340450548e-12
ORACLE_300KV = 1.96874890068488e-12
ORACLE_1V_RATIO = 0.999999510762563  # relativistic / nonrelativistic at 1 V


def test_wavelength_200kv():
    assert electron_wavelength(200e3) == pytest.approx(ORACLE_200KV, rel=1e-10)


def test_wavelength_300kv():
    assert electron_wavelength(300e3) == pytest.approx(ORACLE_300KV, rel=1e-10)


def test_wavelength_low_voltage_limit():
    h, m, e = 6.62607015e-34, 9.1093837015e-31, 1.602176634e-19
    nonrel = h / math.sqrt(2 * m * e * 1.0)
    assert electron_wavelength(1.0) / nonrel == pytest.approx(ORACLE_1V_RATIO, rel=1e-12)


@pytest.mark.parametrize("v", [0.0, -5.0, float("nan"), float("inf")])
def test_wavelength_rejects_bad_voltage(v):
    with pytest.raises(DomainError):
        electron_wavelength(v)


def test_grid_coordinates_put_origin_on_center_pixel():
    g = GridSpec(64, 32, 1e-9, LAM_200KV)
    assert g.shape == (32, 64)
    assert g.x[32] == 0.0 and g.y[16] == 0.0
    assert g.to_index(0.0, 0.0) == (16.0, 32.0)
    assert g.to_index(3e-9, -2e-9) == pytest.approx((14.0, 35.0))


@pytest.mark.parametrize("kwargs", [dict(nx=8), dict(pitch=0.0), dict(wavelength=-1.0)])
def test_grid_validation(kwargs):
    base = dict(nx=64, ny=64, pitch=1e-9, wavelength=LAM_200KV)
    base.update(kwargs)
    with pytest.raises(DomainError):
        GridSpec(**base)


def test_field_rejects_bad_values(small_grid):
    with pytest.raises(ShapeError):
        ComplexField(small_grid, np.zeros((3, 3)))
    v = np.zeros(small_grid.shape, complex)
    v[0, 0] = np.nan
    with pytest.raises(DomainError):
        ComplexField(small_grid, v)


def test_field_is_read_only(small_grid):
    f = plane_wave(small_grid)
    with pytest.raises(ValueError):
        f.values[0, 0] = 2.0


@pytest.mark.parametrize("profile", ["uniform-disk", "gaussian", "annulus"])
def test_make_beam_is_unit_power(small_grid, profile):
    f = make_beam(small_grid, BeamSpec(3, profile, 0.8e-6, inner_radius=0.3e-6))
    assert power(f) == pytest.approx(1.0, abs=1e-12)


def test_make_beam_core_pixel_is_dark(small_grid):
    f = make_beam(small_grid, BeamSpec(2, "uniform-disk", 0.8e-6))
    assert f.values[128, 128] == 0


def test_make_beam_rejects_oversized_beam(small_grid):
    with pytest.raises(SamplingError):
        make_beam(small_grid, BeamSpec(0, "uniform-disk", 1.3e-6))


@pytest.mark.parametrize("m", range(-12, 13))
def test_beam_winding_is_exact(small_grid, m):
    f = make_beam(small_grid, BeamSpec(m, "uniform-disk", 1.0e-6))
    res = phase_winding(f, (0.0, 0.0), 0.5e-6)
    assert res.winding == m
    assert abs(res.residual) < 1e-9


def test_power_and_normalize(small_grid):
    assert power(ComplexField(small_grid, np.zeros(small_grid.shape))) == 0
    with pytest.raises(DomainError):
        normalize(ComplexField(small_grid, np.zeros(small_grid.shape)))
    f = scale(plane_wave(small_grid), 3 - 4j)
    assert power(normalize(f)) == pytest.approx(1.0, abs=1e-12)


def test_apply_mask_identity_and_opaque(small_grid):
    f = make_beam(small_grid, BeamSpec(1, "gaussian", 0.5e-6))
    assert np.array_equal(apply_mask(f, full_mask(small_grid, True)).values, f.values)
    assert power(apply_mask(f, full_mask(small_grid, False))) == 0


def test_apply_mask_half_open_halves_power(small_grid):
    f = plane_wave(small_grid)
    mask = full_mask(small_grid, True)
    half = type(mask)(small_grid, mask.open & (np.arange(256)[None, :] % 2 == 0), mask.support)
    assert power(apply_mask(f, half)) == pytest.approx(0.5 * power(f), abs=small_grid.pixel_area)


def test_apply_mask_grid_mismatch(small_grid):
    other = GridSpec(256, 256, 11e-9, LAM_200KV)
    with pytest.raises(ShapeError):
        apply_mask(plane_wave(small_grid), full_mask(other))


def test_mask_partition_of_power(small_grid):
    # beam is ~exp(-50) at the aperture edge, so the two masks split all of it
    f = make_beam(small_grid, BeamSpec(2, "gaussian", 0.2e-6))
    mask = render_forked_grating(ForkedGratingSpec(0.16e-6, 1, 1.0e-6), small_grid)
    total = power(apply_mask(f, mask)) + power(apply_mask(f, complement(mask)))
    assert total == pytest.approx(power(f), abs=1e-12)


def test_superpose_and_multiply(small_grid):
    a = make_beam(small_grid, BeamSpec(2, "gaussian", 0.4e-6))
    b = make_beam(small_grid, BeamSpec(-2, "gaussian", 0.4e-6))
    s = superpose(a, b, weights=[0.5, 0.5])
    assert np.allclose(s.values, 0.5 * (a.values + b.values))
    assert np.allclose(multiply(a, b).values, a.values * b.values)
    with pytest.raises(DomainError):
        superpose()


def test_reflect_x_is_an_involution_that_flips_charge(small_grid):
    f = make_beam(small_grid, BeamSpec(3, "uniform-disk", 0.8e-6))
    r = reflect_x(f)
    assert np.array_equal(reflect_x(r).values, f.values)
    assert phase_winding(r, (0.0, 0.0), 0.4e-6).winding == -3


@settings(max_examples=25, deadline=None)
@given(m=st.integers(-8, 8), theta=st.floats(0, 2 * np.pi))
def test_global_phase_changes_no_intensity_quantity(m, theta):
    g = GridSpec(128, 128, 10e-9, LAM_200KV)
    f = make_beam(g, BeamSpec(m, "gaussian", 0.25e-6))
    r = scale(f, np.exp(1j * theta))
    assert power(r) == pytest.approx(power(f), rel=1e-12)
    assert np.allclose(r.intensity, f.intensity, rtol=1e-12, atol=0)
    assert phase_winding(r, (0.0, 0.0), 0.2e-6).winding == m


@settings(max_examples=25, deadline=None)
@given(perm_seed=st.integers(0, 2**31 - 1))
def test_power_is_order_independent(perm_seed):
    g = GridSpec(64, 64, 10e-9, LAM_200KV)
    rng = np.random.default_rng(perm_seed)
    v = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
    shuffled = rng.permutation(v.ravel()).reshape(g.shape)
    assert power(ComplexField(g, shuffled)) == pytest.approx(power(ComplexField(g, v)), rel=1e-12)
