import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from forkoam.analysis import azimuthal_mode_spectrum, radial_profile
from forkoam.errors import DomainError, ShapeError
from forkoam.field import (BeamSpec, ComplexField, GridSpec, apply_mask, make_beam, plane_wave, power)
from forkoam.masks import ForkedGratingSpec, render_forked_grating
from forkoam.propagation import (PropagationPlan, angular_spectrum_kernel, angular_spectrum_propagate,
                                 fresnel_propagate, lens_fourier_transform, propagate, sampling_guard)

from conftest import LAM_200KV

G = GridSpec(512, 512, 10e-9, LAM_200KV)


def rel_l2(a, b):
    return np.linalg.norm(a.values - b.values) / np.linalg.norm(b.values)


def gaussian(m=0, w=0.3e-6, grid=G):
    """Band-limited vortex ``(x + i sgn(m) y)^|m| exp(-r^2/w^2)``, unit power.

    Unlike make_beam there is no zeroed core pixel, whose flat spectrum
    would be clipped by the band window.
    """
    X, Y = grid.coords()
    v = ((X + 1j * np.sign(m) * Y) / w) ** abs(m) * np.exp(-(X**2 + Y**2) / w**2)
    f = ComplexField(grid, v)
    return ComplexField(grid, v / np.sqrt(power(f)))


def test_zero_distance_is_identity():
    f = gaussian(2)
    out = angular_spectrum_propagate(f, 0.0)
    assert np.array_equal(out.values, f.values)
    assert out is not f


@pytest.mark.parametrize("z", [1e-6, -1e-6, 3e-7])
def test_plane_wave_gains_only_a_global_phase(z):
    out = angular_spectrum_propagate(plane_wave(G), z)
    k = 2 * np.pi / LAM_200KV
    # the reference exp(i k z) is itself only good to a few ulps of k z
    tol = 8 * abs(k * z) * np.finfo(float).eps
    assert np.allclose(out.values, np.exp(1j * k * z), rtol=0, atol=tol)


def test_plane_wave_intensity_unchanged_at_long_range():
    out = angular_spectrum_propagate(plane_wave(G), 2.5)
    assert np.allclose(out.intensity, 1.0, rtol=0, atol=1e-12)


def _second_moment_width(field):
    X, Y = field.grid.coords()
    inten = field.intensity
    return np.sqrt(2 * np.sum((X**2 + Y**2) * inten) / np.sum(inten))


@pytest.mark.parametrize("z", [0.05, 0.113, 0.2, -0.15])
def test_gaussian_width_law(z):
    w0 = 0.3e-6
    z_r = np.pi * w0**2 / LAM_200KV
    expected = w0 * np.sqrt(1 + (z / z_r) ** 2)
    out = angular_spectrum_propagate(gaussian(0, w0), z)
    assert _second_moment_width(out) == pytest.approx(expected, rel=0.01)


@settings(max_examples=10, deadline=None)
@given(z=st.floats(-0.3, 0.3), m=st.integers(-5, 5))
def test_propagation_is_unitary(z, m):
    f = gaussian(m)
    out = angular_spectrum_propagate(f, z, band_limit=1.0)
    assert power(out) == pytest.approx(power(f), rel=1e-10)


def test_lens_transform_conserves_power():
    f = make_beam(G, BeamSpec(3, "uniform-disk", 1.0e-6))
    assert power(lens_fourier_transform(f, 1.0)) == pytest.approx(power(f), rel=1e-10)


@settings(max_examples=10, deadline=None)
@given(k1=st.integers(-2**20, 2**20), k2=st.integers(-2**20, 2**20))
def test_group_property(k1, k2):
    # distances on a 2**-22 m lattice so that z1 + z2 is exact; a rounded sum
    # shifts the carrier phase by k * ulp(z), ~1e-5 rad at these wavelengths
    z1, z2 = k1 * 2.0**-22, k2 * 2.0**-22
    f = gaussian(1)
    two = angular_spectrum_propagate(angular_spectrum_propagate(f, z1), z2)
    one = angular_spectrum_propagate(f, z1 + z2)
    assert rel_l2(two, one) < 1e-9


@pytest.mark.parametrize("z", [0.01, 0.2, 1.0])
def test_inverse_propagation(z):
    f = gaussian(-2)
    back = angular_spectrum_propagate(angular_spectrum_propagate(f, z), -z)
    assert rel_l2(back, f) < 1e-9


def test_fresnel_agrees_with_angular_spectrum():
    f = make_beam(G, BeamSpec(4, "gaussian", 0.4e-6))
    for z in (0.05, 0.2):
        assert rel_l2(fresnel_propagate(f, z), angular_spectrum_propagate(f, z)) < 1e-3


def test_kernel_never_amplifies():
    for z in (-1.0, 0.5):
        H = angular_spectrum_kernel(GridSpec(64, 64, 1e-12, LAM_200KV), z, 1.0)
        assert np.max(np.abs(H)) <= 1.0 + 1e-15


def test_evanescent_components_decay_forward_and_vanish_backward():
    g = GridSpec(64, 64, 0.3e-12, LAM_200KV)  # fine enough that the band edge is evanescent
    fx = np.fft.fftfreq(64, g.pitch)
    evan = np.hypot(*np.meshgrid(fx, fx)) * LAM_200KV > 1
    assert evan.any()
    fwd = angular_spectrum_kernel(g, 1e-12, 1.0)
    back = angular_spectrum_kernel(g, -1e-12, 1.0)
    inside = evan & (np.hypot(*np.meshgrid(fx, fx)) <= 0.5 / g.pitch)
    assert np.all(np.abs(fwd[inside]) < 1) and np.all(np.abs(fwd[inside]) > 0)
    assert np.all(back[evan] == 0)


def test_airy_first_zero():
    n, d_px = 1024, 128
    g = GridSpec(n, n, 10e-9, LAM_200KV)
    disk = make_beam(g, BeamSpec(0, "uniform-disk", d_px / 2 * g.pitch))
    out = lens_fourier_transform(disk, 1.0)
    radii, prof = radial_profile(out, (0.0, 0.0), 20 * out.grid.pitch)
    k = next(i for i in range(1, len(prof) - 1) if prof[i] <= prof[i - 1] and prof[i] < prof[i + 1])
    expected = 1.22 * LAM_200KV * 1.0 / (d_px * g.pitch)
    assert abs(radii[k] - expected) <= out.grid.pitch


def test_lens_output_grid():
    out = lens_fourier_transform(plane_wave(G), 2.0)
    assert out.grid.pitch == pytest.approx(LAM_200KV * 2.0 / (512 * 10e-9), rel=1e-15)
    assert out.grid.shape == G.shape


def test_grating_peaks_sit_on_the_grating_equation():
    n, period_px = 1024, 16
    g = GridSpec(n, n, 10e-9, LAM_200KV)
    beam = make_beam(g, BeamSpec(0, "uniform-disk", 2.4e-6))
    mask = render_forked_grating(ForkedGratingSpec(period_px * g.pitch, 0, 2.4e-6), g)
    out = lens_fourier_transform(apply_mask(beam, mask), 1.0)
    row = out.intensity[n // 2]
    spacing = LAM_200KV / (period_px * g.pitch)
    half = int(0.4 * spacing / out.grid.pitch)
    for order in (-5, -3, -1, 0, 1, 3, 5):
        _, ix = out.grid.to_index(order * spacing, 0.0)
        ix = int(round(ix))
        peak = ix - half + int(np.argmax(row[ix - half:ix + half + 1]))
        assert abs(out.grid.x[peak] - order * spacing) <= out.grid.pitch


@pytest.mark.parametrize("m", [1, -2, 5])
def test_vortex_has_a_central_null(m):
    out = lens_fourier_transform(make_beam(G, BeamSpec(m, "uniform-disk", 1.0e-6)), 1.0)
    assert out.intensity[256, 256] < 1e-6 * out.intensity.max()


@pytest.mark.parametrize("m", [0, 2, -3])
def test_free_space_conserves_oam_spectrum(m):
    f = gaussian(m, 0.25e-6)
    before = azimuthal_mode_spectrum(f, (0.0, 0.0), 0.0, 1.0e-6, (-8, 8))
    after = azimuthal_mode_spectrum(angular_spectrum_propagate(f, 0.1), (0.0, 0.0), 0.0, 1.0e-6, (-8, 8))
    assert after.dominant_q == m
    assert np.max(np.abs(after.power_fraction - before.power_fraction)) < 1e-6


def test_gaussian_helper_matches_make_beam_away_from_core():
    a, b = gaussian(0), make_beam(G, BeamSpec(0, "gaussian", 0.3e-6))
    assert rel_l2(a, b) < 1e-12


def test_propagate_dispatch():
    f = gaussian(1)
    assert np.array_equal(propagate(f, PropagationPlan("angular-spectrum", 0.1)).values,
                          angular_spectrum_propagate(f, 0.1).values)
    assert np.array_equal(propagate(f, PropagationPlan("fresnel-transfer", 0.1)).values,
                          fresnel_propagate(f, 0.1).values)
    assert np.array_equal(propagate(f, PropagationPlan("lens-fourier", 0.7)).values,
                          lens_fourier_transform(f, 0.7).values)


@pytest.mark.parametrize("kwargs", [dict(method="ray"), dict(distance=float("inf")),
                                    dict(band_limit=0.0), dict(band_limit=1.5),
                                    dict(method="lens-fourier", distance=0.0)])
def test_plan_validation(kwargs):
    with pytest.raises(DomainError):
        PropagationPlan(**kwargs)


def test_lens_needs_square_grid():
    g = GridSpec(64, 32, 10e-9, LAM_200KV)
    with pytest.raises(ShapeError):
        lens_fourier_transform(plane_wave(g), 1.0)


def test_sampling_guard_zero_distance_passes():
    assert sampling_guard(G, PropagationPlan("angular-spectrum", 0.0)).status == "pass"


def test_sampling_guard_flags_kernel_aliasing():
    coarse = GridSpec(256, 256, 100e-9, LAM_200KV)
    report = sampling_guard(coarse, PropagationPlan("angular-spectrum", 1e4))
    assert report.status == "fail"
    assert any("kernel aliasing" in c.message for c in report.failures)


def test_sampling_guard_guard_band():
    plan = PropagationPlan("lens-fourier", 1.0)
    extent = G.extent_x
    assert sampling_guard(G, plan, 0.25 * extent).status == "pass"
    assert sampling_guard(G, plan, 0.4 * extent).status == "warn"
    assert sampling_guard(G, plan, 0.6 * extent).status == "fail"


def test_sampling_guard_reports_are_serializable():
    d = sampling_guard(G, PropagationPlan("angular-spectrum", 0.1), 1e-6).as_dict()
    assert d["status"] in ("pass", "warn", "fail")
    assert {c["name"] for c in d["checks"]} == {"kernel-nyquist", "propagation-spread", "guard-band"}


def test_field_values_are_not_modified():
    f = gaussian(1)
    copy = f.values.copy()
    angular_spectrum_propagate(f, 0.1)
    lens_fourier_transform(f, 1.0)
    assert np.array_equal(f.values, copy)


def test_complex_field_input_grid_is_kept():
    out = angular_spectrum_propagate(ComplexField(G, np.ones(G.shape)), 0.1)
    assert out.grid == G
