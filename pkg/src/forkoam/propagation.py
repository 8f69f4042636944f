"""Free-space propagation between planes.

Three propagators share one field type:

* band-limited angular spectrum (exact scalar kernel, the reference),
* the paraxial Fresnel transfer function,
* the ideal-lens Fourier transform onto the back focal plane.

FFTs go through :mod:`scipy.fft`; wrap calls in ``scipy.fft.set_workers(n)``
to control threading. Results do not depend on the worker count.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np
import scipy.fft as sfft

from .errors import DomainError, ShapeError
from .field import ComplexField, GridSpec

METHODS = ("angular-spectrum", "fresnel-transfer", "lens-fourier")
DEFAULT_BAND_LIMIT = 0.95


@dataclass(frozen=True)
class PropagationPlan:
    method: str = "angular-spectrum"
    distance: float = 0.0
    band_limit: float = DEFAULT_BAND_LIMIT

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"unknown propagation method {self.method!r}; expected one of {METHODS}")
        if not math.isfinite(self.distance):
            raise DomainError("propagation distance must be finite")
        if self.method == "lens-fourier" and not self.distance > 0:
            raise DomainError("lens focal length must be positive")
        if not 0 < self.band_limit <= 1:
            raise DomainError(f"band_limit must lie in (0, 1], got {self.band_limit!r}")


def _carrier(z: float, wavelength: float) -> complex:
    """``exp(i k z)`` with ``z / wavelength`` reduced mod 1 in exact arithmetic.

    ``k z`` is ~1e12 rad at electron wavelengths, where a float64 product
    carries ~1e-4 rad of rounding; exact reduction keeps composition of
    propagations consistent to machine precision.
    """
    cycles = Fraction(z) / Fraction(wavelength)
    return cmath.exp(2j * math.pi * float(cycles - math.floor(cycles)))


def _frequencies(grid: GridSpec):
    fx = sfft.fftfreq(grid.nx, grid.pitch)
    fy = sfft.fftfreq(grid.ny, grid.pitch)
    return np.meshgrid(fx, fy)


def _band_window(grid: GridSpec, FX, FY, band_limit):
    nyquist = 0.5 / grid.pitch
    return np.hypot(FX, FY) <= band_limit * nyquist


def angular_spectrum_kernel(grid: GridSpec, z: float, band_limit: float = DEFAULT_BAND_LIMIT) -> np.ndarray:
    """Transfer function in unshifted FFT order.

    Propagating components get ``exp(i z kz)``; evanescent components decay
    for ``z > 0`` and are zeroed for ``z < 0``.
    """
    FX, FY = _frequencies(grid)
    lam = grid.wavelength
    k = 2 * np.pi / lam
    s = (lam * FX) ** 2 + (lam * FY) ** 2
    prop = s <= 1
    # kz - k written to avoid cancellation when s << 1
    dk = np.where(prop, -k * s / (1 + np.sqrt(np.where(prop, 1 - s, 0.0))), 0.0)
    H = _carrier(z, lam) * np.exp(1j * z * dk)
    if z > 0:
        decay = np.exp(-z * k * np.sqrt(np.where(prop, 0.0, s - 1)))
        H = np.where(prop, H, decay)
    else:
        H = np.where(prop, H, 0.0)
    return H * _band_window(grid, FX, FY, band_limit)


def fresnel_kernel(grid: GridSpec, z: float, band_limit: float = DEFAULT_BAND_LIMIT) -> np.ndarray:
    FX, FY = _frequencies(grid)
    lam = grid.wavelength
    H = _carrier(z, lam) * np.exp(-1j * np.pi * lam * z * (FX**2 + FY**2))
    return H * _band_window(grid, FX, FY, band_limit)


def _apply_kernel(field: ComplexField, H: np.ndarray) -> ComplexField:
    return ComplexField(field.grid, sfft.ifft2(sfft.fft2(field.values) * H))


def angular_spectrum_propagate(field: ComplexField, z: float, band_limit: float = DEFAULT_BAND_LIMIT) -> ComplexField:
    """Propagate `field` a distance `z` (m) with the exact scalar kernel."""
    if not math.isfinite(z):
        raise DomainError("propagation distance must be finite")
    if z == 0:
        return ComplexField(field.grid, field.values)
    return _apply_kernel(field, angular_spectrum_kernel(field.grid, z, band_limit))


def fresnel_propagate(field: ComplexField, z: float, band_limit: float = DEFAULT_BAND_LIMIT) -> ComplexField:
    """Paraxial counterpart of :func:`angular_spectrum_propagate`."""
    if not math.isfinite(z):
        raise DomainError("propagation distance must be finite")
    if z == 0:
        return ComplexField(field.grid, field.values)
    return _apply_kernel(field, fresnel_kernel(field.grid, z, band_limit))


def lens_fourier_transform(field: ComplexField, focal_length: float) -> ComplexField:
    """Field in the back focal plane of an ideal thin lens of focal length `focal_length`.

    The output grid has pitch ``wavelength * f / (n * pitch)``; the input
    origin pixel maps to the output origin pixel. Total power is preserved.
    Requires a square grid, since :class:`GridSpec` carries a single pitch.
    """
    if not focal_length > 0:
        raise DomainError("focal length must be positive")
    g = field.grid
    if g.nx != g.ny:
        raise ShapeError("lens transform needs a square grid (nx == ny)")
    lam = g.wavelength
    out_pitch = lam * focal_length / (g.nx * g.pitch)
    out_grid = GridSpec(g.nx, g.ny, out_pitch, lam)
    spectrum = sfft.fftshift(sfft.fft2(sfft.ifftshift(field.values)))
    return ComplexField(out_grid, spectrum * (-1j * g.pixel_area / (lam * focal_length)))


def propagate(field: ComplexField, plan: PropagationPlan) -> ComplexField:
    if plan.method == "angular-spectrum":
        return angular_spectrum_propagate(field, plan.distance, plan.band_limit)
    if plan.method == "fresnel-transfer":
        return fresnel_propagate(field, plan.distance, plan.band_limit)
    return lens_fourier_transform(field, plan.distance)


@dataclass(frozen=True)
class SamplingCheck:
    name: str
    status: str
    message: str


@dataclass(frozen=True)
class SamplingReport:
    status: str
    checks: Tuple[SamplingCheck, ...] = field(default_factory=tuple)

    @property
    def failures(self) -> List[SamplingCheck]:
        return [c for c in self.checks if c.status == "fail"]

    def as_dict(self):
        return {
            "status": self.status,
            "checks": [{"name": c.name, "status": c.status, "message": c.message} for c in self.checks],
        }


_RANK = {"pass": 0, "warn": 1, "fail": 2}


def sampling_guard(
    grid: GridSpec,
    plan: PropagationPlan,
    aperture_radius: Optional[float] = None,
    content_bandwidth: Optional[float] = None,
) -> SamplingReport:
    """Check that `plan` can be carried out on `grid` without aliasing.

    Parameters
    ----------
    aperture_radius : float, optional
        Radius of the illuminated region [m]; enables the guard-band check.
    content_bandwidth : float, optional
        Highest spatial frequency carried by the field [cycles/m]. Without
        it the full band-limited spectrum is assumed occupied.

    Returns
    -------
    SamplingReport
        Overall status is the worst of the individual checks.
    """
    checks = []
    n = min(grid.nx, grid.ny)
    extent = n * grid.pitch
    band = plan.band_limit * 0.5 / grid.pitch
    f_content = band if content_bandwidth is None else min(content_bandwidth, band)

    if plan.method != "lens-fourier" and plan.distance != 0:
        z = abs(plan.distance)
        # frequency below which the kernel phase advances < pi per frequency bin
        f_ok = extent / (2 * grid.wavelength * z)
        if f_ok >= f_content:
            status, msg = "pass", f"kernel sampled up to {f_ok:.4g} /m >= content {f_content:.4g} /m"
        elif f_ok >= 4.0 / extent:
            status = "warn"
            msg = (f"kernel aliasing: chirp Nyquist violated above {f_ok:.4g} /m "
                   f"(needs lambda*|z|*f <= L/2); content reaches {f_content:.4g} /m")
        else:
            status = "fail"
            msg = (f"kernel aliasing: chirp Nyquist violated above {f_ok:.4g} /m, "
                   f"fewer than 4 frequency bins are usable")
        checks.append(SamplingCheck("kernel-nyquist", status, msg))

        if aperture_radius is not None:
            reach = aperture_radius + grid.wavelength * z * f_content
            if reach <= 0.5 * extent:
                status, msg = "pass", f"spread {reach:.4g} m fits within half extent {0.5 * extent:.4g} m"
            else:
                status, msg = "warn", f"wraparound: spread {reach:.4g} m exceeds half extent {0.5 * extent:.4g} m"
            checks.append(SamplingCheck("propagation-spread", status, msg))

    if aperture_radius is not None:
        frac = 2 * aperture_radius / extent
        if frac <= 0.5:
            status = "pass"
        elif frac <= 1.0:
            status = "warn"
        else:
            status = "fail"
        checks.append(SamplingCheck(
            "guard-band", status, f"aperture diameter / grid extent = {frac:.4g} (limit 0.5)"))

    worst = max((c.status for c in checks), key=_RANK.get, default="pass")
    return SamplingReport(worst, tuple(checks))
