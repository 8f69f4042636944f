"""Sampled complex scalar fields, beam synthesis and elementary field algebra.

Coordinate convention shared by every module: x to the right, y upward,
``phi = atan2(y - cy, x - cx)``. Arrays are indexed ``values[iy, ix]`` with
shape ``(ny, nx)``; the physical origin sits on pixel ``(ny // 2, nx // 2)``,
so ``x = (ix - nx // 2) * pitch`` and ``y = (iy - ny // 2) * pitch``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .errors import DomainError, SamplingError, ShapeError

# CODATA 2018
PLANCK = 6.62607015e-34
ELECTRON_MASS = 9.1093837015e-31
ELEMENTARY_CHARGE = 1.602176634e-19
SPEED_OF_LIGHT = 299792458.0

BEAM_PROFILES = ("uniform-disk", "gaussian", "annulus")


def electron_wavelength(voltage: float) -> float:
    """Relativistic de Broglie wavelength (m) of an electron accelerated through `voltage` volts."""
    if not (voltage > 0 and math.isfinite(voltage)):
        raise DomainError(f"acceleration voltage must be positive and finite, got {voltage!r}")
    eV = ELEMENTARY_CHARGE * voltage
    rest = ELECTRON_MASS * SPEED_OF_LIGHT**2
    return PLANCK / math.sqrt(2.0 * ELECTRON_MASS * eV * (1.0 + eV / (2.0 * rest)))


@dataclass(frozen=True)
class GridSpec:
    """Square-pixel sampling of a transverse plane.

    Parameters
    ----------
    nx, ny : int
        Pixel counts along x and y (at least 16 each).
    pitch : float
        Pixel pitch [m].
    wavelength : float
        Wavelength of the field sampled on this grid [m].
    """

    nx: int
    ny: int
    pitch: float
    wavelength: float

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny:
            raise DomainError("pixel counts must be integers")
        if self.nx < 16 or self.ny < 16:
            raise DomainError(f"grid must be at least 16x16, got {self.nx}x{self.ny}")
        if not (self.pitch > 0 and math.isfinite(self.pitch)):
            raise DomainError(f"pitch must be positive, got {self.pitch!r}")
        if not (self.wavelength > 0 and math.isfinite(self.wavelength)):
            raise DomainError(f"wavelength must be positive, got {self.wavelength!r}")

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def extent_x(self) -> float:
        return self.nx * self.pitch

    @property
    def extent_y(self) -> float:
        return self.ny * self.pitch

    @property
    def pixel_area(self) -> float:
        return self.pitch * self.pitch

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.nx) - self.nx // 2) * self.pitch

    @property
    def y(self) -> np.ndarray:
        return (np.arange(self.ny) - self.ny // 2) * self.pitch

    def coords(self) -> Tuple[np.ndarray, np.ndarray]:
        """Meshgrids ``(X, Y)`` of shape ``(ny, nx)``."""
        return np.meshgrid(self.x, self.y)

    def polar(self, center=(0.0, 0.0)) -> Tuple[np.ndarray, np.ndarray]:
        """Radius and azimuth meshgrids about `center` (meters)."""
        X, Y = self.coords()
        dx = X - center[0]
        dy = Y - center[1]
        return np.hypot(dx, dy), np.arctan2(dy, dx)

    def to_index(self, x: float, y: float) -> Tuple[float, float]:
        """Fractional array indices ``(iy, ix)`` of a physical position."""
        return y / self.pitch + self.ny // 2, x / self.pitch + self.nx // 2


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex scalar wavefunction sampled on `grid`.

    `values` is copied on construction and frozen (read-only), so instances
    can be shared freely.
    """

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128, copy=True)
        if values.shape != self.grid.shape:
            raise ShapeError(f"values shape {values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise DomainError("field contains non-finite samples")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    @property
    def phase(self) -> np.ndarray:
        return np.angle(self.values)


@dataclass(frozen=True)
class BeamSpec:
    """Incident vortex beam ``A(r) exp(i m phi)``.

    `radius` is the disk radius, the Gaussian 1/e amplitude radius, or the
    outer radius of an annulus; `inner_radius` is used by the annulus only.
    """

    m: int = 0
    profile: str = "uniform-disk"
    radius: float = 1e-6
    inner_radius: float = 0.0
    center: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if int(self.m) != self.m:
            raise DomainError(f"topological charge must be an integer, got {self.m!r}")
        if self.profile not in BEAM_PROFILES:
            raise DomainError(f"unknown beam profile {self.profile!r}; expected one of {BEAM_PROFILES}")
        if not self.radius > 0:
            raise DomainError("beam radius must be positive")
        if self.profile == "annulus" and not (0 < self.inner_radius < self.radius):
            raise DomainError("annulus needs 0 < inner_radius < radius")


def make_beam(grid: GridSpec, spec: BeamSpec) -> ComplexField:
    """Synthesize a unit-power vortex beam.

    The amplitude is forced to zero on the exact core pixel when ``m != 0``.
    """
    half = 0.5 * min(grid.extent_x, grid.extent_y)
    cx, cy = spec.center
    reach = spec.radius + max(abs(cx), abs(cy))
    if reach >= half:
        raise SamplingError(
            f"beam radius + center offset ({reach:.4g} m) must be < half the grid extent ({half:.4g} m)"
        )
    r, phi = grid.polar(spec.center)
    if spec.profile == "uniform-disk":
        amp = (r <= spec.radius).astype(float)
    elif spec.profile == "gaussian":
        amp = np.exp(-((r / spec.radius) ** 2))
    else:
        amp = ((r >= spec.inner_radius) & (r <= spec.radius)).astype(float)
    values = amp * np.exp(1j * spec.m * phi)
    if spec.m != 0:
        values[r == 0] = 0.0
    return normalize(ComplexField(grid, values))


def plane_wave(grid: GridSpec) -> ComplexField:
    """Unit-amplitude plane wave filling the whole grid (not normalized)."""
    return ComplexField(grid, np.ones(grid.shape, dtype=np.complex128))


def power(field: ComplexField) -> float:
    return float(np.sum(field.intensity) * field.grid.pixel_area)


def normalize(field: ComplexField) -> ComplexField:
    p = power(field)
    if p == 0:
        raise DomainError("cannot normalize a zero-power field")
    return ComplexField(field.grid, field.values / math.sqrt(p))


def apply_mask(field: ComplexField, mask) -> ComplexField:
    """Thin-screen transmission through a binary amplitude mask."""
    if field.grid != mask.grid:
        raise ShapeError(f"field grid {field.grid} does not match mask grid {mask.grid}")
    return ComplexField(field.grid, np.where(mask.open, field.values, 0.0))


def _check_same_grid(a: ComplexField, b: ComplexField):
    if a.grid != b.grid:
        raise ShapeError("fields live on different grids")


def multiply(a: ComplexField, b: ComplexField) -> ComplexField:
    _check_same_grid(a, b)
    return ComplexField(a.grid, a.values * b.values)


def scale(field: ComplexField, factor: complex) -> ComplexField:
    return ComplexField(field.grid, field.values * factor)


def superpose(*fields: ComplexField, weights=None) -> ComplexField:
    """Coherent weighted sum of fields on a common grid."""
    if not fields:
        raise DomainError("superpose needs at least one field")
    if weights is None:
        weights = [1.0] * len(fields)
    if len(weights) != len(fields):
        raise DomainError("one weight per field required")
    total = np.zeros(fields[0].grid.shape, dtype=np.complex128)
    for f, w in zip(fields, weights):
        _check_same_grid(fields[0], f)
        total += w * f.values
    return ComplexField(fields[0].grid, total)


def reflect_x(field: ComplexField) -> ComplexField:
    """Mirror ``x -> -x`` about the grid origin.

    Exact for even `nx`; column 0 (``x = -nx/2 * pitch``) maps onto itself.
    """
    return ComplexField(field.grid, np.roll(field.values[:, ::-1], 1 - field.grid.nx % 2, axis=1))
