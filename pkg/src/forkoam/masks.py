"""Binary amplitude masks: forked gratings and spiral zone plates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .errors import DomainError, SamplingError
from .field import GridSpec

MIN_PERIOD_PIXELS = 8
MIN_ZONE_PIXELS = 4


@dataclass(frozen=True)
class ForkedGratingSpec:
    """Binary grating with an edge dislocation of strength `burgers` at `center`.

    Transmission is open where ``cos(2 pi x / period + burgers * phi + phase)``
    exceeds ``cos(pi * duty)`` inside the circular aperture.
    """

    period: float
    burgers: int = 1
    aperture_radius: float = 15e-6
    duty: float = 0.5
    center: Tuple[float, float] = (0.0, 0.0)
    phase: float = 0.0

    def __post_init__(self):
        if not self.period > 0:
            raise DomainError("grating period must be positive")
        if not self.aperture_radius > 0:
            raise DomainError("aperture radius must be positive")
        if not 0 < self.duty < 1:
            raise DomainError(f"duty must lie in (0, 1), got {self.duty!r}")
        if int(self.burgers) != self.burgers:
            raise DomainError("Burgers vector must be an integer")


@dataclass(frozen=True)
class SpiralZonePlateSpec:
    """Fresnel zone plate whose zones spiral with topological charge `charge`."""

    charge: int
    focal_length: float
    aperture_radius: float = 10e-6
    duty: float = 0.5
    center: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not self.focal_length > 0:
            raise DomainError("focal length must be positive")
        if not self.aperture_radius > 0:
            raise DomainError("aperture radius must be positive")
        if not 0 < self.duty < 1:
            raise DomainError(f"duty must lie in (0, 1), got {self.duty!r}")
        if int(self.charge) != self.charge:
            raise DomainError("zone plate charge must be an integer")

    def outer_zone_width(self, wavelength: float) -> float:
        return wavelength * self.focal_length / (2.0 * self.aperture_radius)


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Rasterized binary transmission.

    `support` is the bounding aperture; pixels outside it are always opaque.
    """

    grid: GridSpec
    open: np.ndarray = field(repr=False)
    support: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("open", "support"):
            arr = np.array(getattr(self, name), dtype=bool, copy=True)
            if arr.shape != self.grid.shape:
                raise DomainError(f"{name} has shape {arr.shape}, grid is {self.grid.shape}")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if np.any(self.open & ~self.support):
            raise DomainError("mask is open outside its support")

    @property
    def open_fraction(self) -> float:
        """Open fraction within the support."""
        n = np.count_nonzero(self.support)
        return np.count_nonzero(self.open) / n if n else 0.0


def _check_aperture(grid: GridSpec, center, radius):
    half = 0.5 * min(grid.extent_x, grid.extent_y)
    reach = radius + max(abs(center[0]), abs(center[1]))
    if reach > half:
        raise SamplingError(f"aperture reach {reach:.4g} m exceeds half the grid extent {half:.4g} m")


def _open_phase(cycles: np.ndarray, duty: float) -> np.ndarray:
    """``cos(2 pi cycles) >= cos(pi duty)`` as a half-open interval in cycles.

    Snapping to 2**-24 cycles makes pixels that sit exactly on a line edge
    resolve the same way in every period, so an integer-pixel period always
    has exactly ``duty * period`` open pixels.
    """
    t = np.round((cycles + duty / 2) * 2.0**24) / 2.0**24
    return np.mod(t, 1.0) < duty


def render_forked_grating(spec: ForkedGratingSpec, grid: GridSpec) -> BinaryMask:
    if spec.period < MIN_PERIOD_PIXELS * grid.pitch:
        raise SamplingError(
            f"grating period {spec.period:.4g} m is below {MIN_PERIOD_PIXELS} pixels "
            f"({MIN_PERIOD_PIXELS * grid.pitch:.4g} m)"
        )
    _check_aperture(grid, spec.center, spec.aperture_radius)
    X, Y = grid.coords()
    x = X - spec.center[0]
    y = Y - spec.center[1]
    r = np.hypot(x, y)
    phi = np.arctan2(y, x)
    cycles = x / spec.period + (spec.burgers * phi + spec.phase) / (2 * np.pi)
    support = r <= spec.aperture_radius
    opened = _open_phase(cycles, spec.duty) | (r == 0)
    return BinaryMask(grid, opened & support, support)


def render_spiral_zone_plate(spec: SpiralZonePlateSpec, grid: GridSpec) -> BinaryMask:
    width = spec.outer_zone_width(grid.wavelength)
    if width < MIN_ZONE_PIXELS * grid.pitch:
        raise SamplingError(
            f"outermost zone width {width:.4g} m is below {MIN_ZONE_PIXELS} pixels "
            f"({MIN_ZONE_PIXELS * grid.pitch:.4g} m)"
        )
    _check_aperture(grid, spec.center, spec.aperture_radius)
    r, phi = grid.polar(spec.center)
    cycles = spec.charge * phi / (2 * np.pi) - r**2 / (2 * grid.wavelength * spec.focal_length)
    support = r <= spec.aperture_radius
    opened = _open_phase(cycles, spec.duty) | (r == 0)
    return BinaryMask(grid, opened & support, support)


def grating_order_amplitude(duty: float, n: int) -> float:
    """Fourier coefficient of order `n` of a binary grating with open fraction `duty`.

    Orders with ``n * duty`` integral return exactly 0.
    """
    if not 0 < duty < 1:
        raise DomainError(f"duty must lie in (0, 1), got {duty!r}")
    if n == 0:
        return float(duty)
    t = n * duty
    if t == round(t):
        return 0.0
    return math.sin(math.pi * t) / (math.pi * n)


def complement(mask: BinaryMask) -> BinaryMask:
    """Swap open and closed pixels inside the support."""
    return BinaryMask(mask.grid, mask.support & ~mask.open, mask.support)


def full_mask(grid: GridSpec, open: bool = True) -> BinaryMask:
    """All-transparent (or all-opaque) mask covering the whole grid."""
    support = np.ones(grid.shape, dtype=bool)
    return BinaryMask(grid, support if open else ~support, support)
