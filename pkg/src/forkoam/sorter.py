"""Forked-grating + pinhole OAM analyzer.

Order ``n`` of a grating with Burgers vector ``b`` carries ``m_in + n*b``
quanta and lands at ``x_n = +n * wavelength * f / period``. Only the order
whose output has zero OAM is bright on axis, so the pinhole with the largest
transmission identifies ``m_in = -n* b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .analysis import locate_orders, order_spacing
from .errors import AmbiguousSortError, DomainError, ResolutionError, SamplingError
from .field import ComplexField, apply_mask, power
from .masks import ForkedGratingSpec, render_forked_grating
from .propagation import PropagationPlan, lens_fourier_transform, sampling_guard

DEFAULT_PINHOLE_FRACTION = 0.2
DEFAULT_AMBIGUITY = 0.01
_SUPERSAMPLE = 8


@dataclass(frozen=True)
class SorterConfig:
    """Grating, lens and pinhole of the analyzer.

    `pinhole_radius` defaults to 0.2 of the order spacing, which depends on
    the wavelength and is therefore resolved when sorting.
    """

    grating: ForkedGratingSpec
    focal_length: float = 1.0
    pinhole_radius: Optional[float] = None
    n_range: Tuple[int, int] = (-6, 6)
    ambiguity: float = DEFAULT_AMBIGUITY

    def __post_init__(self):
        if not self.focal_length > 0:
            raise DomainError("focal length must be positive")
        if self.pinhole_radius is not None and not self.pinhole_radius > 0:
            raise DomainError("pinhole radius must be positive")
        if self.n_range[0] > self.n_range[1]:
            raise DomainError("empty order range")
        if self.grating.burgers == 0:
            raise DomainError("a sorter needs a nonzero Burgers vector")

    def spacing(self, wavelength: float) -> float:
        return order_spacing(self.grating.period, wavelength, self.focal_length)

    def resolved_pinhole(self, wavelength: float) -> float:
        spacing = self.spacing(wavelength)
        r = DEFAULT_PINHOLE_FRACTION * spacing if self.pinhole_radius is None else self.pinhole_radius
        if r >= 0.5 * spacing:
            raise DomainError(
                f"pinhole radius {r:.4g} m overlaps adjacent orders (must be < {0.5 * spacing:.4g} m)")
        return r


@dataclass(frozen=True)
class SortResult:
    m_hat: int
    n_star: int
    confidence: float
    per_order_transmission: Dict[int, float]
    pinhole_radius: float

    def as_dict(self):
        return {
            "m_hat": self.m_hat,
            "n_star": self.n_star,
            "confidence": self.confidence,
            "pinhole_radius_m": self.pinhole_radius,
            "per_order_transmission": {str(n): t for n, t in sorted(self.per_order_transmission.items())},
        }


def _disk_coverage(field: ComplexField, center, radius):
    """Per-pixel fraction of each pixel's area inside the disk, over a bounding window."""
    g = field.grid
    p = g.pitch
    iy0, ix0 = g.to_index(center[0] - radius, center[1] - radius)
    iy1, ix1 = g.to_index(center[0] + radius, center[1] + radius)
    lo_y, lo_x = int(np.floor(iy0)) - 1, int(np.floor(ix0)) - 1
    hi_y, hi_x = int(np.ceil(iy1)) + 2, int(np.ceil(ix1)) + 2
    if lo_y < 0 or lo_x < 0 or hi_y > g.ny or hi_x > g.nx:
        raise ResolutionError(f"pinhole of radius {radius:.4g} m about {center} is clipped by the grid")
    x = g.x[lo_x:hi_x]
    y = g.y[lo_y:hi_y]
    X, Y = np.meshgrid(x, y)
    d = np.hypot(X - center[0], Y - center[1])
    cover = (d <= radius).astype(float)
    rim = np.abs(d - radius) < 0.75 * p
    if np.any(rim):
        offs = (np.arange(_SUPERSAMPLE) + 0.5) / _SUPERSAMPLE - 0.5
        ox, oy = np.meshgrid(offs * p, offs * p)
        for j, i in zip(*np.nonzero(rim)):
            sub = np.hypot(X[j, i] + ox - center[0], Y[j, i] + oy - center[1]) <= radius
            cover[j, i] = sub.mean()
    return (slice(lo_y, hi_y), slice(lo_x, hi_x)), cover


def pinhole_transmission(field: ComplexField, center, radius: float) -> float:
    """Fraction of the total power of `field` passing a circular pinhole.

    Rim pixels are weighted by their covered area (8x8 supersampling).
    """
    if not radius > 0:
        raise DomainError("pinhole radius must be positive")
    total = power(field)
    if total == 0:
        raise DomainError("field carries no power")
    window, cover = _disk_coverage(field, center, radius)
    inside = np.sum(field.intensity[window] * cover) * field.grid.pixel_area
    return float(inside / total)


def sort_oam(field: ComplexField, config: SorterConfig, check_sampling: bool = True) -> SortResult:
    """Estimate the OAM of `field` with the grating-lens-pinhole analyzer."""
    if power(field) <= 0:
        raise DomainError("input field carries no power")
    g = field.grid
    if check_sampling:
        report = sampling_guard(g, PropagationPlan("lens-fourier", config.focal_length),
                                aperture_radius=config.grating.aperture_radius)
        if report.status == "fail":
            raise SamplingError("; ".join(c.message for c in report.failures))
    radius = config.resolved_pinhole(g.wavelength)
    mask = render_forked_grating(config.grating, g)
    out = lens_fourier_transform(apply_mask(field, mask), config.focal_length)
    lo, hi = config.n_range
    trans = {}
    for loc in locate_orders(config.grating.period, g.wavelength, config.focal_length, range(lo, hi + 1)):
        trans[loc.n] = pinhole_transmission(out, (loc.x, loc.y), radius)

    ranked = sorted(trans, key=lambda n: (-trans[n], abs(n), n))
    b = config.grating.burgers
    n_star = ranked[0]
    top = trans[n_star]
    if len(ranked) > 1:
        runner = ranked[1]
        if top == 0 or (top - trans[runner]) / top < config.ambiguity:
            raise AmbiguousSortError(
                f"orders {n_star} and {runner} transmit within {config.ambiguity:.0%} of each other "
                f"(m_hat candidates {-n_star * b} and {-runner * b})",
                candidates=(-n_star * b, -runner * b),
                transmissions=(top, trans[runner]),
            )
    total = sum(trans.values())
    return SortResult(-n_star * b, n_star, top / total, trans, radius)
