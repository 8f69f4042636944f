"""Observables of diffraction-plane fields.

Order positions, integrated order powers and their asymmetry, azimuthal
(OAM) mode spectra, phase winding numbers, ring radii and azimuthal peak
counts. All positions are physical (meters) in the grid's coordinate frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.ndimage import map_coordinates
from scipy.signal import find_peaks

from .errors import AnalysisError, DomainError, IndeterminateWindingError, ResolutionError
from .field import ComplexField, GridSpec

MIN_AZIMUTHAL_SAMPLES = 64
DEFAULT_BOX_FRACTION = 0.4
DEFAULT_WINDING_FLOOR = 1e-6
DEFAULT_PROMINENCE = 0.1
MAX_WINDING_RESIDUAL = 0.25


def _circle_indices(grid: GridSpec, center, radius, n_samples):
    theta = 2 * np.pi * np.arange(n_samples) / n_samples
    x = center[0] + radius * np.cos(theta)
    y = center[1] + radius * np.sin(theta)
    iy, ix = grid.to_index(x, y)
    if iy.min() < 0 or ix.min() < 0 or iy.max() > grid.ny - 1 or ix.max() > grid.nx - 1:
        raise ResolutionError(f"circle of radius {radius:.4g} m about {center} leaves the grid")
    return theta, np.vstack([iy, ix])


def _interp(arr, idx):
    if np.iscomplexobj(arr):
        return (map_coordinates(arr.real, idx, order=1, prefilter=False)
                + 1j * map_coordinates(arr.imag, idx, order=1, prefilter=False))
    return map_coordinates(arr, idx, order=1, prefilter=False)


def sample_circle(field: ComplexField, center, radius: float, n_samples: int = 720):
    """Bilinear samples of `field` on a circle, counterclockwise from +x.

    Returns ``(theta, samples)``.
    """
    theta, idx = _circle_indices(field.grid, center, radius, n_samples)
    return theta, _interp(field.values, idx)


def _sample_point(arr, grid: GridSpec, center):
    iy, ix = grid.to_index(center[0], center[1])
    if not (0 <= iy <= grid.ny - 1 and 0 <= ix <= grid.nx - 1):
        raise ResolutionError(f"point {center} lies outside the grid")
    return _interp(arr, np.array([[iy], [ix]]))[0]


def _n_samples(q_max: int) -> int:
    return max(MIN_AZIMUTHAL_SAMPLES, 8 * abs(q_max))


@dataclass(frozen=True)
class OrderLocation:
    n: int
    x: float
    y: float = 0.0
    in_grid: bool = True


def order_spacing(period: float, wavelength: float, focal_length: float) -> float:
    return wavelength * focal_length / period


def locate_orders(period: float, wavelength: float, focal_length: float, n_range: Iterable[int],
                  grid: Optional[GridSpec] = None) -> List[OrderLocation]:
    """Predicted diffraction-plane centers ``x_n = n * wavelength * f / period``.

    With `grid` given, orders whose center falls outside it are returned with
    ``in_grid=False`` rather than dropped.
    """
    if not (period > 0 and wavelength > 0 and focal_length > 0):
        raise DomainError("period, wavelength and focal length must be positive")
    spacing = order_spacing(period, wavelength, focal_length)
    out = []
    for n in n_range:
        x = n * spacing
        inside = True
        if grid is not None:
            ix = grid.to_index(x, 0.0)[1]
            inside = 0 <= ix <= grid.nx - 1
        out.append(OrderLocation(int(n), x, 0.0, inside))
    return out


@dataclass(frozen=True)
class OAMSpectrum:
    center: Tuple[float, float]
    q_values: Tuple[int, ...]
    power_fraction: np.ndarray = field(repr=False)
    dominant_q: int = 0

    def fraction(self, q: int) -> float:
        return float(self.power_fraction[self.q_values.index(q)])

    def as_dict(self):
        return {
            "center": list(self.center),
            "dominant_q": self.dominant_q,
            "power_fraction": {str(q): float(p) for q, p in zip(self.q_values, self.power_fraction)},
        }


def _dominant(q_values, fractions):
    best = float(np.max(fractions))
    tied = [q for q, p in zip(q_values, fractions) if p >= best * (1 - 1e-12)]
    return min(tied, key=lambda q: (abs(q), q))


def azimuthal_mode_spectrum(field: ComplexField, center, r_min: float, r_max: float,
                            q_range: Tuple[int, int]) -> OAMSpectrum:
    """Decompose `field` on the annulus ``r_min <= r <= r_max`` into ``exp(i q phi)`` modes.

    ``power_fraction[q]`` is the share of the annulus power carried by mode
    `q`; both are evaluated with the same polar quadrature, so the fractions
    over all resolvable modes sum to one. Ties for ``dominant_q`` go to the
    smaller ``|q|``, then to the negative charge.
    """
    if not 0 <= r_min < r_max:
        raise ResolutionError(f"need 0 <= r_min < r_max, got {r_min}, {r_max}")
    q_lo, q_hi = q_range
    if q_lo > q_hi:
        raise DomainError("empty q range")
    dr = 0.5 * field.grid.pitch
    n_r = int(round((r_max - r_min) / dr))
    if n_r < 8:
        raise ResolutionError(f"annulus spans {n_r} sample radii, need at least 8")
    dr = (r_max - r_min) / n_r
    radii = r_min + (np.arange(n_r) + 0.5) * dr
    n_phi = _n_samples(max(abs(q_lo), abs(q_hi)))
    q_values = tuple(range(q_lo, q_hi + 1))

    mode_power = np.zeros(len(q_values))
    total = 0.0
    for r in radii:
        _, samples = sample_circle(field, center, r, n_phi)
        c = np.fft.fft(samples) / n_phi
        w = r * dr
        mode_power += w * np.abs(c[[q % n_phi for q in q_values]]) ** 2
        total += w * np.mean(np.abs(samples) ** 2)
    if total == 0:
        raise AnalysisError("annulus carries no power")
    fractions = mode_power / total
    return OAMSpectrum(tuple(center), q_values, fractions, _dominant(q_values, fractions))


@dataclass(frozen=True)
class WindingResult:
    winding: int
    residual: float
    radius: float


def phase_winding(field: ComplexField, center, radius: float, floor: float = DEFAULT_WINDING_FLOOR,
                  n_samples: int = 720) -> WindingResult:
    """Topological charge enclosed by a circle of `radius` about `center`.

    Sums principal-value phase steps around the interpolated circle. Raises
    :class:`IndeterminateWindingError` if the circle passes within `floor`
    (relative to the circle maximum) of a null, or if the unrounded winding
    is further than 0.25 from an integer.
    """
    _, s = sample_circle(field, center, radius, n_samples)
    amp = np.abs(s)
    if amp.max() == 0 or amp.min() < floor * amp.max():
        raise IndeterminateWindingError(
            f"circle of radius {radius:.4g} m crosses a near-null; try a different radius")
    steps = np.angle(np.roll(s, -1) / s)
    total = steps.sum() / (2 * np.pi)
    w = int(round(total))
    residual = total - w
    if abs(residual) > MAX_WINDING_RESIDUAL:
        raise IndeterminateWindingError(f"winding {total:.3f} is not close to an integer")
    return WindingResult(w, float(residual), radius)


def best_winding_radius(field: ComplexField, center, r_max: float, n_samples: int = 360) -> float:
    """Radius in ``[1 px, r_max]`` whose circle stays furthest from any null."""
    p = field.grid.pitch
    radii = np.arange(1.0, r_max / p + 1e-9, 0.5) * p
    if radii.size == 0:
        raise ResolutionError("search radius smaller than one pixel")
    scores = []
    for r in radii:
        _, s = sample_circle(field, center, r, n_samples)
        a = np.abs(s)
        scores.append(a.min() / a.max() if a.max() > 0 else 0.0)
    return float(radii[int(np.argmax(scores))])


def integrate_box(field: ComplexField, center, half_width: float) -> float:
    """Power inside the square ``|x - cx| <= hw, |y - cy| <= hw``."""
    g = field.grid
    cx, cy = center
    x, y = g.x, g.y
    lo_ok = cx - half_width >= x[0] - g.pitch and cy - half_width >= y[0] - g.pitch
    hi_ok = cx + half_width <= x[-1] + g.pitch and cy + half_width <= y[-1] + g.pitch
    if not (lo_ok and hi_ok):
        raise ResolutionError(f"box of half-width {half_width:.4g} m about {center} is clipped by the grid")
    sx = np.abs(x - cx) <= half_width
    sy = np.abs(y - cy) <= half_width
    return float(field.intensity[np.ix_(sy, sx)].sum() * g.pixel_area)


@dataclass(frozen=True)
class RingMeasurement:
    radius: float
    flagged: bool


def radial_profile(field: ComplexField, center, r_max: float, n_samples: int = 360):
    """Azimuthally averaged intensity at radii ``0, 0.5, 1, ... px`` up to `r_max`."""
    p = field.grid.pitch
    radii = np.arange(0.0, r_max / p + 1e-9, 0.5) * p
    inten = field.intensity
    prof = np.empty(radii.size)
    prof[0] = _sample_point(inten, field.grid, center)
    for i, r in enumerate(radii[1:], start=1):
        _, idx = _circle_indices(field.grid, center, r, n_samples)
        prof[i] = _interp(inten, idx).mean()
    return radii, prof


def ring_radius(field: ComplexField, center, r_max: float, level: float = 0.5) -> RingMeasurement:
    """Radial centroid of the brightest ring about `center`.

    The ring is the contiguous run of the radial profile above `level` times
    its peak. A profile peaking on axis yields radius 0 with ``flagged=True``.
    """
    radii, prof = radial_profile(field, center, r_max)
    k = int(np.argmax(prof))
    if k == 0 or prof[k] == 0:
        return RingMeasurement(0.0, True)
    thresh = level * prof[k]
    lo = k
    while lo > 0 and prof[lo - 1] >= thresh:
        lo -= 1
    hi = k
    while hi < len(prof) - 1 and prof[hi + 1] >= thresh:
        hi += 1
    r = radii[lo:hi + 1]
    w = prof[lo:hi + 1] * r
    return RingMeasurement(float(np.sum(w * r) / np.sum(w)), False)


def count_azimuthal_peaks(field: ComplexField, center, radius: float,
                          prominence: float = DEFAULT_PROMINENCE, n_samples: int = 720) -> int:
    """Number of intensity maxima around a circle with prominence above
    `prominence` times the circle maximum."""
    _, s = sample_circle(field, center, radius, n_samples)
    inten = np.abs(s) ** 2
    if inten.max() == 0:
        return 0
    start = int(np.argmin(inten))
    ring = np.roll(inten, -start)
    ring = np.append(ring, ring[0])
    peaks, _ = find_peaks(ring, prominence=prominence * inten.max())
    return int(len(peaks))


@dataclass(frozen=True)
class OrderMeasurement:
    n: int
    center: Tuple[float, float]
    in_grid: bool
    integrated_power: Optional[float] = None
    on_axis_intensity: Optional[float] = None
    ring_radius: Optional[float] = None
    ring_flagged: bool = False
    winding: Optional[int] = None
    winding_residual: Optional[float] = None
    winding_radius: Optional[float] = None
    dominant_q: Optional[int] = None
    peak_count: Optional[int] = None
    spectrum: Optional[OAMSpectrum] = field(default=None, repr=False)

    def as_dict(self):
        d = {
            "n": self.n,
            "center_m": list(self.center),
            "in_grid": self.in_grid,
            "integrated_power": self.integrated_power,
            "on_axis_intensity": self.on_axis_intensity,
            "ring_radius_m": self.ring_radius,
            "ring_flagged": self.ring_flagged,
            "winding": self.winding,
            "winding_residual": self.winding_residual,
            "winding_radius_m": self.winding_radius,
            "dominant_q": self.dominant_q,
            "peak_count": self.peak_count,
        }
        if self.spectrum is not None:
            d["spectrum"] = self.spectrum.as_dict()["power_fraction"]
        return d


@dataclass(frozen=True)
class DiffractionReport:
    spacing: float
    box_half_width: float
    orders: Tuple[OrderMeasurement, ...]
    asymmetry: Dict[int, float]

    def order(self, n: int) -> OrderMeasurement:
        for o in self.orders:
            if o.n == n:
                return o
        raise KeyError(n)

    def power(self, n: int) -> float:
        p = self.order(n).integrated_power
        if p is None:
            raise AnalysisError(f"order {n} was not measured")
        return p

    def as_dict(self):
        return {
            "spacing_m": self.spacing,
            "box_half_width_m": self.box_half_width,
            "orders": [o.as_dict() for o in self.orders],
            "asymmetry": {str(n): a for n, a in sorted(self.asymmetry.items())},
        }


def order_asymmetry(report: DiffractionReport, n: int) -> float:
    """``(P_n - P_-n) / (P_n + P_-n)`` from integrated order powers."""
    p_pos, p_neg = report.power(n), report.power(-n)
    if p_pos + p_neg == 0:
        raise AnalysisError(f"orders +/-{n} both carry zero power")
    return (p_pos - p_neg) / (p_pos + p_neg)


def intensity_difference(report: DiffractionReport, n: int) -> float:
    """Relative difference ``|P_n - P_-n|`` over the mean of the pair (twice ``|A_n|``)."""
    return 2.0 * abs(order_asymmetry(report, n))


def measure_order(field: ComplexField, n: int, center, radius: float, q_range: Tuple[int, int],
                  floor: float = DEFAULT_WINDING_FLOOR, in_grid: bool = True,
                  prominence: float = DEFAULT_PROMINENCE) -> OrderMeasurement:
    """All per-order observables within `radius` of `center`.

    Power is integrated over the square of half-width `radius`; spectra,
    winding and ring searches use the disk of that radius. Azimuthal peaks
    are counted on the ring centroid circle (None when no ring is found).
    """
    if not in_grid:
        return OrderMeasurement(n, tuple(center), False)
    power = integrate_box(field, center, radius)
    on_axis = float(_sample_point(field.intensity, field.grid, center))
    ring = ring_radius(field, center, radius)
    peaks = None if ring.flagged else count_azimuthal_peaks(field, center, ring.radius, prominence)
    try:
        spec = azimuthal_mode_spectrum(field, center, 0.0, radius, q_range)
        dominant = spec.dominant_q
    except AnalysisError:
        spec, dominant = None, None
    winding = residual = w_radius = None
    try:
        w_radius = best_winding_radius(field, center, radius)
        res = phase_winding(field, center, w_radius, floor)
        winding, residual = res.winding, res.residual
    except AnalysisError:
        pass
    return OrderMeasurement(n, tuple(center), True, power, on_axis, ring.radius, ring.flagged,
                            winding, residual, w_radius, dominant, peaks, spec)


def diffraction_report(field: ComplexField, period: float, focal_length: float, n_range: Sequence[int],
                       box_fraction: float = DEFAULT_BOX_FRACTION, q_range: Tuple[int, int] = (-16, 16),
                       floor: float = DEFAULT_WINDING_FLOOR,
                       prominence: float = DEFAULT_PROMINENCE) -> DiffractionReport:
    """Measure every order in `n_range` of a lens-plane field behind a grating of `period`."""
    g = field.grid
    spacing = order_spacing(period, g.wavelength, focal_length)
    hw = box_fraction * spacing
    orders = []
    for loc in locate_orders(period, g.wavelength, focal_length, n_range, g):
        inside = loc.in_grid
        if inside:
            ix = g.to_index(loc.x, 0.0)[1]
            inside = hw / g.pitch <= ix <= g.nx - 1 - hw / g.pitch
        orders.append(measure_order(field, loc.n, (loc.x, loc.y), hw, q_range, floor, inside, prominence))
    measured = {o.n: o.integrated_power for o in orders if o.integrated_power is not None}
    asym = {}
    for n in sorted(measured):
        if n > 0 and -n in measured and measured[n] + measured[-n] > 0:
            asym[n] = (measured[n] - measured[-n]) / (measured[n] + measured[-n])
    return DiffractionReport(spacing, hw, tuple(orders), asym)
