"""Scenario runner: config -> fields -> analysis -> report and artifacts.

Computation and file output are separate steps: :func:`run_scenario`
returns a :class:`RunReport` without touching the filesystem,
:func:`render_artifacts` turns it into file contents, and
:func:`write_artifacts` writes them atomically, so a failing run leaves
nothing behind.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import io
from .analysis import DiffractionReport, OrderMeasurement, diffraction_report, measure_order, order_spacing
from .config import ScenarioConfig, config_as_dict, echo_config, parse_config
from .errors import ConfigError, SamplingError
from .field import BeamSpec, ComplexField, GridSpec, apply_mask, make_beam, normalize, plane_wave
from .masks import (BinaryMask, ForkedGratingSpec, SpiralZonePlateSpec, render_forked_grating,
                    render_spiral_zone_plate)
from .propagation import PropagationPlan, SamplingReport, propagate, sampling_guard
from .sorter import SorterConfig, SortResult, sort_oam

log = logging.getLogger(__name__)

SCENARIOS = ("fig1f", "fig2a", "fig2c", "fig2d", "fig3", "sorter-demo")


@dataclass
class RunRecord:
    m: int
    sampling: List[SamplingReport]
    orders: Optional[DiffractionReport] = None
    center: Optional[OrderMeasurement] = None
    sort: Optional[SortResult] = None
    field: Optional[ComplexField] = None
    mask: Optional[BinaryMask] = None

    def as_dict(self):
        d = {"m": self.m, "sampling": [s.as_dict() for s in self.sampling]}
        if self.orders is not None:
            d["diffraction"] = self.orders.as_dict()
        if self.center is not None:
            d["center"] = self.center.as_dict()
        if self.sort is not None:
            d["sort"] = self.sort.as_dict()
        return d


@dataclass
class RunReport:
    config: ScenarioConfig
    runs: List[RunRecord]
    timings: Dict[str, float] = field(default_factory=dict)

    def run(self, m: int) -> RunRecord:
        for r in self.runs:
            if r.m == m:
                return r
        raise KeyError(m)

    def order_table(self) -> Dict[str, Dict[str, float]]:
        """Integrated power per order (rows) and input charge (columns)."""
        table: Dict[str, Dict[str, float]] = {}
        for r in self.runs:
            if r.orders is None:
                continue
            for o in r.orders.orders:
                if o.integrated_power is not None:
                    table.setdefault(str(o.n), {})[str(r.m)] = o.integrated_power
        return table

    def as_dict(self):
        """Report contents; timings are excluded so repeated runs serialize identically."""
        d = {
            "scenario": self.config.name,
            "config": config_as_dict(self.config),
            "runs": [r.as_dict() for r in self.runs],
        }
        table = self.order_table()
        if table:
            d["order_power_table"] = table
        return d


def scenario_grid(cfg: ScenarioConfig) -> GridSpec:
    g = cfg.grid
    return GridSpec(g.nx, g.ny, g.pitch, g.resolved_wavelength())


def _check(report: SamplingReport, stage: str) -> SamplingReport:
    if report.status == "fail":
        raise SamplingError(f"{stage}: " + "; ".join(c.message for c in report.failures))
    for c in report.checks:
        if c.status == "warn":
            log.warning("%s: %s", stage, c.message)
    return report


def scenario_source(cfg: ScenarioConfig, grid: GridSpec, m: int, sampling: list) -> ComplexField:
    b = cfg.beam
    if b.source == "vortex":
        return make_beam(grid, BeamSpec(m, b.profile, b.radius, b.inner_radius, b.center))
    zp = SpiralZonePlateSpec(m, b.zp_focal_length, b.zp_aperture_radius, b.zp_duty)
    field0 = normalize(apply_mask(plane_wave(grid), render_spiral_zone_plate(zp, grid)))
    plan = PropagationPlan("angular-spectrum", b.zp_distance, cfg.propagation.band_limit)
    bandwidth = b.zp_aperture_radius / (grid.wavelength * b.zp_focal_length)
    sampling.append(_check(sampling_guard(grid, plan, b.zp_aperture_radius, bandwidth), "zone-plate source"))
    return propagate(field0, plan)


def scenario_grating(cfg: ScenarioConfig) -> ForkedGratingSpec:
    mk = cfg.mask
    return ForkedGratingSpec(mk.period, mk.burgers, mk.aperture_radius, mk.duty, mk.center, mk.phase)


def scenario_mask(cfg: ScenarioConfig, grid: GridSpec) -> Optional[BinaryMask]:
    mk = cfg.mask
    if mk.kind == "forked-grating":
        return render_forked_grating(scenario_grating(cfg), grid)
    if mk.kind == "spiral-zone-plate":
        spec = SpiralZonePlateSpec(mk.charge, mk.focal_length, mk.aperture_radius, mk.duty, mk.center)
        return render_spiral_zone_plate(spec, grid)
    return None


def observation_grid(cfg: ScenarioConfig) -> GridSpec:
    """Grid of the plane the analysis looks at (the lens output grid for lens-fourier)."""
    grid = scenario_grid(cfg)
    if cfg.propagation.method == "lens-fourier":
        f = cfg.propagation.focal_length
        return GridSpec(grid.nx, grid.ny, grid.wavelength * f / (grid.nx * grid.pitch), grid.wavelength)
    return grid


def scenario_sorter(cfg: ScenarioConfig) -> SorterConfig:
    so = cfg.sorter
    f = cfg.propagation.focal_length
    pinhole = so.pinhole_fraction * order_spacing(cfg.mask.period, cfg.grid.resolved_wavelength(), f)
    return SorterConfig(scenario_grating(cfg), f, pinhole, (so.n_min, so.n_max), so.ambiguity)


def analyze_field(cfg: ScenarioConfig, field_: ComplexField):
    """Order report (orders mode) or single-center measurement (center mode)."""
    an = cfg.analysis
    q_range = (-an.q_max, an.q_max)
    if an.mode == "orders":
        return diffraction_report(field_, cfg.mask.period, cfg.propagation.focal_length,
                                  range(an.n_min, an.n_max + 1), an.box_fraction, q_range,
                                  an.winding_floor, an.prominence)
    return measure_order(field_, 0, (0.0, 0.0), an.r_max, q_range, an.winding_floor,
                         prominence=an.prominence)


def scenario_plan(cfg: ScenarioConfig) -> Optional[PropagationPlan]:
    pr = cfg.propagation
    if pr.method == "none":
        return None
    if pr.method == "lens-fourier":
        return PropagationPlan("lens-fourier", pr.focal_length, pr.band_limit)
    return PropagationPlan(pr.method, pr.distance, pr.band_limit)


def _illuminated_radius(cfg: ScenarioConfig) -> float:
    if cfg.mask.kind != "none":
        return cfg.mask.aperture_radius + max(map(abs, cfg.mask.center))
    if cfg.beam.source == "zone-plate":
        return cfg.beam.zp_aperture_radius
    return cfg.beam.radius + max(map(abs, cfg.beam.center))


def run_single(cfg: ScenarioConfig, m: int, keep_fields: bool = False) -> RunRecord:
    grid = scenario_grid(cfg)
    sampling: List[SamplingReport] = []
    beam = scenario_source(cfg, grid, m, sampling)
    mask = scenario_mask(cfg, grid)
    field_ = apply_mask(beam, mask) if mask is not None else beam
    plan = scenario_plan(cfg)
    if plan is not None:
        sampling.append(_check(sampling_guard(grid, plan, _illuminated_radius(cfg)), "propagation"))
        field_ = propagate(field_, plan)

    record = RunRecord(m, sampling)
    result = analyze_field(cfg, field_)
    if cfg.analysis.mode == "orders":
        record.orders = result
    else:
        record.center = result
    if cfg.sorter.enabled:
        record.sort = sort_oam(beam, scenario_sorter(cfg))
    if keep_fields:
        record.field, record.mask = field_, mask
    return record


def run_scenario(cfg: ScenarioConfig, keep_fields: bool = True) -> RunReport:
    """Run every input charge listed in ``cfg.beam.m``."""
    report = RunReport(cfg, [])
    t_all = time.perf_counter()
    for m in cfg.beam.m:
        t0 = time.perf_counter()
        report.runs.append(run_single(cfg, m, keep_fields))
        report.timings[f"m={m}"] = time.perf_counter() - t0
        log.info("%s: m=%d done in %.2f s", cfg.name, m, report.timings[f"m={m}"])
    report.timings["total"] = time.perf_counter() - t_all
    return report


def _fmt(v):
    return "" if v is None else repr(v) if isinstance(v, float) else str(v)


def render_artifacts(report: RunReport) -> Dict[str, bytes]:
    """Every output file of a run, keyed by file name."""
    cfg = report.config
    formats = set(cfg.output.formats)
    files: Dict[str, bytes] = {"config.resolved.ini": echo_config(cfg).encode("utf-8")}
    if "json" in formats:
        files["report.json"] = io.encode_report(report.as_dict())
        files["timings.json"] = io.encode_report(report.timings)
    if "csv" in formats:
        rows, spectra, sorts = [], [], []
        for r in report.runs:
            orders = r.orders.orders if r.orders is not None else [r.center] if r.center is not None else []
            asym = r.orders.asymmetry if r.orders is not None else {}
            for o in orders:
                rows.append([r.m, o.n, _fmt(o.center[0]), o.in_grid, _fmt(o.integrated_power),
                             _fmt(o.on_axis_intensity), _fmt(o.ring_radius), o.ring_flagged, _fmt(o.winding),
                             _fmt(o.dominant_q), _fmt(o.peak_count), _fmt(asym.get(o.n))])
                if o.spectrum is not None:
                    spectra += [[r.m, o.n, q, repr(float(p))]
                                for q, p in zip(o.spectrum.q_values, o.spectrum.power_fraction)]
            if r.sort is not None:
                sorts.append([r.m, r.sort.m_hat, r.sort.n_star, repr(r.sort.confidence)])
        files["orders.csv"] = io.encode_csv(
            ["m_in", "n", "x_m", "in_grid", "integrated_power", "on_axis_intensity", "ring_radius_m",
             "ring_flagged", "winding", "dominant_q", "peak_count", "asymmetry"], rows)
        files["spectra.csv"] = io.encode_csv(["m_in", "n", "q", "power_fraction"], spectra)
        if sorts:
            files["sort.csv"] = io.encode_csv(["m_in", "m_hat", "n_star", "confidence"], sorts)
    for r in report.runs:
        if r.mask is not None and "pbm" in formats and "mask.pbm" not in files:
            files["mask.pbm"] = io.encode_pbm(r.mask.open)
        if r.field is None:
            continue
        if "pgm" in formats:
            files[f"intensity_m{r.m}.pgm"] = io.encode_pgm(io.quicklook(r.field.intensity))
        if "pfm" in formats:
            v = r.field.values
            files[f"field_m{r.m}.pfm"] = io.encode_pfm(np.stack([v.real, v.imag, np.zeros(v.shape)], axis=-1))
            files[f"intensity_m{r.m}.pfm"] = io.encode_pfm(r.field.intensity)
            files[f"phase_m{r.m}.pfm"] = io.encode_pfm(r.field.phase)
    return files


def write_artifacts(report: RunReport, out_dir) -> List[Path]:
    files = render_artifacts(report)
    return [io.atomic_write(Path(out_dir) / name, data) for name, data in sorted(files.items())]


def scenario_text(name: str) -> str:
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}; available: {', '.join(SCENARIOS)}")
    return (resources.files("forkoam") / "scenarios" / f"{name}.ini").read_text()


def load_scenario(name: str) -> ScenarioConfig:
    return parse_config(scenario_text(name))


def reproduce(name: str, out_dir=None) -> RunReport:
    """Run a bundled scenario, writing artifacts to `out_dir` when given."""
    report = run_scenario(load_scenario(name), keep_fields=out_dir is not None)
    if out_dir is not None:
        write_artifacts(report, out_dir)
    return report
