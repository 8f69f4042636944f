"""Command-line entry point.

Exit codes: 0 ok, 2 config, 3 sampling, 4 analysis, 5 I/O.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import scipy.fft

from . import io
from .config import ScenarioConfig, parse_config
from .errors import ConfigError, ForkOAMError, OutputError
from .scenarios import (SCENARIOS, RunReport, analyze_field, load_scenario, observation_grid,
                        run_scenario, scenario_grid, scenario_mask, scenario_sorter, scenario_source,
                        write_artifacts)
from .sorter import sort_oam

log = logging.getLogger("forkoam")


def _load_config(args) -> ScenarioConfig:
    if args.config is None:
        raise ConfigError("--config is required for this command")
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise OutputError(f"cannot read config {args.config}: {exc}") from exc
    return parse_config(text)


def _out_dir(args, cfg: ScenarioConfig) -> Path:
    return Path(args.out_dir) if args.out_dir is not None else Path(cfg.output.directory)


def cmd_mask(args) -> int:
    cfg = _load_config(args)
    grid = scenario_grid(cfg)
    mask = scenario_mask(cfg, grid)
    if mask is None:
        raise ConfigError("[mask] kind = none; nothing to render")
    path = io.write_mask(mask, _out_dir(args, cfg) / "mask.pbm")
    log.info("wrote %s (open fraction %.4f)", path, mask.open_fraction)
    return 0


def cmd_beam(args) -> int:
    cfg = _load_config(args)
    grid = scenario_grid(cfg)
    out = _out_dir(args, cfg)
    for m in cfg.beam.m:
        beam = scenario_source(cfg, grid, m, [])
        io.write_field(beam, out / f"beam_m{m}.pfm", "complex")
        io.write_field(beam, out / f"beam_m{m}.pgm", "pgm")
        log.info("wrote beam m=%d to %s", m, out)
    return 0


def cmd_diffract(args) -> int:
    cfg = _load_config(args)
    report = run_scenario(cfg)
    out = _out_dir(args, cfg)
    for r in report.runs:
        io.write_field(r.field, out / f"field_m{r.m}.pfm", "complex")
        io.write_field(r.field, out / f"intensity_m{r.m}.pgm", "pgm")
    if report.runs and report.runs[0].mask is not None:
        io.write_mask(report.runs[0].mask, out / "mask.pbm")
    log.info("wrote %d diffraction-plane fields to %s", len(report.runs), out)
    return 0


def cmd_analyze(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    if args.field is None:
        report = run_scenario(cfg)
        write_artifacts(report, out)
        print(summarize(report))
        return 0
    result = analyze_field(cfg, io.read_field(args.field, observation_grid(cfg)))
    io.write_report({"source": str(args.field), "analysis": result.as_dict()}, out / "analysis.json")
    return 0


def cmd_sort(args) -> int:
    cfg = _load_config(args)
    grid = scenario_grid(cfg)
    sorter = scenario_sorter(cfg)
    if args.field is not None:
        inputs = [("file", io.read_field(args.field, grid))]
    else:
        inputs = [(m, scenario_source(cfg, grid, m, [])) for m in cfg.beam.m]
    results = []
    for label, beam in inputs:
        res = sort_oam(beam, sorter)
        results.append({"input": label, **res.as_dict()})
        print(f"input {label}: m_hat = {res.m_hat}  confidence = {res.confidence:.3f}")
    io.write_report({"results": results}, _out_dir(args, cfg) / "sort.json")
    return 0


def cmd_reproduce(args) -> int:
    cfg = load_scenario(args.name)
    out = Path(args.out_dir) if args.out_dir is not None else Path("out") / args.name
    report = run_scenario(cfg)
    write_artifacts(report, out)
    print(summarize(report))
    log.info("artifacts in %s", out)
    return 0


def summarize(report: RunReport) -> str:
    """Plain-text table of the quantities each scenario is about."""
    lines = [f"scenario {report.config.name}"]
    for r in report.runs:
        if r.orders is not None:
            lines.append(f"m_in = {r.m}")
            lines.append("    n      power      winding  dominant_q  ring_radius_m")
            for o in r.orders.orders:
                if o.integrated_power is None:
                    lines.append(f"  {o.n:3d}   (outside grid)")
                    continue
                lines.append(f"  {o.n:3d}  {o.integrated_power:10.4e}  {str(o.winding):>7}  "
                             f"{str(o.dominant_q):>10}  {o.ring_radius:.4e}")
            asym = "  ".join(f"A{n}={a:+.2e}" for n, a in sorted(r.orders.asymmetry.items()))
            lines.append(f"  asymmetry: {asym}")
        if r.center is not None:
            c = r.center
            lines.append(f"m = {r.m}: ring radius {c.ring_radius:.4e} m, peaks {c.peak_count}, "
                         f"winding {c.winding}, dominant_q {c.dominant_q}")
        if r.sort is not None:
            lines.append(f"  sorter: m_in = {r.m} -> m_hat = {r.sort.m_hat} (confidence {r.sort.confidence:.3f})")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="scenario INI file")
    common.add_argument("--out-dir", default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="FFT worker threads (1 = reference deterministic path)")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="forkoam", parents=[common],
                                     description="Forked-grating vortex diffraction and OAM sorting")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("mask", parents=[common], help="render the configured mask to PBM").set_defaults(func=cmd_mask)
    sub.add_parser("beam", parents=[common], help="synthesize the input beam(s)").set_defaults(func=cmd_beam)
    sub.add_parser("diffract", parents=[common],
                   help="beam -> mask -> propagation; write fields").set_defaults(func=cmd_diffract)
    p = sub.add_parser("analyze", parents=[common], help="run the scenario and write the report")
    p.add_argument("--field", help="analyze a complex PFM field instead of simulating")
    p.set_defaults(func=cmd_analyze)
    p = sub.add_parser("sort", parents=[common], help="estimate input OAM with the grating + pinhole analyzer")
    p.add_argument("--field", help="complex PFM input field on the configured grid")
    p.set_defaults(func=cmd_sort)
    p = sub.add_parser("reproduce", parents=[common], help="run a bundled scenario")
    p.add_argument("name", help=f"one of: {', '.join(SCENARIOS)}")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("config", None), ("out_dir", None), ("threads", 1), ("quiet", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return ConfigError.exit_code
    try:
        with scipy.fft.set_workers(args.threads):
            return args.func(args)
    except ForkOAMError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return OutputError.exit_code


if __name__ == "__main__":
    sys.exit(main())
