"""Scenario configuration: sectioned INI files with units in the key names.

Every block is a dataclass holding SI values. :func:`parse_config` reads
INI text (missing keys take the dataclass defaults, unknown keys are an
error) and :func:`echo_config` writes the fully resolved configuration
back out, so re-parsing an echo reproduces the same scenario.

Example::

    [grid]
    nx = 1024
    ny = 1024
    pitch_nm = 10
    voltage_kv = 200

    [beam]
    m = -1, 0, 1
    radius_um = 1.28

    [mask]
    kind = forked-grating
    period_um = 0.16
    aperture_radius_um = 1.28
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, fields
from typing import Optional, Tuple

from .errors import ConfigError
from .field import BEAM_PROFILES, electron_wavelength
from .propagation import DEFAULT_BAND_LIMIT

OUTPUT_FORMATS = ("json", "csv", "pbm", "pgm", "pfm")


@dataclass(frozen=True)
class GridBlock:
    nx: int = 2048
    ny: int = 2048
    pitch: float = 30e-6 / 1024
    voltage: Optional[float] = 200e3
    wavelength: Optional[float] = None

    def resolved_wavelength(self) -> float:
        if self.wavelength is not None:
            return self.wavelength
        return electron_wavelength(self.voltage)


@dataclass(frozen=True)
class BeamBlock:
    source: str = "vortex"
    m: Tuple[int, ...] = (0,)
    profile: str = "uniform-disk"
    radius: float = 15e-6
    inner_radius: float = 0.0
    center: Tuple[float, float] = (0.0, 0.0)
    zp_focal_length: float = 2.5
    zp_aperture_radius: float = 10e-6
    zp_duty: float = 0.5
    zp_distance: float = 2.5


@dataclass(frozen=True)
class MaskBlock:
    kind: str = "forked-grating"
    period: float = 0.75e-6
    burgers: int = 1
    charge: int = 10
    focal_length: float = 2.5
    aperture_radius: float = 15e-6
    duty: float = 0.5
    center: Tuple[float, float] = (0.0, 0.0)
    phase: float = 0.0


@dataclass(frozen=True)
class PropagationBlock:
    method: str = "lens-fourier"
    focal_length: float = 1.0
    distance: float = 0.0
    band_limit: float = DEFAULT_BAND_LIMIT


@dataclass(frozen=True)
class AnalysisBlock:
    mode: str = "orders"
    n_min: int = -7
    n_max: int = 7
    box_fraction: float = 0.4
    q_max: int = 16
    prominence: float = 0.1
    winding_floor: float = 1e-6
    r_max: float = 3e-6


@dataclass(frozen=True)
class SorterBlock:
    enabled: bool = False
    pinhole_fraction: float = 0.2
    n_min: int = -6
    n_max: int = 6
    ambiguity: float = 0.01


@dataclass(frozen=True)
class OutputBlock:
    directory: str = "out"
    formats: Tuple[str, ...] = ("json", "csv", "pbm", "pgm")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "scenario"
    grid: GridBlock = field(default_factory=GridBlock)
    beam: BeamBlock = field(default_factory=BeamBlock)
    mask: MaskBlock = field(default_factory=MaskBlock)
    propagation: PropagationBlock = field(default_factory=PropagationBlock)
    analysis: AnalysisBlock = field(default_factory=AnalysisBlock)
    sorter: SorterBlock = field(default_factory=SorterBlock)
    output: OutputBlock = field(default_factory=OutputBlock)


# INI key -> (attribute, kind, SI scale). Kinds: int, float, str, bool, ints, point, strs, optfloat.
_NM, _UM, _PM = 1e-9, 1e-6, 1e-12
_KEYS = {
    "scenario": {"name": ("name", "str", None)},
    "grid": {
        "nx": ("nx", "int", None),
        "ny": ("ny", "int", None),
        "pitch_nm": ("pitch", "float", _NM),
        "voltage_kv": ("voltage", "optfloat", 1e3),
        "wavelength_pm": ("wavelength", "optfloat", _PM),
    },
    "beam": {
        "source": ("source", "str", None),
        "m": ("m", "ints", None),
        "profile": ("profile", "str", None),
        "radius_um": ("radius", "float", _UM),
        "inner_radius_um": ("inner_radius", "float", _UM),
        "center_um": ("center", "point", _UM),
        "zp_focal_length_m": ("zp_focal_length", "float", 1.0),
        "zp_aperture_radius_um": ("zp_aperture_radius", "float", _UM),
        "zp_duty": ("zp_duty", "float", None),
        "zp_distance_m": ("zp_distance", "float", 1.0),
    },
    "mask": {
        "kind": ("kind", "str", None),
        "period_um": ("period", "float", _UM),
        "burgers": ("burgers", "int", None),
        "charge": ("charge", "int", None),
        "focal_length_m": ("focal_length", "float", 1.0),
        "aperture_radius_um": ("aperture_radius", "float", _UM),
        "duty": ("duty", "float", None),
        "center_um": ("center", "point", _UM),
        "phase_rad": ("phase", "float", None),
    },
    "propagation": {
        "method": ("method", "str", None),
        "focal_length_m": ("focal_length", "float", 1.0),
        "distance_m": ("distance", "float", 1.0),
        "band_limit": ("band_limit", "float", None),
    },
    "analysis": {
        "mode": ("mode", "str", None),
        "n_min": ("n_min", "int", None),
        "n_max": ("n_max", "int", None),
        "box_fraction": ("box_fraction", "float", None),
        "q_max": ("q_max", "int", None),
        "prominence": ("prominence", "float", None),
        "winding_floor": ("winding_floor", "float", None),
        "r_max_um": ("r_max", "float", _UM),
    },
    "sorter": {
        "enabled": ("enabled", "bool", None),
        "pinhole_fraction": ("pinhole_fraction", "float", None),
        "n_min": ("n_min", "int", None),
        "n_max": ("n_max", "int", None),
        "ambiguity": ("ambiguity", "float", None),
    },
    "output": {
        "directory": ("directory", "str", None),
        "formats": ("formats", "strs", None),
    },
}
_BLOCKS = {"grid": GridBlock, "beam": BeamBlock, "mask": MaskBlock, "propagation": PropagationBlock,
           "analysis": AnalysisBlock, "sorter": SorterBlock, "output": OutputBlock}


def parse_int_list(text: str) -> Tuple[int, ...]:
    """``"-1, 0, 2..4"`` -> ``(-1, 0, 2, 3, 4)``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        m = re.fullmatch(r"(-?\d+)\s*\.\.\s*(-?\d+)", part)
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            if lo > hi:
                raise ConfigError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    if not out:
        raise ConfigError("empty integer list")
    return tuple(out)


def _convert(raw: str, kind: str, scale):
    raw = raw.strip()
    if kind == "str":
        return raw
    if kind == "int":
        return int(raw)
    if kind == "bool":
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind == "ints":
        return parse_int_list(raw)
    if kind == "strs":
        return tuple(s.strip() for s in raw.split(",") if s.strip())
    if kind == "point":
        parts = [float(s) * scale for s in raw.split(",")]
        if len(parts) != 2:
            raise ValueError(f"expected 'x, y', got {raw!r}")
        return tuple(parts)
    if kind == "optfloat" and raw.lower() in ("", "none"):
        return None
    return float(raw) * scale if scale is not None else float(raw)


def _scaled_repr(value: float, scale: float) -> str:
    """Shortest decimal in unit `scale` that parses back to exactly `value`."""
    x = value / scale
    candidates = [x]
    up = down = x
    for _ in range(4):
        up, down = math.nextafter(up, math.inf), math.nextafter(down, -math.inf)
        candidates += [up, down]
    for c in candidates:
        if float(repr(c)) * scale == value:
            return repr(c)
    raise ConfigError(f"cannot express {value!r} exactly in units of {scale!r}")


def _format(value, kind: str, scale) -> str:
    if value is None:
        return "none"
    if kind in ("str", "int"):
        return str(value)
    if kind == "bool":
        return "true" if value else "false"
    if kind == "ints":
        return ", ".join(str(v) for v in value)
    if kind == "strs":
        return ", ".join(value)
    if kind == "point":
        return ", ".join(_scaled_repr(v, scale) for v in value)
    return _scaled_repr(value, scale) if scale is not None else repr(value)


def parse_config(text: str) -> ScenarioConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    values = {}
    for section in parser.sections():
        if section not in _KEYS:
            raise ConfigError(f"unknown section [{section}]; expected one of {sorted(_KEYS)}")
        keys = _KEYS[section]
        block = {}
        for key, raw in parser.items(section):
            if key not in keys:
                raise ConfigError(f"unknown key {key!r} in [{section}]; expected one of {sorted(keys)}")
            attr, kind, scale = keys[key]
            try:
                block[attr] = _convert(raw, kind, scale)
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc
        values[section] = block
    if "wavelength" in values.get("grid", {}) and "voltage" not in values["grid"]:
        values["grid"]["voltage"] = None
    kwargs = {name: cls(**values.get(name, {})) for name, cls in _BLOCKS.items()}
    if "scenario" in values:
        kwargs.update(values["scenario"])
    cfg = ScenarioConfig(**kwargs)
    validate_config(cfg, explicit=values)
    return cfg


def echo_config(cfg: ScenarioConfig) -> str:
    """INI text with every key resolved; parsing it gives back `cfg`."""
    lines = ["[scenario]", f"name = {cfg.name}", ""]
    for section, keys in _KEYS.items():
        if section == "scenario":
            continue
        block = getattr(cfg, section)
        lines.append(f"[{section}]")
        for key, (attr, kind, scale) in keys.items():
            if section == "beam" and attr in (_VORTEX_KEYS if cfg.beam.source == "zone-plate" else _ZP_KEYS):
                continue
            lines.append(f"{key} = {_format(getattr(block, attr), kind, scale)}")
        lines.append("")
    return "\n".join(lines)


def config_as_dict(cfg: ScenarioConfig) -> dict:
    out = {"name": cfg.name}
    for section in _BLOCKS:
        block = getattr(cfg, section)
        out[section] = {f.name: (list(v) if isinstance(v := getattr(block, f.name), tuple) else v)
                        for f in fields(block)}
    return out


_ZP_KEYS = ("zp_focal_length", "zp_aperture_radius", "zp_duty", "zp_distance")
_VORTEX_KEYS = ("profile", "radius", "inner_radius", "center")


def validate_config(cfg: ScenarioConfig, explicit: Optional[dict] = None) -> None:
    """Cross-block checks that the dataclasses cannot express alone."""
    g, b, mk, pr, an, so, out = (cfg.grid, cfg.beam, cfg.mask, cfg.propagation,
                                 cfg.analysis, cfg.sorter, cfg.output)
    if g.voltage is None and g.wavelength is None:
        raise ConfigError("[grid] needs voltage_kv or wavelength_pm")
    if g.voltage is not None and g.wavelength is not None:
        raise ConfigError("[grid] voltage_kv and wavelength_pm are mutually exclusive")
    if b.source not in ("vortex", "zone-plate"):
        raise ConfigError(f"[beam] source must be 'vortex' or 'zone-plate', got {b.source!r}")
    beam_keys = set((explicit or {}).get("beam", {}))
    if b.source == "vortex" and beam_keys & set(_ZP_KEYS):
        raise ConfigError("exactly one beam source: zp_* keys given with source = vortex")
    if b.source == "zone-plate" and beam_keys & set(_VORTEX_KEYS):
        raise ConfigError("exactly one beam source: vortex profile keys given with source = zone-plate")
    if b.profile not in BEAM_PROFILES:
        raise ConfigError(f"[beam] profile must be one of {BEAM_PROFILES}")
    if mk.kind not in ("forked-grating", "spiral-zone-plate", "none"):
        raise ConfigError(f"[mask] kind {mk.kind!r} unknown")
    if pr.method not in ("lens-fourier", "angular-spectrum", "fresnel-transfer", "none"):
        raise ConfigError(f"[propagation] method {pr.method!r} unknown")
    if an.mode not in ("orders", "center"):
        raise ConfigError(f"[analysis] mode must be 'orders' or 'center', got {an.mode!r}")
    if an.mode == "orders" and (mk.kind != "forked-grating" or pr.method != "lens-fourier"):
        raise ConfigError("order analysis needs a forked-grating mask and lens-fourier propagation")
    if an.n_min > an.n_max or so.n_min > so.n_max:
        raise ConfigError("empty order range")
    if not 0 < an.box_fraction < 0.5:
        raise ConfigError("[analysis] box_fraction must lie in (0, 0.5) so order boxes do not overlap")
    if so.enabled and (mk.kind != "forked-grating" or pr.method != "lens-fourier"):
        raise ConfigError("the sorter needs a forked-grating mask and lens-fourier propagation")
    if not 0 < so.pinhole_fraction < 0.5:
        raise ConfigError("[sorter] pinhole_fraction must lie in (0, 0.5)")
    bad = set(out.formats) - set(OUTPUT_FORMATS)
    if bad:
        raise ConfigError(f"[output] unknown formats {sorted(bad)}; expected {OUTPUT_FORMATS}")
