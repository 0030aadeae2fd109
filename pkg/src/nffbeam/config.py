"""Scenario configuration: strict YAML parsing, validation and printing.

Every block is optional except ``target``. Unknown keys are rejected so a
misspelt option never silently falls back to its default.

Example::

    frequency_hz: 5.8e9
    layout: {n_columns: 8, column_pitch_m: 0.0208}
    element_model: {kind: slot-subarray, q: 1}
    target: {x: 0, y: 0, z: 0.5}
    methods: [tr, ray-optic, far-field]
    grid: {kind: axial-line, z_min: 0.1, z_max: 1.5, samples: 561}
    output: {directory: out, formats: [csv, json]}
"""

from __future__ import annotations

import difflib
import math
from dataclasses import dataclass, field
from typing import Any

import yaml

from .errors import ConfigError, InvalidInputError
from .field_engine import ElementModel
from .geometry import (
    FocalTarget,
    ObservationGrid,
    SlotColumnSpec,
    axial_line,
    box_grid,
    build_frequency,
    build_layout,
    line,
    plane_cut_grid,
    point_grid,
    ray_line,
)
from .synthesis import METHODS

# config key -> SlotColumnSpec field
SLOT_KEYS = {
    "n_slots": "n_slots",
    "slot_pitch_m": "slot_pitch",
    "slot_length_m": "slot_length",
    "slot_width_m": "slot_width",
    "guide_width_a_m": "guide_width_a",
    "guide_height_b_m": "guide_height_b",
    "end_gap_m": "end_gap",
    "sidewall_offset_m": "sidewall_offset",
}

# grid kind -> {key: default}; None marks a required key
GRID_KEYS: dict[str, dict[str, Any]] = {
    "axial-line": {"x": 0.0, "y": 0.0, "z_min": None, "z_max": None, "samples": None},
    "line": {"start": None, "stop": None, "samples": None},
    "ray": {"s_min": 0.1, "s_max": 1.5, "samples": 561},
    "lateral-line": {"half_width": 0.4, "samples": 801},
    "plane-cut": {
        "plane": "E-plane",
        "lateral_min": None,
        "lateral_max": None,
        "z_min": None,
        "z_max": None,
        "samples": None,
    },
    "box": {"x": None, "y": None, "z": None, "samples": None},
    "points": {"points": None},
}

OUTPUT_FORMATS = ("csv", "json")
TOP_KEYS = (
    "frequency_hz",
    "layout",
    "element_model",
    "target",
    "methods",
    "grid",
    "quantization_bits",
    "output",
)


def _where(section: str, key: str) -> str:
    return f"{section}.{key}" if section else key


def _check_keys(block: Any, allowed, section: str) -> dict:
    if block is None:
        return {}
    if not isinstance(block, dict):
        raise ConfigError(f"'{section or 'config'}' must be a mapping, got {type(block).__name__}")
    for key in block:
        if key not in allowed:
            hint = difflib.get_close_matches(str(key), list(allowed), n=1)
            extra = f" (did you mean '{hint[0]}'?)" if hint else ""
            raise ConfigError(f"unknown key '{_where(section, str(key))}'{extra}")
    return block


def _num(value: Any, name: str) -> float:
    # PyYAML reads 5.8e9 (no dot, unsigned exponent) as a string
    if isinstance(value, bool):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(f"{name} must be a number, got {value!r}") from None
    if not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{name} must be a finite number, got {value!r}")
    return float(value)


def _int(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    return int(value)


def _point(value: Any, name: str) -> list[float]:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigError(f"{name} must be a list [x, y, z]")
    return [_num(v, f"{name}[{i}]") for i, v in enumerate(value)]


def _pair(value: Any, name: str) -> list[float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{name} must be a list [min, max]")
    return [_num(v, f"{name}[{i}]") for i, v in enumerate(value)]


@dataclass
class GridConfig:
    kind: str
    params: dict

    def resolve(self, target: FocalTarget) -> ObservationGrid:
        """Build the grid; ``ray`` and ``lateral-line`` are placed relative to ``target``."""
        p = self.params
        if self.kind == "axial-line":
            return axial_line(p["z_min"], p["z_max"], p["samples"], x=p["x"], y=p["y"])
        if self.kind == "line":
            return line(p["start"], p["stop"], p["samples"])
        if self.kind == "ray":
            return ray_line(target, p["s_min"], p["s_max"], p["samples"])
        if self.kind == "lateral-line":
            x, y, z = target.r_s
            w = p["half_width"]
            if not w > 0:
                raise InvalidInputError("lateral-line half_width must be > 0")
            return line((x, -w, z), (x, w, z), p["samples"])
        if self.kind == "plane-cut":
            return plane_cut_grid(
                p["plane"], (p["lateral_min"], p["lateral_max"]), (p["z_min"], p["z_max"]), tuple(p["samples"])
            )
        if self.kind == "box":
            return box_grid(p["x"], p["y"], p["z"], tuple(p["samples"]))
        return point_grid(p["points"])

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params}


@dataclass
class ScenarioConfig:
    frequency_hz: float = 5.8e9
    n_columns: int = 8
    column_pitch_m: float = 0.0208
    slots: SlotColumnSpec = field(default_factory=SlotColumnSpec)
    element_kind: str = "slot-subarray"
    q: float = 1.0
    targets: list = field(default_factory=list)
    target_list: bool = False
    methods: list = field(default_factory=lambda: list(METHODS))
    grid: GridConfig | None = None
    quantization_bits: int | None = None
    output_directory: str = "nffbeam_out"
    output_formats: list = field(default_factory=lambda: list(OUTPUT_FORMATS))

    def frequency(self):
        return build_frequency(self.frequency_hz)

    def layout(self):
        return build_layout(self.n_columns, self.column_pitch_m, self.slots)

    def element_model(self) -> ElementModel:
        return ElementModel(self.element_kind, self.q)

    def focal_targets(self) -> list[FocalTarget]:
        return [FocalTarget.at(*t) for t in self.targets]

    def to_dict(self) -> dict:
        targets = [{"x": x, "y": y, "z": z} for x, y, z in self.targets]
        return {
            "frequency_hz": self.frequency_hz,
            "layout": {
                "n_columns": self.n_columns,
                "column_pitch_m": self.column_pitch_m,
                "slots": {key: getattr(self.slots, attr) for key, attr in SLOT_KEYS.items()},
            },
            "element_model": {"kind": self.element_kind, "q": self.q},
            "target": targets if self.target_list else targets[0],
            "methods": list(self.methods),
            "grid": None if self.grid is None else self.grid.to_dict(),
            "quantization_bits": self.quantization_bits,
            "output": {"directory": self.output_directory, "formats": list(self.output_formats)},
        }


def _parse_grid(block: Any) -> GridConfig | None:
    if block is None:
        return None
    if not isinstance(block, dict) or "kind" not in block:
        raise ConfigError("grid must be a mapping with a 'kind' key")
    kind = block["kind"]
    if kind not in GRID_KEYS:
        raise ConfigError(f"grid.kind must be one of {sorted(GRID_KEYS)}, got {kind!r}")
    spec = GRID_KEYS[kind]
    _check_keys(block, ["kind", *spec], "grid")
    params: dict[str, Any] = {}
    for key, default in spec.items():
        name = f"grid.{key}"
        if key not in block or block[key] is None:
            if default is None:
                raise ConfigError(f"{name} is required for grid kind '{kind}'")
            params[key] = default
            continue
        raw = block[key]
        if key == "samples":
            if kind in ("plane-cut", "box"):
                dims = 2 if kind == "plane-cut" else 3
                if not isinstance(raw, (list, tuple)) or len(raw) != dims:
                    raise ConfigError(f"{name} must be a list of {dims} integers")
                params[key] = [_int(v, f"{name}[{i}]") for i, v in enumerate(raw)]
            else:
                params[key] = _int(raw, name)
        elif key == "plane":
            if raw not in ("E-plane", "H-plane"):
                raise ConfigError(f"{name} must be 'E-plane' or 'H-plane', got {raw!r}")
            params[key] = raw
        elif key in ("start", "stop"):
            params[key] = _point(raw, name)
        elif kind == "box":
            params[key] = _pair(raw, name)
        elif key == "points":
            if not isinstance(raw, list) or not raw:
                raise ConfigError(f"{name} must be a non-empty list of [x, y, z]")
            params[key] = [_point(p, f"{name}[{i}]") for i, p in enumerate(raw)]
        else:
            params[key] = _num(raw, name)
    return GridConfig(kind, params)


def _parse_target(block: Any) -> tuple[list, bool]:
    def one(t, name):
        _check_keys(t, ("x", "y", "z"), name)
        if not isinstance(t, dict) or "z" not in t:
            raise ConfigError(f"{name} needs at least a 'z' coordinate")
        xyz = (_num(t.get("x", 0.0), f"{name}.x"), _num(t.get("y", 0.0), f"{name}.y"), _num(t["z"], f"{name}.z"))
        if not xyz[2] > 0:
            raise ConfigError(f"{name}.z must be > 0 (FocalTarget invariant: target in front of the aperture)")
        return xyz

    if block is None:
        raise ConfigError("'target' is required")
    if isinstance(block, list):
        if not block:
            raise ConfigError("target list must not be empty")
        return [one(t, f"target[{i}]") for i, t in enumerate(block)], True
    return [one(block, "target")], False


def _load_yaml(text: str) -> Any:
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        problem = getattr(exc, "problem", None) or str(exc)
        if mark is not None:
            raise ConfigError(f"syntax error: {problem}", line=mark.line + 1, column=mark.column + 1) from None
        raise ConfigError(f"syntax error: {problem}") from None


def parse_config(text: str) -> ScenarioConfig:
    """Parse and fully validate a scenario; missing values take the 5.8 GHz design defaults."""
    raw = _load_yaml(text)
    top = _check_keys(raw, TOP_KEYS, "")
    cfg = ScenarioConfig()

    if top.get("frequency_hz") is not None:
        cfg.frequency_hz = _num(top["frequency_hz"], "frequency_hz")
    try:
        build_frequency(cfg.frequency_hz)
    except InvalidInputError:
        raise ConfigError(
            f"frequency_hz must be finite and > 0 (FrequencySpec invariant f > 0), got {cfg.frequency_hz!r}"
        ) from None

    lay = _check_keys(top.get("layout"), ("n_columns", "column_pitch_m", "slots"), "layout")
    if lay.get("n_columns") is not None:
        cfg.n_columns = _int(lay["n_columns"], "layout.n_columns")
    if lay.get("column_pitch_m") is not None:
        cfg.column_pitch_m = _num(lay["column_pitch_m"], "layout.column_pitch_m")
    slots = _check_keys(lay.get("slots"), SLOT_KEYS, "layout.slots")
    overrides = {}
    for key, value in slots.items():
        if value is None:
            continue
        name = f"layout.slots.{key}"
        overrides[SLOT_KEYS[key]] = _int(value, name) if key == "n_slots" else _num(value, name)
    try:
        cfg.slots = SlotColumnSpec(**overrides)
        build_layout(cfg.n_columns, cfg.column_pitch_m, cfg.slots)
    except InvalidInputError as exc:
        raise ConfigError(f"layout: {exc}") from None

    em = _check_keys(top.get("element_model"), ("kind", "q"), "element_model")
    if em.get("kind") is not None:
        cfg.element_kind = em["kind"]
    if em.get("q") is not None:
        cfg.q = _num(em["q"], "element_model.q")
    try:
        ElementModel(cfg.element_kind, cfg.q)
    except InvalidInputError as exc:
        raise ConfigError(f"element_model: {exc}") from None

    cfg.targets, cfg.target_list = _parse_target(top.get("target"))

    if top.get("methods") is not None:
        methods = top["methods"]
        if isinstance(methods, str):
            methods = [methods]
        if not isinstance(methods, list) or not methods:
            raise ConfigError("methods must be a non-empty list")
        for m in methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; expected one of {list(METHODS)}")
        cfg.methods = list(dict.fromkeys(methods))

    cfg.grid = _parse_grid(top.get("grid"))
    if cfg.grid is not None:
        try:
            for t in cfg.focal_targets():
                cfg.grid.resolve(t)
        except InvalidInputError as exc:
            raise ConfigError(f"grid: {exc}") from None

    if top.get("quantization_bits") is not None:
        bits = _int(top["quantization_bits"], "quantization_bits")
        if not 1 <= bits <= 16:
            raise ConfigError(f"quantization_bits must be in [1, 16], got {bits}")
        cfg.quantization_bits = bits

    out = _check_keys(top.get("output"), ("directory", "formats"), "output")
    if out.get("directory") is not None:
        if not isinstance(out["directory"], str) or not out["directory"]:
            raise ConfigError("output.directory must be a non-empty string")
        cfg.output_directory = out["directory"]
    if out.get("formats") is not None:
        formats = out["formats"]
        if not isinstance(formats, list) or not formats or any(f not in OUTPUT_FORMATS for f in formats):
            raise ConfigError(f"output.formats must be a non-empty subset of {list(OUTPUT_FORMATS)}")
        cfg.output_formats = list(dict.fromkeys(formats))
    return cfg


def print_config(cfg: ScenarioConfig) -> str:
    """Canonical YAML form; parse_config(print_config(c)) == c."""
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False, default_flow_style=None)


def load_config(path) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    return parse_config(text)
