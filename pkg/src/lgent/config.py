"""Run configuration: JSON schema, defaults, and typed access."""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass

import jsonschema

from .lgcore import BasisSpec, enumerate_basis
from .spdc import OpticsConfig

DEFAULT_GAMMA = 5.26


class ConfigError(ValueError):
    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


_pos = {"type": "number", "exclusiveMinimum": 0}
_int_range = {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "optics": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "pump_wavelength_nm": _pos,
                "wavelength_nm": _pos,
                "pump_waist_um": _pos,
                "focal_length_mm": _pos,
                "magnification": _pos,
                "phase_matching_width_rad_per_um": _pos,
                "collection_width_um": _pos,
                "collection_width_source": {"enum": ["input", "derived"]},
                "gamma": _pos,
            },
        },
        "basis": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["radial", "azimuthal", "fullfield"]},
                "ell_range": _int_range,
                "p_range": _int_range,
                "dimension": {"type": ["integer", "null"], "minimum": 1},
                "ordering": {"enum": ["mode_group", "index", None]},
                "max_mode_group": {"type": ["integer", "null"], "minimum": 1},
                "modes": {"type": ["array", "null"], "items": _int_range},
            },
        },
        "state": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"source": {"enum": ["spdc", "maximal"]}},
        },
        "noise": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "visibility": {"type": "number", "minimum": 0, "maximum": 1},
                "eps_ell": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "eps_p": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
            },
        },
        "efficiency": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "rule": {"enum": ["uniform", "geometric", "explicit"]},
                "ratio": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "signal": {"type": ["array", "null"], "items": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}},
                "idler": {"type": ["array", "null"], "items": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}},
            },
        },
        "measurement": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "pairs_budget": {"type": "integer", "minimum": 1},
                "bases": {"oneOf": [{"const": "all"}, {"type": "array", "items": {"type": "string"}}]},
                "mubs": {"type": ["integer", "null"], "minimum": 1},
            },
        },
        "certification": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "target": {"enum": ["maximal", "tilted"]},
                "trials": {"type": "integer", "minimum": 100},
            },
        },
        "cgh": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "grid_px": {"type": "integer", "minimum": 16},
                "period_px": {"type": "number", "minimum": 4},
                "pitch_um": _pos,
                "scale_px": _pos,
                "modes": {"oneOf": [{"const": "all"}, {"type": "array", "items": _int_range}]},
                "mub_states": {"type": "array", "items": _int_range},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"gammas": {"type": "array", "items": _pos, "minItems": 1}},
        },
        "phase_only": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"mub_r": {"type": "integer", "minimum": 0}},
        },
        "seed": {"type": "integer", "minimum": 0},
        "output_dir": {"type": "string"},
    },
}

DEFAULTS = {
    "optics": {
        "pump_wavelength_nm": 775.0,
        "wavelength_nm": 1550.0,
        "pump_waist_um": 450.0,
        "focal_length_mm": 250.0,
        "magnification": 3.3,
        "phase_matching_width_rad_per_um": 0.1,
    },
    "basis": {
        "kind": "fullfield",
        "ell_range": [-8, 7],
        "p_range": [0, 4],
        "dimension": 43,
        "ordering": None,
        "max_mode_group": None,
        "modes": None,
    },
    "state": {"source": "spdc"},
    "noise": {"visibility": 1.0, "eps_ell": 0.0, "eps_p": 0.0},
    "efficiency": {"rule": "uniform", "ratio": 0.9, "signal": None, "idler": None},
    "measurement": {"pairs_budget": 1000000, "bases": "all", "mubs": None},
    "certification": {"target": "maximal", "trials": 200},
    "cgh": {"grid_px": 1024, "period_px": 8.0, "pitch_um": 8.0, "scale_px": 48.0, "modes": "all",
            "mub_states": [[1, 1]]},
    "sweep": {"gammas": [1.0, 2.0, 3.0, 4.0, 5.26, 6.0, 8.0]},
    "phase_only": {"mub_r": 1},
    "seed": 0,
    "output_dir": "out",
}


BASIS_BLANK = {"kind": "fullfield", "ell_range": [0, 0], "p_range": [0, 0], "dimension": None, "ordering": None,
               "max_mode_group": None, "modes": None}


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path) if path else ""


@dataclass(frozen=True)
class ConfigDocument:
    data: dict

    @property
    def optics(self) -> OpticsConfig:
        o = self.data["optics"]
        return OpticsConfig(
            pump_wavelength_nm=float(o["pump_wavelength_nm"]),
            wavelength_nm=float(o["wavelength_nm"]),
            pump_waist_um=float(o["pump_waist_um"]),
            focal_length_mm=float(o["focal_length_mm"]),
            collection_width_um=float(o["collection_width_um"]),
            magnification=float(o["magnification"]),
            phase_matching_width=float(o["phase_matching_width_rad_per_um"]),
        )

    @property
    def basis(self) -> BasisSpec:
        return BasisSpec.from_dict(self.data["basis"])

    def __getitem__(self, key):
        return self.data[key]

    def canonical(self) -> str:
        return json.dumps(self.data, sort_keys=True, indent=2)

    def hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def optics_report(self) -> dict:
        o = self.data["optics"]
        rep = dict(self.optics.derived())
        rep["collection_width_um"] = o["collection_width_um"]
        rep["collection_width_source"] = o.get("collection_width_source", "input")
        return rep

    def with_overrides(self, **sections) -> "ConfigDocument":
        data = copy.deepcopy(self.data)
        for k, v in sections.items():
            if isinstance(v, dict):
                data[k].update(v)
            else:
                data[k] = v
        return ConfigDocument(data)


def _merge(defaults: dict, given: dict) -> dict:
    out = copy.deepcopy(defaults)
    for k, v in given.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def from_dict(raw: dict) -> ConfigDocument:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise ConfigError(e.message, _pointer(e.absolute_path))
    data = _merge(DEFAULTS, raw)
    if "basis" in raw:
        # a user basis replaces the default one instead of inheriting its size
        data["basis"] = {**BASIS_BLANK, **raw["basis"]}
    o = data["optics"]
    given = raw.get("optics", {})
    if "collection_width_um" in given and "gamma" in given:
        raise ConfigError("give either collection_width_um or gamma, not both", "/optics")
    if "collection_width_um" in given:
        o.setdefault("collection_width_source", "input")
    else:
        gamma = float(given.get("gamma", DEFAULT_GAMMA))
        o["collection_width_um"] = OpticsConfig.collection_width_for_gamma(
            gamma, float(o["pump_waist_um"]), float(o["magnification"]))
        o["collection_width_source"] = "derived"
    o.pop("gamma", None)
    doc = ConfigDocument(data)
    try:
        enumerate_basis(doc.basis)
    except ValueError as exc:
        raise ConfigError(str(exc), "/basis") from exc
    eff = data["efficiency"]
    if eff["rule"] == "explicit" and (eff["signal"] is None or eff["idler"] is None):
        raise ConfigError("explicit efficiency rule needs signal and idler arrays", "/efficiency")
    return doc


def parse_config(text: str) -> ConfigDocument:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    return from_dict(raw)


def serialize(doc: ConfigDocument) -> str:
    return doc.canonical()
