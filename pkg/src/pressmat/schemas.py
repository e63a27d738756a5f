"""JSON schemas for the file formats the CLI accepts.

These dicts are the source of truth; the copies under docs/schemas/ are
generated from them (see demos/make_docs_schemas.py) and a test keeps the
two in sync.  Validation errors surface with their JSON path.
"""

from __future__ import annotations

import jsonschema

_POINT = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}

SCENE_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "pressmat scene",
    "type": "object",
    "additionalProperties": False,
    "required": ["blobs"],
    "properties": {
        "blobs": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["label", "center_cm", "amplitude_kpa", "scales_cm"],
                "properties": {
                    "label": {"type": "string"},
                    "center_cm": _POINT,
                    "amplitude_kpa": {"type": "number", "minimum": 0},
                    "scales_cm": {
                        "type": "array",
                        "items": {"type": "number", "exclusiveMinimum": 0},
                        "minItems": 2, "maxItems": 2,
                    },
                    "rotation_rad": {"type": "number"},
                },
            },
        },
        "noise_sigma_kpa": {"type": "number", "minimum": 0},
        "sway": {
            "type": "object",
            "additionalProperties": False,
            "required": ["amplitude_cm", "frequency_hz"],
            "properties": {
                "amplitude_cm": {"type": "number", "minimum": 0},
                "frequency_hz": {"type": "number", "minimum": 0},
            },
        },
        "body_weight_kg": {"type": "number", "exclusiveMinimum": 0},
    },
}

ROI_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "pressmat region set (GeoJSON-style)",
    "type": "object",
    "required": ["type", "features"],
    "properties": {
        "type": {"const": "FeatureCollection"},
        "features": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["type", "properties", "geometry"],
                "properties": {
                    "type": {"const": "Feature"},
                    "properties": {
                        "type": "object",
                        "required": ["label"],
                        "properties": {"label": {"type": "string"}},
                    },
                    "geometry": {
                        "type": "object",
                        "required": ["type", "coordinates"],
                        "properties": {
                            "type": {"const": "Polygon"},
                            "coordinates": {
                                "type": "array",
                                "items": {"type": "array", "items": _POINT, "minItems": 3},
                                "minItems": 1,
                            },
                        },
                    },
                },
            },
        },
    },
}

CURVE_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "pressmat calibration curve",
    "type": "object",
    "required": ["method", "knots"],
    "properties": {
        "method": {"const": "monotone-pchip"},
        "knots": {"type": "array", "items": _POINT, "minItems": 2},
        "valid_range": {"type": "array", "items": {"type": "number"},
                        "minItems": 2, "maxItems": 2},
        "divider": {
            "type": "object",
            "required": ["r_fixed_ohm", "v_supply_v", "adc_bits", "adc_vref_v"],
            "properties": {
                "r_fixed_ohm": {"type": "number", "exclusiveMinimum": 0},
                "v_supply_v": {"type": "number", "exclusiveMinimum": 0},
                "adc_bits": {"type": "integer"},
                "adc_vref_v": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
}

MODEL_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "pressmat sensor model",
    "type": "object",
    "additionalProperties": False,
    "required": ["r_min_ohm", "r_max_ohm", "p_half_kpa", "exponent",
                 "hysteresis_band", "blend_rate_per_kpa"],
    "properties": {
        "r_min_ohm": {"type": "number", "exclusiveMinimum": 0},
        "r_max_ohm": {"type": "number", "exclusiveMinimum": 0},
        "p_half_kpa": {"type": "number", "exclusiveMinimum": 0},
        "exponent": {"type": "number", "exclusiveMinimum": 0},
        "hysteresis_band": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        "blend_rate_per_kpa": {"type": "number", "exclusiveMinimum": 0},
    },
}

ALL_SCHEMAS = {
    "scene.schema.json": SCENE_SCHEMA,
    "roi.schema.json": ROI_SCHEMA,
    "curve.schema.json": CURVE_SCHEMA,
    "model.schema.json": MODEL_SCHEMA,
}


class SchemaError(ValueError):
    pass


def validate(doc: dict, schema: dict, source: str = "input") -> None:
    """Validate and re-raise with the offending JSON path in the message."""
    validator = jsonschema.Draft7Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise SchemaError(f"{source}: {err.json_path}: {err.message}")
