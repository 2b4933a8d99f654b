"""JSON schemas for every file the CLI reads or writes (see docs/formats.md)."""

from __future__ import annotations

import jsonschema

from .errors import ValidationError

COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
NUMBER_OR_COMPLEX = {"oneOf": [{"type": "number"}, COMPLEX]}
MULTI_INDEX = {"type": "array", "items": {"type": "integer"}}
RING = {"enum": ["R", "L"]}
FILTRATION = {"enum": ["total", "max"]}
SPACE = {
    "type": "object",
    "required": ["kind", "n"],
    "properties": {"kind": {"enum": ["affine", "torus"]}, "n": {"type": "integer", "minimum": 1}},
}

POLY = {
    "type": "object",
    "required": ["n", "terms"],
    "properties": {
        "ring": RING,
        "filtration": FILTRATION,
        "n": {"type": "integer", "minimum": 1},
        "degree": {"type": ["integer", "null"]},
        "terms": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["alpha", "coeff"],
                "properties": {"alpha": MULTI_INDEX, "coeff": NUMBER_OR_COMPLEX},
            },
        },
    },
}

_COORD = {
    "oneOf": [
        {"type": "object", "required": ["poly"], "properties": {"poly": {"type": "array", "items": {"type": "number"}}}},
        {
            "type": "object",
            "required": ["trig"],
            "properties": {
                "trig": {
                    "type": "object",
                    "properties": {
                        "const": {"type": "number"},
                        "cos": {"type": "array", "items": {"type": "number"}},
                        "sin": {"type": "array", "items": {"type": "number"}},
                    },
                }
            },
        },
    ]
}

BODY = {
    "oneOf": [
        {
            "type": "object",
            "required": ["kind", "point"],
            "properties": {"kind": {"const": "atomic"}, "point": {"type": "array", "items": {"type": "number"}}},
        },
        {
            "type": "object",
            "required": ["kind", "v"],
            "properties": {"kind": {"const": "trig_curve"}, "v": MULTI_INDEX},
        },
        {
            "type": "object",
            "required": ["kind", "coords"],
            "properties": {
                "kind": {"const": "affine_curve"},
                "coords": {"type": "array", "items": _COORD, "minItems": 1},
                "domain": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            },
        },
    ]
}

MEASURE_SPEC = {
    "type": "object",
    "required": ["space", "terms"],
    "properties": {
        "space": SPACE,
        "terms": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["body"],
                "properties": {
                    "weight": NUMBER_OR_COMPLEX,
                    "body": BODY,
                    "density": {"oneOf": [{"type": "null"}, POLY]},
                },
            },
        },
    },
}

MOMENT_TABLE = {
    "type": "object",
    "required": ["space", "max_degree", "entries"],
    "properties": {
        "space": SPACE,
        "ring": RING,
        "filtration": FILTRATION,
        "max_degree": {"type": "integer", "minimum": 0},
        "entries": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["alpha", "value"],
                "properties": {"alpha": MULTI_INDEX, "value": NUMBER_OR_COMPLEX},
            },
        },
        "provenance": {"enum": ["exact", "quadrature"]},
        "nodes": {"type": "integer"},
    },
}

RUN_CONFIG = {
    "type": "object",
    "required": ["command", "seed", "tol", "threads", "version"],
    "properties": {
        "command": {"type": "string"},
        "seed": {"type": "integer"},
        "tol": {"oneOf": [{"const": "auto"}, {"type": "number"}]},
        "threads": {"type": "integer", "minimum": 1},
        "version": {"type": "string"},
        "args": {"type": "object"},
    },
}


def _with_config(payload: dict) -> dict:
    out = {"type": "object", "required": ["config", *payload.get("required", [])]}
    out["properties"] = {"config": RUN_CONFIG, **payload.get("properties", {})}
    return out


BASIS = {
    "type": "object",
    "required": ["n", "degree", "ring", "filtration"],
    "properties": {"n": {"type": "integer"}, "degree": {"type": "integer"}, "ring": RING, "filtration": FILTRATION},
}

MOMENTS_OUTPUT = _with_config(MOMENT_TABLE)

MATRIX_OUTPUT = _with_config({
    "required": ["involution", "rows", "cols", "shape", "values", "singular_values"],
    "properties": {
        "involution": {"enum": ["trivial", "laurent"]},
        "shape": {"type": "array", "items": {"type": "integer"}},
        "values": {"type": "array", "items": {"type": "array", "items": COMPLEX}},
        "singular_values": {"type": "array", "items": {"type": "number"}},
    },
})

SUPPORT_OUTPUT = _with_config({
    "required": ["ideal", "constant_in_kernel", "row_degree", "rows"],
    "properties": {
        "ideal": {
            "type": "object",
            "required": ["basis", "generators", "tolerance", "singular_values", "rank"],
            "properties": {"basis": BASIS, "generators": {"type": "array", "items": POLY}},
        },
        "constant_in_kernel": {"type": "boolean"},
        "row_degree": {"type": "integer"},
        "rows": RING,
        "status": {"type": "string"},
    },
})

PRONY_OUTPUT = _with_config({
    "required": ["points", "weights", "residuals", "rank"],
    "properties": {
        "points": {"type": "array", "items": {"type": "array", "items": COMPLEX}},
        "weights": {"type": "array", "items": COMPLEX},
        "residuals": {
            "type": "object",
            "required": ["points", "weights"],
            "properties": {"points": {"type": "number"}, "weights": {"type": "number"}},
        },
        "rank": {"type": "integer", "minimum": 0},
    },
})

DENSITY_OUTPUT = _with_config({
    "required": ["ideal", "density", "curve"],
    "properties": {
        "density": {
            "type": "object",
            "required": ["delta", "quotient_basis", "coordinates", "g_bar", "gram_min_eigenvalue",
                         "residual", "holdout_residual"],
            "properties": {"g_bar": POLY, "coordinates": {"type": "array", "items": COMPLEX}},
        },
    },
})

REPRODUCE_OUTPUT = _with_config({
    "required": ["reports"],
    "properties": {
        "reports": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["example", "status", "checks"],
                "properties": {"status": {"enum": ["PASS", "FAIL"]}},
            },
        }
    },
})


def validate(obj, schema: dict, what: str):
    try:
        jsonschema.validate(obj, schema)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValidationError(f"{what}: {exc.message} (at {path})") from exc
