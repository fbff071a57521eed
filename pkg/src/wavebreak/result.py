"""Result documents (JSON) and plot data (CSV) for one analysis."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import jsonschema
import numpy as np

__all__ = ["SCHEMA_VERSION", "RESULT_SCHEMA", "build_document", "validate_document", "dumps", "write_document",
           "read_document", "scale_plot_rows", "series_plot_rows", "rows_to_csv"]

SCHEMA_VERSION = "1.0"

_num = {"type": ["number", "null"]}
_int = {"type": "integer"}

_ESTIMATE = {
    "type": "object",
    "required": ["alpha", "log_beta_eq2", "intercept_L1", "param", "se_alpha"],
    "properties": {k: _num for k in ("alpha", "log_beta_eq2", "intercept_L1", "param", "se_alpha")},
}

RESULT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "wavebreak result",
    "type": "object",
    "required": ["schema_version", "config", "n", "grid", "k_hat", "tau_hat", "contrast_value", "detection",
                 "refinement", "segments", "warnings", "plot"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "config": {
            "type": "object",
            "required": ["input", "regime", "m", "kappa", "multipliers", "wavelet", "min_seg", "max_trim",
                         "gamma_method", "gamma_R", "seed"],
            "properties": {
                "input": {"type": ["string", "null"]},
                "regime": {"enum": ["lrd", "fbm"]},
                "m": {"type": "integer", "minimum": 0},
                "kappa": {"type": "number"},
                "multipliers": {"type": "array", "items": {"type": "number"}, "minItems": 3},
                "wavelet": {"type": "string"},
                "min_seg": {"type": ["integer", "null"]},
                "grid_step": {"type": ["integer", "null"]},
                "max_trim": {"type": ["number", "null"]},
                "gamma_method": {"enum": ["mc", "analytic", None]},
                "gamma_R": {"type": "integer"},
                "seed": {"type": "integer"},
                "gamma_table": {"type": ["string", "null"]},
            },
        },
        "n": _int,
        "grid": {"type": "object", "required": ["a_n", "scales", "regime", "kappa"]},
        "k_hat": {"type": "array", "items": _int},
        "tau_hat": {"type": "array", "items": {"type": "number"}},
        "contrast_value": {"type": "number"},
        "detection": {"type": "object", "required": ["segments"]},
        "refinement": {"type": "object", "required": ["v_n", "margin", "segments"]},
        "segments": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["start", "end", "usable", "param_name"],
                "properties": {
                    "start": _int,
                    "end": _int,
                    "usable": {"type": "boolean"},
                    "param_name": {"enum": ["H", "D"]},
                    "ols": _ESTIMATE,
                    "fgls": {
                        "allOf": [_ESTIMATE, {"type": "object", "required": ["ci_alpha", "ci_param"]}],
                    },
                    "T": _num,
                    "p_value": _num,
                    "df": _int,
                },
            },
        },
        "warnings": {"type": "array", "items": {"type": "string"}},
        "plot": {
            "type": "object",
            "required": ["points", "lines", "markers"],
            "properties": {
                "points": {"type": "array", "items": {
                    "type": "object", "required": ["segment", "log_scale", "Y"]}},
                "lines": {"type": "array", "items": {
                    "type": "object", "required": ["segment", "estimator", "x0", "y0", "x1", "y1"]}},
                "markers": {"type": "array", "items": {"type": "object", "required": ["k", "tau"]}},
            },
        },
    },
}


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, tuples to lists, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def _plot_payload(analysis) -> dict:
    points, lines = [], []
    for j, e in enumerate(analysis.estimates):
        if not e.usable:
            continue
        x = analysis.grid.log_scales
        for xi, yi in zip(x, e.Y):
            points.append({"segment": j, "log_scale": float(xi), "Y": float(yi)})
        for name, slope, icpt in (("ols", e.alpha_ols, e.log_beta_ols), ("fgls", e.alpha_fgls, e.log_beta_fgls)):
            lines.append({"segment": j, "estimator": name, "x0": float(x[0]), "y0": float(icpt + slope * x[0]),
                          "x1": float(x[-1]), "y1": float(icpt + slope * x[-1])})
    markers = [{"k": int(k), "tau": float(t)} for k, t in zip(analysis.detection.k_hat, analysis.tau_hat)]
    return {"points": points, "lines": lines, "markers": markers}


def build_document(analysis, echo: dict) -> dict:
    """Assemble the result document of *analysis*; *echo* is the run configuration."""
    det = analysis.detection
    doc = {
        "schema_version": SCHEMA_VERSION,
        "config": echo,
        "n": det.n,
        "grid": analysis.grid.to_dict(),
        "k_hat": list(det.k_hat),
        "tau_hat": list(det.tau_hat),
        "contrast_value": det.contrast_value,
        "detection": det.to_dict(),
        "refinement": analysis.refined.to_dict(),
        "segments": [e.to_dict() for e in analysis.estimates],
        "warnings": list(analysis.warnings),
        "plot": _plot_payload(analysis),
    }
    return _clean(doc)


def validate_document(doc: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if *doc* does not follow the schema."""
    jsonschema.validate(doc, RESULT_SCHEMA)


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_document(doc: dict, path) -> Path:
    validate_document(doc)
    path = Path(path)
    path.write_text(dumps(doc), encoding="utf-8")
    return path


def read_document(path) -> dict:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    validate_document(doc)
    return doc


def scale_plot_rows(doc: dict) -> list:
    """Rows ``segment, log_scale, Y, ols, fgls`` (fitted values at each scale)."""
    lines = {(ln["segment"], ln["estimator"]): ln for ln in doc["plot"]["lines"]}

    def fitted(seg, est, x):
        ln = lines[(seg, est)]
        slope = (ln["y1"] - ln["y0"]) / (ln["x1"] - ln["x0"])
        return ln["y0"] + slope * (x - ln["x0"])

    rows = [["segment", "log_scale", "Y", "ols", "fgls"]]
    for p in doc["plot"]["points"]:
        s, x = p["segment"], p["log_scale"]
        rows.append([s, repr(x), repr(p["Y"]), repr(fitted(s, "ols", x)), repr(fitted(s, "fgls", x))])
    return rows


def series_plot_rows(values, doc: dict) -> list:
    """Rows ``t, x, segment, change``; *change* is 1 at estimated change points."""
    ks = doc["k_hat"]
    changes = set(ks)
    seg = np.searchsorted(np.asarray(ks, dtype=int), np.arange(len(values)), side="right")
    rows = [["t", "x", "segment", "change"]]
    for t, v in enumerate(values):
        rows.append([t, repr(float(v)), int(seg[t]), int(t in changes)])
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()
