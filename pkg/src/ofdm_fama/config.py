"""JSON experiment configuration: parsing and full validation.

The JSON document mirrors SimConfig field names exactly (see
config.schema.json at the repository root).  validate_config reports every
violation it finds, each anchored to the line where the offending field
appears in the source text.
"""

import json
import re
from dataclasses import fields as dataclass_fields

import numpy as np

from .coding import CODECS
from .harness import CHANNELS, ESTIMATION_MODES, PORT_SELECTION_MODES, SimConfig
from .mcs import load_mcs_table

__all__ = ["validate_config", "load_config", "REQUIRED_FIELDS"]

REQUIRED_FIELDS = ("users", "geometry", "n_rf", "mcs_index")
COV_MODES = ("fixed", "dynamic")
STRATEGIES = ("A", "B")

_KNOWN_FIELDS = tuple(f.name for f in dataclass_fields(SimConfig))


def _field_line(text: str, name: str):
    pattern = re.compile(r'"' + re.escape(name) + r'"\s*:')
    for i, line in enumerate(text.splitlines(), start=1):
        if pattern.search(line):
            return i
    return None


class _Collector:
    def __init__(self, text: str):
        self.text = text
        self.diagnostics = []

    def add(self, field, message: str):
        line = _field_line(self.text, field) if field else None
        prefix = f"line {line}: " if line else "config: "
        self.diagnostics.append(prefix + message)


def _check_int(col, raw, name, minimum=None, maximum=None) -> bool:
    value = raw[name]
    if isinstance(value, bool) or not isinstance(value, int):
        col.add(name, f"{name} must be an integer")
        return False
    if minimum is not None and value < minimum:
        col.add(name, f"{name} must be >= {minimum}")
        return False
    if maximum is not None and value > maximum:
        col.add(name, f"{name} must be <= {maximum}")
        return False
    return True


def _check_number(col, raw, name, minimum=None) -> bool:
    value = raw[name]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        col.add(name, f"{name} must be a number")
        return False
    if not np.isfinite(value):
        col.add(name, f"{name} must be finite")
        return False
    if minimum is not None and value < minimum:
        col.add(name, f"{name} must be >= {minimum}")
        return False
    return True


def _check_choice(col, raw, name, choices) -> bool:
    value = raw[name]
    if value not in choices:
        col.add(name, f"{name} must be one of {', '.join(choices)}")
        return False
    return True


def _check_geometry(col, raw) -> bool:
    value = raw["geometry"]
    if (not isinstance(value, (list, tuple)) or len(value) != 4):
        col.add("geometry", "geometry must be [N1, N2, W1, W2]")
        return False
    n1, n2, w1, w2 = value
    ok = True
    for label, n in (("N1", n1), ("N2", n2)):
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            col.add("geometry", f"geometry {label} must be a positive integer")
            ok = False
    for label, w in (("W1", w1), ("W2", w2)):
        if isinstance(w, bool) or not isinstance(w, (int, float)) \
                or not np.isfinite(w) or w < 0:
            col.add("geometry", f"geometry {label} must be a nonnegative number")
            ok = False
    return ok


def validate_config(json_text: str):
    """Parse and validate a JSON config; returns (SimConfig | None, diagnostics).

    diagnostics is a list of human-readable strings, one per violation,
    anchored to source lines where possible; it is empty exactly when the
    config parsed cleanly.
    """
    try:
        raw = json.loads(json_text)
    except json.JSONDecodeError as e:
        return None, [f"line {e.lineno}: invalid JSON: {e.msg}"]
    if not isinstance(raw, dict):
        return None, ["config: top level must be a JSON object"]

    col = _Collector(json_text)
    for name in raw:
        if name not in _KNOWN_FIELDS:
            col.add(name, f"unknown field {name!r}")
    for name in REQUIRED_FIELDS:
        if name not in raw:
            col.add(None, f"missing required field {name!r}")

    geometry_ok = "geometry" in raw and _check_geometry(col, raw)
    n_rf_ok = "n_rf" in raw and _check_int(col, raw, "n_rf", minimum=1)
    if geometry_ok and n_rf_ok:
        n1, n2 = raw["geometry"][0], raw["geometry"][1]
        if raw["n_rf"] > n1 * n2:
            col.add("n_rf", "n_rf exceeds port count")
    if "users" in raw:
        _check_int(col, raw, "users", minimum=1)
    if "mcs_index" in raw:
        _check_int(col, raw, "mcs_index", minimum=0,
                   maximum=len(load_mcs_table()) - 1)
    if "channel" in raw:
        _check_choice(col, raw, "channel", CHANNELS)
    if "doppler_hz" in raw:
        _check_number(col, raw, "doppler_hz", minimum=0.0)
    if "snr_db" in raw:
        _check_number(col, raw, "snr_db")
    if "channel_estimation" in raw:
        _check_choice(col, raw, "channel_estimation", ESTIMATION_MODES)
    if "cov_mode" in raw:
        _check_choice(col, raw, "cov_mode", COV_MODES)
    if "codec" in raw:
        _check_choice(col, raw, "codec", CODECS)
    if "strategy" in raw:
        _check_choice(col, raw, "strategy", STRATEGIES)
    if "port_selection" in raw:
        _check_choice(col, raw, "port_selection", PORT_SELECTION_MODES)
    if "num_subframes" in raw:
        _check_int(col, raw, "num_subframes", minimum=1)
    if "master_seed" in raw:
        _check_int(col, raw, "master_seed", minimum=0)
    if (raw.get("strategy") == "B" and raw.get("port_selection") == "trained"
            and n_rf_ok and raw["n_rf"] < 2):
        col.add("n_rf", "strategy B training needs at least 2 RF chains")

    if col.diagnostics:
        return None, col.diagnostics
    clean = dict(raw)
    clean["geometry"] = tuple(raw["geometry"])
    if "snr_db" in clean:
        clean["snr_db"] = float(clean["snr_db"])
    if "doppler_hz" in clean:
        clean["doppler_hz"] = float(clean["doppler_hz"])
    return SimConfig(**clean), []


def load_config(path: str):
    """validate_config over a file's contents."""
    with open(path) as fh:
        return validate_config(fh.read())
