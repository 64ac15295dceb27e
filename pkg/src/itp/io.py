"""JSON instance and solution files."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .core import ItpInstance, validate_instance
from .exceptions import DimensionMismatch, InvalidInterval, NegativeBound, ParseError

REQUIRED = ("mode", "m", "n", "cost", "supply", "demand")


def _load_json(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: {exc.msg}", kind="Malformed", line=exc.lineno) from None


def instance_from_dict(doc, source: str = "<document>") -> ItpInstance:
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be an object")
    for key in REQUIRED:
        if key not in doc:
            raise ParseError(f"{source}: missing {key!r}", kind="MissingField", field=key)
    for key in ("m", "n"):
        if not isinstance(doc[key], int) or isinstance(doc[key], bool):
            raise ParseError(f"{source}: {key} must be an integer", kind="InvalidValue", field=key)
    if str(doc["mode"]).lower() not in ("le", "eq"):
        raise ParseError(f"{source}: mode must be 'le' or 'eq'", kind="InvalidValue", field="mode")
    for key in ("cost", "supply", "demand"):
        _check_numbers(doc[key], key, source)
    try:
        return validate_instance({k: doc[k] for k in (*REQUIRED, "name") if k in doc})
    except InvalidInterval as exc:
        raise ParseError(str(exc), kind="InvalidInterval", field=str(exc).split(":")[0]) from None
    except NegativeBound as exc:
        raise ParseError(str(exc), kind="NegativeBound", field=str(exc).split(":")[0]) from None
    except DimensionMismatch as exc:
        raise ParseError(str(exc), kind="DimensionMismatch", field=str(exc).split(":")[0]) from None


def _check_numbers(value, field, source):
    if isinstance(value, list):
        for k, item in enumerate(value):
            _check_numbers(item, f"{field}[{k}]", source)
    elif isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ParseError(f"{source}: {value!r} is not a finite number", kind="InvalidValue", field=field)


def parse_instance(path) -> ItpInstance:
    """Read an instance file; errors carry the offending field or line."""
    path = Path(path)
    return instance_from_dict(_load_json(path.read_text(), str(path)), str(path))


def loads_instance(text: str) -> ItpInstance:
    return instance_from_dict(_load_json(text, "<string>"))


def _num(x: float):
    x = float(x)
    return int(x) if x.is_integer() and abs(x) < 2 ** 53 else x


def instance_to_dict(inst: ItpInstance) -> dict:
    m, n = inst.shape
    doc = {
        "mode": inst.mode.value,
        "m": m,
        "n": n,
        "cost": [[[_num(inst.cost_lo[i, j]), _num(inst.cost_hi[i, j])] for j in range(n)] for i in range(m)],
        "supply": [[_num(lo), _num(hi)] for lo, hi in zip(inst.supply_lo, inst.supply_hi)],
        "demand": [[_num(lo), _num(hi)] for lo, hi in zip(inst.demand_lo, inst.demand_hi)],
    }
    if inst.name is not None:
        doc["name"] = inst.name
    return doc


def dumps_instance(inst: ItpInstance) -> str:
    """Compact layout: one cost row per line."""
    doc = instance_to_dict(inst)
    lines = ["{"]
    lines.append(f'  "mode": {json.dumps(doc["mode"])},')
    if "name" in doc:
        lines.append(f'  "name": {json.dumps(doc["name"])},')
    lines.append(f'  "m": {doc["m"]},')
    lines.append(f'  "n": {doc["n"]},')
    rows = ",\n".join("    " + json.dumps(r) for r in doc["cost"])
    lines.append(f'  "cost": [\n{rows}\n  ],')
    lines.append(f'  "supply": {json.dumps(doc["supply"])},')
    lines.append(f'  "demand": {json.dumps(doc["demand"])}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_instance(inst: ItpInstance, path) -> None:
    Path(path).write_text(dumps_instance(inst))


def parse_solution(path, shape=None) -> np.ndarray:
    """Read a plan stored as a JSON ``m x n`` matrix."""
    path = Path(path)
    doc = _load_json(path.read_text(), str(path))
    if isinstance(doc, dict):
        if "plan" not in doc:
            raise ParseError(f"{path}: expected a matrix or an object with 'plan'", kind="MissingField", field="plan")
        doc = doc["plan"]
    _check_numbers(doc, "plan", str(path))
    x = np.array(doc, dtype=float)
    if x.ndim != 2 or (shape is not None and x.shape != tuple(shape)):
        want = f"{shape[0]}x{shape[1]}" if shape is not None else "2-D"
        raise ParseError(f"{path}: plan must be a {want} matrix, got shape {x.shape}",
                         kind="DimensionMismatch", field="plan")
    return x


def write_solution(x, path) -> None:
    x = np.asarray(x, dtype=float)
    Path(path).write_text(json.dumps([[_num(v) for v in row] for row in x]) + "\n")
