"""JSON formats for matrices, models, vectors, measures, theories and types.

Reports are written with sorted keys.  Floats are rounded to 12 significant
digits and printed in the shortest form that reads back to the rounded value,
so equal inputs always give byte-identical output.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .linalg import matrix_from_json, matrix_to_json
from .measure import AtomicMeasure
from .model import INF, Block, ModelVector, SpectralModel, is_inf
from .theory import TheoryAtom, TheoryDescriptor
from .typespace import TypeDescriptor, type_of

SCHEMA_VERSION = 1


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    r = float(f"{x:.12g}") + 0.0
    return repr(r)


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, np.generic):
        obj = obj.item()
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_encode(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """Deterministic JSON text ending in a newline."""
    return _encode(obj, indent, 0) + "\n"


def _mult_out(m):
    return "inf" if is_inf(m) else int(m)


def _mult_in(m):
    if isinstance(m, str):
        if m.lower() == "inf":
            return INF
        raise ValueError(f"bad multiplicity {m!r}")
    return m


def _num(obj: dict, key: str, default: float | None = None) -> float:
    if key not in obj:
        if default is None:
            raise ValueError(f"missing field {key!r}")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"field {key!r} must be a number")
    return float(v)


def model_to_json(M: SpectralModel) -> dict:
    out = {
        "label": M.label,
        "blocks": [
            {"re": b.lam.real, "im": b.lam.imag, "mult": _mult_out(b.mult), "allocated": int(b.allocated)}
            for b in M.blocks
        ],
    }
    if M.normality_residual:
        out["normality_residual"] = M.normality_residual
    return out


def model_from_json(obj: dict) -> SpectralModel:
    if not isinstance(obj, dict) or "blocks" not in obj:
        raise ValueError("model JSON needs a 'blocks' list")
    blocks = []
    for b in obj["blocks"]:
        mult = _mult_in(b["mult"])
        default_alloc = 0 if is_inf(mult) else mult
        blocks.append(Block(complex(_num(b, "re"), _num(b, "im", 0.0)), mult, int(b.get("allocated", default_alloc))))
    return SpectralModel(blocks, str(obj.get("label", "model")), float(obj.get("normality_residual", 0.0)))


def vector_to_json(v: ModelVector) -> dict:
    return {
        "model": v.model.label,
        "coords": [{"block": bi, "index": j, "re": c.real, "im": c.imag} for (bi, j), c in sorted(v.coords.items())],
    }


def vector_from_json(obj: dict, model: SpectralModel) -> ModelVector:
    coords = {}
    for c in obj.get("coords", []):
        key = (int(c["block"]), int(c["index"]))
        coords[key] = coords.get(key, 0j) + complex(_num(c, "re", 0.0), _num(c, "im", 0.0))
    return ModelVector(model, coords)


def measure_to_json(mu: AtomicMeasure) -> dict:
    return {"atoms": [{"re": z.real, "im": z.imag, "mass_re": m.real, "mass_im": m.imag} for z, m in mu.items()]}


def measure_from_json(obj: dict) -> AtomicMeasure:
    return AtomicMeasure(
        [(complex(_num(a, "re"), _num(a, "im", 0.0)), complex(_num(a, "mass_re"), _num(a, "mass_im", 0.0))) for a in obj.get("atoms", [])]
    )


def theory_to_json(t: TheoryDescriptor) -> dict:
    return {
        "atoms": [
            {"re": a.lam.real, "im": a.lam.imag, "mult": None if a.mult is None else _mult_out(a.mult), "isolated": a.isolated}
            for a in t.atoms
        ],
        "perfect": [list(b) for b in t.perfect],
    }


def theory_from_json(obj: dict) -> TheoryDescriptor:
    atoms = []
    for a in obj.get("atoms", []):
        iso = bool(a.get("isolated", True))
        mult = a.get("mult")
        atoms.append(TheoryAtom(complex(_num(a, "re"), _num(a, "im", 0.0)), None if mult is None else _mult_in(mult), iso))
    boxes = []
    for b in obj.get("perfect", []):
        if len(b) != 4:
            raise ValueError("perfect boxes are [x0, x1, y0, y1]")
        boxes.append(tuple(float(t) for t in b))
    return TheoryDescriptor(tuple(atoms), tuple(boxes))


def type_to_json(p: TypeDescriptor) -> dict:
    return {
        "model": model_to_json(p.model),
        "n": p.n,
        "param_label": p.param_label,
        "base": [vector_to_json(b) for b in p.base],
        "gram": [[measure_to_json(m) for m in row] for row in p.gram],
    }


def type_from_json(obj: dict) -> TypeDescriptor:
    """Read a type bundle.

    A bundle either stores a descriptor (``base`` and ``gram``) or a
    realization (``tuple`` and optional ``params``) from which the
    descriptor is computed.
    """
    model = model_from_json(obj["model"])
    if "tuple" in obj:
        tup = [vector_from_json(v, model) for v in obj["tuple"]]
        params = [vector_from_json(v, model) for v in obj.get("params", [])]
        return type_of(tup, params, label=obj.get("param_label"), model=model)
    base = tuple(vector_from_json(v, model) for v in obj["base"])
    gram = tuple(tuple(measure_from_json(m) for m in row) for row in obj["gram"])
    n = int(obj.get("n", len(base)))
    if len(base) != n or len(gram) != n or any(len(row) != n for row in gram):
        raise ValueError("type bundle has inconsistent arity")
    return TypeDescriptor(n, base, gram, str(obj.get("param_label", "∅")), model)


__all__ = [
    "SCHEMA_VERSION",
    "dumps",
    "fmt_float",
    "matrix_from_json",
    "matrix_to_json",
    "measure_from_json",
    "measure_to_json",
    "model_from_json",
    "model_to_json",
    "theory_from_json",
    "theory_to_json",
    "type_from_json",
    "type_to_json",
    "vector_from_json",
    "vector_to_json",
]
