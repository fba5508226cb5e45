"""JSON file formats for complexes, protocols and weight systems.

Complex file:
    { "name": str, "dimension": d,
      "cells": [[ids dim 0], ..., [ids dim d]],
      "boundary": [ {"cell": id, "face": id, "coeff": int}, ... ],
      "atoms": [ {"cell": id, "face": id, "signs": [1, -1, ...]}, ... ] }
Omitted boundary entries are zero; omitted atoms trigger the default
decomposition (|b| atoms of sign(b)).

Protocol file:
    { "tau_D": real, "beta": real,
      "cells": { "<cell-id>": {"kind": "constant", "value": v}
                             | {"kind": "builtin-sin", "offset": o,
                                "amplitude": a, "phase": p}
                             | {"kind": "spline", "samples": [...]} } }

Weights file (static): { "E": {id: value}, "W": {id: value} }.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction

from .complexes import CWComplex, Chain, default_atoms, make_complex
from .errors import DataError, ProtocolError
from .protocols import (
    ConstantDriver,
    DrivingProtocol,
    SinDriver,
    SplineDriver,
    WeightSystem,
)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def sha256_of(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def fmt_float(x: float) -> str:
    """Locale-independent, 17 significant digits (round-trip safe)."""
    return format(float(x), ".17g")


def complex_to_dict(c: CWComplex) -> dict:
    boundary = []
    for k in range(1, c.dimension + 1):
        for j, face in enumerate(c.cells[k - 1]):
            for a, cell in enumerate(c.cells[k]):
                coeff = c.boundary[k - 1][j][a]
                if coeff:
                    boundary.append({"cell": cell, "face": face, "coeff": coeff})
    out = {
        "name": c.name,
        "dimension": c.dimension,
        "cells": [list(layer) for layer in c.cells],
        "boundary": boundary,
    }
    if c.atoms is not None:
        out["atoms"] = [
            {"cell": cell, "face": face, "signs": list(signs)}
            for (cell, face), signs in sorted(c.atoms.items())
        ]
    return out


def complex_from_dict(data: dict) -> CWComplex:
    try:
        name = data["name"]
        dim = int(data["dimension"])
        cells = data["cells"]
    except (KeyError, TypeError) as exc:
        raise DataError(f"complex file missing field: {exc}") from None
    layer_of = {}
    for k, layer in enumerate(cells):
        for cid in layer:
            layer_of.setdefault(cid, []).append(k)
    entries: dict[int, dict[tuple[str, str], int]] = {}
    for item in data.get("boundary", []):
        cell, face, coeff = item["cell"], item["face"], int(item["coeff"])
        dims = [
            k
            for k in layer_of.get(cell, [])
            if k >= 1 and (k - 1) in layer_of.get(face, [])
        ]
        if not dims:
            raise DataError(
                f"boundary entry references cells in no adjacent dimensions: "
                f"{cell!r} over {face!r}"
            )
        if len(dims) > 1:
            raise DataError(
                f"ambiguous boundary entry ({cell!r}, {face!r}): ids appear in "
                "multiple dimensions"
            )
        entries.setdefault(dims[0], {})[(cell, face)] = coeff
    atoms = None
    if "atoms" in data:
        atoms = {
            (item["cell"], item["face"]): tuple(int(s) for s in item["signs"])
            for item in data["atoms"]
        }
    c = make_complex(name, dim, cells, entries, atoms)
    return c if c.atoms is not None else default_atoms(c)


def load_complex(path: str) -> CWComplex:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(
                f"malformed JSON in {path}: {exc.msg} at line {exc.lineno} "
                f"column {exc.colno}"
            ) from None
    return complex_from_dict(data)


def _driver_from_dict(spec: dict):
    kind = spec.get("kind")
    if kind == "constant":
        return ConstantDriver(float(spec["value"]))
    if kind == "builtin-sin":
        return SinDriver(
            offset=float(spec.get("offset", 0.0)),
            amplitude=float(spec.get("amplitude", 1.0)),
            phase=float(spec.get("phase", 0.0)),
        )
    if kind == "spline":
        return SplineDriver(tuple(float(v) for v in spec["samples"]))
    raise ProtocolError(f"unknown driver kind {kind!r}")


def protocol_to_dict(p: DrivingProtocol) -> dict:
    cells = {}
    for cid, drv in {**p.e_drivers, **p.w_drivers}.items():
        cells[cid] = drv.to_json()
    return {"tau_D": p.tau_d, "beta": p.beta, "cells": cells}


def protocol_from_dict(data: dict, c: CWComplex) -> DrivingProtocol:
    d = c.dimension
    lower = set(c.cells[d - 1])
    upper = set(c.cells[d])
    overlap = lower & upper
    if overlap:
        raise ProtocolError(
            f"cell ids shared between dimensions {d - 1} and {d}: {sorted(overlap)}"
        )
    specs = data.get("cells", {})
    e_drivers, w_drivers = {}, {}
    for cid, spec in specs.items():
        if cid in lower:
            e_drivers[cid] = _driver_from_dict(spec)
        elif cid in upper:
            w_drivers[cid] = _driver_from_dict(spec)
        else:
            raise ProtocolError(f"protocol drives unknown cell {cid!r}")
    missing = (lower - set(e_drivers)) | (upper - set(w_drivers))
    if missing:
        raise ProtocolError(f"protocol missing drivers for cells {sorted(missing)}")
    return DrivingProtocol(
        tau_d=float(data.get("tau_D", 1.0)),
        beta=float(data.get("beta", 1.0)),
        e_drivers=e_drivers,
        w_drivers=w_drivers,
    )


def load_protocol(path: str, c: CWComplex) -> DrivingProtocol:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(
                f"malformed JSON in {path}: {exc.msg} at line {exc.lineno} "
                f"column {exc.colno}"
            ) from None
    return protocol_from_dict(data, c)


def load_weights(path: str, c: CWComplex) -> WeightSystem:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    try:
        e = {cid: float(v) for cid, v in data["E"].items()}
        w = {cid: float(v) for cid, v in data["W"].items()}
    except KeyError as exc:
        raise DataError(f"weights file missing section {exc}") from None
    d = c.dimension
    missing = (set(c.cells[d - 1]) - set(e)) | (set(c.cells[d]) - set(w))
    if missing:
        raise DataError(f"weights file missing cells {sorted(missing)}")
    return WeightSystem(E=e, W=w)


def parse_cycle(text: str, c: CWComplex, dimension: int) -> Chain:
    """Parse 'f1:1,f2:-2' into an integer chain at the given dimension."""
    coeffs = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise DataError(f"bad cycle component {part!r}; expected id:coeff")
        cid, val = part.split(":", 1)
        cid = cid.strip()
        if cid not in c.cells[dimension]:
            raise DataError(f"unknown dimension-{dimension} cell {cid!r}")
        coeffs[cid] = int(val)
    return Chain(dimension, "integer", {k: v for k, v in coeffs.items() if v})


def chain_to_jsonable(chain: Chain) -> dict:
    out = {}
    for cell, val in sorted(chain.coefficients.items()):
        if isinstance(val, Fraction):
            out[cell] = (
                int(val) if val.denominator == 1 else f"{val.numerator}/{val.denominator}"
            )
        elif isinstance(val, float):
            out[cell] = val
        else:
            out[cell] = int(val)
    return out
