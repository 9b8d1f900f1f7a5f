"""JSON wire formats.

Matrices: {"dim": d, "entries": [[[re, im], ...], ...]} row-major; a real
entry may be written [re] and readers accept both.  Complex vectors use the
same per-entry convention.  Maps are either builtin-tagged or carry the raw
d^2 x d^2 action in canonical-basis order.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from . import hermitian as hm
from .asd import BlockGroupRep, CommutativeGroupRep, PureStateFamily
from .bridge import Decomposition
from .errors import InvalidSuperMap, NpovmError
from .measurement import Measurement
from .supermap import (
    Subspace,
    SuperMap,
    identity_map,
    partial_transpose_map,
    subspace_from_span,
    transpose_map,
    unitary_conjugation_map,
)


class ParseError(NpovmError):
    """Input JSON does not match the wire format."""


def _entry_to_complex(entry: Any) -> complex:
    if isinstance(entry, (int, float)):
        return complex(entry)
    if isinstance(entry, list) and len(entry) in (1, 2):
        re = float(entry[0])
        im = float(entry[1]) if len(entry) == 2 else 0.0
        return complex(re, im)
    raise ParseError(f"bad complex entry: {entry!r}")


def _complex_to_entry(z: complex) -> list[float]:
    if z.imag == 0.0:
        return [float(z.real)]
    return [float(z.real), float(z.imag)]


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        dim = int(obj["dim"])
        rows = obj["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"matrix object needs 'dim' and 'entries': {exc}") from exc
    if len(rows) != dim or any(len(r) != dim for r in rows):
        raise ParseError(f"entries are not {dim}x{dim}")
    out = np.array([[_entry_to_complex(e) for e in row] for row in rows], dtype=complex)
    return out


def matrix_to_json(a: np.ndarray) -> dict:
    return {
        "dim": int(a.shape[0]),
        "entries": [[_complex_to_entry(complex(z)) for z in row] for row in a],
    }


def vector_from_json(entries: list) -> np.ndarray:
    return np.array([_entry_to_complex(e) for e in entries], dtype=complex)


def vector_to_json(v: np.ndarray) -> list:
    return [_complex_to_entry(complex(z)) for z in v]


def supermap_from_json(obj: dict) -> SuperMap:
    if "builtin" in obj:
        name = obj["builtin"]
        if name == "identity":
            built = identity_map(int(obj["dim"]))
        elif name == "transpose":
            built = transpose_map(int(obj["dim"]))
        elif name == "partial_transpose":
            da, db = (int(x) for x in obj["dims"])
            built = partial_transpose_map(da, db)
        elif name == "unitary_conjugation":
            built = unitary_conjugation_map(matrix_from_json_or_rows(obj["unitary"]))
        else:
            raise ParseError(f"unknown builtin map {name!r}")
        if "action" in obj:
            action = np.asarray(obj["action"], dtype=float)
            if action.shape != built.action.shape or np.max(np.abs(action - built.action)) > 1e-12:
                raise InvalidSuperMap("stored action disagrees with the builtin tag")
        return built
    if "action" in obj:
        return SuperMap(int(obj["dim"]), np.asarray(obj["action"], dtype=float))
    raise ParseError("map object needs 'builtin' or 'action'")


def matrix_from_json_or_rows(obj: Any) -> np.ndarray:
    """Accept either the tagged matrix object or bare nested rows."""
    if isinstance(obj, dict):
        return matrix_from_json(obj)
    rows = obj
    return np.array([[_entry_to_complex(e) for e in row] for row in rows], dtype=complex)


def supermap_to_json(f: SuperMap) -> dict:
    if f.tag == "identity":
        return {"dim": f.dim, "builtin": "identity"}
    if f.tag == "transpose":
        return {"dim": f.dim, "builtin": "transpose"}
    if f.tag and f.tag.startswith("partial_transpose("):
        da, db = (int(x) for x in f.tag[len("partial_transpose(") : -1].split(","))
        return {"dim": f.dim, "builtin": "partial_transpose", "dims": [da, db]}
    return {"dim": f.dim, "action": [[float(x) for x in row] for row in f.action]}


def measurement_from_json(obj: dict) -> Measurement:
    try:
        outcomes = obj["outcomes"]
        pairs = [(str(o["label"]), matrix_from_json(o["matrix"])) for o in outcomes]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"measurement object needs 'outcomes' with label/matrix: {exc}") from exc
    return Measurement.create(pairs)


def measurement_to_json(m: Measurement) -> dict:
    return {
        "dim": m.dim,
        "outcomes": [
            {"label": lbl, "matrix": matrix_to_json(e)} for lbl, e in zip(m.labels, m.effects)
        ],
    }


def subspace_from_json(obj: dict) -> Subspace:
    try:
        dim = int(obj["dim"])
        mats = [matrix_from_json_or_rows(x) for x in obj["span"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"subspace object needs 'dim' and 'span': {exc}") from exc
    return subspace_from_span(dim, [hm.as_hermitian(m) for m in mats])


def subspace_to_json(k: Subspace) -> dict:
    return {"dim": k.dim, "span": [matrix_to_json(b) for b in k.basis]}


def decomposition_from_json(obj: dict) -> Decomposition:
    try:
        dim = int(obj["dim"])
        raw_terms = obj["terms"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"decomposition object needs 'dim' and 'terms': {exc}") from exc
    terms: dict[str, list] = {}
    for label, pairs in raw_terms.items():
        try:
            terms[str(label)] = [
                (supermap_from_json(p["map"]), hm.as_hermitian(matrix_from_json(p["s"])))
                for p in pairs
            ]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"term for outcome {label!r} malformed: {exc}") from exc
    return Decomposition(dim=dim, labels=tuple(terms), terms=terms)


def decomposition_to_json(dec: Decomposition) -> dict:
    return {
        "dim": dec.dim,
        "terms": {
            lbl: [{"map": supermap_to_json(f), "s": matrix_to_json(s)} for f, s in dec.terms[lbl]]
            for lbl in dec.labels
        },
    }


def family_from_json(obj: dict) -> PureStateFamily:
    try:
        dim = int(obj["dim"])
        vectors = [vector_from_json(v) for v in obj["states"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"family object needs 'dim' and 'states': {exc}") from exc
    if any(v.shape != (dim,) for v in vectors):
        raise ParseError("state vectors must match 'dim'")
    return PureStateFamily.from_vectors(vectors)


def commutative_rep_from_json(obj: dict) -> CommutativeGroupRep:
    try:
        return CommutativeGroupRep(
            order=int(obj["order"]),
            characters=np.array(
                [[_entry_to_complex(e) for e in row] for row in obj["characters"]], dtype=complex
            ),
            amplitudes=vector_from_json(obj["amplitudes"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"commutative rep needs order/characters/amplitudes: {exc}") from exc


def block_rep_from_json(obj: dict) -> BlockGroupRep:
    try:
        return BlockGroupRep(
            order=int(obj["order"]),
            mult_table=np.asarray(obj["mult_table"], dtype=int),
            irreps=[
                np.array(
                    [[[_entry_to_complex(e) for e in row] for row in mat] for mat in irrep],
                    dtype=complex,
                )
                for irrep in obj["irreps"]
            ],
            blocks=[matrix_from_json_or_rows(b) for b in obj["blocks"]],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"block rep needs order/mult_table/irreps/blocks: {exc}") from exc
