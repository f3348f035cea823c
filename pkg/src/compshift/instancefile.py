"""JSON instance files: ``vertices``, ``map``, ``measure`` and optional ``tails``.

Rationals are strings ``"p/q"``; floats are rejected.  Every error names
the offending field, and decode errors carry the line and column.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .exactmath import Polynomial, format_rational, parse_rational
from .graph import FunctionalGraph, GraphError, validate
from .shift import InstanceError, MeasuredGraph, TailTemplate, split_components


class InstanceFileError(ValueError):
    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location


@dataclass(frozen=True)
class Instance:
    graph: FunctionalGraph
    measure: dict[str, Fraction]
    tails: tuple[TailTemplate, ...]

    def components(self) -> list[MeasuredGraph]:
        try:
            return split_components(self.graph, self.measure, self.tails)
        except (InstanceError, GraphError) as exc:
            raise InstanceFileError("instance", str(exc)) from exc


def _rational(value: Any, where: str) -> Fraction:
    if not isinstance(value, str):
        raise InstanceFileError(where, f"expected a \"p/q\" string, got {json.dumps(value)}")
    try:
        return parse_rational(value)
    except ValueError as exc:
        raise InstanceFileError(where, str(exc)) from exc


def parse_instance(doc: Any) -> Instance:
    if not isinstance(doc, dict):
        raise InstanceFileError("document", "top level must be an object")
    unknown = set(doc) - {"vertices", "map", "measure", "tails"}
    if unknown:
        raise InstanceFileError(sorted(unknown)[0], "unknown field")
    for key in ("vertices", "map", "measure"):
        if key not in doc:
            raise InstanceFileError(key, "required field missing")
    vertices = doc["vertices"]
    if not isinstance(vertices, list):
        raise InstanceFileError("vertices", "must be a list of labels")
    for i, v in enumerate(vertices):
        if not isinstance(v, str):
            raise InstanceFileError(f"vertices[{i}]", "label must be a string")
    image = doc["map"]
    if not isinstance(image, dict):
        raise InstanceFileError("map", "must be an object label -> label")
    try:
        graph = validate(vertices, image)
    except GraphError as exc:
        where = "vertices" if "label" in str(exc) else "map"
        raise InstanceFileError(where, str(exc)) from exc

    raw_measure = doc["measure"]
    if not isinstance(raw_measure, dict):
        raise InstanceFileError("measure", "must be an object label -> \"p/q\"")
    measure = {}
    for v, val in raw_measure.items():
        where = f"measure.{v}"
        if v not in graph.image:
            raise InstanceFileError(where, "unknown vertex")
        q = _rational(val, where)
        if q <= 0:
            raise InstanceFileError(where, "measure must be positive")
        measure[v] = q
    for v in graph.vertices:
        if v not in measure:
            raise InstanceFileError(f"measure.{v}", "missing")

    tails = []
    raw_tails = doc.get("tails", [])
    if not isinstance(raw_tails, list):
        raise InstanceFileError("tails", "must be a list")
    for i, t in enumerate(raw_tails):
        where = f"tails[{i}]"
        if not isinstance(t, dict) or set(t) != {"attach", "mu_poly"}:
            raise InstanceFileError(where, "needs exactly the fields attach and mu_poly")
        if not isinstance(t["mu_poly"], list) or not t["mu_poly"]:
            raise InstanceFileError(f"{where}.mu_poly", "must be a non-empty list of coefficients")
        coeffs = [_rational(c, f"{where}.mu_poly[{j}]") for j, c in enumerate(t["mu_poly"])]
        tails.append(TailTemplate(t["attach"], Polynomial(coeffs)))
    try:
        split_components(graph, measure, tails)
    except (InstanceError, GraphError) as exc:
        raise InstanceFileError("tails" if "tail" in str(exc) else "instance", str(exc)) from exc
    return Instance(graph, measure, tuple(tails))


def loads_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFileError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from exc
    return parse_instance(doc)


def load_instance(path: str) -> Instance:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InstanceFileError(path, exc.strerror or str(exc)) from exc
    return loads_instance(text)


def instance_document(mg: MeasuredGraph | Instance) -> dict:
    graph = mg.graph
    return {
        "vertices": list(graph.vertices),
        "map": {v: graph.image[v] for v in graph.vertices},
        "measure": {v: format_rational(mg.measure[v]) for v in graph.vertices},
        "tails": [
            {"attach": t.attach, "mu_poly": [format_rational(c) for c in t.mu_poly.coeffs] or ["0"]}
            for t in mg.tails
        ],
    }


def dumps_instance(mg: MeasuredGraph | Instance) -> str:
    return json.dumps(instance_document(mg), indent=2) + "\n"
