"""Marked exceptional divisor: components, dual tree, singular points.

The divisor is a value type.  Component ids are positive integers in
creation order and print as ``E1, E2, ...``.  Singular points keep one
Camacho-Sad index per adjacent component, so a corner carries two.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable

import jsonschema
from gmpy2 import mpq

from .field import (
    AlgElem,
    QQ,
    Tower,
    UndeterminedError,
    coerce,
    exact_sum,
    format_elem,
    is_zero,
    lower,
    rational,
)
from .linalg import leading_minors

FORMAT_VERSION = 1

REGULAR = "REGULAR"
REDUCED_NONDEGENERATE = "REDUCED_NONDEGENERATE"
SADDLE_NODE = "SADDLE_NODE"
NON_REDUCED = "NON_REDUCED"
UNDETERMINED = "UNDETERMINED"
CLASSIFICATIONS = (REGULAR, REDUCED_NONDEGENERATE, SADDLE_NODE, NON_REDUCED, UNDETERMINED)


class DivisorFormatError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def component_name(cid: int) -> str:
    return f"E{cid}"


def edge_name(edge: tuple[int, int]) -> str:
    return f"{component_name(edge[0])}-{component_name(edge[1])}"


@dataclass(frozen=True)
class SingularityRecord:
    """A singular point of the reduced foliation (or of an intermediate chart).

    ``cs`` maps each adjacent component to its Camacho-Sad index, ``None``
    when undetermined (saddle-nodes).
    """

    components: tuple[int, ...]
    classification: str
    trace: object
    det: object
    cs: tuple[tuple[int, object], ...] = ()
    nodal: bool = False
    saddle_node: bool = False
    chart: str = ""
    coordinate: object = None
    note: str = ""

    @property
    def is_corner(self) -> bool:
        return len(self.components) == 2

    def cs_along(self, cid: int):
        for c, v in self.cs:
            if c == cid:
                return v
        raise KeyError(cid)


@dataclass(frozen=True)
class Component:
    id: int
    self_intersection: int
    dicritical: bool = False

    @property
    def name(self) -> str:
        return component_name(self.id)


@dataclass(frozen=True)
class MarkedDivisor:
    components: tuple[Component, ...] = ()
    edges: tuple[tuple[int, int], ...] = ()
    points: tuple[SingularityRecord, ...] = ()
    status: str = "COMPLETE"
    generalized_curve: bool = True
    blowups: int = 0
    origin: SingularityRecord | None = None
    source: str = ""

    def __post_init__(self):
        ids = [c.id for c in self.components]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate component id")
        known = set(ids)
        for e in self.edges:
            if len(e) != 2 or e[0] >= e[1] or e[0] not in known or e[1] not in known:
                raise ValueError(f"bad edge {e}")
        for p in self.points:
            if not set(p.components) <= known:
                raise ValueError(f"point on unknown component {p.components}")

    # -- lookups -------------------------------------------------------
    def component(self, cid: int) -> Component:
        for c in self.components:
            if c.id == cid:
                return c
        raise KeyError(cid)

    @property
    def ids(self) -> list[int]:
        return [c.id for c in self.components]

    def neighbours(self, cid: int) -> list[int]:
        out = [b for a, b in self.edges if a == cid] + [a for a, b in self.edges if b == cid]
        return sorted(out)

    def points_on(self, cid: int) -> list[SingularityRecord]:
        return [p for p in self.points if cid in p.components]

    def corner_point(self, edge: tuple[int, int]) -> SingularityRecord | None:
        for p in self.points:
            if tuple(sorted(p.components)) == tuple(edge):
                return p
        return None

    def corner_kind(self, edge: tuple[int, int]) -> str:
        return "singular" if self.corner_point(edge) is not None else "regular"

    @property
    def sigma(self) -> tuple[SingularityRecord, ...]:
        """Distinguished points: singular points lying on the divisor."""
        return self.points

    def is_tree(self) -> bool:
        n = len(self.components)
        if n == 0:
            return True
        if len(self.edges) != n - 1:
            return False
        seen = {self.components[0].id}
        stack = [self.components[0].id]
        while stack:
            v = stack.pop()
            for w in self.neighbours(v):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == n


# -- intersection form --------------------------------------------------------

def intersection_matrix(d: MarkedDivisor) -> list[list[int]]:
    ids = d.ids
    index = {cid: k for k, cid in enumerate(ids)}
    m = [[0] * len(ids) for _ in ids]
    for c in d.components:
        m[index[c.id]][index[c.id]] = c.self_intersection
    for a, b in d.edges:
        m[index[a]][index[b]] = 1
        m[index[b]][index[a]] = 1
    return m


def is_negative_definite(m: list[list[int]]) -> bool:
    """Alternating signs of the leading principal minors, computed exactly."""
    for k, minor in enumerate(leading_minors(m), start=1):
        if minor == 0 or (minor > 0) != (k % 2 == 0):
            return False
    return True


# -- Camacho-Sad check --------------------------------------------------------

@dataclass(frozen=True)
class CSResidual:
    component: int
    residual: object  # None when some index is undetermined
    undetermined: bool = False


def verify_camacho_sad(d: MarkedDivisor) -> list[CSResidual]:
    """Sum of CS indices minus self-intersection, per invariant component."""
    report = []
    for c in d.components:
        if c.dicritical:
            continue
        values = [p.cs_along(c.id) for p in d.points_on(c.id)]
        if any(v is None for v in values):
            report.append(CSResidual(c.id, None, True))
            continue
        try:
            total = exact_sum(values)
        except UndeterminedError:
            report.append(CSResidual(c.id, None, True))
            continue
        report.append(CSResidual(c.id, lower(total - c.self_intersection)))
    return report


def nodal_corners(d: MarkedDivisor) -> list[tuple[int, int]]:
    out = []
    for e in d.edges:
        p = d.corner_point(e)
        if p is not None and p.nodal:
            out.append(e)
    return out


# -- serialization ------------------------------------------------------------

def _q_str(q) -> str:
    q = rational(q)
    return str(q)


def tower_to_json(t: Tower) -> list:
    return [[_coords(c) for c in level.minpoly] for level in t.chain()[1:]]


def _coords(x):
    if isinstance(x, AlgElem):
        return [_coords(c) for c in x.coeffs]
    return _q_str(x)


def elem_to_json(x):
    if x is None:
        return None
    if isinstance(x, AlgElem):
        return {"tower": tower_to_json(x.tower), "coords": _coords(x)}
    return _q_str(x)


def tower_from_json(data: list) -> Tower:
    t = QQ
    for level in data:
        coeffs = tuple(_from_coords(c, t) for c in level)
        t = Tower(t, coeffs)
    return t


def _from_coords(data, t: Tower):
    if t.level == 0:
        if not isinstance(data, str):
            raise ValueError(f"expected rational string, got {data!r}")
        return mpq(data)
    if not isinstance(data, list) or len(data) != t.rel_degree:
        raise ValueError("coordinate vector does not match tower degree")
    return AlgElem(t, tuple(_from_coords(c, t.base) for c in data))


def elem_from_json(data):
    if data is None:
        return None
    if isinstance(data, str):
        return mpq(data)
    t = tower_from_json(data["tower"])
    return _from_coords(data["coords"], t)


def _record_to_json(p: SingularityRecord) -> dict:
    return {
        "components": [component_name(c) for c in p.components],
        "classification": p.classification,
        "trace": elem_to_json(p.trace),
        "det": elem_to_json(p.det),
        "cs": [[component_name(c), elem_to_json(v)] for c, v in p.cs],
        "nodal": p.nodal,
        "saddle_node": p.saddle_node,
        "chart": p.chart,
        "coordinate": elem_to_json(p.coordinate),
        "note": p.note,
    }


def _parse_name(name: str) -> int:
    return int(name[1:])


def _record_from_json(d: dict) -> SingularityRecord:
    return SingularityRecord(
        components=tuple(_parse_name(c) for c in d["components"]),
        classification=d["classification"],
        trace=elem_from_json(d["trace"]),
        det=elem_from_json(d["det"]),
        cs=tuple((_parse_name(c), elem_from_json(v)) for c, v in d["cs"]),
        nodal=d["nodal"],
        saddle_node=d["saddle_node"],
        chart=d["chart"],
        coordinate=elem_from_json(d["coordinate"]),
        note=d["note"],
    )


def to_dict(d: MarkedDivisor) -> dict:
    return {
        "fmv": FORMAT_VERSION,
        "source": d.source,
        "status": d.status,
        "generalized_curve": d.generalized_curve,
        "blowups": d.blowups,
        "components": [
            {"id": c.name, "self_intersection": c.self_intersection, "dicritical": c.dicritical}
            for c in d.components
        ],
        "edges": [
            {"ends": [component_name(a), component_name(b)], "corner": d.corner_kind((a, b))}
            for a, b in d.edges
        ],
        "points": [_record_to_json(p) for p in d.points],
        "origin": None if d.origin is None else _record_to_json(d.origin),
    }


def to_json(d: MarkedDivisor) -> bytes:
    return (json.dumps(to_dict(d), indent=2, sort_keys=True) + "\n").encode()


def _schema() -> dict:
    text = resources.files("foliation_moduli").joinpath("data/divisor.schema.json").read_text()
    return json.loads(text)


def _json_path(parts: Iterable) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def from_dict(data) -> MarkedDivisor:
    validator = jsonschema.Draft202012Validator(_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        raise DivisorFormatError(_json_path(err.absolute_path), err.message)
    try:
        components = tuple(
            Component(_parse_name(c["id"]), c["self_intersection"], c["dicritical"])
            for c in data["components"]
        )
        edges = tuple(
            tuple(sorted(_parse_name(n) for n in e["ends"])) for e in data["edges"]
        )
        points = tuple(_record_from_json(p) for p in data["points"])
        origin = None if data["origin"] is None else _record_from_json(data["origin"])
        return MarkedDivisor(
            components=components,
            edges=edges,
            points=points,
            status=data["status"],
            generalized_curve=data["generalized_curve"],
            blowups=data["blowups"],
            origin=origin,
            source=data["source"],
        )
    except (ValueError, KeyError, ArithmeticError) as exc:
        raise DivisorFormatError("$", str(exc)) from exc


def from_json(raw: bytes | str) -> MarkedDivisor:
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise DivisorFormatError("$", f"invalid JSON ({exc.msg} at line {exc.lineno} column {exc.colno})") from exc
    return from_dict(data)


def to_dot(d: MarkedDivisor) -> str:
    lines = ["graph divisor {", "  node [shape=ellipse];"]
    for c in d.components:
        style = ", style=dashed" if c.dicritical else ""
        tag = "\\ndicritical" if c.dicritical else ""
        lines.append(f'  "{c.name}" [label="{c.name}\\n{c.self_intersection}{tag}"{style}];')
    for a, b in d.edges:
        p = d.corner_point((a, b))
        if p is None:
            label = "regular corner"
        else:
            pair = ", ".join(
                f"{component_name(cid)}: {_short(v)}" for cid, v in p.cs
            )
            label = f"CS {pair}" + (" nodal" if p.nodal else "")
        lines.append(f'  "{component_name(a)}" -- "{component_name(b)}" [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _short(v) -> str:
    return "?" if v is None else format_elem(v)


# -- synthetic divisors -------------------------------------------------------

def _saddle_record(components: tuple[int, ...], cs: tuple) -> SingularityRecord:
    # linear part diag(1, -1): trace 0, determinant -1, every index -1
    return SingularityRecord(
        components=components,
        classification=REDUCED_NONDEGENERATE,
        trace=mpq(0),
        det=mpq(-1),
        cs=cs,
        note="synthetic",
    )


def two_point_chain(n: int = 4) -> MarkedDivisor:
    """Chain E1-...-En of invariant components, each carrying exactly two
    singular points: the corners, plus one extra point on each end.

    Self-intersections are -2 and every Camacho-Sad index is -1, so the
    index theorem holds.  For ``n == 1`` the single component has two
    free points.
    """
    if n < 1:
        raise ValueError("need at least one component")
    comps = tuple(Component(k, -2) for k in range(1, n + 1))
    edges = tuple((k, k + 1) for k in range(1, n))
    m1 = mpq(-1)
    pts = [_saddle_record((1,), ((1, m1),))]
    for k in range(1, n):
        pts.append(_saddle_record((k, k + 1), ((k, m1), (k + 1, m1))))
    pts.append(_saddle_record((n,), ((n, m1),)))
    return MarkedDivisor(comps, edges, tuple(pts), source="synthetic two-point chain")


def single_component(points: int, self_intersection: int | None = None) -> MarkedDivisor:
    """One invariant component with ``points`` free singular points of index -1."""
    si = -points if self_intersection is None else self_intersection
    pts = tuple(_saddle_record((1,), ((1, mpq(-1)),)) for _ in range(points))
    return MarkedDivisor((Component(1, si),), (), pts, source=f"synthetic component with {points} points")
