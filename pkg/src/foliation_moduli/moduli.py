"""Group-graph over the dual tree, its cohomology, active edges and tameness.

Vertex and edge spaces have dimension 0 or 1.  The complex is

    C0 = sum of T(D)  ->  C1 = sum over oriented edges (D, e) of T(e)  ->  C2 = sum of T(e)

with ``d0(X)_(D,e) = X_D' - X_D`` (D' the other end of e) and ``d1`` adding
the two oriented copies of each edge.  tau is ``dim ker d1 - rank d0``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .divisor import MarkedDivisor, component_name, edge_name, nodal_corners
from .linalg import bareiss_rank

RULE = "RULE"
ANNOTATION = "ANNOTATION"
DEFAULT = "DEFAULT"

TR_TRUE = "ANNOTATED_TRUE"
TR_FALSE = "ANNOTATED_FALSE"
TR_UNKNOWN = "UNKNOWN"

Edge = tuple[int, int]


class AnnotationError(ValueError):
    pass


class HypothesisError(ValueError):
    """Input does not satisfy the standing hypotheses (generalized curve, complete)."""


class ConsistencyError(RuntimeError):
    """The two routes to tau disagree."""


@dataclass(frozen=True)
class GroupGraph:
    vertices: tuple[int, ...]
    edges: tuple[Edge, ...]
    dim_v: dict
    dim_e: dict
    provenance_v: dict = field(default_factory=dict)
    provenance_e: dict = field(default_factory=dict)
    dicritical: frozenset = frozenset()
    nodal: frozenset = frozenset()

    def __post_init__(self):
        vs = set(self.vertices)
        for e in self.edges:
            if e[0] >= e[1] or e[0] not in vs or e[1] not in vs:
                raise ValueError(f"bad edge {e}")
        for v in self.vertices:
            if self.dim_v[v] not in (0, 1):
                raise ValueError("vertex dimensions must be 0 or 1")
            if v in self.dicritical and self.dim_v[v]:
                raise ValueError(f"dicritical vertex {v} must have dimension 0")
        for e in self.edges:
            if self.dim_e[e] not in (0, 1):
                raise ValueError("edge dimensions must be 0 or 1")
            if e in self.nodal and self.dim_e[e]:
                raise ValueError(f"nodal corner {e} must have dimension 0")

    @classmethod
    def from_dims(cls, edges: Iterable[Edge], dim_v: dict, dim_e: dict, dicritical=(), nodal=()) -> "GroupGraph":
        edges = tuple(sorted(tuple(sorted(e)) for e in edges))
        verts = tuple(sorted(dim_v))
        return cls(
            verts,
            edges,
            dict(dim_v),
            {tuple(sorted(e)): d for e, d in dim_e.items()},
            {v: RULE for v in verts},
            {e: RULE for e in edges},
            frozenset(dicritical),
            frozenset(tuple(sorted(e)) for e in nodal),
        )


def _parse_edge_id(text: str) -> Edge:
    parts = text.split("-")
    if len(parts) != 2 or not all(p.startswith("E") and p[1:].isdigit() for p in parts):
        raise AnnotationError(f"bad edge id {text!r}")
    a, b = int(parts[0][1:]), int(parts[1][1:])
    return (min(a, b), max(a, b))


def _parse_vertex_id(text: str) -> int:
    if not (text.startswith("E") and text[1:].isdigit()):
        raise AnnotationError(f"bad component id {text!r}")
    return int(text[1:])


def build_group_graph(d: MarkedDivisor, annotations: dict | None = None) -> GroupGraph:
    """Dimensions from the default rules, then annotation overrides.

    Vertex: 0 if dicritical (forced), else 1 when the component carries at
    most two singular points and 0 otherwise.  Edge: 0 at a nodal corner
    (forced), 0 when an end is dicritical, else 1.
    """
    annotations = annotations or {}
    verts = tuple(d.ids)
    dicritical = frozenset(c.id for c in d.components if c.dicritical)
    nodal = frozenset(nodal_corners(d))
    dim_v, prov_v = {}, {}
    for c in d.components:
        if c.dicritical:
            dim_v[c.id], prov_v[c.id] = 0, RULE
        else:
            dim_v[c.id] = 1 if len(d.points_on(c.id)) <= 2 else 0
            prov_v[c.id] = DEFAULT
    dim_e, prov_e = {}, {}
    for e in d.edges:
        if e in nodal:
            dim_e[e], prov_e[e] = 0, RULE
        elif e[0] in dicritical or e[1] in dicritical:
            dim_e[e], prov_e[e] = 0, DEFAULT
        else:
            dim_e[e], prov_e[e] = 1, DEFAULT
    for key, val in (annotations.get("vertices") or {}).items():
        v = _parse_vertex_id(key)
        if v not in dim_v:
            raise AnnotationError(f"unknown component {key}")
        if val not in (0, 1):
            raise AnnotationError(f"dimension for {key} must be 0 or 1")
        if prov_v[v] == RULE:
            continue  # dicritical: the zero rule wins
        dim_v[v], prov_v[v] = val, ANNOTATION
    for key, val in (annotations.get("edges") or {}).items():
        e = _parse_edge_id(key)
        if e not in dim_e:
            raise AnnotationError(f"unknown edge {key}")
        if val not in (0, 1):
            raise AnnotationError(f"dimension for {key} must be 0 or 1")
        if prov_e[e] == RULE:
            continue  # nodal corner: the zero rule wins
        dim_e[e], prov_e[e] = val, ANNOTATION
    return GroupGraph(verts, tuple(d.edges), dim_v, dim_e, prov_v, prov_e, dicritical, nodal)


# -- the complex -------------------------------------------------------------

@dataclass(frozen=True)
class CochainComplex:
    vertex_index: tuple[int, ...]
    oriented_index: tuple[tuple[int, Edge], ...]
    edge_index: tuple[Edge, ...]
    d0: tuple[tuple[int, ...], ...]  # rows indexed by oriented edges
    d1: tuple[tuple[int, ...], ...]  # rows indexed by edges

    @property
    def shape(self) -> tuple[int, int, int]:
        return len(self.vertex_index), len(self.oriented_index), len(self.edge_index)


def build_complex(g: GroupGraph) -> CochainComplex:
    vidx = tuple(v for v in g.vertices if g.dim_v[v])
    eidx = tuple(e for e in g.edges if g.dim_e[e])
    oidx = tuple((end, e) for e in eidx for end in e)
    vpos = {v: k for k, v in enumerate(vidx)}
    d0 = []
    for end, e in oidx:
        other = e[1] if end == e[0] else e[0]
        row = [0] * len(vidx)
        if other in vpos:
            row[vpos[other]] += 1
        if end in vpos:
            row[vpos[end]] -= 1
        d0.append(tuple(row))
    d1 = []
    for e in eidx:
        d1.append(tuple(1 if oe == e else 0 for _, oe in oidx))
    return CochainComplex(vidx, oidx, eidx, tuple(d0), tuple(d1))


def compose_is_zero(c: CochainComplex) -> bool:
    """d1 . d0 == 0, entrywise in exact integers."""
    n0 = len(c.vertex_index)
    for row in c.d1:
        for j in range(n0):
            if sum(row[k] * c.d0[k][j] for k in range(len(row))) != 0:
                return False
    return True


def h1_dimension(c: CochainComplex) -> int:
    n0, n1, _ = c.shape
    rank0 = bareiss_rank(c.d0) if n1 and n0 else 0
    rank1 = bareiss_rank(c.d1) if c.d1 and n1 else 0
    return (n1 - rank1) - rank0


# -- active edges ------------------------------------------------------------

Chooser = Callable[[Sequence[Edge]], Edge]


def _smallest(candidates: Sequence[Edge]) -> Edge:
    return min(candidates)


@dataclass(frozen=True)
class ActiveEdgeSet:
    s_vertices: tuple[int, ...]
    s_edges: tuple[Edge, ...]
    a_prime: tuple[Edge, ...]
    a_second: tuple[Edge, ...]
    oriented: tuple[tuple[int, Edge], ...]
    kappa: dict
    components: tuple[tuple[tuple[int, ...], tuple[Edge, ...]], ...]

    @property
    def tau(self) -> int:
        return len(self.a_second)


def s_components(g: GroupGraph) -> list[tuple[tuple[int, ...], tuple[Edge, ...]]]:
    """Connected components of S: a vertex and an edge touch when the vertex is an end."""
    sv = [v for v in g.vertices if g.dim_v[v]]
    se = [e for e in g.edges if g.dim_e[e]]
    parent: dict = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for v in sv:
        parent[("v", v)] = ("v", v)
    for e in se:
        parent[("e", e)] = ("e", e)
        for end in e:
            if ("v", end) in parent:
                ra, rb = find(("e", e)), find(("v", end))
                if ra != rb:
                    parent[ra] = rb
    groups: dict = {}
    for key in parent:
        groups.setdefault(find(key), []).append(key)
    out = []
    for members in groups.values():
        vs = tuple(sorted(k[1] for k in members if k[0] == "v"))
        es = tuple(sorted(k[1] for k in members if k[0] == "e"))
        out.append((vs, es))
    out.sort(key=lambda c: (c[0][:1] or (10**9,), c[1][:1]))
    return out


def active_edges(g: GroupGraph, chooser: Chooser | None = None, remove: bool = True) -> ActiveEdgeSet:
    """S, A', A'' and the oriented active set with its numbering kappa.

    ``chooser`` picks the removed element of each component (default: the
    smallest).  ``remove=False`` skips the removal and is only useful as a
    negative control.
    """
    chooser = chooser or _smallest
    sv = tuple(v for v in g.vertices if g.dim_v[v])
    se = tuple(e for e in g.edges if g.dim_e[e])
    svs = set(sv)
    a_prime = tuple(e for e in se if e[0] not in svs or e[1] not in svs)
    comps = s_components(g)
    removed = set()
    if remove:
        aps = set(a_prime)
        for vs, es in comps:
            if not vs and len(es) == 1:
                continue  # reduced to a single edge
            cands = [e for e in es if e in aps]
            if cands:
                removed.add(chooser(sorted(cands)))
    a_second = tuple(e for e in a_prime if e not in removed)
    oriented = _orient(a_second, svs)
    kappa = {de: k + 1 for k, de in enumerate(oriented)}
    return ActiveEdgeSet(sv, se, a_prime, a_second, oriented, kappa, tuple(comps))


def _orient(edges: Iterable[Edge], svs: set) -> tuple[tuple[int, Edge], ...]:
    """Attach each edge to its end outside S (the smaller one if both are)."""
    out = []
    for e in edges:
        outside = [end for end in e if end not in svs] or list(e)
        out.append((min(outside), e))
    out.sort(key=lambda de: (de[1], de[0]))
    return tuple(out)


# -- tameness and braid data -------------------------------------------------

@dataclass(frozen=True)
class NCVerdict:
    holds: bool
    witness: tuple[int, ...] = ()
    chains: tuple[tuple[int, ...], ...] = ()


def _order_chain(members: set, d: MarkedDivisor) -> tuple[int, ...]:
    nb = {v: [w for w in d.neighbours(v) if w in members] for v in members}
    ends = sorted(v for v in members if len(nb[v]) <= 1)
    start = ends[0] if ends else min(members)
    if len(ends) >= 2 and ends[-1] < start:
        start = ends[-1]
    out = [start]
    prev = None
    while True:
        nxt = [w for w in nb[out[-1]] if w != prev and w not in out]
        if not nxt:
            break
        prev = out[-1]
        out.append(min(nxt))
    if len(out) != len(members):
        # not a path: list remaining members in id order after the walk
        out += sorted(members - set(out))
    return tuple(out)


def check_no_chain(d: MarkedDivisor) -> NCVerdict:
    """Every connected piece of the invariant part must contain a component
    whose number of singular points differs from 2."""
    inv = [c.id for c in d.components if not c.dicritical]
    seen: set = set()
    bad = []
    for start in inv:
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for w in d.neighbours(v):
                if w not in comp and not d.component(w).dicritical:
                    comp.add(w)
                    stack.append(w)
        seen |= comp
        if all(len(d.points_on(v)) == 2 for v in comp):
            bad.append(_order_chain(comp, d))
    bad.sort()
    return NCVerdict(not bad, bad[0] if bad else (), tuple(bad))


def braid_factors(d: MarkedDivisor) -> dict[int, int]:
    """Distinguished points per component: its singular points plus its regular corners."""
    out = {}
    for c in d.components:
        n = len(d.points_on(c.id))
        n += sum(1 for w in d.neighbours(c.id) if d.corner_point(tuple(sorted((c.id, w)))) is None)
        out[c.id] = n
    return out


# -- skeleton ----------------------------------------------------------------

ASSUMPTIONS = (
    "vertex dimension of an invariant component defaults to 1 when it carries at most two singular points, else 0",
    "corners on a dicritical component default to dimension 0",
    "group D and lattice rank p are not computed",
    "transverse rigidity is taken from annotations only",
)


@dataclass(frozen=True)
class ModuliSkeleton:
    tau: int
    tau_cohomology: int
    tau_active: int
    active: ActiveEdgeSet
    nc: NCVerdict
    tr: str
    braid: dict
    graph: GroupGraph
    group_d: str = "UNKNOWN"
    lattice_rank: str = "UNKNOWN"
    assumptions: tuple[str, ...] = ASSUMPTIONS

    def to_dict(self) -> dict:
        g = self.graph
        return {
            "tau": self.tau,
            "tau_routes": {"cohomology": self.tau_cohomology, "active_edges": self.tau_active},
            "active_edges": [
                {"vertex": component_name(v), "edge": edge_name(e), "kappa": self.active.kappa[(v, e)]}
                for v, e in self.active.oriented
            ],
            "nc": {"holds": self.nc.holds, "witness": [component_name(v) for v in self.nc.witness]},
            "tr": self.tr,
            "braid_factors": {component_name(k): v for k, v in sorted(self.braid.items())},
            "dimensions": {
                "vertices": {
                    component_name(v): {"dim": g.dim_v[v], "provenance": g.provenance_v[v]} for v in g.vertices
                },
                "edges": {
                    edge_name(e): {"dim": g.dim_e[e], "provenance": g.provenance_e[e]} for e in g.edges
                },
            },
            "group_D": self.group_d,
            "lattice_rank_p": self.lattice_rank,
            "assumptions": list(self.assumptions),
        }


def _tr_verdict(annotations: dict) -> str:
    tr = annotations.get("tr")
    if tr is None:
        return TR_UNKNOWN
    if tr is True:
        return TR_TRUE
    if tr is False:
        return TR_FALSE
    raise AnnotationError("tr must be true, false or null")


def _override_active(annotations: dict, g: GroupGraph) -> tuple[Edge, ...] | None:
    raw = annotations.get("active")
    if raw is None:
        return None
    out = []
    for key in raw:
        e = _parse_edge_id(key)
        if e not in g.dim_e:
            raise AnnotationError(f"unknown edge {key}")
        out.append(e)
    return tuple(sorted(set(out)))


def moduli_skeleton(d: MarkedDivisor, annotations: dict | None = None) -> ModuliSkeleton:
    annotations = annotations or {}
    if d.status != "COMPLETE":
        raise HypothesisError(f"reduction status is {d.status}, not COMPLETE")
    if not d.generalized_curve:
        raise HypothesisError("the reduced foliation has a saddle-node: not a generalized curve")
    g = build_group_graph(d, annotations)
    cx = build_complex(g)
    if not compose_is_zero(cx):
        raise ConsistencyError("d1 . d0 is not zero")
    tau_h = h1_dimension(cx)
    act = active_edges(g)
    forced = _override_active(annotations, g)
    if forced is not None:
        oriented = _orient(forced, set(act.s_vertices))
        act = ActiveEdgeSet(
            act.s_vertices, act.s_edges, act.a_prime, forced, oriented,
            {de: k + 1 for k, de in enumerate(oriented)}, act.components,
        )
    if tau_h != act.tau:
        raise ConsistencyError(f"tau from cohomology is {tau_h} but the active edge set has {act.tau} elements")
    return ModuliSkeleton(
        tau=tau_h,
        tau_cohomology=tau_h,
        tau_active=act.tau,
        active=act,
        nc=check_no_chain(d),
        tr=_tr_verdict(annotations),
        braid=braid_factors(d),
        graph=g,
    )


# -- random instances for property checks -----------------------------------

def random_tree(rng: random.Random, n: int) -> list[Edge]:
    return [(rng.randrange(k), k) for k in range(1, n)]


def random_group_graph(rng: random.Random, max_vertices: int = 12) -> GroupGraph:
    """Random tree with random 0/1 dimensions obeying the two zero rules."""
    n = rng.randint(1, max_vertices)
    edges = [tuple(sorted(e)) for e in random_tree(rng, n)]
    dicritical = {v for v in range(n) if rng.random() < 0.15}
    nodal = {e for e in edges if rng.random() < 0.15}
    dim_v = {v: 0 if v in dicritical else rng.randint(0, 1) for v in range(n)}
    dim_e = {e: 0 if e in nodal else rng.randint(0, 1) for e in edges}
    return GroupGraph.from_dims(edges, dim_v, dim_e, dicritical, nodal)
