"""Local models, basic vector fields and transition derivatives on jets.

The two corner models are

* ``L``: ``omega = b z2 dz1 + a z1 dz2`` with generator ``Z = z2 d/dz2``;
* ``N``: ``omega = a z2 (1 + (zeta-1) u^k) dz1 + b z1 (1 + zeta u^k) dz2`` with
  ``u = z1^a z2^b`` and ``Z = u^k / (1 + zeta u^k) z2 d/dz2``.

``Z`` is basic for ``omega`` when ``L_Z omega ^ omega = 0``; :func:`is_basic`
returns that 2-form coefficient as a jet.

A *scenario* is a tree whose edges carry a corner model, a gluing map ``phi``
and optionally an active end.  :func:`kodaira_spencer_check` builds the
family gluings in formal parameters, forms the transition
``(Phi at base)^-1 o Phi`` for every oriented edge and compares its first
derivative in each family parameter with the expected table.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from importlib import resources

import gmpy2
import jsonschema
from gmpy2 import mpq

from .field import (
    QQ,
    IncompatibleTowers,
    ReducibleError,
    Tower,
    adjoin_root,
    coerce,
    common_tower,
    format_elem,
    is_rational,
    is_zero,
    rational,
    tower_of,
)
from .jets import (
    Jet,
    JetMap,
    JetRing,
    JetVectorField,
    compose,
    flow,
    identity_map,
    inverse,
    linear_part,
    pushforward,
)
from .moduli import active_edges, random_group_graph
from .parser import ParseError, parse_polynomial

__all__ = [
    "ModelHypothesisError",
    "OrderTooLowError",
    "ScenarioError",
    "JetOneForm",
    "LocalModel",
    "minimum_order",
    "local_model",
    "is_basic",
    "glue_transition",
    "Scenario",
    "EdgeScenario",
    "KSRow",
    "KSReport",
    "load_scenario",
    "scenario_from_json",
    "kodaira_spencer_check",
    "random_scenario",
    "MATCH",
    "FAIL",
]

MATCH = "MATCH"
FAIL = "FAIL"


class ModelHypothesisError(ValueError):
    """Model parameters outside the model's hypotheses."""


class OrderTooLowError(ValueError):
    """Truncation order too low to represent the generator."""


class ScenarioError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


# -- local models ---------------------------------------------------------------

@dataclass(frozen=True)
class JetOneForm:
    """``a dz1 + b dz2``."""

    a: Jet
    b: Jet

    @property
    def ring(self) -> JetRing:
        return self.a.ring


@dataclass(frozen=True)
class LocalModel:
    kind: str
    params: dict
    omega: JetOneForm
    Z: JetVectorField

    @property
    def ring(self) -> JetRing:
        return self.omega.ring


def minimum_order(kind: str, a: int | None = None, b: int | None = None, k: int | None = None) -> int:
    """Smallest order at which the model's generator is visible and nonzero."""
    if kind == "L":
        return 1
    if kind == "N":
        return max(a * b * k + 2, (a + b) * k + 1)
    raise ValueError(f"unknown model kind {kind!r}")


def _geometric(x: Jet) -> Jet:
    """``1/(1 - x)`` for a jet without constant term."""
    ring = x.ring
    acc = ring.one
    term = ring.one
    while True:
        term = term * x
        if term.is_zero():
            return acc
        acc = acc + term


def local_model(kind: str, a, b, k: int | None = None, zeta=None, order: int = 8,
                ring: JetRing | None = None, allow_rational_ratio: bool = False) -> LocalModel:
    if kind == "L":
        a, b = coerce_scalar(a), coerce_scalar(b)
        if is_zero(a) or is_zero(b):
            raise ModelHypothesisError("a and b must be nonzero")
        if is_rational(b / a) and not allow_rational_ratio:
            raise ModelHypothesisError(
                f"ratio b/a = {format_elem(b / a)} is rational; pass allow_rational_ratio to accept it"
            )
        ring = ring or JetRing(order, tower=common_tower(tower_of(a), tower_of(b)))
        z1, z2 = ring.z1, ring.z2
        omega = JetOneForm(z2 * b, z1 * a)
        Z = JetVectorField(ring.zero, z2)
        return LocalModel("L", {"a": a, "b": b}, omega, Z)
    if kind == "N":
        for name, v in (("a", a), ("b", b), ("k", k)):
            if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
                raise ModelHypothesisError(f"{name} must be a positive integer, got {v!r}")
        if zeta is None:
            raise ModelHypothesisError("zeta is required")
        zeta = coerce_scalar(zeta)
        ring = ring or JetRing(order, tower=tower_of(zeta))
        z1, z2 = ring.z1, ring.z2
        uk = ring.monomial(a * k, b * k)
        A = z2 * a * (ring.one + uk * (zeta - 1))
        B = z1 * b * (ring.one + uk * zeta)
        Z = JetVectorField(ring.zero, uk * _geometric(uk * (-zeta)) * z2)
        return LocalModel("N", {"a": a, "b": b, "k": k, "zeta": zeta}, JetOneForm(A, B), Z)
    raise ModelHypothesisError(f"unknown model kind {kind!r}")


def is_basic(Z: JetVectorField, omega: JetOneForm, order: int | None = None) -> Jet:
    """Coefficient of ``L_Z omega ^ omega``, exact up to ``order``.

    Derivatives lose one degree, so ``order`` is at most the ring order - 1.
    """
    ring = omega.ring
    if order is None:
        order = ring.order - 1
    if order > ring.order - 1:
        raise OrderTooLowError(f"residual at order {order} needs jets of order {order + 1}")
    A, B = omega.a, omega.b
    curl = B.diff(0) - A.diff(1)
    f = A * Z.c1 + B * Z.c2
    P = f.diff(0) - curl * Z.c2
    Q = f.diff(1) + curl * Z.c1
    res = P * B - Q * A
    return Jet(ring, res.p % ring._hgen ** (order + 1))


def coerce_scalar(x):
    if isinstance(x, (int, str)) and not isinstance(x, bool):
        return rational(x)
    return x


# -- gluing --------------------------------------------------------------------

def glue_transition(phi: JetMap, X: JetVectorField, kappa_index: int, active: bool,
                    time: Jet | None = None) -> JetMap:
    """``phi o exp(X)[z_kappa]`` for an active edge, ``phi`` otherwise.

    ``time`` defaults to the ring parameter ``t<kappa_index>``.
    """
    if not phi.fixes_origin():
        raise ValueError("gluing map must fix the corner point")
    if not active:
        return JetMap(phi.f1, phi.f2)
    if time is None:
        time = phi.ring.param(f"t{kappa_index}")
    return compose(phi, flow(X, time))


# -- scenarios -----------------------------------------------------------------

@dataclass(frozen=True)
class EdgeScenario:
    ends: tuple[str, str]
    model: dict
    phi: dict
    active_at: str | None = None
    inject: str | None = None

    @property
    def label(self) -> str:
        return f"{self.ends[0]}-{self.ends[1]}"


@dataclass(frozen=True)
class Scenario:
    name: str
    vertices: tuple[str, ...]
    edges: tuple[EdgeScenario, ...]
    order: int | None = None
    base_order: int = 3
    base_points: int = 3
    seed: int = 0

    def to_dict(self) -> dict:
        out: dict = {"scenario": 1, "name": self.name}
        if self.order is not None:
            out["order"] = self.order
        out["base_order"] = self.base_order
        out["base_points"] = self.base_points
        out["seed"] = self.seed
        out["vertices"] = list(self.vertices)
        edges = []
        for e in self.edges:
            d = {"ends": list(e.ends), "active_at": e.active_at, "model": e.model, "phi": e.phi}
            if e.inject:
                d["inject"] = e.inject
            edges.append(d)
        out["edges"] = edges
        return out

    def oriented_active(self) -> list[tuple[str, EdgeScenario]]:
        act = [(e.active_at, e) for e in self.edges if e.active_at is not None]
        act.sort(key=lambda de: (de[1].ends, de[0]))
        return act

    def kappa(self) -> dict:
        return {(d, e.ends): k + 1 for k, (d, e) in enumerate(self.oriented_active())}


def _schema() -> dict:
    text = resources.files("foliation_moduli").joinpath("data/scenario.schema.json").read_text()
    return json.loads(text)


def _path(parts) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def parse_scalar(data, path: str = "$"):
    if isinstance(data, str):
        return mpq(data)
    q = mpq(data["sqrt"])
    times = mpq(data.get("times", "1"))
    plus = mpq(data.get("plus", "0"))
    if q >= 0 and gmpy2.is_square(q.numerator) and gmpy2.is_square(q.denominator):
        return plus + times * mpq(gmpy2.isqrt(q.numerator), gmpy2.isqrt(q.denominator))
    try:
        t = adjoin_root((-q, mpq(0), mpq(1)))
    except ReducibleError as exc:
        raise ScenarioError(path, f"cannot adjoin sqrt({q})") from exc
    return coerce(plus, t) + t.generator * times


def load_scenario(data) -> Scenario:
    validator = jsonschema.Draft202012Validator(_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        raise ScenarioError(_path(err.absolute_path), err.message)
    vertices = tuple(data["vertices"])
    vset = set(vertices)
    edges = []
    seen = set()
    for i, e in enumerate(data["edges"]):
        p = f"$.edges[{i}]"
        ends = tuple(e["ends"])
        for v in ends:
            if v not in vset:
                raise ScenarioError(p + ".ends", f"unknown vertex {v!r}")
        if ends[0] == ends[1]:
            raise ScenarioError(p + ".ends", "loop edge")
        key = frozenset(ends)
        if key in seen:
            raise ScenarioError(p + ".ends", "duplicate edge")
        seen.add(key)
        act = e.get("active_at")
        if act is not None and act not in ends:
            raise ScenarioError(p + ".active_at", f"{act!r} is not an end of the edge")
        edges.append(EdgeScenario(ends, e["model"], e.get("phi", {"kind": "identity"}), act, e.get("inject")))
    _check_forest(vertices, edges)
    sc = Scenario(
        name=data.get("name", ""),
        vertices=vertices,
        edges=tuple(edges),
        order=data.get("order"),
        base_order=data.get("base_order", 3),
        base_points=data.get("base_points", 3),
        seed=data.get("seed", 0),
    )
    _scenario_tower(sc)
    if sc.order is not None and sc.order < required_order(sc):
        raise ScenarioError("$.order", f"order {sc.order} is below the minimum {required_order(sc)} for these models")
    return sc


def scenario_from_json(text: str | bytes) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("$", f"invalid JSON: {exc.msg} at line {exc.lineno}") from exc
    return load_scenario(data)


def _check_forest(vertices, edges):
    parent = {v: v for v in vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for i, e in enumerate(edges):
        a, b = find(e.ends[0]), find(e.ends[1])
        if a == b:
            raise ScenarioError(f"$.edges[{i}]", "edges must form a tree (cycle found)")
        parent[a] = b


def _model_scalars(model: dict) -> list:
    if model["kind"] == "L":
        return [model["a"], model["b"]]
    return [model["zeta"]]


def _phi_scalars(phi: dict) -> list:
    if phi["kind"] == "linear":
        return [x for row in phi["matrix"] for x in row]
    return []


def _scenario_tower(sc: Scenario) -> Tower:
    t = QQ
    for i, e in enumerate(sc.edges):
        for s in _model_scalars(e.model) + _phi_scalars(e.phi):
            try:
                t = common_tower(t, tower_of(parse_scalar(s, f"$.edges[{i}]")))
            except IncompatibleTowers as exc:
                raise ScenarioError(f"$.edges[{i}]", "all square roots in a scenario must generate the same field") from exc
    return t


def required_order(sc: Scenario) -> int:
    n = 2
    for e in sc.edges:
        m = e.model
        if m["kind"] == "N":
            n = max(n, minimum_order("N", m["a"], m["b"], m["k"]))
        else:
            n = max(n, minimum_order("L"))
    return n


def _build_model(m: dict, ring: JetRing) -> LocalModel:
    if m["kind"] == "L":
        return local_model("L", parse_scalar(m["a"]), parse_scalar(m["b"]), ring=ring,
                           allow_rational_ratio=m.get("allow_rational_ratio", False))
    return local_model("N", m["a"], m["b"], m["k"], parse_scalar(m["zeta"]), ring=ring)


def _build_phi(phi: dict, ring: JetRing, path: str) -> JetMap:
    kind = phi["kind"]
    if kind == "identity":
        F = identity_map(ring)
    elif kind == "linear":
        (a, b), (c, d) = [[parse_scalar(x) for x in row] for row in phi["matrix"]]
        F = JetMap(ring.z1 * a + ring.z2 * b, ring.z1 * c + ring.z2 * d)
    else:
        comps = []
        for i, text in enumerate(phi["components"]):
            try:
                poly = parse_polynomial(text, ("z1", "z2"))
            except ParseError as exc:
                raise ScenarioError(f"{path}.components[{i}]", str(exc)) from exc
            comps.append(ring.from_terms(poly.terms))
        F = JetMap(*comps)
    if not F.fixes_origin():
        raise ScenarioError(path, "gluing map must fix the corner point")
    (a, b), (c, d) = linear_part(F)
    if (a * d - b * c).is_zero():
        raise ScenarioError(path, "gluing map is not invertible (singular linear part)")
    return F


# -- the derivative table --------------------------------------------------------

@dataclass(frozen=True)
class KSRow:
    edge: str
    source: str
    slot: int
    case: str
    expected: str
    verdict: str
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "edge": self.edge,
            "source": self.source,
            "slot": self.slot,
            "case": self.case,
            "expected": self.expected,
            "verdict": self.verdict,
            "detail": self.detail,
        }


@dataclass
class KSReport:
    name: str
    order: int
    tau: int
    kappa: dict
    base_points: list
    rows: list = field(default_factory=list)

    @property
    def all_match(self) -> bool:
        return all(r.verdict == MATCH for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "order": self.order,
            "tau": self.tau,
            "kappa": [{"source": d, "edge": f"{e[0]}-{e[1]}", "slot": k}
                      for (d, e), k in sorted(self.kappa.items(), key=lambda kv: kv[1])],
            "base_points": [[str(x) for x in p] for p in self.base_points],
            "rows": [r.to_dict() for r in self.rows],
            "all_match": self.all_match,
        }

    def format_table(self) -> str:
        head = f"{'edge':<12} {'from':<6} {'slot':>4}  {'case':<4} {'expected':<10} verdict"
        lines = [f"scenario {self.name or '-'}: order {self.order}, tau {self.tau}", head]
        for r in self.rows:
            line = f"{r.edge:<12} {r.source:<6} {r.slot:>4}  {r.case:<4} {r.expected:<10} {r.verdict}"
            if r.detail:
                line += f"  ({r.detail})"
            lines.append(line)
        return "\n".join(lines) + "\n"


def _vf_param_coefficient(F: JetMap, name: str) -> JetVectorField:
    return JetVectorField(F.f1.param_coefficient(name), F.f2.param_coefficient(name))


def _evaluate(V: JetVectorField, values: dict) -> JetVectorField:
    return JetVectorField(V.c1.evaluate_params(values), V.c2.evaluate_params(values))


def _random_rational(rng: random.Random) -> mpq:
    return mpq(rng.randint(-9, 9), rng.randint(1, 5))


def kodaira_spencer_check(sc: Scenario) -> KSReport:
    """Derivative of every oriented-edge transition in every family parameter."""
    order = sc.order if sc.order is not None else max(required_order(sc), 4)
    if order < required_order(sc):
        raise OrderTooLowError(f"order {order} is below the minimum {required_order(sc)}")
    kappa = sc.kappa()
    tau = len(kappa)
    s_names = [f"s{k}" for k in range(1, tau + 1)]
    w_names = [f"w{k}" for k in range(1, tau + 1)]
    ring = JetRing(order, s_names + w_names, [sc.base_order] * tau + [1] * tau, _scenario_tower(sc))
    rng = random.Random(sc.seed)
    points = [[_random_rational(rng) for _ in range(tau)] for _ in range(sc.base_points)]
    report = KSReport(sc.name, order, tau, kappa, points)
    ident = identity_map(ring)
    for i, e in enumerate(sc.edges):
        X = _build_model(e.model, ring).Z
        phi = _build_phi(e.phi, ring, f"$.edges[{i}].phi")
        phis = {e.ends[0]: phi, e.ends[1]: inverse(phi)}
        gluings = {}
        if e.active_at is None:
            for d in e.ends:
                gluings[d] = phis[d]
        else:
            k = kappa[(e.active_at, e.ends)]
            time = ring.param(s_names[k - 1]) + ring.param(w_names[k - 1])
            if e.inject == "flip_sign":
                time = -time
            fwd = glue_transition(phis[e.active_at], X, k, True, time=time)
            other = e.ends[1] if e.active_at == e.ends[0] else e.ends[0]
            gluings[e.active_at] = fwd
            gluings[other] = inverse(fwd)
        for d in e.ends:
            full = gluings[d]
            base = full.map(lambda f: f.drop_params(w_names))
            upsilon = compose(inverse(base), full)
            if tau == 0:
                ok = upsilon == ident
                report.rows.append(KSRow(e.label, d, 0, "iii", "id", MATCH if ok else FAIL,
                                         "" if ok else "transition is not the identity"))
                continue
            for k in range(1, tau + 1):
                if e.active_at == d and kappa[(d, e.ends)] == k:
                    case, label, expected = "i", "+X", X
                elif e.active_at is not None and e.active_at != d and kappa[(e.active_at, e.ends)] == k:
                    case, label = "ii", "-phi_*X"
                    expected = -pushforward(phis[e.active_at], X)
                else:
                    case = "iii" if e.active_at is None else ("i" if e.active_at == d else "ii")
                    label, expected = "0", JetVectorField(ring.zero, ring.zero)
                deriv = _vf_param_coefficient(upsilon, w_names[k - 1])
                problems = []
                if deriv != expected:
                    problems.append("formal derivative differs")
                for p in points:
                    vals = dict(zip(s_names, p))
                    if _evaluate(deriv, vals) != expected:
                        problems.append("base point " + ",".join(str(x) for x in p))
                        break
                report.rows.append(KSRow(e.label, d, k, case, label, FAIL if problems else MATCH,
                                         "; ".join(problems)))
    return report


# -- random scenarios ----------------------------------------------------------

_SQRTS = ("2", "3", "5")


def _random_model(rng: random.Random, radicand: str) -> dict:
    if rng.random() < 0.5:
        return {"kind": "L", "a": str(rng.randint(1, 3)),
                "b": {"sqrt": radicand, "times": str(rng.choice([1, -1, 2]))}}
    return {"kind": "N", "a": rng.randint(1, 2), "b": rng.randint(1, 2), "k": 1,
            "zeta": str(_random_rational(rng))}


def _random_phi(rng: random.Random) -> dict:
    roll = rng.random()
    if roll < 0.3:
        return {"kind": "identity"}
    if roll < 0.65:
        c = _random_rational(rng)
        d = mpq(rng.choice([1, 2, -1, 3]), rng.randint(1, 2))
        return {"kind": "linear", "matrix": [["1", str(c)], ["0", str(d)]]}
    c = _random_rational(rng)
    d = _random_rational(rng)
    return {"kind": "polynomial", "components": [f"z1 + ({c})*z2^2", f"z2 + ({d})*z1*z2"]}


def random_scenario(rng: random.Random, max_vertices: int = 8, name: str = "",
                    free: bool | None = None) -> Scenario:
    """Random tree scenario.

    The active set is either the one computed from a random group-graph, or
    (``free``) an arbitrary set of edges each with a random active end.
    """
    g = random_group_graph(rng, max_vertices)
    if free is None:
        free = rng.random() < 0.5
    if free:
        active_at = {e: rng.choice(e) for e in g.edges if rng.random() < 0.6}
    else:
        active_at = {e: d for d, e in active_edges(g).oriented}
    radicand = rng.choice(_SQRTS)
    vname = {v: f"D{v + 1}" for v in g.vertices}
    edges = []
    for e in g.edges:
        a = active_at.get(e)
        edges.append(EdgeScenario(
            (vname[e[0]], vname[e[1]]),
            _random_model(rng, radicand),
            _random_phi(rng),
            vname[a] if a is not None else None,
        ))
    sc = Scenario(name, tuple(vname[v] for v in g.vertices), tuple(edges),
                  base_order=3, base_points=3, seed=rng.randrange(2**31))
    return Scenario(sc.name, sc.vertices, sc.edges, order=max(required_order(sc), 4),
                    base_order=sc.base_order, base_points=sc.base_points, seed=sc.seed)
