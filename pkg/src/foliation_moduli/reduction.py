"""Point blow-ups of a 1-form until every singular point is reduced.

Conventions.  A state is a 1-form written in local coordinates centred at
the point of interest, together with the divisor branches through that
point; branches are always coordinate axes, ``"x=0"`` or ``"y=0"``.

Blowing up the origin uses two charts:

* chart 0: ``(x, y) -> (x, x*y)``, exceptional axis ``x=0``;
* chart 1: ``(x, y) -> (x*y, y)``, exceptional axis ``y=0``.

Chart 0 sees every point of the new component except one, which is the
origin of chart 1.  Points are therefore collected from chart 0 in full and
from chart 1 only at its origin, so no point is visited twice.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import sympy

from .divisor import (
    NON_REDUCED,
    REDUCED_NONDEGENERATE,
    REGULAR,
    SADDLE_NODE,
    UNDETERMINED,
    Component,
    MarkedDivisor,
    SingularityRecord,
)
from .field import (
    DEFAULT_TOWER_CAP,
    QQ,
    Tower,
    UndeterminedError,
    coerce,
    is_real,
    is_square,
    is_zero,
    lower,
    real_sign,
    sort_key,
    split_roots,
    to_rational,
    upoly_gcd,
)
from .poly import OneForm, Poly2, dual_vector_field, linear_part, multiplicity

X_AXIS = "y=0"
Y_AXIS = "x=0"

COMPLETE = "COMPLETE"
DEPTH_LIMIT = "DEPTH_LIMIT"
STATUS_UNDETERMINED = "UNDETERMINED"


class NotSingularError(ValueError):
    pass


class NonIsolatedError(ValueError):
    """The coefficients share a factor through the origin."""


class BranchNotInvariantError(ValueError):
    pass


@dataclass(frozen=True)
class Branch:
    axis: str
    component: int


@dataclass(frozen=True)
class ChartState:
    chart: str
    omega: OneForm
    branches: tuple[Branch, ...] = ()
    coordinate: object = None  # position along the exceptional axis (chart 0 only)

    def branch_on(self, axis: str) -> Branch | None:
        for b in self.branches:
            if b.axis == axis:
                return b
        return None


@dataclass(frozen=True)
class BlowUp:
    chart0: ChartState
    chart1: ChartState
    dicritical: bool
    nu: int


def _pullback_chart0(omega: OneForm) -> tuple[Poly2, Poly2]:
    a, b = omega.a.chart0(), omega.b.chart0()
    return a + Poly2.y * b, Poly2.x * b


def _pullback_chart1(omega: OneForm) -> tuple[Poly2, Poly2]:
    a, b = omega.a.chart1(), omega.b.chart1()
    return Poly2.y * a, Poly2.x * a + b


def blow_up_point(state: ChartState, center=(0, 0), component: int = 1) -> BlowUp:
    """Blow up ``center``; the new component gets id ``component``."""
    cx, cy = center
    omega = state.omega.translate(cx, cy)
    if not omega.is_singular_at_origin():
        raise NotSingularError(f"{center} is not a singular point")
    kept = [b for b in state.branches if (b.axis == Y_AXIS and is_zero(cx)) or (b.axis == X_AXIS and is_zero(cy))]
    nu = multiplicity(omega)

    a0, b0 = _pullback_chart0(omega)
    a1, b1 = _pullback_chart1(omega)
    # after dividing by x^nu, x=0 is invariant iff x still divides the dx coefficient
    dicritical = a0.x_valuation() > nu
    k = nu + 1 if dicritical else nu
    form0 = OneForm(a0.div_x(k), b0.div_x(k))
    form1 = OneForm(a1.div_y(k), b1.div_y(k))

    old_y = next((b for b in kept if b.axis == X_AXIS), None)
    old_x = next((b for b in kept if b.axis == Y_AXIS), None)
    br0 = [Branch(Y_AXIS, component)] + ([Branch(X_AXIS, old_y.component)] if old_y else [])
    br1 = [Branch(X_AXIS, component)] + ([Branch(Y_AXIS, old_x.component)] if old_x else [])
    return BlowUp(
        ChartState(state.chart + "0", form0, tuple(br0)),
        ChartState(state.chart + "1", form1, tuple(br1)),
        dicritical,
        nu,
    )


def find_divisor_singularities(blow: BlowUp, cap: int = DEFAULT_TOWER_CAP) -> list[ChartState]:
    """Singular points on the new component, each as a centred state.

    Chart-0 points come first, ordered by their coordinate along the
    exceptional axis; the chart-1 origin comes last.
    """
    st0 = blow.chart0
    K = st0.omega.tower
    ra = st0.omega.a.restrict_x0()
    rb = st0.omega.b.restrict_x0()
    if not ra:
        g = rb
    elif not rb:
        g = ra
    else:
        g = upoly_gcd([coerce(c, K) for c in ra], [coerce(c, K) for c in rb])
    out: list[ChartState] = []
    roots = split_roots(g, K, cap) if len(g) > 1 else []
    roots.sort(key=lambda rt: (rt[1].degree, sort_key(rt[0])))
    for c, L in roots:
        omega = st0.omega.lift(L).translate(0, c)
        branches = [st0.branches[0]]
        if is_zero(c):
            branches += list(st0.branches[1:])
        out.append(ChartState(st0.chart, omega, tuple(branches), c))
    if blow.chart1.omega.is_singular_at_origin():
        out.append(blow.chart1)
    return out


# -- classification -----------------------------------------------------------

@dataclass(frozen=True)
class Classification:
    tag: str
    trace: object
    det: object
    nodal: bool = False
    note: str = ""

    @property
    def reduced(self) -> bool:
        return self.tag in (REDUCED_NONDEGENERATE, SADDLE_NODE)


def _ratio_invariant(T, D):
    """r = T^2/D; the eigenvalue ratio l satisfies l + 1/l + 2 = r."""
    return lower(T * T / D)


def classify_singularity(lin, branches=()) -> Classification:
    """Classify from trace and determinant of the linear part.

    ``lin`` is a 2x2 matrix (rows) or a :class:`LinearPart`.
    """
    m = lin.matrix if hasattr(lin, "matrix") else lin
    (p, q), (r_, s) = m
    T = lower(p + s)
    D = lower(p * s - q * r_)
    if is_zero(D):
        if is_zero(T):
            return Classification(NON_REDUCED, T, D, note="nilpotent linear part")
        return Classification(SADDLE_NODE, T, D)
    r = _ratio_invariant(T, D)
    rq = to_rational(r)
    if rq is not None:
        # l is rational iff r(r-4) is a rational square; then l > 0 iff r > 2
        if rq > 2 and is_square(rq * (rq - 4)):
            return Classification(NON_REDUCED, T, D, note="eigenvalue ratio in Q>0")
        return Classification(REDUCED_NONDEGENERATE, T, D, nodal=rq > 4)
    try:
        nodal = is_real(r) and real_sign(r - 4) > 0
    except UndeterminedError as exc:
        return Classification(UNDETERMINED, T, D, note=str(exc))
    return Classification(REDUCED_NONDEGENERATE, T, D, nodal=nodal)


def camacho_sad_index(lin, branch: str):
    """Transverse eigenvalue over tangent eigenvalue along an invariant axis."""
    m = lin.matrix if hasattr(lin, "matrix") else lin
    (p, q), (r_, s) = m
    if branch == Y_AXIS:
        if not is_zero(q):
            raise BranchNotInvariantError("x=0 is not an eigendirection")
        tangent, transverse = s, p
    elif branch == X_AXIS:
        if not is_zero(r_):
            raise BranchNotInvariantError("y=0 is not an eigendirection")
        tangent, transverse = p, s
    else:
        raise ValueError(f"unknown branch {branch!r}")
    if is_zero(tangent):
        raise ZeroDivisionError("tangent eigenvalue vanishes")
    return lower(transverse / tangent)


# -- driver -------------------------------------------------------------------

@dataclass
class BlowUpNode:
    index: int
    chart: str
    components: tuple[int, ...]
    nu: int
    dicritical: bool
    children: list["BlowUpNode"] = field(default_factory=list)


@dataclass
class ReductionOutcome:
    divisor: MarkedDivisor
    tree: BlowUpNode | None
    blowups: int
    generalized_curve: bool
    status: str
    regular_point: bool = False
    messages: tuple[str, ...] = ()

    @property
    def already_reduced(self) -> bool:
        return not self.regular_point and self.blowups == 0 and self.status == COMPLETE


class _Engine:
    def __init__(self, max_depth: int, cap: int):
        self.max_depth = max_depth
        self.cap = cap
        self.next_id = 1
        self.selfint: dict[int, int] = {}
        self.dicritical: dict[int, bool] = {}
        self.edges: set[tuple[int, int]] = set()
        self.points: list[SingularityRecord] = []
        self.blowups = 0
        self.undetermined = False
        self.depth_hit = False
        self.messages: list[str] = []

    def visit(self, state: ChartState, depth: int, parent: BlowUpNode | None) -> None:
        comps = tuple(b.component for b in state.branches)
        lp = linear_part(dual_vector_field(state.omega))
        try:
            cl = classify_singularity(lp)
        except UndeterminedError as exc:
            cl = Classification(UNDETERMINED, None, None, note=str(exc))
        on_dicritical = any(self.dicritical[c] for c in comps)
        if cl.tag == UNDETERMINED:
            self.undetermined = True
            self._record(state, cl, lp)
            return
        if cl.reduced and not on_dicritical:
            self._record(state, cl, lp)
            return
        if depth >= self.max_depth:
            self.depth_hit = True
            self._record(state, Classification(NON_REDUCED, cl.trace, cl.det, note="depth limit"), lp)
            return
        self.blow_up(state, depth, parent)

    def blow_up(self, state: ChartState, depth: int, parent: BlowUpNode | None) -> BlowUpNode:
        cid = self.next_id
        self.next_id += 1
        blow = blow_up_point(state, (0, 0), cid)
        self.blowups += 1
        through = sorted(b.component for b in state.branches)
        for c in through:
            self.selfint[c] -= 1
            self.edges.add((c, cid))
        if len(through) == 2:
            self.edges.discard(tuple(through))
        self.selfint[cid] = -1
        self.dicritical[cid] = blow.dicritical
        node = BlowUpNode(self.blowups, state.chart, tuple(through), blow.nu, blow.dicritical)
        if parent is not None:
            parent.children.append(node)
        try:
            children = find_divisor_singularities(blow, self.cap)
        except UndeterminedError as exc:
            self.undetermined = True
            self.messages.append(f"E{cid}: {exc}")
            return node
        for child in children:
            self.visit(child, depth + 1, node)
        return node

    def _record(self, state: ChartState, cl: Classification, lp) -> None:
        cs = []
        if cl.tag == REDUCED_NONDEGENERATE:
            for b in state.branches:
                cs.append((b.component, camacho_sad_index(lp, b.axis)))
        else:
            cs = [(b.component, None) for b in state.branches]
        self.points.append(
            SingularityRecord(
                components=tuple(b.component for b in state.branches),
                classification=cl.tag,
                trace=cl.trace,
                det=cl.det,
                cs=tuple(cs),
                nodal=cl.nodal,
                saddle_node=cl.tag == SADDLE_NODE,
                chart=state.chart,
                coordinate=state.coordinate,
                note=cl.note,
            )
        )


def _shared_factor(omega: OneForm):
    """Common factor of the coefficients vanishing at 0, or None (rational forms only)."""
    if not (omega.a.is_rational() and omega.b.is_rational()):
        return None
    x, y = sympy.symbols("x y")

    def expr(p: Poly2):
        return sum((sympy.Rational(int(c.numerator), int(c.denominator)) * x**i * y**j
                    for (i, j), c in ((k, to_rational(c)) for k, c in p)), sympy.Integer(0))

    g = sympy.gcd(expr(omega.a), expr(omega.b))
    if g.free_symbols and g.subs({x: 0, y: 0}) == 0:
        return g
    return None


def reduce(omega: OneForm, max_depth: int = 64, tower_cap: int = DEFAULT_TOWER_CAP, source: str = "") -> ReductionOutcome:
    """Reduce the singularity of ``omega`` at the origin.

    Raises NonIsolatedError when the singular set is a curve through 0.
    """
    if max_depth < 1 or tower_cap < 1:
        raise ValueError("limits must be positive")
    g = _shared_factor(omega)
    if g is not None:
        raise NonIsolatedError(f"non-isolated singularity: the coefficients share the factor {g}")
    if not omega.is_singular_at_origin():
        div = MarkedDivisor(status=COMPLETE, generalized_curve=True, source=source)
        return ReductionOutcome(div, None, 0, True, COMPLETE, regular_point=True)
    eng = _Engine(max_depth, tower_cap)
    root = ChartState("", omega, ())
    lp = linear_part(dual_vector_field(omega))
    try:
        cl = classify_singularity(lp)
    except UndeterminedError as exc:
        cl = Classification(UNDETERMINED, None, None, note=str(exc))
    tree = None
    origin = None
    if cl.reduced or cl.tag == UNDETERMINED:
        eng.undetermined = cl.tag == UNDETERMINED
        origin = SingularityRecord(
            components=(),
            classification=cl.tag,
            trace=cl.trace,
            det=cl.det,
            nodal=cl.nodal,
            saddle_node=cl.tag == SADDLE_NODE,
            note=cl.note,
        )
    else:
        tree = eng.blow_up(root, 0, None)
    if eng.undetermined:
        status = STATUS_UNDETERMINED
    elif eng.depth_hit:
        status = DEPTH_LIMIT
    else:
        status = COMPLETE
    records = list(eng.points)
    if origin is not None:
        gc = origin.classification != SADDLE_NODE
    else:
        gc = not any(p.classification == SADDLE_NODE for p in records)
    div = MarkedDivisor(
        components=tuple(
            Component(c, eng.selfint[c], eng.dicritical[c]) for c in sorted(eng.selfint)
        ),
        edges=tuple(sorted(eng.edges)),
        points=tuple(records),
        status=status,
        generalized_curve=gc,
        blowups=eng.blowups,
        origin=origin,
        source=source,
    )
    return ReductionOutcome(div, tree, eng.blowups, gc, status, messages=tuple(eng.messages))
