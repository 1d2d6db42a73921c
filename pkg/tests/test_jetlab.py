import json
import random
from importlib import resources

import pytest
import sympy
from gmpy2 import mpq

from foliation_moduli.field import adjoin_root
from foliation_moduli.jetlab import (
    FAIL,
    MATCH,
    JetOneForm,
    ModelHypothesisError,
    OrderTooLowError,
    ScenarioError,
    glue_transition,
    is_basic,
    kodaira_spencer_check,
    load_scenario,
    local_model,
    minimum_order,
    parse_scalar,
    random_scenario,
    scenario_from_json,
)
from foliation_moduli.jets import JetMap, JetRing, JetVectorField, compose, flow, linear_map

SQRT2 = adjoin_root([mpq(-2), mpq(0), mpq(1)])


def _shipped(name):
    path = resources.files("foliation_moduli").joinpath(f"data/scenarios/{name}.json")
    return scenario_from_json(path.read_text())


# -- an independent route to basicness: coordinate Lie derivative on rational functions

def _lie_wedge(A, B, Z1, Z2):
    x, y = sympy.symbols("x y")
    w = (A, B)
    Z = (Z1, Z2)
    # (L_Z w)_i = Z^j d_j w_i + w_j d_i Z^j
    L = [sum(Z[j] * sympy.diff(w[i], v) for j, v in enumerate((x, y)))
         + sum(w[j] * sympy.diff(Z[j], v) for j in range(2))
         for i, v in enumerate((x, y))]
    return sympy.simplify(sympy.together(L[0] * B - L[1] * A))


def test_oracle_accepts_models_and_rejects_control():
    x, y = sympy.symbols("x y")
    s2 = sympy.sqrt(2)
    assert _lie_wedge(s2 * y, x, 0, y) == 0
    a, b, k, z = 1, 2, 1, sympy.Rational(1, 2)
    u = x ** a * y ** b
    A = a * y * (1 + (z - 1) * u ** k)
    B = b * x * (1 + z * u ** k)
    assert _lie_wedge(A, B, 0, u ** k / (1 + z * u ** k) * y) == 0
    assert _lie_wedge(s2 * y, x, 0, x) != 0


@pytest.mark.parametrize("order", [4, 8, 12])
def test_models_are_basic(order):
    L = local_model("L", 1, SQRT2.generator, order=order + 1)
    assert is_basic(L.Z, L.omega, order).is_zero()
    N = local_model("N", 1, 2, 1, "1/2", order=order + 1)
    assert is_basic(N.Z, N.omega, order).is_zero()


def test_negative_control_is_not_basic():
    L = local_model("L", 1, SQRT2.generator, order=6)
    R = L.ring
    res = is_basic(JetVectorField(R.zero, R.z1), L.omega)
    assert not res.is_zero()


def test_is_basic_needs_one_extra_order():
    L = local_model("L", 1, SQRT2.generator, order=4)
    with pytest.raises(OrderTooLowError):
        is_basic(L.Z, L.omega, 4)


def test_model_L_shape():
    L = local_model("L", 1, SQRT2.generator, order=3)
    R = L.ring
    assert L.omega.a == R.z2 * SQRT2.generator
    assert L.omega.b == R.z1
    assert L.Z == JetVectorField(R.zero, R.z2)


def test_model_N_generator_expansion():
    N = local_model("N", 1, 2, 1, "1/2", order=9)
    R = N.ring
    u = R.z1 * R.z2 ** 2
    # u/(1 + u/2) z2 = u z2 - u^2 z2/2 + u^3 z2/4 - ...
    want = u * R.z2 - (u ** 2 * R.z2) * mpq(1, 2) + (u ** 3 * R.z2) * mpq(1, 4)
    assert N.Z == JetVectorField(R.zero, want)


def test_rational_ratio_needs_override():
    with pytest.raises(ModelHypothesisError):
        local_model("L", 1, 1)
    m = local_model("L", 1, 1, allow_rational_ratio=True, order=4)
    assert is_basic(m.Z, m.omega).is_zero()


@pytest.mark.parametrize("args", [(0, 1, 1, "1"), (1, 1, 0, "1"), (1, -2, 1, "1"), (1, 1, 1, None)])
def test_bad_N_parameters(args):
    a, b, k, z = args
    with pytest.raises(ModelHypothesisError):
        local_model("N", a, b, k, z)


def test_literal_repair_of_N_form_is_degenerate():
    # pairing the second displayed summand with dz1 leaves a common factor z1
    R = JetRing(8)
    a, b, k, z = 1, 2, 1, mpq(1, 2)
    u = R.monomial(a * k, b * k)
    A = R.z1 * a * (R.one + u * (z - 1))
    B = R.z1 * b * (R.one + u * z)
    for form in (A, B):
        assert all(i >= 1 for (i, j) in form.coefficients())


def test_minimum_order():
    assert minimum_order("L") == 1
    assert minimum_order("N", 1, 2, 1) == 4
    assert minimum_order("N", 1, 1, 3) == 7
    assert minimum_order("N", 2, 3, 2) == 14


def test_glue_active_identity_is_euler_flow():
    R = JetRing(4, params=("z1p",), caps=[5])
    t = R.param("z1p")
    X = JetVectorField(R.zero, R.z2)
    F = glue_transition(JetMap(R.z1, R.z2), X, 1, True, time=t)
    series = sum((t ** n * mpq(1, [1, 1, 2, 6, 24, 120][n]) for n in range(6)), R.zero)
    assert F == JetMap(R.z1, R.z2 * series)


def test_glue_inactive_is_phi():
    R = JetRing(4)
    phi = linear_map(R, [[1, 2], [0, 1]])
    assert glue_transition(phi, JetVectorField(R.zero, R.z2), 1, False) == phi


def test_glue_flows_before_phi():
    R = JetRing(5, params=("t1",), caps=[4])
    X = JetVectorField(R.zero, R.z2)
    phi = linear_map(R, [[1, 1], [0, 1]])
    t = R.param("t1")
    F = glue_transition(phi, X, 1, True)
    assert F == compose(phi, flow(X, t))
    assert F != compose(flow(X, t), phi)


def test_glue_requires_fixed_corner():
    R = JetRing(3)
    with pytest.raises(ValueError):
        glue_transition(JetMap(R.z1 + R.one, R.z2), JetVectorField(R.zero, R.z2), 1, False)


def test_euler_scenario_matches():
    rep = kodaira_spencer_check(_shipped("euler-single-edge"))
    assert rep.tau == 1
    assert [(r.source, r.case, r.expected, r.verdict) for r in rep.rows] == [
        ("D1", "i", "+X", MATCH),
        ("D2", "ii", "-phi_*X", MATCH),
    ]


def test_flipped_sign_fails_only_on_injected_edge():
    rep = kodaira_spencer_check(_shipped("flipped-sign"))
    bad = {r.edge for r in rep.rows if r.verdict == FAIL}
    assert bad == {"D1-D2"}
    assert not rep.all_match
    assert all(r.verdict == MATCH for r in rep.rows if r.edge == "D2-D3")


def test_empty_scenario():
    rep = kodaira_spencer_check(_shipped("empty"))
    assert rep.rows == [] and rep.all_match


def test_inactive_edges_give_identity_rows():
    sc = load_scenario({
        "scenario": 1, "vertices": ["A", "B"],
        "edges": [{"ends": ["A", "B"], "model": {"kind": "L", "a": "1", "b": {"sqrt": "3"}},
                   "phi": {"kind": "polynomial", "components": ["z1 + z2^2", "2*z2"]}}],
    })
    rep = kodaira_spencer_check(sc)
    assert [(r.source, r.slot, r.verdict) for r in rep.rows] == [("A", 0, MATCH), ("B", 0, MATCH)]


@pytest.mark.parametrize("seed", range(6))
def test_random_scenarios_match(seed):
    sc = random_scenario(random.Random(seed), max_vertices=5)
    rep = kodaira_spencer_check(sc)
    assert rep.all_match, rep.format_table()


def test_report_serialises():
    rep = kodaira_spencer_check(_shipped("euler-single-edge"))
    data = json.loads(json.dumps(rep.to_dict()))
    assert data["kappa"] == [{"source": "D1", "edge": "D1-D2", "slot": 1}]
    assert len(data["base_points"]) == 3
    assert "D1-D2" in rep.format_table()


def _base():
    return {
        "scenario": 1, "vertices": ["A", "B", "C"],
        "edges": [
            {"ends": ["A", "B"], "active_at": "A", "model": {"kind": "L", "a": "1", "b": {"sqrt": "2"}}},
            {"ends": ["B", "C"], "model": {"kind": "N", "a": 1, "b": 2, "k": 1, "zeta": "1/2"}},
        ],
    }


@pytest.mark.parametrize("mutate, path", [
    (lambda d: d.pop("vertices"), "$"),
    (lambda d: d["edges"][1]["model"].update(k=0), "$.edges[1].model"),
    (lambda d: d["edges"][0].update(ends=["A", "Q"]), "$.edges[0].ends"),
    (lambda d: d["edges"][0].update(ends=["A", "A"]), "$.edges[0].ends"),
    (lambda d: d["edges"][1].update(ends=["A", "B"]), "$.edges[1].ends"),
    (lambda d: d["edges"][0].update(active_at="C"), "$.edges[0].active_at"),
    (lambda d: d["edges"].append({"ends": ["A", "C"], "model": {"kind": "L", "a": "1", "b": "-1",
                                                                "allow_rational_ratio": True}}),
     "$.edges[2]"),
    (lambda d: d.update(order=3), "$.order"),
    (lambda d: d["edges"][0].update(phi={"kind": "linear", "matrix": [["1", "1"], ["1", "1"]]}),
     "$.edges[0].phi"),
    (lambda d: d["edges"][0].update(phi={"kind": "polynomial", "components": ["z1 + 1", "z2"]}),
     "$.edges[0].phi"),
    (lambda d: d["edges"][0].update(phi={"kind": "polynomial", "components": ["z1 +", "z2"]}),
     "$.edges[0].phi.components[0]"),
    (lambda d: d["edges"][1]["model"].update(zeta={"sqrt": "3"}), "$.edges[1]"),
])
def test_scenario_errors(mutate, path):
    data = _base()
    mutate(data)
    with pytest.raises(ScenarioError) as info:
        kodaira_spencer_check(load_scenario(data))
    assert info.value.path == path


def test_invalid_json_text():
    with pytest.raises(ScenarioError) as info:
        scenario_from_json('{"scenario": 1,')
    assert info.value.path == "$"


def test_parse_scalar():
    assert parse_scalar("-3/4") == mpq(-3, 4)
    assert parse_scalar({"sqrt": "9/4", "times": "2", "plus": "1"}) == 4
    r = parse_scalar({"sqrt": "2"})
    assert r * r == 2


def test_base_order_limits_expansion():
    sc = load_scenario({**_base(), "order": 5, "base_order": 2, "base_points": 1})
    assert kodaira_spencer_check(sc).all_match
