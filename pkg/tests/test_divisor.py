import json

import pytest
from gmpy2 import mpq

from foliation_moduli.divisor import (
    DivisorFormatError,
    elem_from_json,
    elem_to_json,
    from_json,
    intersection_matrix,
    is_negative_definite,
    single_component,
    to_dict,
    to_dot,
    to_json,
    two_point_chain,
)
from foliation_moduli.field import adjoin_root
from foliation_moduli.parser import parse_one_form
from foliation_moduli.reduction import reduce


@pytest.fixture(scope="module")
def cusp():
    return reduce(parse_one_form("2*y*dy - 3*x^2*dx"), source="cusp").divisor


def test_json_round_trip(cusp):
    raw = to_json(cusp)
    back = from_json(raw)
    assert to_json(back) == raw
    assert back.edges == cusp.edges


def test_json_round_trip_with_tower_values():
    d = reduce(parse_one_form("-(x + 2*y)*dx + (x + y)*dy")).divisor
    assert to_json(from_json(to_json(d))) == to_json(d)


def test_elem_json():
    t = adjoin_root([mpq(-3), mpq(0), mpq(1)])
    x = 2 - t.generator
    assert elem_from_json(elem_to_json(x)) == x
    assert elem_to_json(mpq(-1, 3)) == "-1/3"


def test_truncated_json_reports_root_path(cusp):
    raw = to_json(cusp)
    with pytest.raises(DivisorFormatError) as info:
        from_json(raw[: len(raw) // 2])
    assert info.value.path == "$"


def test_schema_error_has_path(cusp):
    data = to_dict(cusp)
    data["components"][0]["self_intersection"] = "minus three"
    with pytest.raises(DivisorFormatError) as info:
        from_json(json.dumps(data))
    assert info.value.path.startswith("$.components[0]")


def test_dot_has_three_nodes_and_two_edges(cusp):
    dot = to_dot(cusp)
    assert dot.count("[label=\"E") == 3
    assert dot.count(" -- ") == 2
    assert dot.startswith("graph")


def test_intersection_matrix_of_cusp(cusp):
    m = intersection_matrix(cusp)
    assert m == [[-3, 0, 1], [0, -2, 1], [1, 1, -1]]
    assert is_negative_definite(m)
    assert not is_negative_definite([[-1, 1], [1, -1]])


def test_synthetic_builders():
    chain = two_point_chain(4)
    assert len(chain.components) == 4 and chain.is_tree()
    one = single_component(3)
    assert len(one.points) == 3 and one.components[0].self_intersection == -3
