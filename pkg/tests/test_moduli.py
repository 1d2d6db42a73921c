import random
from dataclasses import replace

import pytest

from foliation_moduli.divisor import Component, MarkedDivisor, single_component, two_point_chain
from foliation_moduli.moduli import (
    ANNOTATION,
    DEFAULT,
    RULE,
    AnnotationError,
    ConsistencyError,
    GroupGraph,
    HypothesisError,
    active_edges,
    braid_factors,
    build_complex,
    build_group_graph,
    check_no_chain,
    compose_is_zero,
    h1_dimension,
    moduli_skeleton,
    random_group_graph,
)
from foliation_moduli.parser import parse_one_form
from foliation_moduli.reduction import reduce


@pytest.fixture(scope="module")
def cusp():
    return reduce(parse_one_form("2*y*dy - 3*x^2*dx")).divisor


def _path(dv, de):
    return GroupGraph.from_dims([(0, 1), (1, 2)], {0: dv, 1: dv, 2: dv}, {(0, 1): de, (1, 2): de})


def test_path_all_ones():
    g = _path(1, 1)
    c = build_complex(g)
    assert c.shape == (3, 4, 2)
    assert compose_is_zero(c)
    assert h1_dimension(c) == 0
    act = active_edges(g)
    assert act.a_prime == () and act.tau == 0


def test_path_edges_only():
    g = _path(0, 1)
    c = build_complex(g)
    assert c.shape == (0, 4, 2)
    assert h1_dimension(c) == 2
    act = active_edges(g)
    assert act.a_second == ((0, 1), (1, 2))


def test_all_zero_and_empty():
    assert build_complex(_path(0, 0)).shape == (0, 0, 0)
    empty = GroupGraph.from_dims([], {}, {})
    assert h1_dimension(build_complex(empty)) == 0


def test_star():
    g = GroupGraph.from_dims(
        [(0, 1), (0, 2), (0, 3)], {0: 0, 1: 1, 2: 1, 3: 1}, {(0, 1): 1, (0, 2): 1, (0, 3): 1}
    )
    c = build_complex(g)
    assert c.shape == (3, 6, 3)
    assert h1_dimension(c) == active_edges(g).tau


def test_single_edge_with_dead_ends():
    g = GroupGraph.from_dims([(0, 1)], {0: 0, 1: 0}, {(0, 1): 1})
    assert h1_dimension(build_complex(g)) == 1
    act = active_edges(g)
    assert act.a_second == ((0, 1),)
    assert act.oriented == ((0, (0, 1)),)


def test_zero_rules_are_enforced():
    with pytest.raises(ValueError):
        GroupGraph.from_dims([(0, 1)], {0: 1, 1: 0}, {(0, 1): 0}, dicritical={0})
    with pytest.raises(ValueError):
        GroupGraph.from_dims([(0, 1)], {0: 0, 1: 0}, {(0, 1): 1}, nodal={(0, 1)})


def test_cusp_group_graph(cusp):
    g = build_group_graph(cusp)
    assert g.dim_v == {1: 1, 2: 1, 3: 0}
    assert g.dim_e == {(1, 3): 1, (2, 3): 1}
    assert set(g.provenance_v.values()) == {DEFAULT}


def test_annotation_overrides_default(cusp):
    g = build_group_graph(cusp, {"vertices": {"E1": 0}})
    assert g.dim_v[1] == 0 and g.provenance_v[1] == ANNOTATION


def test_annotation_cannot_override_dicritical_zero():
    d = reduce(parse_one_form("x*dy - y*dx")).divisor
    g = build_group_graph(d, {"vertices": {"E1": 1}})
    assert g.dim_v[1] == 0 and g.provenance_v[1] == RULE


def test_unknown_annotation_target(cusp):
    with pytest.raises(AnnotationError):
        build_group_graph(cusp, {"vertices": {"E9": 1}})
    with pytest.raises(AnnotationError):
        build_group_graph(cusp, {"edges": {"E1-E2": 1}})


def test_cusp_skeleton(cusp):
    sk = moduli_skeleton(cusp)
    assert sk.tau == sk.tau_cohomology == sk.tau_active
    assert sk.nc.holds
    assert sk.tr == "UNKNOWN"
    assert braid_factors(cusp) == {1: 1, 2: 1, 3: 3}
    data = sk.to_dict()
    assert data["group_D"] == "UNKNOWN" and data["lattice_rank_p"] == "UNKNOWN"


def test_forced_inconsistent_active_set(cusp):
    with pytest.raises(ConsistencyError):
        moduli_skeleton(cusp, {"active": ["E1-E3"]})


def test_saddle_node_rejected():
    d = reduce(parse_one_form("x^2*dy - y*dx")).divisor
    with pytest.raises(HypothesisError):
        moduli_skeleton(d)


def test_no_chain_examples(cusp):
    v = check_no_chain(two_point_chain(4))
    assert not v.holds and v.witness == (1, 2, 3, 4)
    assert check_no_chain(single_component(3)).holds
    assert check_no_chain(cusp).holds


def _relabel(d: MarkedDivisor, perm: dict) -> MarkedDivisor:
    comps = tuple(sorted((Component(perm[c.id], c.self_intersection, c.dicritical) for c in d.components),
                         key=lambda c: c.id))
    edges = tuple(sorted(tuple(sorted((perm[a], perm[b]))) for a, b in d.edges))
    pts = tuple(
        replace(p, components=tuple(perm[c] for c in p.components), cs=tuple((perm[c], v) for c, v in p.cs))
        for p in d.points
    )
    return MarkedDivisor(comps, edges, pts, source=d.source)


@pytest.mark.parametrize("seed", range(5))
def test_no_chain_invariant_under_relabeling(seed, cusp):
    rng = random.Random(seed)
    for d in (two_point_chain(5), cusp, single_component(2)):
        ids = [c.id for c in d.components]
        shuffled = ids[:]
        rng.shuffle(shuffled)
        perm = dict(zip(ids, shuffled))
        before, after = check_no_chain(d), check_no_chain(_relabel(d, perm))
        assert before.holds == after.holds
        assert {perm[v] for v in before.witness} == set(after.witness)


def test_kappa_is_bijection_and_removal_matters():
    rng = random.Random(5)
    overcount = False
    for _ in range(200):
        g = random_group_graph(rng, 12)
        act = active_edges(g)
        assert sorted(act.kappa.values()) == list(range(1, act.tau + 1))
        assert h1_dimension(build_complex(g)) == act.tau
        if active_edges(g, remove=False).tau > act.tau:
            overcount = True
    assert overcount


def test_braid_factor_edge_cases():
    assert braid_factors(single_component(0, -1)) == {1: 0}
