"""Acceptance suite: one PASS/FAIL line per criterion, printed uncaptured."""

import random
import time

import pytest
from gmpy2 import mpq

from foliation_moduli.cli import main
from foliation_moduli.corpus import CORPUS
from foliation_moduli.divisor import (
    intersection_matrix,
    single_component,
    two_point_chain,
    verify_camacho_sad,
)
from foliation_moduli.field import adjoin_root
from foliation_moduli.jetlab import is_basic, kodaira_spencer_check, local_model, random_scenario
from foliation_moduli.jets import JetRing, JetVectorField, compose, flow
from foliation_moduli.linalg import leading_minors
from foliation_moduli.moduli import (
    active_edges,
    build_complex,
    check_no_chain,
    compose_is_zero,
    h1_dimension,
    random_group_graph,
)
from foliation_moduli.parser import parse_one_form
from foliation_moduli.reduction import COMPLETE, reduce

CUSP = "d(y^2 - x^3)"

# runtime budgets (seconds)
BUDGET_CUSP = 1.0
BUDGET_TAU = 30.0
BUDGET_JETS = 60.0


@pytest.fixture
def verdict(capsys):
    def report(n, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
        assert ok, detail
    return report


def test_criterion_1_cusp_pipeline(verdict):
    t0 = time.perf_counter()
    out = reduce(parse_one_form(CUSP))
    elapsed = time.perf_counter() - t0
    d = out.divisor
    last = max(d.ids)
    ok = (
        d.status == COMPLETE
        and d.blowups == 3
        and d.is_tree()
        and len(d.edges) == 2
        and sorted(d.neighbours(last)) == sorted(i for i in d.ids if i != last)
        and sorted(c.self_intersection for c in d.components) == [-3, -2, -1]
        and d.generalized_curve
        and all(r.residual == 0 and not r.undetermined for r in verify_camacho_sad(d))
        and len(verify_camacho_sad(d)) == 3
        and elapsed < BUDGET_CUSP
    )
    verdict(1, ok, f"3 blow-ups, path with E{last} in the middle, CS residuals 0, {elapsed:.3f}s < {BUDGET_CUSP}s")


def test_criterion_2_radial(verdict):
    d = reduce(parse_one_form("x*dy - y*dx")).divisor
    ok = (
        d.blowups == 1
        and len(d.components) == 1
        and d.components[0].dicritical
        and d.components[0].self_intersection == -1
        and not d.points
    )
    verdict(2, ok, "one dicritical component, self-intersection -1, no singular points")


@pytest.fixture(scope="module")
def corpus_outcomes():
    return {name: reduce(parse_one_form(form)) for name, form, _ in CORPUS}


def test_criterion_3_index_theorem(verdict, corpus_outcomes):
    forms = {form for _, form, gc in CORPUS if gc}
    required = {"2*y*dy - 5*x^4*dx", "y*dx + x*dy",
                "(-y^2 - 3*x^2*y + 4*x^3)*dx + (3*y^2 - 2*x*y - x^3)*dy"}
    bad = []
    count = 0
    for name, form, gc in CORPUS:
        if not gc:
            continue
        d = corpus_outcomes[name].divisor
        count += 1
        if d.status != COMPLETE or not d.generalized_curve:
            bad.append(name)
            continue
        for r in verify_camacho_sad(d):
            if r.undetermined or r.residual != 0:
                bad.append(f"{name}:E{r.component}")
    ok = count >= 10 and required <= forms and not bad
    verdict(3, ok, f"{count} generalized-curve inputs, exact zero residual on every invariant component"
            + (f"; failures {bad}" if bad else ""))


def test_criterion_4_negative_definite(verdict, corpus_outcomes):
    bad = []
    checked = 0
    for name, out in corpus_outcomes.items():
        d = out.divisor
        if d.status != COMPLETE or not d.components:
            continue
        checked += 1
        minors = leading_minors(intersection_matrix(d))
        if not all((m < 0) if k % 2 == 0 else (m > 0) for k, m in enumerate(minors)):
            bad.append(name)
    verdict(4, checked >= 10 and not bad, f"alternating leading minors on {checked} COMPLETE outcomes"
            + (f"; failures {bad}" if bad else ""))


def test_criterion_5_tau_dual_oracle(verdict):
    t0 = time.perf_counter()
    rng = random.Random(20240501)
    mismatches = unstable = nonzero = 0
    for _ in range(500):
        g = random_group_graph(rng, 12)
        c = build_complex(g)
        if not compose_is_zero(c):
            nonzero += 1
        tau = active_edges(g).tau
        if h1_dimension(c) != tau:
            mismatches += 1
        for _ in range(10):
            pick = random.Random(rng.random())
            if active_edges(g, chooser=pick.choice).tau != tau:
                unstable += 1
    elapsed = time.perf_counter() - t0
    ok = mismatches == unstable == nonzero == 0 and elapsed < BUDGET_TAU
    verdict(5, ok, f"500 graphs: h1 != |A''| {mismatches}, chooser-dependent {unstable}, "
            f"d1 d0 != 0 {nonzero}, {elapsed:.1f}s < {BUDGET_TAU}s")


def test_criterion_6_no_chain(verdict):
    chain = check_no_chain(two_point_chain(4))
    cusp = check_no_chain(reduce(parse_one_form(CUSP)).divisor)
    single = check_no_chain(single_component(3))
    ok = not chain.holds and chain.witness == (1, 2, 3, 4) and cusp.holds and single.holds
    verdict(6, ok, f"chain fails with witness {chain.witness}, cusp and single component with 3 points pass")


def _random_field(rng, ring, linear):
    def comp():
        f = ring.zero
        lo = 1 if linear else 2
        for _ in range(rng.randint(2, 4)):
            deg = rng.randint(lo, 4)
            i = rng.randint(0, deg)
            f = f + ring.monomial(i, deg - i, mpq(rng.randint(-4, 4), rng.randint(1, 3)))
        return f
    return JetVectorField(comp(), comp())


def test_criterion_7_jet_lab(verdict):
    t0 = time.perf_counter()
    rng = random.Random(7)
    N = 12
    law_bad = 0
    for n in range(20):
        linear = n % 2 == 1
        cap = 6 if linear else N
        ring = JetRing(N, ("s", "t"), [cap, cap])
        Z = _random_field(rng, ring, linear)
        s, t = ring.param("s"), ring.param("t")
        if compose(flow(Z, s), flow(Z, t)) != flow(Z, s + t):
            law_bad += 1
    sqrt2 = adjoin_root([mpq(-2), mpq(0), mpq(1)]).generator
    basic_bad = []
    for order in (4, 8, 12):
        L = local_model("L", 1, sqrt2, order=order + 1)
        Nm = local_model("N", 1, 2, 1, "1/2", order=order + 1)
        if not is_basic(L.Z, L.omega, order).is_zero():
            basic_bad.append(f"L@{order}")
        if not is_basic(Nm.Z, Nm.omega, order).is_zero():
            basic_bad.append(f"N@{order}")
    L = local_model("L", 1, sqrt2, order=13)
    control = not is_basic(JetVectorField(L.ring.zero, L.ring.z1), L.omega, 12).is_zero()
    srng = random.Random(2024)
    ks_bad = rows = 0
    for i in range(50):
        rep = kodaira_spencer_check(random_scenario(srng, 8, name=f"random-{i}"))
        rows += len(rep.rows)
        ks_bad += sum(r.verdict != "MATCH" for r in rep.rows)
        assert len(rep.base_points) == 3
    elapsed = time.perf_counter() - t0
    ok = law_bad == 0 and not basic_bad and control and ks_bad == 0 and elapsed < BUDGET_JETS
    verdict(7, ok, f"group law failures {law_bad}/20, is_basic failures {basic_bad or 'none'}, "
            f"negative control {'nonzero' if control else 'ZERO'}, KS {rows - ks_bad}/{rows} rows MATCH, "
            f"{elapsed:.1f}s < {BUDGET_JETS}s")


def test_criterion_8_determinism(verdict, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    codes = (main(["corpus", "--out-dir", str(a)]), main(["corpus", "--out-dir", str(b)]))
    names = sorted(p.name for p in a.glob("*.json"))
    same = names == sorted(p.name for p in b.glob("*.json")) and all(
        (a / n).read_bytes() == (b / n).read_bytes() for n in names)
    verdict(8, codes == (0, 0) and same and len(names) > 1,
            f"{len(names)} JSON artifacts byte-identical across two corpus runs")
