import itertools
import random

import pytest

from ucqa.core import closer_than, DeltaOrder, eval_query, satisfies
from ucqa.cqa import dependency_graph, is_acyclic
from ucqa.grounding import Grounding, build_hypergraph, compute_hull, is_independent
from ucqa.oracle import (PROFILES, QBF, CapExceededError, brute_cqa, counterexample,
                         enumerate_repairs, find_repair, gen_query, gen_random, is_3colorable,
                         maximal_independent_sets, qbf_from_text, qbf_to_text, reduce_3col,
                         reduce_qbf)


def _facts(case, *texts):
    return [case.facts(t) for t in texts]


def test_cascade_repairs(chain):
    i = chain.inst()
    expected = {i | chain.facts("P(2). P(3)."), i - chain.facts("R(1,2)."), i - chain.facts("P(1)."),
                (i | chain.facts("P(2).")) - chain.facts("R(2,3).")}
    for method in ("subset", "sat"):
        assert set(enumerate_repairs(i, chain.f, method=method)) == expected


def test_nf_repairs(diagnosis):
    expected = set(_facts(
        diagnosis,
        "NF(Steve,yes). NF(Mary,no). NF(Donald,yes). Parent(Steve,Donald). Parent(Mary,Donald).",
        "NF(Steve,no). NF(Mary,yes). NF(Donald,yes). Parent(Steve,Donald). Parent(Mary,Donald).",
        "NF(Steve,no). NF(Mary,no). NF(Donald,yes). Parent(Mary,Donald).",
        # NF(Mary,yes) would not be minimal here; deleting a parent needs no insertion
        "NF(Steve,no). NF(Mary,no). NF(Donald,yes). Parent(Steve,Donald).",
        "NF(Steve,no). NF(Mary,no). Parent(Steve,Donald). Parent(Mary,Donald)."))
    for method in ("subset", "sat"):
        assert set(enumerate_repairs(diagnosis.inst(), diagnosis.f, method=method)) == expected
    q = diagnosis.query("NF(Steve, no)")
    assert eval_query(q, diagnosis.inst()) and not brute_cqa(q, diagnosis.inst(), diagnosis.f)


def test_coffee_repairs(coffee):
    i = coffee.inst()
    expected = {i | coffee.facts("CoffeeShop(Starbucks, 'Main Str.', Espresso)."),
                i - coffee.facts("CoffeeShop(Starbucks, 'Delaware Ave.', Espresso)."),
                i - coffee.facts("CoffeeShop(Starbucks, 'Main Str.', Latte).")}
    assert set(enumerate_repairs(i, coffee.f)) == expected
    latte = coffee.query((coffee.dir / "query_latte.txt").read_text())
    espresso = coffee.query((coffee.dir / "query_espresso.txt").read_text())
    assert brute_cqa(latte, i, coffee.f)
    assert not brute_cqa(espresso, i, coffee.f)
    assert counterexample(espresso, i, coffee.f) is not None


def test_support_example_repairs(lookup):
    assert set(enumerate_repairs(lookup.inst(), lookup.f)) == set(_facts(
        lookup, "Q(2).", "R(1,1,1). P(1,1). Q(1). Q(2).", "R(1,2,1). P(1,2). Q(1). Q(2)."))


def test_consistent_instance_is_its_own_repair(chain):
    i = chain.facts("R(1,2). R(2,3). P(1). P(2). P(3).")
    assert enumerate_repairs(i, chain.f) == [i]
    q = chain.query("P(3) and not R(3,1)")
    assert brute_cqa(q, i, chain.f) == eval_query(q, i)


def test_caps(chain):
    with pytest.raises(CapExceededError):
        enumerate_repairs(chain.inst(), chain.f, cap=2)
    with pytest.raises(CapExceededError):
        enumerate_repairs(chain.inst(), chain.f, method="sat", limit=2)
    with pytest.raises(ValueError):
        enumerate_repairs(chain.inst(), chain.f, method="magic")


@pytest.mark.parametrize("profile", PROFILES)
def test_methods_agree_and_repairs_are_minimal(profile):
    for seed in range(12):
        _, i, f = gen_random(seed, profile)
        a = enumerate_repairs(i, f)
        assert a and a == enumerate_repairs(i, f, method="sat")
        for r in a:
            assert satisfies(r, f)
        for r, t in itertools.permutations(a, 2):
            assert closer_than(i, r, t) is DeltaOrder.INCOMPARABLE


def test_find_repair(chain):
    i = chain.inst()
    r = find_repair(i, chain.f, required=chain.facts("P(2)."), forbidden=chain.facts("P(3)."))
    assert r == (i | chain.facts("P(2).")) - chain.facts("R(2,3).")
    assert find_repair(i, chain.f, required=chain.facts("P(3)."), forbidden=chain.facts("P(2).")) is None
    assert find_repair(i, chain.f, required=chain.facts("P(9).")) is None


def test_maximal_independent_sets_by_brute_force(chain):
    g = build_hypergraph(chain.inst(), chain.f)
    verts = sorted(g.vertices)
    brute = []
    for bits in itertools.product((0, 1), repeat=len(verts)):
        m = frozenset(v for v, b in zip(verts, bits) if b)
        if is_independent(m, g) and all(not is_independent(m | {v}, g) for v in verts if v not in m):
            brute.append(m)
    assert set(maximal_independent_sets(g)) == set(brute)
    with pytest.raises(CapExceededError):
        maximal_independent_sets(g, cap=3)


# --------------------------------------------------------------- reductions

def test_3col_single_edge_counts():
    red = reduce_3col([1, 2], [(1, 2)])
    assert len(red.instance) == 2 * 3 * 1 + 3
    assert {red.named["q0"], red.named["r"], red.named["r'"]} <= red.instance
    assert red.named["r''"] not in red.instance


@pytest.mark.parametrize("vertices,edges", [
    ([1, 1], [(1, 1)]), ([1, 2], [(1, 3)]), ([1, 2], [(1, 1)]), ([1, 2, 3], [(1, 2)])])
def test_3col_input_validation(vertices, edges):
    with pytest.raises(ValueError):
        reduce_3col(vertices, edges)


def _3col_drops_r(vertices, edges):
    red = reduce_3col(vertices, edges)
    return find_repair(red.instance, red.constraints, forbidden=[red.named["r"]]) is not None


def test_3col_triangle_and_k4():
    k3 = [(1, 2), (2, 3), (1, 3)]
    assert is_3colorable([1, 2, 3], k3) and _3col_drops_r([1, 2, 3], k3)
    k4 = list(itertools.combinations([1, 2, 3, 4], 2))
    # K4 needs four colors
    assert not is_3colorable([1, 2, 3, 4], k4) and not _3col_drops_r([1, 2, 3, 4], k4)


def test_fig5_hypergraph():
    psi = QBF(3, 2, ((-1, 4, 2), (-2, -5, 3)))
    red = reduce_qbf(psi)
    name = {v: k for k, v in red.named.items()}
    g = build_hypergraph(red.instance, red.constraints)

    def show(e):
        return frozenset(("" if l.positive else "-") + name[l.fact] for l in e)

    pairs = {frozenset({f"p{k}", f"~p{k}"}) for k in range(1, 6)}
    pairs |= {frozenset({"r", x}) for x in ("~r", "p4", "~p4", "p5", "~p5")}
    big = {frozenset({"q1", "-~p1", "-p4", "-p2", "-r"}), frozenset({"q2", "-~p2", "-~p5", "-p3", "-r"})}
    assert {show(e) for e in g.conflict_edges} == pairs | big
    stab = {"r", "~p1", "p4", "p2", "~p2", "~p5", "p3"}
    assert {show(e) for e in g.stabilizing_edges} == {frozenset({x, "-" + x}) for x in stab}


def test_qbf_without_universals():
    psi = QBF(0, 3, ((1, 2, 3), (-1, 2, -3)))
    assert psi.is_valid()
    red = reduce_qbf(psi)
    assert brute_cqa(red.query, red.instance, red.constraints, method="sat")


def test_qbf_text_round_trip():
    psi = QBF(2, 1, ((1, -2, 3), (-1, 2, -3)))
    assert qbf_from_text(qbf_to_text(psi)) == psi
    with pytest.raises(ValueError):
        qbf_from_text("exists 2 forall 1\n1 2 -1\n")
    with pytest.raises(ValueError):
        QBF(1, 1, ((1, 2),))
    with pytest.raises(ValueError):
        QBF(1, 1, ((1, 2, 3),))


# ---------------------------------------------------------------- generator

def test_generator_is_deterministic():
    for profile in PROFILES:
        assert gen_random(5, profile) == gen_random(5, profile)
        a = gen_query(random.Random(1), sorted(gen_random(5, profile)[1]))
        b = gen_query(random.Random(1), sorted(gen_random(5, profile)[1]))
        assert a == b
    with pytest.raises(ValueError):
        gen_random(0, "nope")


def test_generator_profiles():
    for seed in range(25):
        _, i, f = gen_random(seed, "denial")
        assert compute_hull(i, f).positive == i
        s, i, f = gen_random(seed, "acyclic")
        assert is_acyclic(dependency_graph(f, s))
        assert len(Grounding(i, f).facts) <= 14
