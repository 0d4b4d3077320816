import itertools
import random

import pytest

from ucqa.core import Fact, QAtom, QConst, QNot, UnsupportedConstraintError, eval_query
from ucqa.cqa import (CNFTooLargeError, CQAEngine, check_supported, compute_blocks,
                      compute_supports, cqa, dependency_graph, exists_repair, is_acyclic,
                      jd_holds, jd_implies, merge_jds, to_cnf)
from ucqa.oracle import enumerate_repairs, gen_query, gen_random
from ucqa.parser import parse_constraints, parse_schema


def test_cyclic_dependency_graph(ring):
    g = dependency_graph(ring.f, ring.schema)
    assert g.depth == {"R": 3, "P": 2, "S": 2, "T": 2}
    assert g.height == {"R": 0, "P": 3, "S": 2, "T": 2}
    assert g.h == 3
    assert g.edges == {("S", "R"), ("S", "P"), ("P", "T"), ("T", "S")}
    assert not is_acyclic(g)


def test_small_dependency_graphs(chain):
    g = dependency_graph(chain.f, chain.schema)
    assert g.edges == {("P", "R"), ("P", "P")} and g.h == 1
    s = parse_schema("relation R(A: rat, B: rat)")
    d = dependency_graph(parse_constraints("fd R: A -> B", s), s)
    assert d.edges == frozenset() and d.h == 0 and is_acyclic(d)
    assert is_acyclic(dependency_graph([]))
    s2 = parse_schema("relation R(A: rat)\nrelation P(A: rat)")
    assert is_acyclic(dependency_graph(parse_constraints("R(x) -> P(x)", s2), s2))


def test_merge_basics():
    assert merge_jds([], 3) == ((0, 1, 2),)
    assert merge_jds([[[0, 1], [1, 2]]]) == ((0, 1), (1, 2))
    assert set(merge_jds([[[0, 1], [1, 2]], [[0, 2], [1, 2]]])) == {(0,), (1,), (1, 2), (2,)}
    s = parse_schema("relation R(A: rat, B: rat)\nrelation P(A: rat, B: rat)")
    jr, jp = parse_constraints("jd R: [A][B]\njd P: [A][B]", s)
    with pytest.raises(ValueError):
        merge_jds([jr, jp])


def test_chase_certifies_merges():
    # the pair below is not equivalent to its merge
    pair = [[[0, 1], [1, 2]], [[0, 2], [1, 2]]]
    assert not jd_implies(pair, merge_jds(pair), 3)
    assert jd_implies([[[0], [1, 2]]], [[0, 1], [1, 2]], 3)
    assert not jd_implies([[[0, 1], [1, 2]]], [[0], [1, 2]], 3)
    assert jd_holds({(1, 1, 1), (2, 2, 2)}, [[0, 1], [1, 2]])
    assert not jd_holds({(1, 1, 1), (2, 1, 2)}, [[0, 1], [1, 2]])


def test_check_supported_refusals(diagnosis, ring):
    with pytest.raises(UnsupportedConstraintError):
        check_supported(diagnosis.f)
    s = parse_schema("relation P(A: rat, B: rat)")
    with pytest.raises(UnsupportedConstraintError, match="cyclic"):
        check_supported(parse_constraints("P(x, y) -> P(y, x)", s), s)
    r = parse_schema("relation R(A: rat, B: rat, C: rat)")
    with pytest.raises(UnsupportedConstraintError, match="not equivalent"):
        check_supported(parse_constraints("jd R: [A,B][B,C]\njd R: [A,C][B,C]", r), r)
    check_supported(parse_constraints("jd R: [A,B][B,C]\njd R: [A][B,C]", r), r)


def test_support_tables(lookup):
    e = CQAEngine(lookup.inst(), lookup.f, lookup.schema)
    f, x = lookup.facts, lookup.fact
    expected = {
        "R(1,1,1)": {f("R(1,1,1).")},
        "R(1,2,1)": {f("R(1,2,1).")},
        "P(1,2)": {f("P(1,2).")},
        "Q(2)": {f("Q(2).")},
        "P(1,1)": {f("R(1,1,1).")},
        "Q(1)": {f("R(1,1,1)."), f("P(1,2).")},
    }
    assert e.support_table() == {x(k): v for k, v in expected.items()}
    assert compute_supports(lookup.inst(), lookup.f, lookup.schema) == e.support_table()


def test_block_tables(lookup):
    e = CQAEngine(lookup.inst(), lookup.f, lookup.schema)
    f, x = lookup.facts, lookup.fact
    none = frozenset()
    expected = {
        "Q(1)": {(none, f("Q(1)."))},
        "P(1,1)": {(none, f("P(1,1)."))},
        "R(1,1,1)": {(none, f("P(1,1)."))},
        "P(1,2)": {(f("R(1,1,1)."), none), (none, f("Q(1)."))},
        "R(1,2,1)": {(f("R(1,1,1)."), none), (none, f("Q(1)."))},
        "Q(2)": set(),
    }
    assert e.block_table() == {x(k): v for k, v in expected.items()}
    assert compute_blocks(lookup.inst(), lookup.f, lookup.schema) == e.block_table()


def test_levels_are_cumulative(lookup):
    e = CQAEngine(lookup.inst(), lookup.f, lookup.schema)
    q1 = lookup.fact("Q(1)")
    assert e.supports(q1, -1) == set()
    for lvl in range(-1, e.h):
        assert e.supports(q1, lvl) <= e.supports(q1, lvl + 1)
    assert e.supports(q1, e.h) == e.supports(q1)


def test_exists_repair(lookup):
    i, f, s = lookup.inst(), lookup.f, lookup.schema
    res = exists_repair(lookup.facts("R(1,1,1)."), lookup.facts("Q(1)."), i, f, s)
    assert not res.found
    assert exists_repair(set(), set(), i, f, s).found
    # the third negated conjunct, read with P(1,1), is realized by I2'
    res = exists_repair(lookup.facts("P(1,1)."), lookup.facts("R(1,2,1)."), i, f, s)
    assert res.found and res.repair == lookup.facts("R(1,1,1). P(1,1). Q(1). Q(2).")
    assert res.blocks[lookup.fact("R(1,2,1)")] == (lookup.facts("R(1,1,1)."), frozenset())
    # outside the hull
    assert not exists_repair({Fact("Q", (7,))}, set(), i, f, s).found
    assert exists_repair(set(), {Fact("Q", (7,))}, i, f, s).found


def test_printed_pair_has_no_repair(lookup):
    # P(1,2) with R(1,2,1) dropped: P(1,2) needs Q(1) and R(1,1,1) out, then R(1,2,1) must stay
    res = exists_repair(lookup.facts("P(1,2)."), lookup.facts("R(1,2,1)."), lookup.inst(), lookup.f, lookup.schema)
    assert not res.found
    reps = enumerate_repairs(lookup.inst(), lookup.f)
    assert not any(lookup.fact("P(1,2)") in r and lookup.fact("R(1,2,1)") not in r for r in reps)


def test_cqa_verdict_and_witness(lookup):
    q = lookup.query((lookup.dir / "query.txt").read_text())
    res = CQAEngine(lookup.inst(), lookup.f, lookup.schema).answer(q)
    assert not res.answer and res.failed_clause is not None
    assert res.witness.repair == lookup.facts("R(1,1,1). P(1,1). Q(1). Q(2).")
    assert not eval_query(q, res.witness.repair)


def test_cqa_on_query_as_printed(lookup):
    q = lookup.query((lookup.dir / "query_as_printed.txt").read_text())
    assert cqa(q, lookup.inst(), lookup.f, lookup.schema)


@pytest.mark.xfail(strict=True, reason="the query as printed holds in every repair; see notes")
def test_cqa_literal_claim(lookup):
    q = lookup.query((lookup.dir / "query_as_printed.txt").read_text())
    assert cqa(q, lookup.inst(), lookup.f, lookup.schema) is False


def test_coffee_shop_answers(coffee):
    latte = coffee.query((coffee.dir / "query_latte.txt").read_text())
    espresso = coffee.query((coffee.dir / "query_espresso.txt").read_text())
    assert cqa(latte, coffee.inst(), coffee.f, coffee.schema)
    assert not cqa(espresso, coffee.inst(), coffee.f, coffee.schema)


def test_trivial_queries(lookup):
    assert cqa(QConst(True), lookup.inst(), lookup.f, lookup.schema)
    assert not cqa(QConst(False), lookup.inst(), lookup.f, lookup.schema)


def test_cqa_rejects_unsupported(diagnosis):
    with pytest.raises(UnsupportedConstraintError):
        cqa(QAtom(diagnosis.fact("NF(Steve, no)")), diagnosis.inst(), diagnosis.f, diagnosis.schema)


def test_cnf():
    a, b, c = (QAtom(Fact("P", (k,))) for k in (1, 2, 3))
    assert to_cnf(QConst(True)) == []
    assert to_cnf(QConst(False)) == [frozenset()]
    from ucqa.core import QAnd, QOr
    assert to_cnf(QOr((a, QNot(a)))) == []
    cl = to_cnf(QOr((QAnd((a, b)), c)))
    assert set(cl) == {frozenset({(a.fact, True), (c.fact, True)}),
                       frozenset({(b.fact, True), (c.fact, True)})}
    big = QOr(tuple(QAnd((QAtom(Fact("P", (2 * k,))), QAtom(Fact("P", (2 * k + 1,)))))
                    for k in range(8)))
    with pytest.raises(CNFTooLargeError):
        to_cnf(big, cap=100)


def _all_assignments(facts):
    facts = sorted(facts, key=lambda x: x.sort_key)
    for bits in itertools.product((False, True), repeat=len(facts)):
        yield frozenset(x for x, b in zip(facts, bits) if b)


def test_cnf_preserves_meaning():
    rng = random.Random(4)
    facts = [Fact("P", (k,)) for k in range(4)]
    for _ in range(60):
        q = gen_query(rng, facts, max_clauses=3, max_lits=3)
        q = QNot(q) if rng.random() < 0.5 else q
        clauses = to_cnf(q)
        for world in _all_assignments(facts):
            cnf_val = all(any((x in world) == pos for x, pos in cl) for cl in clauses)
            assert cnf_val == eval_query(q, world)


@pytest.mark.parametrize("profile", ["denial", "acyclic", "jd"])
def test_cqa_matches_enumeration(profile):
    for seed in range(20):
        s, i, f = gen_random(seed, profile)
        reps = enumerate_repairs(i, f)
        e = CQAEngine(i, f, s)
        rng = random.Random(seed)
        for _ in range(4):
            q = gen_query(rng, e.grounding.facts)
            assert e.answer(q).answer == all(eval_query(q, r) for r in reps)


def test_pruning_keeps_answers():
    for seed in range(15):
        s, i, f = gen_random(seed, "jd")
        a, b = CQAEngine(i, f, s), CQAEngine(i, f, s, prune=False)
        rng = random.Random(seed)
        for _ in range(3):
            q = gen_query(rng, a.grounding.facts)
            assert a.answer(q).answer == b.answer(q).answer
