import itertools

import pytest

from ucqa.core import Fact, Literal, Var, eval_builtin
from ucqa.grounding import (Grounding, build_hypergraph, complement, compute_hull, ground_rules,
                            is_maximal_independent, positive_projection)
from ucqa.oracle import gen_random


def _brute_conflicts(facts, f):
    """Every (lhs, rhs) conflict of ``f`` whose lhs lies inside ``facts``, by full grounding."""
    dom = {a for x in facts for a in x.args}
    for c in f:
        for a in c.lhs + c.rhs:
            dom |= {t for t in a.terms if not isinstance(t, Var)}
    out = set()
    for c in f:
        vs = sorted(c.lhs_variables(), key=lambda v: v.name)
        for vals in itertools.product(sorted(dom, key=str), repeat=len(vs)):
            b = dict(zip(vs, vals))
            try:
                lhs = frozenset(a.ground(b) for a in c.lhs)
            except Exception:
                continue
            if not lhs <= facts:
                continue
            try:
                if not eval_builtin(c.guard, b):
                    continue
            except Exception:
                continue
            try:
                rhs = frozenset(a.ground(b) for a in c.rhs)
            except Exception:
                continue
            out.add((lhs, rhs))
    return out


def _brute_hull(i, f):
    pos, neg = set(i), set()
    while True:
        grown = False
        for lhs, rhs in _brute_conflicts(frozenset(pos), f):
            for x in rhs:
                if x not in neg:
                    pos.add(x)
                    neg.add(x)
                    grown = True
        if not grown:
            return frozenset(pos), frozenset(neg)


def test_cascade_hull(chain):
    h = compute_hull(chain.inst(), chain.f)
    assert h.positive == chain.inst() | chain.facts("P(2). P(3).")
    assert h.negative == chain.facts("P(2). P(3).")
    assert len(h) == 7


def test_denial_hull_is_the_instance():
    for seed in range(20):
        _, i, f = gen_random(seed, "denial")
        h = compute_hull(i, f)
        assert h.positive == i and not h.negative


def test_empty_instance_and_no_constraints(chain):
    assert len(compute_hull(set(), chain.f)) == 0
    assert ground_rules(chain.inst(), []) == []


def _rules(rs):
    return {(r.lhs, r.rhs) for r in rs}


def test_support_example_rules(lookup):
    facts = lookup.facts
    expected = {
        (facts("R(1,1,1)."), facts("P(1,1).")),
        (facts("R(1,2,1)."), facts("P(1,2).")),
        (facts("P(1,1)."), facts("Q(1).")),
        (facts("P(1,2)."), facts("Q(1).")),
        (facts("P(1,1). P(1,2)."), frozenset()),
    }
    assert _rules(ground_rules(lookup.inst(), lookup.f)) == expected
    h = compute_hull(lookup.inst(), lookup.f)
    assert h.positive == lookup.inst() | facts("P(1,1). Q(1).")


def test_cascade_rules(chain):
    f = chain.facts
    assert _rules(ground_rules(chain.inst(), chain.f)) == {
        (f("R(1,2). P(1)."), f("P(2).")), (f("R(2,3). P(2)."), f("P(3)."))}


def test_cascade_hypergraph(chain):
    g = build_hypergraph(chain.inst(), chain.f)
    pos = lambda t: Literal(chain.fact(t), True)
    neg = lambda t: Literal(chain.fact(t), False)
    assert set(g.conflict_edges) == {
        frozenset({pos("R(1,2)"), pos("P(1)"), neg("P(2)")}),
        frozenset({pos("R(2,3)"), pos("P(2)"), neg("P(3)")})}
    assert set(g.stabilizing_edges) == {
        frozenset({pos("P(2)"), neg("P(2)")}), frozenset({pos("P(3)"), neg("P(3)")})}
    assert neg("P(1)") not in g.vertices


def test_consistent_denial_instance_has_no_edges():
    from ucqa.parser import parse_constraints, parse_instance, parse_schema
    s = parse_schema("relation P(A: rat, B: rat)")
    g = build_hypergraph(parse_instance("P(1,1). P(2,1).", s), parse_constraints("fd P: A -> B", s))
    assert g.edges == ()


def test_complement_and_maximal_independence(chain):
    g = build_hypergraph(chain.inst(), chain.f)
    h = compute_hull(chain.inst(), chain.f)
    i2 = chain.facts("R(2,3). P(1).")
    c = complement(i2, h)
    assert c == {Literal(chain.fact("R(2,3)")), Literal(chain.fact("P(1)")),
                 Literal(chain.fact("P(2)"), False), Literal(chain.fact("P(3)"), False)}
    assert is_maximal_independent(c, g)
    first = {Literal(chain.fact("R(1,2)")), Literal(chain.fact("P(1)")), Literal(chain.fact("P(2)"), False)}
    assert not is_maximal_independent(first, g)
    assert not is_maximal_independent(set(), g)
    assert complement(set(), h) == {Literal(chain.fact("P(2)"), False), Literal(chain.fact("P(3)"), False)}
    with pytest.raises(ValueError):
        complement({Fact("P", (9,))}, h)
    with pytest.raises(ValueError):
        is_maximal_independent({Literal(Fact("P", (9,)))}, g)


def test_complement_without_negations():
    from ucqa.parser import parse_constraints, parse_instance, parse_schema
    s = parse_schema("relation P(A: rat, B: rat)")
    i = parse_instance("P(1,1). P(1,2).", s)
    h = compute_hull(i, parse_constraints("fd P: A -> B", s))
    assert complement(h.positive, h) == {Literal(x) for x in i}


def test_positive_projection(chain):
    m = {Literal(chain.fact("R(1,2)")), Literal(chain.fact("P(2)"), False),
         Literal(chain.fact("R(2,3)")), Literal(chain.fact("P(3)"), False)}
    assert positive_projection(m) == chain.facts("R(1,2). R(2,3).")
    assert positive_projection({Literal(chain.fact("P(2)"), False)}) == frozenset()


@pytest.mark.parametrize("profile", ["denial", "acyclic", "jd", "cyclic", "universal"])
def test_rules_and_hull_match_brute_grounding(profile):
    for seed in range(8):
        _, i, f = gen_random(seed, profile, max_hull=10, max_facts=5)
        g = Grounding(i, f)
        pos, neg = _brute_hull(i, f)
        assert g.hull.positive == pos and g.hull.negative == neg
        assert _rules(g.rules) == _brute_conflicts(pos, f)


def test_grounding_masks_agree_with_rules(lookup):
    g = Grounding(lookup.inst(), lookup.f)
    assert g.facts_of(g.imask) == lookup.inst()
    for r, lm, rm in zip(g.rules, g.lhs_masks, g.rhs_masks):
        assert g.facts_of(lm) == r.lhs and g.facts_of(rm) == r.rhs
    assert g.hypergraph().conflict_edges == build_hypergraph(lookup.inst(), lookup.f).conflict_edges
