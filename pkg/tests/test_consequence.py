import random

from hypothesis import given, settings, strategies as st

from ucqa.consequence import RuleIndex, closure_of, t_f_closure, t_f_step
from ucqa.grounding import Grounding, ground_rules
from ucqa.oracle import PROFILES, gen_random


def test_step_fires_listed_rule(chain):
    idx = RuleIndex(ground_rules(chain.inst(), chain.f))
    assert t_f_step(chain.facts("R(1,2). P(1)."), idx) == chain.facts("R(1,2). P(1). P(2).")
    assert t_f_step(set(), idx) == frozenset()
    full = chain.inst() | chain.facts("P(2). P(3).")
    assert t_f_step(full, idx) == full


def test_closure_cascades(chain):
    rules = ground_rules(chain.inst(), chain.f)
    assert closure_of(chain.inst(), rules) == chain.inst() | chain.facts("P(2). P(3).")
    assert closure_of(set(), rules) == frozenset()


def test_denial_rules_are_not_indexed(lookup):
    idx = RuleIndex(ground_rules(lookup.inst(), lookup.f))
    assert len(idx) == 4


def _iterate(j, idx):
    while True:
        nxt = t_f_step(j, idx)
        if nxt == j:
            return j
        j = nxt


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(PROFILES), st.integers(0, 200), st.integers(0, 2**16))
def test_closure_is_least_fixpoint(profile, seed, pick):
    _, i, f = gen_random(seed, profile)
    g = Grounding(i, f)
    idx = RuleIndex(g.rules)
    rng = random.Random(pick)
    j = frozenset(x for x in g.facts if rng.random() < 0.5)
    c = t_f_closure(j, idx)
    assert c == _iterate(j, idx)
    assert j <= c and t_f_step(c, idx) == c
    assert t_f_closure(c, idx) == c
    # monotone
    k = frozenset(x for x in j if rng.random() < 0.5)
    assert t_f_closure(k, idx) <= c
