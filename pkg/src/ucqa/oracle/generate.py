"""Seeded random instances and queries sized for exhaustive checking."""
from __future__ import annotations

import random

from ..core import Fact, QAnd, QAtom, QNot, QOr, canonical
from ..grounding import compute_hull
from ..parser import parse_constraints, parse_schema
from .reductions import QBF

PROFILES = ("denial", "acyclic", "jd", "cyclic", "universal")

SCHEMA_TEXT = """relation R(A: rat, B: rat, C: rat)
relation P(A: rat, B: rat)
relation Q(A: rat)
relation S(N: sym, V: rat)
"""

_DENIALS = [
    "fd R: A -> B",
    "fd R: 1,2 -> 3",
    "fd P: 1 -> 2",
    "fd S: N -> V",
    "R(x, y, z), Q(x) -> false",
    "P(x, y), Q(y), x < y -> false",
    "R(x, y, z), P(y, z) -> false",
    "Q(x), x > 2 -> false",
    "S(n, v), Q(v) -> false",
    "P(x, y), P(y, x), x != y -> false",
]
# heads only mention relations below every body relation: R, S above P above Q
_ACYCLIC = [
    "R(x, y, z) -> P(x, y)",
    "P(x, y) -> Q(x)",
    "R(x, y, z), x != z -> Q(y)",
    "R(x, y, z), R(y, x, w) -> Q(z)",
    "S(n, v) -> Q(v)",
    "P(x, y), P(y, x) -> Q(x)",
    "R(x, y, z), y <= z -> P(z, x)",
]
_CYCLIC = [
    "P(x, y) -> P(y, x)",
    "Q(x), P(x, y) -> Q(y)",
    "P(x, y), Q(y) -> R(x, y, y)",
]
# per relation: alternatives of JD sets that a single JD can replace
_JDS = {
    "R": [["jd R: [A,B][B,C]"], ["jd R: [A,B][A,C]"], ["jd R: [A,B][B,C]", "jd R: [A][B,C]"]],
    "P": [["jd P: [A][B]"]],
}
_UNIVERSAL = [
    "R(x, y, z) -> P(x, y) | Q(z)",
    "P(x, y), x != y -> Q(x) | Q(y)",
    "Q(x), x < 2 -> P(x, x) | S('a', x)",
]

_SYMBOLS = ("a", "b")


def schema():
    return parse_schema(SCHEMA_TEXT)


def _random_fact(rng: random.Random, rel: str, dom: int) -> Fact:
    if rel == "S":
        return Fact("S", (rng.choice(_SYMBOLS), rng.randint(1, dom)))
    arity = {"R": 3, "P": 2, "Q": 1}[rel]
    return Fact(rel, tuple(rng.randint(1, dom) for _ in range(arity)))


def _pick(rng: random.Random, pool, lo: int, hi: int) -> list[str]:
    return rng.sample(pool, rng.randint(lo, min(hi, len(pool))))


def _constraint_texts(rng: random.Random, profile: str) -> list[str]:
    if profile == "denial":
        return _pick(rng, _DENIALS, 1, 3)
    if profile == "acyclic":
        return _pick(rng, _ACYCLIC, 1, 3) + _pick(rng, _DENIALS, 1, 2)
    if profile == "jd":
        out = []
        for rel in rng.sample(sorted(_JDS), rng.randint(1, len(_JDS))):
            out += rng.choice(_JDS[rel])
        out += _pick(rng, _DENIALS, 1, 2)
        if rng.random() < 0.6:
            out += _pick(rng, _ACYCLIC, 1, 2)
        return out
    if profile == "cyclic":
        return _pick(rng, _CYCLIC, 1, 2) + _pick(rng, _ACYCLIC, 0, 1) + _pick(rng, _DENIALS, 1, 2)
    if profile == "universal":
        return _pick(rng, _UNIVERSAL, 1, 2) + _pick(rng, _ACYCLIC, 0, 1) + _pick(rng, _DENIALS, 1, 2)
    raise ValueError(f"unknown profile {profile!r}; expected one of {', '.join(PROFILES)}")


def gen_random(seed: int, profile: str = "denial", max_hull: int = 14, max_facts: int = 7,
               dom: int = 2):
    """(schema, instance, constraints) with at most ``max_hull`` positive hull facts.

    Draws are repeated from the same RNG until the hull fits, so a seed fixes
    the result.
    """
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}; expected one of {', '.join(PROFILES)}")
    rng = random.Random(f"{profile}:{seed}")
    s = schema()
    for _ in range(1000):
        texts = _constraint_texts(rng, profile)
        f = parse_constraints("\n".join(texts), s)
        rels = sorted({a.relation for c in f for a in c.lhs + c.rhs})
        n = rng.randint(2, max_facts)
        facts = frozenset(_random_fact(rng, rng.choice(rels), dom) for _ in range(n))
        if len(compute_hull(facts, f).positive) <= max_hull:
            return s, facts, f
    raise RuntimeError("could not draw an instance within the hull bound")


def gen_query(rng: random.Random, facts, extra=(), max_clauses: int = 3, max_lits: int = 3):
    """A random CNF query over ``facts`` (plus occasional ``extra`` facts)."""
    pool = canonical(facts)
    extra = canonical(extra)
    clauses = []
    for _ in range(rng.randint(1, max_clauses)):
        lits = []
        for _ in range(rng.randint(1, max_lits)):
            src = extra if extra and rng.random() < 0.15 else pool
            atom = QAtom(rng.choice(src))
            lits.append(atom if rng.random() < 0.5 else QNot(atom))
        clauses.append(lits[0] if len(lits) == 1 else QOr(tuple(lits)))
    return clauses[0] if len(clauses) == 1 else QAnd(tuple(clauses))


def gen_qbf(seed: int, max_universal: int = 2, max_existential: int = 2, max_clauses: int = 8) -> QBF:
    """A small random ∀*∃* 3CNF with distinct clauses over distinct variables."""
    rng = random.Random(f"qbf:{seed}")
    n = rng.randint(0, max_universal)
    m = rng.randint(1, max_existential)
    total = n + m
    clauses = set()
    for _ in range(rng.randint(2, max_clauses)):
        vs = [rng.randint(1, total) for _ in range(3)]
        clauses.add(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return QBF(n, m, tuple(sorted(clauses)))
