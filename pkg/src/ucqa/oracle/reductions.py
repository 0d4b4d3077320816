"""Instance generators for the two hardness reductions, plus their ground truth.

``reduce_3col`` turns a graph into an instance over one FD and one cyclic full
TGD; the graph is 3-colorable iff some repair drops ``r``.  ``reduce_qbf``
turns a ∀*∃* 3CNF formula into an instance over two FDs and a disjunctive
constraint; the formula is valid iff ``r̄`` is in every repair.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from ..core import Fact, QAtom, Schema
from ..parser import parse_constraints, parse_schema


@dataclass
class Reduction:
    schema: Schema
    instance: frozenset
    constraints: list
    query: object
    named: dict = field(default_factory=dict)  # special facts by name


# ------------------------------------------------------------------ 3COL

_3COL_SCHEMA = "relation R(A: rat, B: rat, C: rat, D: rat)\nrelation P(C: rat)\n"
_3COL_CONSTRAINTS = """fd R: A -> B
R(x1, y1, z1, z2), R(x2, y2, z1, z2), P(z1), y1 != y2 -> P(z2)
"""


def reduce_3col(vertices: Sequence, edges: Sequence[tuple]) -> Reduction:
    vertices = list(vertices)
    if len(set(vertices)) != len(vertices):
        raise ValueError("duplicate vertex")
    pos = {v: k + 1 for k, v in enumerate(vertices)}
    es = []
    for e in edges:
        a, b = e
        if a not in pos or b not in pos:
            raise ValueError(f"edge {e!r} uses an unknown vertex")
        if a == b:
            raise ValueError(f"self-loop at {a!r}")
        es.append((a, b))
    touched = {v for e in es for v in e}
    isolated = [v for v in vertices if v not in touched]
    if isolated:
        raise ValueError(f"isolated vertices are not allowed: {isolated}")
    schema = parse_schema(_3COL_SCHEMA)
    f = parse_constraints(_3COL_CONSTRAINTS, schema)
    n, m = len(vertices), len(es)
    facts = set()
    for j, (a, b) in enumerate(es, start=1):
        for v in (a, b):
            for k in (1, 2, 3):
                facts.add(Fact("R", (pos[v], k, j - 1, j)))
    q0 = Fact("P", (0,))
    r = Fact("R", (n + 1, 0, m, m + 1))
    r1 = Fact("R", (n + 2, 1, m, m + 1))
    r2 = Fact("P", (m + 1,))
    facts |= {q0, r, r1}
    named = {"q0": q0, "r": r, "r'": r1, "r''": r2}
    return Reduction(schema, frozenset(facts), f, QAtom(r), named)


def is_3colorable(vertices: Sequence, edges: Sequence[tuple]) -> bool:
    vertices = list(vertices)
    for colors in itertools.product(range(3), repeat=len(vertices)):
        c = dict(zip(vertices, colors))
        if all(c[a] != c[b] for a, b in edges):
            return True
    return False


# ------------------------------------------------------------------- QBF

@dataclass(frozen=True)
class QBF:
    """∀ x1..xn ∃ x(n+1)..x(n+m) with 3-literal clauses as signed variable indices."""

    n_universal: int
    n_existential: int
    clauses: tuple

    def __post_init__(self):
        total = self.n_universal + self.n_existential
        if self.n_universal < 0 or self.n_existential < 0:
            raise ValueError("negative variable count")
        seen = set()
        for c in self.clauses:
            if len(c) != 3:
                raise ValueError(f"clause {c!r} does not have three literals")
            for lit in c:
                if not isinstance(lit, int) or lit == 0 or abs(lit) > total:
                    raise ValueError(f"bad literal {lit!r} in clause {c!r}")
            if tuple(c) in seen:
                raise ValueError(f"clause {c!r} repeated")
            seen.add(tuple(c))

    def is_valid(self) -> bool:
        n, m = self.n_universal, self.n_existential
        for uni in itertools.product((False, True), repeat=n):
            if not any(self._sat(uni + ex) for ex in itertools.product((False, True), repeat=m)):
                return False
        return True

    def _sat(self, val) -> bool:
        return all(any(val[abs(l) - 1] == (l > 0) for l in c) for c in self.clauses)


def qbf_from_text(text: str) -> QBF:
    """``forall 1 2 3 exists 4 5`` on the first line, then one clause per line."""
    lines = [ln.split("#")[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty QBF")
    head = lines[0].split()
    uni, ex, cur = [], [], None
    for tok in head:
        if tok == "forall":
            if cur is ex:
                raise ValueError("the prefix must be forall ... exists ...")
            cur = uni
        elif tok == "exists":
            cur = ex
        elif cur is None:
            raise ValueError("QBF prefix must start with forall or exists")
        else:
            cur.append(int(tok))
    n, m = len(uni), len(ex)
    if uni + ex != list(range(1, n + m + 1)):
        raise ValueError("variables must be numbered 1..n universally, then existentially")
    clauses = tuple(tuple(int(t) for t in ln.split()) for ln in lines[1:])
    return QBF(n, m, clauses)


def qbf_to_text(psi: QBF) -> str:
    n, m = psi.n_universal, psi.n_existential
    head = "forall " + " ".join(str(k) for k in range(1, n + 1))
    head += " exists " + " ".join(str(k) for k in range(n + 1, n + m + 1))
    return head.replace("  ", " ").strip() + "\n" + "".join(
        " ".join(str(l) for l in c) + "\n" for c in psi.clauses)


_QBF_SCHEMA = """relation R(A1: rat, B1: rat, A2: rat, B2: rat)
relation D(A1: rat, B1: rat, C1: rat, D1: rat, A2: rat, B2: rat, C2: rat, D2: rat,
           A3: rat, B3: rat, C3: rat, D3: rat, A4: rat, B4: rat, C4: rat, D4: rat)
"""
_QBF_CONSTRAINTS = """fd R: A1 -> B1
fd R: A2 -> B2
D(a1, b1, c1, d1, a2, b2, c2, d2, a3, b3, c3, d3, a4, b4, c4, d4)
  -> R(a1, b1, c1, d1) | R(a2, b2, c2, d2) | R(a3, b3, c3, d3) | R(a4, b4, c4, d4)
"""


def reduce_qbf(psi: QBF) -> Reduction:
    schema = parse_schema(_QBF_SCHEMA)
    f = parse_constraints(_QBF_CONSTRAINTS, schema)
    n = psi.n_universal
    named = {}
    facts = set()
    for i in range(1, n + psi.n_existential + 1):
        third = 0 if i <= n else 1
        named[f"p{i}"] = Fact("R", (i, 1, third, 0))
        named[f"~p{i}"] = Fact("R", (i, 0, third, 0))
        facts |= {named[f"p{i}"], named[f"~p{i}"]}

    def lit_fact(lit: int) -> Fact:
        return named[f"p{lit}"] if lit > 0 else named[f"~p{-lit}"]

    for j, c in enumerate(psi.clauses, start=1):
        args = []
        for lit in c:
            args.extend(lit_fact(lit).args)
        named[f"q{j}"] = Fact("D", tuple(args) + (0, 1, 1, 1))
        facts.add(named[f"q{j}"])
    named["r"] = Fact("R", (0, 1, 1, 1))
    named["~r"] = Fact("R", (0, 0, 0, 0))
    facts.add(named["~r"])
    return Reduction(schema, frozenset(facts), f, QAtom(named["~r"]), named)
