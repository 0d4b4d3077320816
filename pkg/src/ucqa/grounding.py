"""Hull, ground rules and the extended conflict hypergraph.

The hull is the least literal set that contains the instance and, for every
conflict whose positive facts are all in it, both polarities of the conflict's
negated facts.  We compute it semi-naively: in each round every constraint is
re-matched with one lhs atom pinned to the facts that are new in that round.
The same pass yields every firing binding exactly once, so the ground rules
fall out of the fixpoint for free.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .core import (
    Atom, ConstraintKind, Fact, Literal, UniversalConstraint, Var, canonical,
    eval_builtin, set_key, unify,
)


class FactIndex:
    """Hash index over facts by relation and by (relation, position, value)."""

    def __init__(self, facts: Iterable[Fact] = ()):
        self.by_rel: dict[str, list[Fact]] = {}
        self.by_pos: dict[tuple, list[Fact]] = {}
        self.facts: set[Fact] = set()
        for f in facts:
            self.add(f)

    def add(self, f: Fact) -> bool:
        if f in self.facts:
            return False
        self.facts.add(f)
        self.by_rel.setdefault(f.relation, []).append(f)
        for p, v in enumerate(f.args):
            self.by_pos.setdefault((f.relation, p, v), []).append(f)
        return True

    def __contains__(self, f: Fact) -> bool:
        return f in self.facts

    def __len__(self) -> int:
        return len(self.facts)

    def candidates(self, atom: Atom, binding: dict) -> list[Fact]:
        best = self.by_rel.get(atom.relation, [])
        for p, t in enumerate(atom.terms):
            v = binding.get(t) if isinstance(t, Var) else t
            if v is not None:
                bucket = self.by_pos.get((atom.relation, p, v), [])
                if len(bucket) < len(best):
                    best = bucket
                    if not best:
                        break
        return best


def iter_matches(atoms: Sequence[Atom], index: FactIndex, binding: dict | None = None,
                 allowed=None):
    """Yield (binding, facts) for every way of matching ``atoms`` into ``index``.

    ``allowed`` optionally gives, per atom, a predicate the matched fact must pass.
    """
    binding = {} if binding is None else binding
    n = len(atoms)
    chosen: list[Fact] = [None] * n  # type: ignore[list-item]

    def go(k: int, b: dict):
        if k == n:
            yield b, tuple(chosen)
            return
        atom = atoms[k]
        ok = allowed[k] if allowed is not None else None
        for f in index.candidates(atom, b):
            if ok is not None and not ok(f):
                continue
            b2 = unify(atom, f, b)
            if b2 is not None:
                chosen[k] = f
                yield from go(k + 1, b2)

    yield from go(0, binding)


@dataclass(frozen=True)
class GroundRule:
    """``lhs → rhs`` over hull facts; an empty rhs reads ``false``.

    ``unfolded`` keeps, for rules from JD constraints, every positional lhs
    bag (one fact per constraint atom) that produced the rule.
    """

    lhs: frozenset
    rhs: frozenset
    origin: int
    origins: frozenset = frozenset()
    kinds: frozenset = frozenset()
    unfolded: frozenset = frozenset()

    @property
    def literals(self) -> frozenset:
        return frozenset(Literal(f, True) for f in self.lhs) | frozenset(Literal(f, False) for f in self.rhs)

    @property
    def is_denial(self) -> bool:
        return not self.rhs

    @property
    def is_jd(self) -> bool:
        return ConstraintKind.JD in self.kinds

    @property
    def is_tgd(self) -> bool:
        """Single-rhs rule: it takes part in the immediate-consequence operator."""
        return len(self.rhs) == 1

    @property
    def head(self) -> Fact:
        (f,) = self.rhs
        return f

    @property
    def sort_key(self):
        return (set_key(self.lhs), set_key(self.rhs))

    def satisfied_by(self, facts) -> bool:
        return not self.lhs <= facts or bool(self.rhs & facts)

    def __repr__(self) -> str:
        lhs = " ∧ ".join(repr(f) for f in canonical(self.lhs)) or "true"
        rhs = " ∨ ".join(repr(f) for f in canonical(self.rhs)) or "false"
        return f"{lhs} → {rhs}"


@dataclass(frozen=True)
class Hull:
    instance: frozenset
    positive: frozenset
    negative: frozenset  # facts whose negation is in the hull

    @property
    def literals(self) -> frozenset:
        return frozenset(Literal(f, True) for f in self.positive) | frozenset(
            Literal(f, False) for f in self.negative)

    def __contains__(self, item) -> bool:
        if isinstance(item, Literal):
            return item.fact in (self.positive if item.positive else self.negative)
        return item in self.positive

    def __len__(self) -> int:
        return len(self.positive) + len(self.negative)


@dataclass
class _Builder:
    constraints: Sequence[UniversalConstraint]
    rules: dict = field(default_factory=dict)

    def record(self, ci: int, c: UniversalConstraint, b: dict, facts: tuple) -> list[Fact]:
        rhs = [a.ground(b) for a in c.rhs]
        lhs = frozenset(facts)
        key = (lhs, frozenset(rhs))
        entry = self.rules.get(key)
        if entry is None:
            entry = self.rules[key] = [set(), set(), set()]
        entry[0].add(ci)
        entry[1].add(c.kind)
        if c.jd is not None:
            entry[2].add(facts)
        return rhs

    def finish(self) -> list[GroundRule]:
        out = []
        for (lhs, rhs), (origins, kinds, unf) in self.rules.items():
            out.append(GroundRule(lhs, rhs, min(origins), frozenset(origins), frozenset(kinds),
                                  frozenset(unf)))
        out.sort(key=lambda r: (r.sort_key, r.origin))
        return out


def _order_atoms(atoms: Sequence[Atom], pivot: int) -> list[int]:
    """Join order: the pivot first, then greedily the atom sharing most bound variables."""
    order = [pivot]
    bound = set(atoms[pivot].variables())
    rest = [i for i in range(len(atoms)) if i != pivot]
    while rest:
        best = max(rest, key=lambda i: (len(atoms[i].variables() & bound), -i))
        order.append(best)
        rest.remove(best)
        bound |= atoms[best].variables()
    return order


def _saturate(instance: frozenset, constraints: Sequence[UniversalConstraint]):
    index = FactIndex(instance)
    negative: set[Fact] = set()
    builder = _Builder(constraints)
    plans = [[_order_atoms(c.lhs, p) for p in range(len(c.lhs))] for c in constraints]

    def fire(ci, c, b, facts):
        if not eval_builtin(c.guard, b):
            return
        for f in builder.record(ci, c, b, facts):
            negative.add(f)
            if f not in index:
                pending.append(f)

    pending: list[Fact] = []
    for ci, c in enumerate(constraints):
        if not c.lhs:
            fire(ci, c, {}, ())
    delta = set(instance)
    while delta:
        for ci, c in enumerate(constraints):
            n = len(c.lhs)
            for pivot in range(n):
                order = plans[ci][pivot]
                atoms = [c.lhs[i] for i in order]
                allowed = []
                for i in order:
                    if i == pivot:
                        allowed.append(delta.__contains__)
                    elif i < pivot:
                        allowed.append(lambda f, d=delta: f not in d)
                    else:
                        allowed.append(None)
                for b, chosen in iter_matches(atoms, index, {}, allowed):
                    facts = [None] * n
                    for pos, f in zip(order, chosen):
                        facts[pos] = f
                    fire(ci, c, b, tuple(facts))
        delta = set()
        for f in pending:
            if index.add(f):
                delta.add(f)
        pending = []
    positive = frozenset(index.facts)
    return Hull(instance, positive, frozenset(negative)), builder.finish()


def compute_hull(i: Iterable[Fact], f: Sequence[UniversalConstraint]) -> Hull:
    return _saturate(frozenset(i), list(f))[0]


def ground_rules(i: Iterable[Fact], f: Sequence[UniversalConstraint]) -> list[GroundRule]:
    return _saturate(frozenset(i), list(f))[1]


@dataclass(frozen=True)
class ConflictHypergraph:
    vertices: frozenset
    conflict_edges: tuple
    stabilizing_edges: tuple

    @property
    def edges(self) -> tuple:
        return self.conflict_edges + self.stabilizing_edges

    def to_json(self) -> dict:
        from .parser import serialize_fact

        def lit(l: Literal) -> str:
            s = serialize_fact(l.fact)
            return s if l.positive else "not " + s

        return {
            "vertices": [lit(v) for v in canonical(self.vertices)],
            "conflict_edges": [[lit(v) for v in canonical(e)] for e in self.conflict_edges],
            "stabilizing_edges": [[lit(v) for v in canonical(e)] for e in self.stabilizing_edges],
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"

    def to_dot(self) -> str:
        from .parser import serialize_fact

        def name(l: Literal) -> str:
            s = serialize_fact(l.fact)
            label = s if l.positive else "¬" + s
            return json.dumps(label, ensure_ascii=False)

        lines = ["graph conflicts {", "  node [shape=plaintext];"]
        for v in canonical(self.vertices):
            lines.append(f"  {name(v)};")
        for k, e in enumerate(self.conflict_edges):
            lines.append(f'  e{k} [shape=diamond, label="", width=0.15, height=0.15];')
            for v in canonical(e):
                lines.append(f"  e{k} -- {name(v)};")
        for e in self.stabilizing_edges:
            a, b = canonical(e)
            lines.append(f"  {name(a)} -- {name(b)} [style=dotted];")
        lines.append("}")
        return "\n".join(lines) + "\n"


def hypergraph_from(hull: Hull, rules: Sequence[GroundRule]) -> ConflictHypergraph:
    conflict = tuple(r.literals for r in rules)
    stab = tuple(frozenset({Literal(f, True), Literal(f, False)}) for f in canonical(hull.negative))
    return ConflictHypergraph(hull.literals, conflict, stab)


def build_hypergraph(i: Iterable[Fact], f: Sequence[UniversalConstraint]) -> ConflictHypergraph:
    hull, rules = _saturate(frozenset(i), list(f))
    return hypergraph_from(hull, rules)


def is_independent(m: Iterable[Literal], g: ConflictHypergraph) -> bool:
    m = frozenset(m)
    return not any(e <= m for e in g.edges)


def is_maximal_independent(m: Iterable[Literal], g: ConflictHypergraph) -> bool:
    m = frozenset(m)
    stray = m - g.vertices
    if stray:
        raise ValueError(f"not hypergraph vertices: {canonical(stray)}")
    if not is_independent(m, g):
        return False
    for v in g.vertices - m:
        grown = m | {v}
        if not any(v in e and e <= grown for e in g.edges):
            return False
    return True


def complement(iprime: Iterable[Fact], hull: Hull) -> frozenset:
    iprime = frozenset(iprime)
    stray = iprime - hull.positive
    if stray:
        raise ValueError(f"facts outside the hull: {canonical(stray)}")
    return frozenset(Literal(f, True) for f in iprime) | frozenset(
        Literal(f, False) for f in hull.negative if f not in iprime)


def positive_projection(m: Iterable[Literal]) -> frozenset:
    return frozenset(l.fact for l in m if l.positive)


class Grounding:
    """Hull facts numbered in canonical order, with every rule as a pair of bitmasks."""

    def __init__(self, i: Iterable[Fact], f: Sequence[UniversalConstraint]):
        self.instance = frozenset(i)
        self.constraints = list(f)
        self.hull, self.rules = _saturate(self.instance, self.constraints)
        self.facts = canonical(self.hull.positive)
        self.bit = {fact: k for k, fact in enumerate(self.facts)}
        self.imask = self.mask(self.instance)
        self.lhs_masks = [self.mask(r.lhs) for r in self.rules]
        self.rhs_masks = [self.mask(r.rhs) for r in self.rules]
        tgd = [k for k, r in enumerate(self.rules) if r.is_tgd]
        self.tgd_lhs = [self.lhs_masks[k] for k in tgd]
        self.tgd_rhs = [self.rhs_masks[k] for k in tgd]

    @property
    def nbits(self) -> int:
        return len(self.facts)

    def mask(self, facts: Iterable[Fact]) -> int:
        m = 0
        for f in facts:
            m |= 1 << self.bit[f]
        return m

    def in_hull(self, facts: Iterable[Fact]) -> bool:
        return all(f in self.bit for f in facts)

    def facts_of(self, mask: int) -> frozenset:
        out = []
        k = 0
        while mask:
            if mask & 1:
                out.append(self.facts[k])
            mask >>= 1
            k += 1
        return frozenset(out)

    def hypergraph(self) -> ConflictHypergraph:
        return hypergraph_from(self.hull, self.rules)
