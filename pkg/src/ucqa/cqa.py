"""Consistent answers to ground quantifier-free queries.

Handles denial constraints, join dependencies and acyclic full TGDs.  The
constraint set is first normalized to carry exactly one JD per relation (the
merge of the declared ones, or the trivial JD).  Every hull fact then gets its
supports (subsets of I that force it into a repair) and blocks (a subset of I
plus at most one forbidden non-instance fact that keep it out).  A negated CNF
clause asks for some facts to be present and others absent; such a repair
exists iff one combination of supports and blocks, closed under the
single-head rules, is consistent and avoids every forbidden fact.

Supports and blocks are built level by level, ℓ = -1 .. h, where h is the
longest simple path in the dependency graph.  Levels are cumulative.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import kernels
from .core import (
    Fact, QAnd, QAtom, QConst, QNot, QOr, Schema, UniversalConstraint,
    UnsupportedConstraintError, canonical, infer_schema, make_jd, set_key,
)
from .grounding import Grounding
from .repair import RepairStrategy, construct_repair


class CNFTooLargeError(ValueError):
    pass


# ------------------------------------------------------------ dependency graph

@dataclass(frozen=True)
class DependencyGraph:
    nodes: tuple
    edges: frozenset  # (source, target): rhs relation → lhs relation
    depth: dict
    height: dict

    @property
    def h(self) -> int:
        return max(self.height.values(), default=0)

    def successors(self, node: str) -> list[str]:
        return sorted(t for s, t in self.edges if s == node)

    def to_json(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "edges": [list(e) for e in sorted(self.edges)],
            "depth": {n: self.depth[n] for n in self.nodes},
            "height": {n: self.height[n] for n in self.nodes},
            "h": self.h,
        }


def _longest_simple_paths(nodes, succ) -> dict:
    """Length of the longest simple path starting at each node (exhaustive DFS)."""
    best = {}
    for start in nodes:
        longest = 0
        stack = [(start, frozenset([start]), 0)]
        while stack:
            node, seen, length = stack.pop()
            longest = max(longest, length)
            for nxt in succ.get(node, ()):
                if nxt not in seen:
                    stack.append((nxt, seen | {nxt}, length + 1))
        best[start] = longest
    return best


def dependency_graph(f: Sequence[UniversalConstraint], s: Schema | None = None) -> DependencyGraph:
    """Edges run from every head relation to every body relation of a constraint."""
    nodes = set(s) if s is not None else set()
    edges = set()
    for c in f:
        for a in c.lhs:
            nodes.add(a.relation)
        for p in c.rhs:
            nodes.add(p.relation)
            for a in c.lhs:
                edges.add((p.relation, a.relation))
    fwd: dict[str, list[str]] = {}
    back: dict[str, list[str]] = {}
    for a, b in edges:
        fwd.setdefault(a, []).append(b)
        back.setdefault(b, []).append(a)
    nodes = tuple(sorted(nodes))
    return DependencyGraph(nodes, frozenset(edges), _longest_simple_paths(nodes, back),
                           _longest_simple_paths(nodes, fwd))


def is_acyclic(g: DependencyGraph) -> bool:
    succ = {n: g.successors(n) for n in g.nodes}
    color = dict.fromkeys(g.nodes, 0)
    for root in g.nodes:
        if color[root]:
            continue
        color[root] = 1
        stack = [(root, iter(succ[root]))]
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[node] = 2
                stack.pop()
            elif color[nxt] == 1:
                return False
            elif color[nxt] == 0:
                color[nxt] = 1
                stack.append((nxt, iter(succ[nxt])))
    return True


# -------------------------------------------------------------------- JD merge

def merge_jds(jds: Iterable, arity: int | None = None) -> tuple:
    """Fold JDs on one relation into a single component list.

    Each JD is a JD constraint or a sequence of 0-based attribute sets.  The
    fold takes all pairwise intersections, drops empty ones and duplicates.
    With no JDs the result is the trivial JD over ``range(arity)``.
    """
    comps_list = []
    relations = set()
    for jd in jds:
        if isinstance(jd, UniversalConstraint):
            if jd.jd is None:
                raise ValueError(f"{jd!r} is not a join dependency")
            relations.add(jd.lhs[0].relation)
            comps_list.append([frozenset(c) for c in jd.jd])
        else:
            comps_list.append([frozenset(c) for c in jd])
    if len(relations) > 1:
        raise ValueError(f"join dependencies on different relations: {sorted(relations)}")
    if not comps_list:
        if arity is None:
            raise ValueError("the trivial JD needs the relation's arity")
        return (tuple(range(arity)),)
    merged = comps_list[0]
    for nxt in comps_list[1:]:
        out = []
        for x in merged:
            for y in nxt:
                z = x & y
                if z and z not in out:
                    out.append(z)
        merged = out
    dedup = []
    for z in merged:
        if z not in dedup:
            dedup.append(z)
    return tuple(tuple(sorted(z)) for z in dedup)


def join_projections(rows: Iterable[tuple], comps: Sequence[Sequence[int]]) -> set:
    """Natural join of the projections of ``rows`` onto ``comps`` (0-based positions)."""
    rows = list(rows)
    if not rows:
        return set()
    width = len(rows[0])
    partial = [{}]
    for comp in comps:
        proj = {tuple((p, r[p]) for p in comp) for r in rows}
        nxt = []
        for part in partial:
            for pr in proj:
                if all(part.get(p, v) == v for p, v in pr):
                    merged = dict(part)
                    merged.update(pr)
                    nxt.append(merged)
        # collapse duplicates early
        partial = [dict(t) for t in {tuple(sorted(d.items())) for d in nxt}]
    return {tuple(d[p] for p in range(width)) for d in partial if len(d) == width}


def jd_holds(rows: Iterable[tuple], comps: Sequence[Sequence[int]]) -> bool:
    rows = set(rows)
    return join_projections(rows, comps) <= rows


def jd_implies(jds: Sequence[Sequence[Sequence[int]]], target: Sequence[Sequence[int]],
               arity: int) -> bool:
    """Tableau chase: does every relation satisfying all of ``jds`` satisfy ``target``?"""
    goal = tuple(("d", a) for a in range(arity))
    rows = {tuple(("d", a) if a in comp else ("n", i, a) for a in range(arity))
            for i, comp in enumerate(target)}
    while goal not in rows:
        grown = set(rows)
        for jd in jds:
            grown |= join_projections(rows, jd)
        if grown == rows:
            return False
        rows = grown
    return True


def check_supported(f: Sequence[UniversalConstraint], schema: Schema | None = None) -> None:
    """Raise unless ``f`` is denial constraints, mergeable JDs and acyclic full TGDs."""
    others = []
    by_rel: dict[str, list] = {}
    for c in f:
        if len(c.rhs) > 1:
            raise UnsupportedConstraintError(
                f"consistent answers need denial constraints, JDs and acyclic full TGDs; "
                f"{c!r} is a general universal constraint")
        if c.jd is None:
            others.append(c)
        else:
            by_rel.setdefault(c.lhs[0].relation, []).append(c.jd)
    if not is_acyclic(dependency_graph(others, schema)):
        raise UnsupportedConstraintError(
            "consistent answers need the full TGDs other than JDs to be acyclic; "
            "this set is cyclic")
    for rel, jds in sorted(by_rel.items()):
        arity = len(next(c for c in f if c.jd is not None and c.lhs[0].relation == rel).rhs[0].terms)
        merged = merge_jds(jds, arity)
        if not jd_implies(jds, merged, arity):
            raise UnsupportedConstraintError(
                f"the join dependencies on {rel} are not equivalent to a single JD "
                f"(their merge {[list(c) for c in merged]} is strictly stronger)")


def normalize(f: Sequence[UniversalConstraint], schema: Schema) -> list[UniversalConstraint]:
    """Non-JD constraints plus exactly one (merged or trivial) JD per relation."""
    out = [c for c in f if c.jd is None]
    by_rel: dict[str, list] = {}
    for c in f:
        if c.jd is not None:
            by_rel.setdefault(c.lhs[0].relation, []).append(c)
    for rel in schema:
        comps = merge_jds(by_rel.get(rel, []), schema.arity(rel))
        out.append(make_jd(schema, rel, [[p + 1 for p in comp] for comp in comps]))
    return out


# ---------------------------------------------------------- supports & blocks

def _popcount(x: int) -> int:
    return bin(x).count("1")


def _minimal(masks) -> set:
    kept: list[int] = []
    for m in sorted(set(masks), key=lambda x: (_popcount(x), x)):
        if not any(k & ~m == 0 for k in kept):
            kept.append(m)
    return set(kept)


def _undominated(blocks) -> set:
    kept: list[tuple[int, int]] = []
    for b, n in sorted(set(blocks), key=lambda p: (_popcount(p[0]) + _popcount(p[1]), p)):
        if not any(kb & ~b == 0 and kn & ~n == 0 for kb, kn in kept):
            kept.append((b, n))
    return set(kept)


def _product(factors, prune: bool) -> set:
    acc = {0}
    for options in factors:
        if not options:
            return set()
        acc = {a | o for a in acc for o in options}
        if prune:
            acc = _minimal(acc)
    return acc


class _Tables:
    """Supports and blocks as bitmasks over the grounding's hull facts."""

    def __init__(self, g: Grounding, h: int, prune: bool = True):
        self.g = g
        self.h = h
        self.prune = prune
        n = g.nbits
        self.in_i = [bool(g.imask >> b & 1) for b in range(n)]
        self.heads: list[list[list[int]]] = [[] for _ in range(n)]  # single-head rules by head
        self.jd_heads: list[list[list[int]]] = [[] for _ in range(n)]
        self.denials: list[list[int]] = []
        for r in g.rules:
            lhs = sorted(g.bit[x] for x in r.lhs)
            if r.is_denial:
                self.denials.append(lhs)
            elif r.is_tgd:
                head = g.bit[r.head]
                self.heads[head].append(lhs)
                if r.is_jd:
                    self.jd_heads[head].append(lhs)
        self.relation = [fact.relation for fact in g.facts]
        self.supp_levels = self._supports()
        self.supp = self.supp_levels[-1]
        self.block_levels = self._blocks()
        self.block = self.block_levels[-1]
        if prune:
            self.block = [{(b, n) for b, n in bl if not b >> k & 1} for k, bl in enumerate(self.block)]

    def _supports(self) -> list[list[set]]:
        n = self.g.nbits
        cur = [{1 << b} if self.in_i[b] else set() for b in range(n)]
        levels = [cur]
        for _ in range(self.h + 1):
            prev = cur
            one_step = []
            for b in range(n):
                opts = set()
                for lhs in self.heads[b]:
                    opts |= _product([prev[x] for x in lhs], self.prune)
                one_step.append(_minimal(opts) if self.prune else opts)
            cur = []
            for b in range(n):
                s = set(prev[b])
                if not self.in_i[b]:
                    for lhs in self.jd_heads[b]:
                        s |= _product([one_step[x] for x in lhs], self.prune)
                cur.append(_minimal(s) if self.prune else s)
            levels.append(cur)
        return levels

    def _rewrites(self, f: int, x: int) -> set:
        """Support options for deriving ``x`` by a JD rule whose body contains ``f``."""
        opts = set()
        for lhs in self.jd_heads[x]:
            if f in lhs:
                opts |= _product([self.supp[y] for y in lhs if y != f], self.prune)
        return opts

    def _combine(self, f: int, lhs: list[int]):
        """Yield B-parts for a rule body: some facts of f's relation rewritten through f."""
        rel = self.relation[f]
        own = [x for x in lhs if self.relation[x] == rel]
        for size in range(1, len(own) + 1):
            for xs in itertools.combinations(own, size):
                rest = [y for y in lhs if y not in xs]
                factors = [self._rewrites(f, x) for x in xs] + [self.supp[y] for y in rest]
                yield from _product(factors, self.prune)

    def _blocks(self) -> list[list[set]]:
        n = self.g.nbits
        base = []
        for f in range(n):
            if not self.in_i[f]:
                base.append({(0, 1 << f)})
                continue
            bl = set()
            for lhs in self.denials:
                if any(self.relation[x] == self.relation[f] for x in lhs):
                    bl |= {(b, 0) for b in self._combine(f, lhs)}
            base.append(_undominated(bl) if self.prune else bl)
        levels = [base]
        single = [(head, lhs) for head in range(n) for lhs in self.heads[head]]
        cur = base
        for _ in range(self.h + 1):
            prev = cur
            cur = []
            for f in range(n):
                bl = set(prev[f])
                if self.in_i[f]:
                    for head, lhs in single:
                        if not prev[head]:
                            continue
                        if not any(self.relation[x] == self.relation[f] for x in lhs):
                            continue
                        for b in self._combine(f, lhs):
                            bl |= {(b | pb, pn) for pb, pn in prev[head]}
                cur.append(_undominated(bl) if self.prune else bl)
            levels.append(cur)
        return levels


def _facts_sorted(g: Grounding, mask: int) -> list:
    return canonical(g.facts_of(mask))


def _mask_key(g: Grounding, mask: int):
    return (_popcount(mask), set_key(g.facts_of(mask)))


@dataclass
class ExistsResult:
    found: bool
    supports: dict = field(default_factory=dict)  # fact → chosen support
    blocks: dict = field(default_factory=dict)  # fact → chosen (B, N)
    required: frozenset = frozenset()
    forbidden: frozenset = frozenset()
    closure: frozenset | None = None
    repair: frozenset | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.found


@dataclass
class CQAResult:
    answer: bool
    clauses: list
    failed_clause: int | None = None
    witness: ExistsResult | None = None

    def __bool__(self) -> bool:
        return self.answer


# ----------------------------------------------------------------------- CNF

def to_cnf(q, cap: int = 4096) -> list[frozenset]:
    """Clauses of (fact, polarity) pairs; tautologies and subsumed clauses dropped.

    ``[]`` means true; a clause ``frozenset()`` means false.
    """
    def nnf(x, neg: bool):
        if isinstance(x, QAtom):
            return ("lit", x.fact, not neg)
        if isinstance(x, QConst):
            return ("const", x.value != neg)
        if isinstance(x, QNot):
            return nnf(x.part, not neg)
        if isinstance(x, QAnd):
            op = "or" if neg else "and"
        elif isinstance(x, QOr):
            op = "and" if neg else "or"
        else:
            raise TypeError(f"not a query: {x!r}")
        return (op, [nnf(p, neg) for p in x.parts])

    def simplify(clauses):
        out = []
        for c in sorted(set(clauses), key=len):
            if any((fact, not pos) in c for fact, pos in c):
                continue
            if any(k <= c for k in out):
                continue
            out.append(c)
        return out

    def cnf(x):
        tag = x[0]
        if tag == "lit":
            return [frozenset({(x[1], x[2])})]
        if tag == "const":
            return [] if x[1] else [frozenset()]
        parts = [cnf(p) for p in x[1]]
        if tag == "and":
            out = [c for p in parts for c in p]
        else:
            out = [frozenset()]
            for p in parts:
                out = [a | b for a in out for b in p]
                if len(out) > cap:
                    raise CNFTooLargeError(f"query needs more than {cap} CNF clauses")
                out = simplify(out)
        out = simplify(out)
        if len(out) > cap:
            raise CNFTooLargeError(f"query needs more than {cap} CNF clauses")
        return out

    clauses = cnf(nnf(q, False))
    return sorted(clauses, key=lambda c: (len(c), sorted((f.sort_key, p) for f, p in c)))


# -------------------------------------------------------------------- engine

class CQAEngine:
    """Precomputed hull, supports and blocks for one instance and constraint set."""

    def __init__(self, i: Iterable[Fact], f: Sequence[UniversalConstraint],
                 schema: Schema | None = None, prune: bool = True):
        self.instance = frozenset(i)
        self.constraints = list(f)
        check_supported(self.constraints, schema)
        if schema is None:
            schema = infer_schema(self.instance, self.constraints)
        self.schema = schema
        self.normalized = normalize(self.constraints, schema)
        self.graph = dependency_graph(self.normalized, schema)
        self.h = self.graph.h
        self.grounding = Grounding(self.instance, self.normalized)
        g = self.grounding
        self.tgd = kernels.pack(g.tgd_lhs, g.tgd_rhs, g.nbits)
        self.all = kernels.pack(g.lhs_masks, g.rhs_masks, g.nbits)
        self.tables = _Tables(g, self.h, prune)

    # table views as fact sets
    def supports(self, fact: Fact, level: int | None = None) -> set:
        g = self.grounding
        if fact not in g.bit:
            return set()
        table = self.tables.supp if level is None else self.tables.supp_levels[level + 1]
        return {g.facts_of(m) for m in table[g.bit[fact]]}

    def blocks(self, fact: Fact, level: int | None = None) -> set:
        g = self.grounding
        if fact not in g.bit:
            return set()
        table = self.tables.block if level is None else self.tables.block_levels[level + 1]
        return {(g.facts_of(b), g.facts_of(n)) for b, n in table[g.bit[fact]]}

    def support_table(self) -> dict:
        return {f: self.supports(f) for f in self.grounding.facts}

    def block_table(self) -> dict:
        return {f: self.blocks(f) for f in self.grounding.facts}

    def exists_repair(self, required: Iterable[Fact], forbidden: Iterable[Fact],
                      witness: bool = True) -> ExistsResult:
        g = self.grounding
        required, forbidden = frozenset(required), frozenset(forbidden)
        if not g.in_hull(required):
            return ExistsResult(False, required=required, forbidden=forbidden,
                                reason="a required fact is outside the hull")
        forbidden = frozenset(x for x in forbidden if x in g.bit)
        req = canonical(required)
        forb = canonical(forbidden)
        s_opts = [sorted(self.tables.supp[g.bit[x]], key=lambda m: _mask_key(g, m)) for x in req]
        b_opts = [sorted(self.tables.block[g.bit[x]],
                         key=lambda p: (_mask_key(g, p[0]), _mask_key(g, p[1]))) for x in forb]
        for combo in itertools.product(*s_opts, *b_opts):
            p = 0
            nmask = 0
            for m in combo[:len(req)]:
                p |= m
            for b, n in combo[len(req):]:
                p |= b
                nmask |= n
            closed = self.tgd.closure(p)
            if closed & nmask or not self.all.is_consistent(closed):
                continue
            res = ExistsResult(
                True,
                {x: g.facts_of(m) for x, m in zip(req, combo[:len(req)])},
                {x: (g.facts_of(b), g.facts_of(n)) for x, (b, n) in zip(forb, combo[len(req):])},
                required, forbidden, g.facts_of(closed))
            if witness:
                res.repair = self._witness_repair(g.facts_of(p))
            return res
        return ExistsResult(False, required=required, forbidden=forbidden,
                            reason="no combination of supports and blocks is realizable")

    def _witness_repair(self, p: frozenset) -> frozenset:
        first = canonical(p)
        rest = canonical(self.instance - p)
        script = {x: False for x in first}
        script.update({x: True for x in rest})
        return construct_repair(self.instance, self.normalized,
                                RepairStrategy(order=first + rest, b_script=script),
                                grounding=self.grounding)

    def answer(self, q, cnf_cap: int = 4096) -> CQAResult:
        clauses = to_cnf(q, cnf_cap)
        for k, clause in enumerate(clauses):
            # the negated clause asks for its negative literals present, positive ones absent
            required = {fact for fact, pos in clause if not pos}
            forbidden = {fact for fact, pos in clause if pos}
            res = self.exists_repair(required, forbidden)
            if res.found:
                return CQAResult(False, clauses, k, res)
        return CQAResult(True, clauses)

    def explain(self) -> dict:
        from .parser import serialize_fact

        def fs(facts):
            return [serialize_fact(x) for x in canonical(facts)]

        g = self.grounding
        return {
            "h": self.h,
            "supports": {serialize_fact(x): sorted(fs(s) for s in self.supports(x)) for x in g.facts},
            "blocks": {serialize_fact(x): sorted([fs(b), fs(n)] for b, n in self.blocks(x))
                       for x in g.facts},
        }


def compute_supports(i, f, schema: Schema | None = None, prune: bool = True) -> dict:
    return CQAEngine(i, f, schema, prune).support_table()


def compute_blocks(i, f, schema: Schema | None = None, prune: bool = True) -> dict:
    return CQAEngine(i, f, schema, prune).block_table()


def exists_repair(required, forbidden, i, f, schema: Schema | None = None) -> ExistsResult:
    return CQAEngine(i, f, schema).exists_repair(required, forbidden)


def cqa(q, i, f, schema: Schema | None = None, cnf_cap: int = 4096) -> bool:
    return CQAEngine(i, f, schema).answer(q, cnf_cap).answer
