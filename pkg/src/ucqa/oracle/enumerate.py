"""Exhaustive ground truth: every repair, and query answers over all of them.

Two methods.  ``subset`` scans every subset of the positive hull, keeps the
consistent ones and filters them down to the ≤I-minimal ones.  ``sat``
finds consistent subsets with a SAT solver, shrinks each one to a minimal
one, and then rules out everything at least as far from I.  The second one is
there for the reduction instances, whose hulls are far beyond the subset cap.
"""
from __future__ import annotations

from typing import Iterable, Sequence

from pysat.solvers import Solver

from .. import kernels
from ..core import Fact, Literal, UniversalConstraint, canonical, eval_query, set_key
from ..grounding import ConflictHypergraph, Grounding


class CapExceededError(ValueError):
    pass


def _sorted_repairs(repairs) -> list[frozenset]:
    return sorted(set(repairs), key=set_key)


def _subset_repairs(g: Grounding, cap: int) -> list[frozenset]:
    if g.nbits > cap:
        raise CapExceededError(f"hull has {g.nbits} facts, over the cap of {cap}")
    rules = kernels.pack(g.lhs_masks, g.rhs_masks, g.nbits)
    masks = kernels.consistent_masks(g.nbits, rules)
    return [g.facts_of(m) for m in kernels.minimal_masks(g.imask, masks)]


class _SatSearch:
    """Hull facts as variables 1..n; every ground rule becomes one clause.

    One incremental solver per search.  Temporary clauses are guarded by a
    fresh activation variable that is only ever assumed once.
    """

    def __init__(self, g: Grounding):
        self.g = g
        self.n = g.nbits
        self.solver = Solver(name="glucose4")
        for r in g.rules:
            self.solver.add_clause([-(g.bit[x] + 1) for x in canonical(r.lhs)]
                                   + [g.bit[x] + 1 for x in canonical(r.rhs)])
        self.in_i = [bool(g.imask >> k & 1) for k in range(self.n)]
        self.next_var = self.n + 1
        self.dead = False

    def close(self) -> None:
        self.solver.delete()

    def delta_lit(self, k: int) -> int:
        # true iff fact k is in the symmetric difference with I
        return -(k + 1) if self.in_i[k] else k + 1

    def solve(self, assumptions=(), clause=None) -> int | None:
        if self.dead:
            return None
        assumptions = list(assumptions)
        if clause is not None:
            act = self.next_var
            self.next_var += 1
            self.solver.add_clause([-act] + clause)
            assumptions.append(act)
        if not self.solver.solve(assumptions=assumptions):
            return None
        model = self.solver.get_model() or []
        return sum(1 << (v - 1) for v in model if 0 < v <= self.n)

    def delta(self, mask: int) -> list[int]:
        return [k for k in range(self.n) if (mask >> k & 1) != self.in_i[k]]

    def minimize(self, mask: int) -> int:
        while True:
            d = set(self.delta(mask))
            if not d:
                return mask
            keep = [-self.delta_lit(k) for k in range(self.n) if k not in d]
            smaller = self.solve(keep, [-self.delta_lit(k) for k in sorted(d)])
            if smaller is None:
                return mask
            mask = smaller

    def block(self, mask: int) -> None:
        # nothing whose difference contains this one's can be a repair
        clause = [-self.delta_lit(k) for k in self.delta(mask)]
        if clause:
            self.solver.add_clause(clause)
        else:
            self.dead = True

    def units(self, required: Iterable[Fact], forbidden: Iterable[Fact]):
        g = self.g
        out = []
        for x in required:
            if x not in g.bit:
                return None
            out.append(g.bit[x] + 1)
        for x in forbidden:
            if x in g.bit:
                out.append(-(g.bit[x] + 1))
        return out


def _sat_repairs(g: Grounding, limit: int | None = None) -> list[frozenset]:
    s = _SatSearch(g)
    out = []
    try:
        while True:
            m = s.solve()
            if m is None:
                return out
            m = s.minimize(m)
            out.append(g.facts_of(m))
            if limit is not None and len(out) > limit:
                raise CapExceededError(f"more than {limit} repairs")
            s.block(m)
    finally:
        s.close()


def enumerate_repairs(i: Iterable[Fact], f: Sequence[UniversalConstraint], cap: int = 18,
                      method: str = "subset", grounding: Grounding | None = None,
                      limit: int | None = None) -> list[frozenset]:
    """All repairs of ``i`` in canonical order.

    ``cap`` bounds the positive hull for ``subset``; ``limit`` optionally
    bounds the number of repairs for ``sat``.
    """
    g = grounding if grounding is not None else Grounding(i, f)
    if method == "subset":
        return _sorted_repairs(_subset_repairs(g, cap))
    if method == "sat":
        return _sorted_repairs(_sat_repairs(g, limit))
    raise ValueError(f"unknown method {method!r}")


def find_repair(i: Iterable[Fact], f: Sequence[UniversalConstraint], required: Iterable[Fact] = (),
                forbidden: Iterable[Fact] = (), grounding: Grounding | None = None) -> frozenset | None:
    """Some repair containing ``required`` and avoiding ``forbidden``, or None."""
    g = grounding if grounding is not None else Grounding(i, f)
    required, forbidden = frozenset(required), frozenset(forbidden)
    s = _SatSearch(g)
    units = s.units(required, forbidden)
    if units is None:
        return None
    try:
        while True:
            m = s.solve(units)
            if m is None:
                return None
            m = s.minimize(m)
            rep = g.facts_of(m)
            if required <= rep and not (forbidden & rep):
                return rep
            s.block(m)
    finally:
        s.close()


def sat_is_repair(i: Iterable[Fact], f: Sequence[UniversalConstraint], candidate: Iterable[Fact],
                  grounding: Grounding | None = None) -> bool:
    """Repair test for any universal constraints: consistent, and nothing strictly closer."""
    g = grounding if grounding is not None else Grounding(i, f)
    candidate = frozenset(candidate)
    if not g.in_hull(candidate):
        return False
    m = g.mask(candidate)
    if any(not (l & ~m) and not (r & m) for l, r in zip(g.lhs_masks, g.rhs_masks)):
        return False
    s = _SatSearch(g)
    try:
        d = set(s.delta(m))
        if not d:
            return True
        keep = [-s.delta_lit(k) for k in range(s.n) if k not in d]
        return s.solve(keep, [-s.delta_lit(k) for k in sorted(d)]) is None
    finally:
        s.close()


def brute_cqa(q, i: Iterable[Fact], f: Sequence[UniversalConstraint], cap: int = 18,
              method: str = "subset") -> bool:
    return all(eval_query(q, r) for r in enumerate_repairs(i, f, cap, method))


def counterexample(q, i, f, cap: int = 18, method: str = "subset") -> frozenset | None:
    """The canonically first repair falsifying ``q``."""
    for r in enumerate_repairs(i, f, cap, method):
        if not eval_query(q, r):
            return r
    return None


def maximal_independent_sets(g: ConflictHypergraph, cap: int = 20) -> list[frozenset]:
    """Every maximal independent set, by include/exclude backtracking."""
    verts = canonical(g.vertices)
    if len(verts) > cap:
        raise CapExceededError(f"{len(verts)} vertices, over the cap of {cap}")
    edges_of: dict[Literal, list[frozenset]] = {v: [] for v in verts}
    for e in g.edges:
        for v in e:
            edges_of[v].append(e)
    out = []

    def closes_edge(v, chosen) -> bool:
        return any(all(u == v or u in chosen for u in e) for e in edges_of[v])

    def go(k: int, chosen: set):
        if k == len(verts):
            if all(v in chosen or closes_edge(v, chosen) for v in verts):
                out.append(frozenset(chosen))
            return
        v = verts[k]
        if not closes_edge(v, chosen):
            chosen.add(v)
            go(k + 1, chosen)
            chosen.discard(v)
        go(k + 1, chosen)

    go(0, set())
    return out
