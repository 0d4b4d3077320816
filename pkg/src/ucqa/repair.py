"""Repair checking and repair construction for denial constraints and full TGDs.

A candidate ``I′`` is a repair of ``I`` exactly when

  (i)   it is consistent,
  (ii)  closing ``I′ ∩ I`` under the single-head ground rules gives back ``I′``,
  (iii) no dropped fact ``R(t) ∈ I \\ I′`` can be restored: there is no such
        fact whose closure ``J′`` of ``I′ ∪ {R(t)}`` is consistent and adds
        nothing outside ``I`` beyond what ``I′`` already has.

Construction follows the banned-set algorithm: facts of ``I`` are visited one
at a time and either added together with their consequences or discarded.
"""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import kernels
from .core import (
    Fact, UniversalConstraint, UnsupportedConstraintError, canonical, satisfies,
)
from .consequence import RuleIndex, t_f_closure
from .grounding import GroundRule, Grounding


class NotARepairError(ValueError):
    pass


class Condition(enum.Enum):
    NONE = "none"
    I = "i"
    II = "ii"
    III = "iii"


@dataclass(frozen=True)
class RepairReport:
    verdict: bool
    violated: Condition = Condition.NONE
    witness: Fact | None = None
    witness_facts: frozenset | None = None
    rule: GroundRule | None = None

    def __bool__(self) -> bool:
        return self.verdict

    def describe(self) -> str:
        if self.verdict:
            return "repair"
        if self.violated is Condition.I:
            where = f" (violates {self.rule!r})" if self.rule is not None else ""
            return f"not a repair: inconsistent{where}"
        if self.violated is Condition.II:
            return "not a repair: not the closure of its facts from the instance"
        return f"not a repair: {self.witness!r} could be kept"


def require_tgd_class(constraints: Sequence[UniversalConstraint], what: str = "this operation") -> None:
    for c in constraints:
        if len(c.rhs) > 1:
            raise UnsupportedConstraintError(
                f"{what} handles denial constraints and full TGDs only; "
                f"{c!r} has a disjunctive head")


def require_denial_class(constraints: Sequence[UniversalConstraint]) -> None:
    for c in constraints:
        if c.rhs:
            raise UnsupportedConstraintError(f"expected denial constraints only; {c!r} has a head")


class _Context:
    """Grounding plus packed rule masks, shared by the checker and the builder."""

    def __init__(self, i, f, grounding: Grounding | None = None):
        self.g = grounding if grounding is not None else Grounding(i, f)
        n = self.g.nbits
        self.tgd = kernels.pack(self.g.tgd_lhs, self.g.tgd_rhs, n)
        self.all = kernels.pack(self.g.lhs_masks, self.g.rhs_masks, n)


def check_repair(i: Iterable[Fact], candidate: Iterable[Fact], f: Sequence[UniversalConstraint],
                 grounding: Grounding | None = None, _ctx: _Context | None = None) -> RepairReport:
    f = list(f)
    require_tgd_class(f, "repair checking")
    i, candidate = frozenset(i), frozenset(candidate)
    ctx = _ctx or _Context(i, f, grounding)
    g = ctx.g
    if not g.in_hull(candidate):
        # repairs live inside the hull; still report the first failing condition
        if not satisfies(candidate, f):
            return RepairReport(False, Condition.I)
        closed = t_f_closure(candidate & i, RuleIndex(g.rules))
        return RepairReport(False, Condition.II, witness_facts=closed ^ candidate)
    code, k, mask = kernels.check_repair_mask(g.imask, g.mask(candidate), ctx.tgd, ctx.all)
    if code == 0:
        return RepairReport(True)
    if code == 1:
        return RepairReport(False, Condition.I, rule=g.rules[k])
    if code == 2:
        return RepairReport(False, Condition.II, witness_facts=g.facts_of(mask))
    return RepairReport(False, Condition.III, witness=g.facts[k], witness_facts=g.facts_of(mask))


def is_repair(i, candidate, f) -> bool:
    return check_repair(i, candidate, f).verdict


@dataclass
class RepairStrategy:
    """Choices for the nondeterministic steps of the construction.

    ``order`` lists facts to visit first; the remaining facts follow in
    canonical order, or shuffled when ``seed`` is set.  ``b`` decides per fact
    whether to try discarding it: ``b_script`` entries win, then a coin flip
    when ``random_b`` is set, then ``b_default``.
    """

    order: Sequence[Fact] | None = None
    b_script: Mapping[Fact, bool] | Sequence[bool] | None = None
    b_default: bool = False
    seed: int | None = None
    random_b: bool = False

    @classmethod
    def seeded(cls, seed: int) -> RepairStrategy:
        return cls(seed=seed, random_b=True)

    def plan(self, i: Iterable[Fact]) -> list[tuple[Fact, bool]]:
        i = frozenset(i)
        rng = random.Random(self.seed)
        first = list(self.order or ())
        seen = set()
        for fact in first:
            if fact not in i:
                raise ValueError(f"order lists {fact!r}, which is not in the instance")
            if fact in seen:
                raise ValueError(f"order lists {fact!r} twice")
            seen.add(fact)
        rest = canonical(i - seen)
        if self.seed is not None:
            rng.shuffle(rest)
        steps = []
        script = self.b_script
        for pos, fact in enumerate(first + rest):
            if isinstance(script, Mapping) and fact in script:
                b = bool(script[fact])
            elif script is not None and not isinstance(script, Mapping) and pos < len(script):
                b = bool(script[pos])
            elif self.random_b:
                b = rng.random() < 0.5
            else:
                b = self.b_default
            steps.append((fact, b))
        return steps


@dataclass
class Step:
    fact: Fact
    b: bool
    added: bool
    reason: str | None = None  # "*", "**" or "***" when discarded
    banned: frozenset | None = None
    derived: frozenset = field(default_factory=frozenset)  # J′ \ J


def construct_repair(i: Iterable[Fact], f: Sequence[UniversalConstraint],
                     strategy: RepairStrategy | None = None, trace: list | None = None,
                     grounding: Grounding | None = None) -> frozenset:
    f = list(f)
    require_tgd_class(f, "repair construction")
    i = frozenset(i)
    strategy = strategy or RepairStrategy()
    ctx = _Context(i, f, grounding)
    g = ctx.g
    imask = g.imask
    j = 0
    banned: list[int] = []
    for fact, b in strategy.plan(i):
        jp = ctx.tgd.closure(j | (1 << g.bit[fact]))
        fresh = jp & ~(imask | j)
        reason = None
        if not ctx.all.is_consistent(jp):
            reason = "*"
        elif b and fresh:
            reason = "**"
        elif any(not (bm & ~jp) for bm in banned):
            reason = "***"
        new_ban = None
        grown = jp & ~j
        if reason is None:
            j = jp
        elif reason != "*":
            banned.append(fresh)
            new_ban = fresh
        assert all(bm & ~j for bm in banned), "a banned set became part of the repair"
        if trace is not None:
            trace.append(Step(fact, b, reason is None, reason,
                              g.facts_of(new_ban) if new_ban is not None else None,
                              g.facts_of(grown)))
    return g.facts_of(j)


def denial_repair(i: Iterable[Fact], f: Sequence[UniversalConstraint],
                  strategy: RepairStrategy | None = None) -> frozenset:
    """Greedy maximal consistent subset in the strategy's visiting order."""
    f = list(f)
    require_denial_class(f)
    i = frozenset(i)
    strategy = strategy or RepairStrategy()
    g = Grounding(i, f)
    rules = kernels.pack(g.lhs_masks, g.rhs_masks, g.nbits)
    j = 0
    for fact, _ in strategy.plan(i):
        jp = j | (1 << g.bit[fact])
        if rules.is_consistent(jp):
            j = jp
    return g.facts_of(j)


def guided_repair(i: Iterable[Fact], f: Sequence[UniversalConstraint], target: Iterable[Fact],
                  grounding: Grounding | None = None) -> frozenset:
    """Replay the construction that keeps ``I ∩ target`` and then rejects the rest."""
    f = list(f)
    i, target = frozenset(i), frozenset(target)
    g = grounding if grounding is not None else Grounding(i, f)
    report = check_repair(i, target, f, g)
    if not report.verdict:
        raise NotARepairError(f"target is not a repair: {report.describe()}")
    keep = canonical(i & target)
    drop = canonical(i - target)
    script = {fact: False for fact in keep}
    script.update({fact: True for fact in drop})
    return construct_repair(i, f, RepairStrategy(order=keep + drop, b_script=script), grounding=g)
