"""Immediate consequence over ground single-head rules and its closure."""
from __future__ import annotations

from typing import Iterable, Sequence

from .core import Fact
from .grounding import GroundRule


class RuleIndex:
    """Single-head ground rules indexed by the facts of their bodies."""

    def __init__(self, rules: Iterable[GroundRule]):
        self.rules: list[GroundRule] = [r for r in rules if r.is_tgd]
        self.watch: dict[Fact, list[int]] = {}
        self.unconditional: list[int] = []
        for k, r in enumerate(self.rules):
            if not r.lhs:
                self.unconditional.append(k)
            for f in r.lhs:
                self.watch.setdefault(f, []).append(k)

    def __len__(self) -> int:
        return len(self.rules)


def t_f_step(j: Iterable[Fact], idx: RuleIndex) -> frozenset:
    j = frozenset(j)
    out = set(j)
    for r in idx.rules:
        if r.lhs <= j:
            out.add(r.head)
    return frozenset(out)


def t_f_closure(j: Iterable[Fact], idx: RuleIndex) -> frozenset:
    """Least superset of ``j`` closed under the rules; each rule fires at most once."""
    have = set(j)
    missing = [len(r.lhs) for r in idx.rules]
    queue = list(have)
    fired = []
    for k in idx.unconditional:
        fired.append(k)
    # count body facts already present
    for f in queue:
        for k in idx.watch.get(f, ()):
            missing[k] -= 1
            if missing[k] == 0:
                fired.append(k)
    while fired:
        k = fired.pop()
        head = idx.rules[k].head
        if head in have:
            continue
        have.add(head)
        for k2 in idx.watch.get(head, ()):
            missing[k2] -= 1
            if missing[k2] == 0:
                fired.append(k2)
    return frozenset(have)


def closure_of(j: Iterable[Fact], rules: Sequence[GroundRule]) -> frozenset:
    return t_f_closure(j, RuleIndex(rules))
