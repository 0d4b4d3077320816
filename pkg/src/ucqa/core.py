"""Typed relational model: constants, facts, constraints, queries.

Constants live in two disjoint domains: exact rationals (``fractions.Fraction``)
and uninterpreted symbols (``str``).  Instances are plain ``frozenset`` objects
of :class:`Fact`; deterministic iteration goes through :func:`canonical`.
"""
from __future__ import annotations

import enum
import operator
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

Constant = Union[Fraction, str]


class ModelError(ValueError):
    """Base class for ill-formed model values."""


class TypeMismatchError(ModelError):
    pass


class SchemaError(ModelError):
    pass


class UnsafeConstraintError(ModelError):
    pass


class UnsupportedConstraintError(ValueError):
    """The constraint set lies outside the class an algorithm handles."""


class AttrType(enum.Enum):
    RAT = "rat"
    SYM = "sym"


def make_constant(value) -> Constant:
    """Normalize ``value`` to a constant: ints become ``Fraction``, strings stay symbols."""
    if isinstance(value, bool):
        raise TypeMismatchError(f"booleans are not constants: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return value
    raise TypeMismatchError(f"unsupported constant {value!r} (floats are not exact)")


def type_of(value: Constant) -> AttrType:
    return AttrType.RAT if isinstance(value, Fraction) else AttrType.SYM


def constant_key(value: Constant):
    # rationals before symbols; each ordered naturally
    if isinstance(value, Fraction):
        return (0, value, "")
    return (1, 0, value)


def format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_constant(value: Constant) -> str:
    if isinstance(value, Fraction):
        return format_rational(value)
    return value


@dataclass(frozen=True)
class Attribute:
    name: str
    type: AttrType


class Schema:
    """Relation names mapped to ordered, typed attribute lists."""

    def __init__(self, relations: Mapping[str, Sequence] = ()):
        self._relations: dict[str, tuple[Attribute, ...]] = {}
        for name, attrs in dict(relations).items():
            self.add(name, attrs)

    def add(self, name: str, attrs: Sequence) -> None:
        if name in self._relations:
            raise SchemaError(f"duplicate relation {name}")
        norm = []
        for a in attrs:
            if isinstance(a, Attribute):
                norm.append(a)
            else:
                aname, atype = a
                norm.append(Attribute(aname, AttrType(atype) if isinstance(atype, str) else atype))
        if not norm:
            raise SchemaError(f"relation {name} has arity 0")
        names = [a.name for a in norm]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate attribute name in relation {name}")
        self._relations[name] = tuple(norm)

    def __contains__(self, name: str) -> bool:
        return name in self._relations

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self._relations))

    def __len__(self) -> int:
        return len(self._relations)

    def __eq__(self, other) -> bool:
        return isinstance(other, Schema) and self._relations == other._relations

    def __repr__(self) -> str:
        rels = ", ".join(f"{n}/{len(a)}" for n, a in sorted(self._relations.items()))
        return f"Schema({rels})"

    def attributes(self, name: str) -> tuple[Attribute, ...]:
        try:
            return self._relations[name]
        except KeyError:
            raise SchemaError(f"unknown relation {name}") from None

    def arity(self, name: str) -> int:
        return len(self.attributes(name))

    def types(self, name: str) -> tuple[AttrType, ...]:
        return tuple(a.type for a in self.attributes(name))

    def position(self, name: str, attr) -> int:
        """0-based position of ``attr`` (1-based int or attribute name) in ``name``."""
        attrs = self.attributes(name)
        if isinstance(attr, int):
            if not 1 <= attr <= len(attrs):
                raise SchemaError(f"{name} has no attribute position {attr}")
            return attr - 1
        for i, a in enumerate(attrs):
            if a.name == attr:
                return i
        raise SchemaError(f"{name} has no attribute {attr}")

    def check_fact(self, fact: Fact) -> None:
        types = self.types(fact.relation)
        if len(types) != len(fact.args):
            raise SchemaError(
                f"{fact} has arity {len(fact.args)}, {fact.relation} expects {len(types)}")
        for pos, (t, v) in enumerate(zip(types, fact.args), 1):
            if type_of(v) is not t:
                raise TypeMismatchError(
                    f"{fact}: position {pos} expects {t.value}, got {format_constant(v)!r}")


class Fact:
    """A ground atom ``relation(args...)``; hashable and totally ordered."""

    __slots__ = ("relation", "args", "_key", "_hash")

    def __init__(self, relation: str, args: Iterable):
        self.relation = relation
        self.args = tuple(make_constant(a) for a in args)
        self._key = (relation, tuple(constant_key(a) for a in self.args))
        self._hash = hash((relation, self.args))

    @property
    def sort_key(self):
        return self._key

    def __eq__(self, other) -> bool:
        return (isinstance(other, Fact) and self._hash == other._hash
                and self.relation == other.relation and self.args == other.args)

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: Fact) -> bool:
        return self._key < other._key

    def __le__(self, other: Fact) -> bool:
        return self._key <= other._key

    def __gt__(self, other: Fact) -> bool:
        return self._key > other._key

    def __ge__(self, other: Fact) -> bool:
        return self._key >= other._key

    def __repr__(self) -> str:
        return f"{self.relation}({','.join(format_constant(a) for a in self.args)})"


@dataclass(frozen=True)
class Literal:
    fact: Fact
    positive: bool = True

    def __neg__(self) -> Literal:
        return Literal(self.fact, not self.positive)

    @property
    def sort_key(self):
        return (self.fact.sort_key, not self.positive)

    def __lt__(self, other: Literal) -> bool:
        return self.sort_key < other.sort_key

    def __repr__(self) -> str:
        return repr(self.fact) if self.positive else f"¬{self.fact!r}"


Instance = frozenset  # of Fact


def instance(facts: Iterable[Fact] = ()) -> frozenset:
    return frozenset(facts)


def canonical(items: Iterable) -> list:
    """Sort facts or literals into the canonical total order."""
    return sorted(items, key=lambda x: x.sort_key)


def set_key(facts: Iterable[Fact]):
    """Order key for sets of facts: compare their canonical listings."""
    return tuple(f.sort_key for f in canonical(facts))


class DeltaOrder(enum.Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"
    INCOMPARABLE = "incomparable"


def _check_schema(schema: Schema | None, *instances: Iterable[Fact]) -> None:
    if schema is None:
        return
    for inst in instances:
        for f in inst:
            schema.check_fact(f)


def symmetric_difference(a: Iterable[Fact], b: Iterable[Fact], schema: Schema | None = None) -> frozenset:
    a, b = frozenset(a), frozenset(b)
    _check_schema(schema, a, b)
    return a ^ b


def closer_than(base: Iterable[Fact], a: Iterable[Fact], b: Iterable[Fact],
                schema: Schema | None = None) -> DeltaOrder:
    """Compare ``a`` and ``b`` by inclusion of their symmetric differences to ``base``."""
    base = frozenset(base)
    da = symmetric_difference(base, a, schema)
    db = symmetric_difference(base, b, schema)
    if da == db:
        return DeltaOrder.EQUAL
    if da < db:
        return DeltaOrder.LESS
    if db < da:
        return DeltaOrder.GREATER
    return DeltaOrder.INCOMPARABLE


# ---------------------------------------------------------------- terms, atoms

@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self) -> str:
        return self.name


Term = Union[Var, Fraction, str]
Binding = Mapping[Var, Constant]


def make_term(t) -> Term:
    return t if isinstance(t, Var) else make_constant(t)


@dataclass(frozen=True)
class Atom:
    relation: str
    terms: tuple

    def __init__(self, relation: str, terms: Iterable):
        object.__setattr__(self, "relation", relation)
        object.__setattr__(self, "terms", tuple(make_term(t) for t in terms))

    def variables(self) -> set[Var]:
        return {t for t in self.terms if isinstance(t, Var)}

    def ground(self, binding: Binding) -> Fact:
        return Fact(self.relation, [binding[t] if isinstance(t, Var) else t for t in self.terms])

    def __repr__(self) -> str:
        return f"{self.relation}({','.join(_term_repr(t) for t in self.terms)})"


def _term_repr(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Fraction):
        return format_rational(t)
    return repr(t)


# ---------------------------------------------------------- built-in formulas

ORDER_OPS = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge}
EQ_OPS = {"=": operator.eq, "!=": operator.ne}
OPS = {**EQ_OPS, **ORDER_OPS}


@dataclass(frozen=True)
class Cmp:
    op: str
    left: Term
    right: Term

    def __post_init__(self):
        if self.op not in OPS:
            raise ModelError(f"unknown comparison {self.op!r}")


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Or:
    parts: tuple


@dataclass(frozen=True)
class Not:
    part: object


@dataclass(frozen=True)
class BoolConst:
    value: bool


TRUE = BoolConst(True)
FALSE = BoolConst(False)

Formula = Union[Cmp, And, Or, Not, BoolConst]


def formula_vars(f: Formula) -> set[Var]:
    if isinstance(f, Cmp):
        return {t for t in (f.left, f.right) if isinstance(t, Var)}
    if isinstance(f, (And, Or)):
        out: set[Var] = set()
        for p in f.parts:
            out |= formula_vars(p)
        return out
    if isinstance(f, Not):
        return formula_vars(f.part)
    return set()


def _value(t: Term, binding: Binding) -> Constant:
    if isinstance(t, Var):
        try:
            return binding[t]
        except KeyError:
            raise ModelError(f"unbound variable {t.name}") from None
    return t


def compare(op: str, a: Constant, b: Constant) -> bool:
    ta, tb = type_of(a), type_of(b)
    if ta is not tb:
        raise TypeMismatchError(
            f"cannot compare {format_constant(a)!r} ({ta.value}) with {format_constant(b)!r} ({tb.value})")
    if op in ORDER_OPS and ta is AttrType.SYM:
        raise TypeMismatchError(f"ordered comparison {op} on symbols")
    return OPS[op](a, b)


def eval_builtin(f: Formula, binding: Binding) -> bool:
    if isinstance(f, Cmp):
        return compare(f.op, _value(f.left, binding), _value(f.right, binding))
    if isinstance(f, And):
        return all(eval_builtin(p, binding) for p in f.parts)
    if isinstance(f, Or):
        return any(eval_builtin(p, binding) for p in f.parts)
    if isinstance(f, Not):
        return not eval_builtin(f.part, binding)
    if isinstance(f, BoolConst):
        return f.value
    raise ModelError(f"not a built-in formula: {f!r}")


# ---------------------------------------------------------------- constraints

class ConstraintKind(enum.Enum):
    DENIAL = "denial"
    TGD = "tgd"
    JD = "jd"
    UNIVERSAL = "universal"


@dataclass(frozen=True)
class UniversalConstraint:
    """``lhs atoms ∧ guard → rhs atom ∨ ...``; an empty rhs means ``false``.

    ``jd`` holds the 0-based component positions when the constraint is the
    encoding of a join dependency, ``fd`` the (lhs, rhs) positions of a
    functional dependency; both only drive serialization and the CQA engine.
    """

    lhs: tuple
    rhs: tuple = ()
    guard: Formula = TRUE
    jd: tuple | None = None
    fd: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "lhs", tuple(self.lhs))
        object.__setattr__(self, "rhs", tuple(self.rhs))
        if not self.lhs and not self.rhs:
            raise UnsafeConstraintError("a constraint needs at least one atom")
        bound = self.lhs_variables()
        loose = formula_vars(self.guard) - bound
        for a in self.rhs:
            loose |= a.variables() - bound
        if loose:
            names = ", ".join(sorted(v.name for v in loose))
            raise UnsafeConstraintError(f"variables {names} do not occur in the lhs")

    def lhs_variables(self) -> set[Var]:
        out: set[Var] = set()
        for a in self.lhs:
            out |= a.variables()
        return out

    @property
    def kind(self) -> ConstraintKind:
        if not self.rhs:
            return ConstraintKind.DENIAL
        if self.jd is not None:
            return ConstraintKind.JD
        if len(self.rhs) == 1:
            return ConstraintKind.TGD
        return ConstraintKind.UNIVERSAL

    @property
    def is_full_tgd(self) -> bool:
        return len(self.rhs) == 1

    def __repr__(self) -> str:
        body = [repr(a) for a in self.lhs]
        if self.guard != TRUE:
            body.append(_formula_repr(self.guard))
        head = " | ".join(repr(a) for a in self.rhs) or "false"
        return f"{', '.join(body)} -> {head}"


def _formula_repr(f: Formula) -> str:
    if isinstance(f, Cmp):
        return f"{_term_repr(f.left)} {f.op} {_term_repr(f.right)}"
    if isinstance(f, And):
        return "(" + " and ".join(_formula_repr(p) for p in f.parts) + ")"
    if isinstance(f, Or):
        return "(" + " or ".join(_formula_repr(p) for p in f.parts) + ")"
    if isinstance(f, Not):
        return f"not {_formula_repr(f.part)}"
    return "true" if f.value else "false"


def check_constraint(c: UniversalConstraint, schema: Schema) -> dict[Var, AttrType]:
    """Type-check ``c`` against ``schema``; returns the inferred variable types."""
    vtypes: dict[Var, AttrType] = {}

    def visit(atom: Atom) -> None:
        types = schema.types(atom.relation)
        if len(types) != len(atom.terms):
            raise SchemaError(f"{atom} has arity {len(atom.terms)}, expected {len(types)}")
        for t, expected in zip(atom.terms, types):
            if isinstance(t, Var):
                seen = vtypes.setdefault(t, expected)
                if seen is not expected:
                    raise TypeMismatchError(f"variable {t.name} used as both {seen.value} and {expected.value}")
            elif type_of(t) is not expected:
                raise TypeMismatchError(f"{atom}: constant {format_constant(t)!r} is not {expected.value}")

    for a in c.lhs:
        visit(a)
    for a in c.rhs:
        visit(a)
    _check_guard(c.guard, vtypes)
    return vtypes


def _check_guard(f: Formula, vtypes: Mapping[Var, AttrType]) -> None:
    if isinstance(f, Cmp):
        tl = vtypes[f.left] if isinstance(f.left, Var) else type_of(f.left)
        tr = vtypes[f.right] if isinstance(f.right, Var) else type_of(f.right)
        if tl is not tr:
            raise TypeMismatchError(f"comparison {_formula_repr(f)} mixes {tl.value} and {tr.value}")
        if f.op in ORDER_OPS and tl is AttrType.SYM:
            raise TypeMismatchError(f"ordered comparison {_formula_repr(f)} on symbols")
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            _check_guard(p, vtypes)
    elif isinstance(f, Not):
        _check_guard(f.part, vtypes)


def make_fd(schema: Schema, relation: str, lhs: Iterable, rhs: Iterable) -> UniversalConstraint:
    """Denial encoding of the functional dependency ``relation: lhs -> rhs``."""
    arity = schema.arity(relation)
    xs = tuple(sorted({schema.position(relation, a) for a in lhs}))
    ys = tuple(sorted({schema.position(relation, a) for a in rhs}))
    t1, t2 = [], []
    for p in range(arity):
        if p in xs:
            v = Var(f"x{p + 1}")
            t1.append(v)
            t2.append(v)
        else:
            t1.append(Var(f"x{p + 1}_1"))
            t2.append(Var(f"x{p + 1}_2"))
    diffs = tuple(Cmp("!=", t1[p], t2[p]) for p in ys if p not in xs)
    if not diffs:
        guard: Formula = FALSE
    elif len(diffs) == 1:
        guard = diffs[0]
    else:
        guard = Or(diffs)
    return UniversalConstraint((Atom(relation, t1), Atom(relation, t2)), (), guard, fd=(xs, ys))


def make_jd(schema: Schema, relation: str, components: Iterable[Iterable]) -> UniversalConstraint:
    """Full-TGD encoding of ``relation ⋈ [X1, ..., Xk]``.

    Atom ``i`` shares the variable of every attribute in ``Xi``; attributes
    outside ``Xi`` get fresh variables.  The head uses the shared variables.
    """
    arity = schema.arity(relation)
    comps = tuple(tuple(sorted({schema.position(relation, a) for a in comp})) for comp in components)
    if not comps or any(not c for c in comps):
        raise SchemaError(f"join dependency on {relation} needs non-empty components")
    covered = set().union(*comps)
    if covered != set(range(arity)):
        raise SchemaError(f"join dependency components do not cover all attributes of {relation}")
    atoms = []
    for i, comp in enumerate(comps, 1):
        atoms.append(Atom(relation, [Var(f"x{p + 1}") if p in comp else Var(f"x{p + 1}_{i}")
                                     for p in range(arity)]))
    head = Atom(relation, [Var(f"x{p + 1}") for p in range(arity)])
    return UniversalConstraint(tuple(atoms), (head,), TRUE, jd=comps)


# -------------------------------------------------------------------- matching

def unify(atom: Atom, fact: Fact, binding: dict) -> dict | None:
    """Extend ``binding`` so that ``atom`` grounds to ``fact``; None if impossible."""
    if atom.relation != fact.relation or len(atom.terms) != len(fact.args):
        return None
    out = binding
    for t, v in zip(atom.terms, fact.args):
        if isinstance(t, Var):
            bound = out.get(t)
            if bound is None:
                if out is binding:
                    out = dict(binding)
                out[t] = v
            elif bound != v or type_of(bound) is not type_of(v):
                return None
        elif t != v or type_of(t) is not type_of(v):
            return None
    return out


def _by_relation(facts: Iterable[Fact]) -> dict[str, list[Fact]]:
    out: dict[str, list[Fact]] = {}
    for f in facts:
        out.setdefault(f.relation, []).append(f)
    return out


def _naive_matches(atoms: Sequence[Atom], rels: Mapping[str, list[Fact]], binding: dict) -> Iterator[dict]:
    if not atoms:
        yield binding
        return
    first, rest = atoms[0], atoms[1:]
    for f in rels.get(first.relation, ()):
        b = unify(first, f, binding)
        if b is not None:
            yield from _naive_matches(rest, rels, b)


def violations(facts: Iterable[Fact], c: UniversalConstraint) -> Iterator[dict]:
    """Bindings of ``c``'s lhs over ``facts`` that violate ``c``."""
    facts = frozenset(facts)
    rels = _by_relation(facts)
    for b in _naive_matches(c.lhs, rels, {}):
        if eval_builtin(c.guard, b) and not any(a.ground(b) in facts for a in c.rhs):
            yield b


def satisfies(facts: Iterable[Fact], constraints: Iterable[UniversalConstraint]) -> bool:
    facts = frozenset(facts)
    return all(next(violations(facts, c), None) is None for c in constraints)


# --------------------------------------------------------------------- queries

@dataclass(frozen=True)
class QAtom:
    fact: Fact


@dataclass(frozen=True)
class QNot:
    part: object


@dataclass(frozen=True)
class QAnd:
    parts: tuple


@dataclass(frozen=True)
class QOr:
    parts: tuple


@dataclass(frozen=True)
class QConst:
    value: bool


Query = Union[QAtom, QNot, QAnd, QOr, QConst]


def eval_query(q: Query, facts: Iterable[Fact]) -> bool:
    if not isinstance(facts, (set, frozenset)):
        facts = frozenset(facts)
    if isinstance(q, QAtom):
        return q.fact in facts
    if isinstance(q, QNot):
        return not eval_query(q.part, facts)
    if isinstance(q, QAnd):
        return all(eval_query(p, facts) for p in q.parts)
    if isinstance(q, QOr):
        return any(eval_query(p, facts) for p in q.parts)
    if isinstance(q, QConst):
        return q.value
    raise ModelError(f"not a query: {q!r}")


def query_facts(q: Query) -> set[Fact]:
    if isinstance(q, QAtom):
        return {q.fact}
    if isinstance(q, QNot):
        return query_facts(q.part)
    if isinstance(q, (QAnd, QOr)):
        out: set[Fact] = set()
        for p in q.parts:
            out |= query_facts(p)
        return out
    return set()


def infer_schema(facts: Iterable[Fact] = (), constraints: Iterable[UniversalConstraint] = (),
                 queries: Iterable[Query] = ()) -> Schema:
    """Build a schema with positional attribute names from whatever is in use.

    Types come from the constants seen; positions holding only variables
    default to ``rat``.
    """
    seen: dict[str, list] = {}

    def note(rel: str, terms: Sequence) -> None:
        slots = seen.setdefault(rel, [None] * len(terms))
        if len(slots) != len(terms):
            raise SchemaError(f"relation {rel} used with arities {len(slots)} and {len(terms)}")
        for i, t in enumerate(terms):
            if not isinstance(t, Var) and slots[i] is None:
                slots[i] = type_of(t)

    for f in facts:
        note(f.relation, f.args)
    for c in constraints:
        for a in (*c.lhs, *c.rhs):
            note(a.relation, a.terms)
    for q in queries:
        for f in query_facts(q):
            note(f.relation, f.args)
    return Schema({rel: [(f"a{i + 1}", t or AttrType.RAT) for i, t in enumerate(slots)]
                   for rel, slots in seen.items()})
