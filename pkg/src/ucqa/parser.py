"""Text formats for schemas, constraints, instances and queries.

Statements end at ``;``, ``.`` or a newline outside parentheses; a line that
ends in ``,``, ``->``, ``|``, ``and``, ``or`` or ``not`` (or a next line that
starts with one of those) continues the statement.  ``#`` starts a comment.

    relation R(a: sym, b: rat)
    R(x, y), P(x), y < 3 -> P(y) | Q(y)
    fd R: 1 -> 2
    jd R: [a, b][b, c]
    R('New York', 1/2).
    not NF(Steve, no) and (P(1) or true)
"""
from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .core import (
    FALSE, TRUE, And, Atom, AttrType, BoolConst, Cmp, Fact, ModelError, Not, Or,
    QAnd, QAtom, QConst, QNot, QOr, Schema, UniversalConstraint, Var, canonical,
    check_constraint, compare, format_rational, make_fd, make_jd, type_of,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"line {line}, col {col}: {message}" if line else message)


class DuplicateFactWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # ident, num, str, op, nl, eof
    text: str
    line: int
    col: int
    value: object = None


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\f]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<num>-?\d+(?:/\d+|\.\d+)?)
  | (?P<str>'(?:[^'\\\n]|\\.)*'|"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|!=|<=|>=|<>|[(),.;:\[\]|=<>])
""", re.VERBOSE)

KEYWORDS = {"and", "or", "not", "true", "false", "relation", "fd", "jd"}
_CONTINUE_AFTER = {",", "->", "|", "and", "or", "not", "(", ":", "["}
_CONTINUE_BEFORE = {",", "->", "|", "and", "or", ")", "]"}


def _unescape(body: str) -> str:
    return re.sub(r"\\(.)", r"\1", body)


def tokenize(text: str) -> list[Token]:
    raw: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            raw.append(Token("nl", s, line, col))
            line += 1
            line_start = m.end()
        elif kind == "num":
            if "." in s:
                whole, frac = s.split(".")
                value = Fraction(f"{whole}.{frac}")
            else:
                try:
                    value = Fraction(s)
                except ZeroDivisionError:
                    raise ParseError(f"zero denominator in {s}", line, col) from None
            raw.append(Token("num", s, line, col, value))
        elif kind == "str":
            raw.append(Token("str", s, line, col, _unescape(s[1:-1])))
        elif kind == "ident":
            raw.append(Token("ident", s, line, col))
        elif kind == "op":
            raw.append(Token("op", "!=" if s == "<>" else s, line, col))
        pos = m.end()
    raw.append(Token("eof", "", line, pos - line_start + 1))

    # drop newlines inside brackets or next to continuation tokens
    out: list[Token] = []
    depth = 0
    for i, t in enumerate(raw):
        if t.kind == "op" and t.text in "([":
            depth += 1
        elif t.kind == "op" and t.text in ")]":
            depth = max(0, depth - 1)
        if t.kind == "nl":
            prev = out[-1] if out else None
            nxt = next((u for u in raw[i + 1:] if u.kind != "nl"), None)
            if depth or prev is None or prev.kind == "nl":
                continue
            if prev.text in _CONTINUE_AFTER and prev.kind in ("op", "ident"):
                continue
            if nxt is not None and nxt.text in _CONTINUE_BEFORE and nxt.kind in ("op", "ident"):
                continue
        out.append(t)
    return out


class _Num:
    """A number literal whose domain is fixed once its position type is known."""

    __slots__ = ("text", "value")

    def __init__(self, text: str, value: Fraction):
        self.text = text
        self.value = value


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        t = tok or self.tok
        return ParseError(message, t.line, t.col)

    def at(self, text: str, kind: str | None = None) -> bool:
        t = self.tok
        if kind is None:
            kind = "ident" if text[0].isalpha() else "op"
        return t.kind == kind and t.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> Token:
        t = self.tok
        if t.kind != "ident":
            raise self.error(f"expected {what}, found {t.text or 'end of input'!r}")
        return self.advance()

    def at_end_of_statement(self) -> bool:
        t = self.tok
        return t.kind in ("eof", "nl") or (t.kind == "op" and t.text in (";", "."))

    def end_statement(self) -> None:
        if not self.at_end_of_statement():
            raise self.error(f"unexpected {self.tok.text!r}")
        while self.tok.kind == "nl" or (self.tok.kind == "op" and self.tok.text in (";", ".")):
            self.advance()

    def skip_blank(self) -> None:
        while self.tok.kind == "nl" or (self.tok.kind == "op" and self.tok.text == ";"):
            self.advance()

    def statements(self):
        self.skip_blank()
        while self.tok.kind != "eof":
            start = self.tok
            yield start
            self.end_statement()


def _wrap(err: ModelError, tok: Token) -> ParseError:
    return ParseError(str(err), tok.line, tok.col)


# --------------------------------------------------------------------- schema

def parse_schema(text: str) -> Schema:
    p = _Parser(text)
    schema = Schema()
    for start in p.statements():
        p.expect("relation")
        name = p.expect_ident("relation name")
        p.expect("(")
        attrs = []
        if p.at(")"):
            raise p.error(f"relation {name.text} has arity 0")
        while True:
            aname = p.expect_ident("attribute name")
            p.expect(":")
            atype = p.expect_ident("attribute type")
            if atype.text not in ("sym", "rat"):
                raise p.error(f"unknown attribute type {atype.text!r} (use sym or rat)", atype)
            attrs.append((aname.text, AttrType(atype.text)))
            if not p.accept(","):
                break
        p.expect(")")
        try:
            schema.add(name.text, attrs)
        except ModelError as e:
            raise _wrap(e, name) from None
    return schema


# ---------------------------------------------------------------- constraints

_CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")


def _resolve(value, expected: AttrType | None):
    if isinstance(value, _Num):
        if expected is AttrType.SYM:
            return value.text
        return value.value
    return value


class _ConstraintParser(_Parser):
    def __init__(self, text: str, schema: Schema | None):
        super().__init__(text)
        self.schema = schema

    def term(self, expected: AttrType | None):
        t = self.tok
        if t.kind == "ident" and t.text not in KEYWORDS:
            self.advance()
            return Var(t.text)
        if t.kind == "num":
            self.advance()
            return _resolve(_Num(t.text, t.value), expected)
        if t.kind == "str":
            self.advance()
            return t.value
        raise self.error(f"expected a term, found {t.text or 'end of input'!r}")

    def atom(self) -> Atom:
        name = self.expect_ident("relation name")
        types = None
        if self.schema is not None:
            if name.text not in self.schema:
                raise self.error(f"unknown relation {name.text}", name)
            types = self.schema.types(name.text)
        self.expect("(")
        terms = []
        while True:
            pos = len(terms)
            expected = types[pos] if types is not None and pos < len(types) else None
            terms.append(self.term(expected))
            if not self.accept(","):
                break
        self.expect(")")
        if types is not None and len(terms) != len(types):
            raise self.error(f"{name.text} expects {len(types)} arguments, got {len(terms)}", name)
        return Atom(name.text, terms)

    # guard := disj ; disj := conj ('or' conj)* ; conj := unary ('and' unary)*
    def guard(self):
        parts = [self.guard_conj()]
        while self.accept("or"):
            parts.append(self.guard_conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def guard_conj(self):
        parts = [self.guard_unary()]
        while self.accept("and"):
            parts.append(self.guard_unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def guard_unary(self):
        if self.accept("not"):
            return Not(self.guard_unary())
        if self.accept("("):
            f = self.guard()
            self.expect(")")
            return f
        if self.accept("true"):
            return TRUE
        if self.accept("false"):
            return FALSE
        left = self.raw_term()
        op = self.tok
        if op.kind != "op" or op.text not in _CMP_OPS:
            raise self.error(f"expected a comparison operator, found {op.text or 'end of input'!r}")
        self.advance()
        right = self.raw_term()
        return Cmp(op.text, left, right)

    def raw_term(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            return _Num(t.text, t.value)
        return self.term(None)

    def body_item(self):
        t = self.tok
        if t.kind == "ident" and t.text not in KEYWORDS and self.peek().text == "(" \
                and self.peek().kind == "op":
            return self.atom()
        return self.guard()

    def constraint(self, start: Token) -> UniversalConstraint:
        if self.at("fd") and self.peek().kind == "ident":
            return self.fd_sugar()
        if self.at("jd") and self.peek().kind == "ident":
            return self.jd_sugar()
        lhs, guards = [], []
        if not self.at("->"):
            while True:
                item = self.body_item()
                (lhs if isinstance(item, Atom) else guards).append(item)
                if not self.accept(","):
                    break
        self.expect("->")
        rhs = []
        if not self.accept("false"):
            while True:
                rhs.append(self.atom())
                if not self.accept("|"):
                    break
        if not guards:
            guard = TRUE
        elif len(guards) == 1:
            guard = guards[0]
        else:
            guard = And(tuple(guards))
        try:
            vtypes = {}
            if self.schema is not None:
                probe = UniversalConstraint(tuple(lhs), tuple(rhs), TRUE)
                vtypes = check_constraint(probe, self.schema)
            guard = _fix_guard(guard, vtypes)
            c = UniversalConstraint(tuple(lhs), tuple(rhs), guard)
            if self.schema is not None:
                check_constraint(c, self.schema)
        except ModelError as e:
            raise _wrap(e, start) from None
        return c

    def attr_ref(self, relation: str):
        t = self.tok
        if t.kind == "num" and t.value.denominator == 1 and t.value > 0:
            self.advance()
            return int(t.value)
        if t.kind == "ident":
            self.advance()
            return t.text
        raise self.error("expected an attribute position or name")

    def sugar_head(self) -> Token:
        self.advance()
        name = self.expect_ident("relation name")
        if self.schema is None:
            raise self.error("fd/jd declarations need a schema", name)
        if name.text not in self.schema:
            raise self.error(f"unknown relation {name.text}", name)
        self.expect(":")
        return name

    def fd_sugar(self) -> UniversalConstraint:
        name = self.sugar_head()
        xs = []
        if not self.at("->"):
            xs.append(self.attr_ref(name.text))
            while self.accept(","):
                xs.append(self.attr_ref(name.text))
        self.expect("->")
        ys = [self.attr_ref(name.text)]
        while self.accept(","):
            ys.append(self.attr_ref(name.text))
        try:
            return make_fd(self.schema, name.text, xs, ys)
        except ModelError as e:
            raise _wrap(e, name) from None

    def jd_sugar(self) -> UniversalConstraint:
        name = self.sugar_head()
        comps = []
        while self.accept("["):
            comp = [self.attr_ref(name.text)]
            while self.accept(","):
                comp.append(self.attr_ref(name.text))
            self.expect("]")
            comps.append(comp)
        if not comps:
            raise self.error("expected '[' starting a join component")
        try:
            return make_jd(self.schema, name.text, comps)
        except ModelError as e:
            raise _wrap(e, name) from None


def _fix_guard(f, vtypes):
    """Give number literals in comparisons the domain of the opposite operand."""
    if isinstance(f, Cmp):
        def side_type(t):
            if isinstance(t, Var):
                return vtypes.get(t)
            if isinstance(t, _Num):
                return None
            return type_of(t)
        lt, rt = side_type(f.left), side_type(f.right)
        return Cmp(f.op, _resolve(f.left, rt), _resolve(f.right, lt))
    if isinstance(f, And):
        return And(tuple(_fix_guard(p, vtypes) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(_fix_guard(p, vtypes) for p in f.parts))
    if isinstance(f, Not):
        return Not(_fix_guard(f.part, vtypes))
    return f


def parse_constraints(text: str, schema: Schema | None = None) -> list[UniversalConstraint]:
    p = _ConstraintParser(text, schema)
    return [p.constraint(start) for start in p.statements()]


def parse_constraint(text: str, schema: Schema | None = None) -> UniversalConstraint:
    cs = parse_constraints(text, schema)
    if len(cs) != 1:
        raise ParseError(f"expected exactly one constraint, got {len(cs)}")
    return cs[0]


# --------------------------------------------------------- instances, queries

class _GroundParser(_Parser):
    """Shared fact syntax: bare identifiers and numbers at sym positions are symbols."""

    def __init__(self, text: str, schema: Schema | None, what: str):
        super().__init__(text)
        self.schema = schema
        self.what = what

    def constant(self, expected: AttrType | None, relation: str, pos: int):
        t = self.tok
        if t.kind == "num":
            self.advance()
            return t.text if expected is AttrType.SYM else t.value
        if t.kind == "str":
            self.advance()
            if expected is AttrType.RAT:
                raise self.error(f"{relation} position {pos} expects rat, got symbol {t.value!r}", t)
            return t.value
        if t.kind == "ident" and t.text not in ("and", "or", "not"):
            self.advance()
            if expected is AttrType.RAT:
                if self.what == "query":
                    raise self.error(f"free variable {t.text} (queries must be ground)", t)
                raise self.error(f"{relation} position {pos} expects rat, got symbol {t.text!r}", t)
            return t.text
        raise self.error(f"expected a constant, found {t.text or 'end of input'!r}")

    def fact(self) -> Fact:
        name = self.expect_ident("relation name")
        types = None
        if self.schema is not None:
            if name.text not in self.schema:
                raise self.error(f"unknown relation {name.text}", name)
            types = self.schema.types(name.text)
        self.expect("(")
        args = []
        while True:
            pos = len(args)
            expected = types[pos] if types is not None and pos < len(types) else None
            args.append(self.constant(expected, name.text, pos + 1))
            if not self.accept(","):
                break
        self.expect(")")
        if types is not None and len(args) != len(types):
            raise self.error(f"{name.text} expects {len(types)} arguments, got {len(args)}", name)
        return Fact(name.text, args)


def parse_instance(text: str, schema: Schema | None = None) -> frozenset:
    p = _GroundParser(text, schema, "instance")
    facts: set[Fact] = set()
    for start in p.statements():
        f = p.fact()
        if f in facts:
            warnings.warn(f"line {start.line}: duplicate fact {f} collapsed", DuplicateFactWarning,
                          stacklevel=2)
        facts.add(f)
    return frozenset(facts)


class _QueryParser(_GroundParser):
    def query(self):
        parts = [self.conj()]
        while self.accept("or"):
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else QOr(tuple(parts))

    def conj(self):
        parts = [self.unary()]
        while self.accept("and"):
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else QAnd(tuple(parts))

    def unary(self):
        if self.accept("not"):
            return QNot(self.unary())
        if self.accept("("):
            q = self.query()
            self.expect(")")
            return q
        if self.accept("true"):
            return QConst(True)
        if self.accept("false"):
            return QConst(False)
        t = self.tok
        if t.kind == "ident" and self.peek().kind == "op" and self.peek().text == "(":
            return QAtom(self.fact())
        # ground comparison, folded now
        left = self.cmp_operand()
        op = self.tok
        if op.kind != "op" or op.text not in _CMP_OPS:
            raise self.error(f"expected a fact or comparison, found {t.text or 'end of input'!r}", t)
        self.advance()
        right = self.cmp_operand()
        if isinstance(left, _Num) and not isinstance(right, _Num):
            left = _resolve(left, type_of(right))
        if isinstance(right, _Num):
            right = _resolve(right, None if isinstance(left, _Num) else type_of(left))
        left = _resolve(left, None)
        try:
            return QConst(compare(op.text, left, right))
        except ModelError as e:
            raise _wrap(e, op) from None

    def cmp_operand(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            return _Num(t.text, t.value)
        if t.kind == "str":
            self.advance()
            return t.value
        if t.kind == "ident":
            raise self.error(f"free variable {t.text} (quote symbols in comparisons)")
        raise self.error(f"expected a constant, found {t.text or 'end of input'!r}")


def parse_query(text: str, schema: Schema | None = None):
    p = _QueryParser(text, schema, "query")
    p.toks = [t for t in p.toks if t.kind != "nl"]
    if p.tok.kind == "eof":
        raise p.error("empty query")
    q = p.query()
    p.accept(".")
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}")
    return q


# ---------------------------------------------------------------- serializing

_BARE_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_NUM_RE = re.compile(r"-?\d+\Z")


def _quote(s: str) -> str:
    return "'" + s.replace("\\", "\\\\").replace("'", "\\'") + "'"


def format_ground(value, bare_ok: bool = True) -> str:
    """Render a constant; symbols stay bare when that reparses to the same symbol."""
    if isinstance(value, Fraction):
        return format_rational(value)
    if bare_ok and _BARE_RE.match(value) and value not in KEYWORDS:
        return value
    return _quote(value)


def serialize_fact(f: Fact, schema: Schema | None = None) -> str:
    # without a schema, a bare digit string would come back as a rational
    args = []
    for v in f.args:
        if isinstance(v, str) and _NUM_RE.match(v) and schema is not None:
            args.append(v)
        else:
            args.append(format_ground(v))
    return f"{f.relation}({', '.join(args)})"


def serialize_instance(facts: Iterable[Fact], schema: Schema | None = None) -> str:
    return "".join(serialize_fact(f, schema) + ".\n" for f in canonical(facts))


def serialize_schema(schema: Schema) -> str:
    lines = []
    for name in schema:
        attrs = ", ".join(f"{a.name}: {a.type.value}" for a in schema.attributes(name))
        lines.append(f"relation {name}({attrs})\n")
    return "".join(lines)


def _term_text(t) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Fraction):
        return format_rational(t)
    return _quote(t)


def _guard_text(f, nested: bool = False) -> str:
    if isinstance(f, Cmp):
        return f"{_term_text(f.left)} {f.op} {_term_text(f.right)}"
    if isinstance(f, BoolConst):
        return "true" if f.value else "false"
    if isinstance(f, Not):
        return "not " + _guard_text(f.part, True)
    joiner = " and " if isinstance(f, And) else " or "
    text = joiner.join(_guard_text(p, True) for p in f.parts)
    return f"({text})" if nested else text


def _atom_text(a: Atom) -> str:
    return f"{a.relation}({', '.join(_term_text(t) for t in a.terms)})"


def serialize_constraint(c: UniversalConstraint) -> str:
    rel = c.lhs[0].relation if c.lhs else ""
    if c.fd is not None:
        xs, ys = c.fd
        return f"fd {rel}: {', '.join(str(p + 1) for p in xs)} -> {', '.join(str(p + 1) for p in ys)}"
    if c.jd is not None:
        comps = "".join("[" + ", ".join(str(p + 1) for p in comp) + "]" for comp in c.jd)
        return f"jd {rel}: {comps}"
    body = [_atom_text(a) for a in c.lhs]
    if c.guard != TRUE:
        # a lone Or/And item still reads unambiguously between commas
        body.append(_guard_text(c.guard, isinstance(c.guard, BoolConst)))
    head = " | ".join(_atom_text(a) for a in c.rhs) if c.rhs else "false"
    return f"{', '.join(body)} -> {head}".lstrip()


def serialize_constraints(cs: Iterable[UniversalConstraint]) -> str:
    return "".join(serialize_constraint(c) + "\n" for c in cs)


def serialize_query(q, schema: Schema | None = None, nested: bool = False) -> str:
    if isinstance(q, QAtom):
        return serialize_fact(q.fact, schema)
    if isinstance(q, QConst):
        return "true" if q.value else "false"
    if isinstance(q, QNot):
        return "not " + serialize_query(q.part, schema, True)
    joiner = " and " if isinstance(q, QAnd) else " or "
    text = joiner.join(serialize_query(p, schema, True) for p in q.parts)
    return f"({text})" if nested else text


def serialize(value, schema: Schema | None = None) -> str:
    """Canonical text for any model value."""
    if isinstance(value, Schema):
        return serialize_schema(value)
    if isinstance(value, UniversalConstraint):
        return serialize_constraint(value) + "\n"
    if isinstance(value, Fact):
        return serialize_fact(value, schema) + ".\n"
    if isinstance(value, (set, frozenset)):
        return serialize_instance(value, schema)
    if isinstance(value, (QAtom, QNot, QAnd, QOr, QConst)):
        return serialize_query(value, schema) + "\n"
    if isinstance(value, (list, tuple)) and all(isinstance(c, UniversalConstraint) for c in value):
        return serialize_constraints(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")
