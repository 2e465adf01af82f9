"""Template language: sorts, terms, formulas, and their canonical s-expression form.

Formulas are immutable and hashable. Structural equality is dataclass equality.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Union


class Sort(enum.Enum):
    PERSON = "person"
    PLACE = "place"


class Label(enum.IntEnum):
    NON_CONTRADICTION = 0
    CONTRADICTION = 1

    @property
    def text(self) -> str:
        return "contradiction" if self is Label.CONTRADICTION else "non-contradiction"

    @classmethod
    def parse(cls, value) -> "Label":
        if isinstance(value, Label):
            return value
        if isinstance(value, bool):
            raise ValueError(f"not a label: {value!r}")
        if isinstance(value, int) and value in (0, 1):
            return cls(value)
        if isinstance(value, str):
            v = value.strip().lower()
            if v in ("1", "contradiction"):
                return cls.CONTRADICTION
            if v in ("0", "non-contradiction"):
                return cls.NON_CONTRADICTION
        raise ValueError(f"not a label: {value!r}")


class LogicError(ValueError):
    pass


class SortError(LogicError):
    pass


class ParseError(LogicError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


@dataclass(frozen=True, order=True)
class Constant:
    id: str
    sort: Sort

    def __str__(self):
        return self.id


@dataclass(frozen=True, order=True)
class Variable:
    name: str
    sort: Sort

    def __str__(self):
        return self.name


Term = Union[Constant, Variable]


class Formula:
    """Base class for all formula nodes."""

    __slots__ = ()


def _require(cond: bool, ctor: str, msg: str):
    if not cond:
        raise SortError(f"{ctor}: {msg}")


@dataclass(frozen=True)
class Visit(Formula):
    """``agent`` has visited ``target``."""

    agent: Term
    target: Term

    def __post_init__(self):
        _require(self.agent.sort is Sort.PERSON, "visit", f"agent {self.agent} is not a person")


@dataclass(frozen=True)
class Taller(Formula):
    """``a`` is taller than ``b``."""

    a: Term
    b: Term

    def __post_init__(self):
        _require(self.a.sort is Sort.PERSON and self.b.sort is Sort.PERSON,
                 "taller", f"{self.a}, {self.b} must both be people")


@dataclass(frozen=True)
class AsTall(Formula):
    """``a`` is as tall as ``b`` (weak order: height(a) >= height(b))."""

    a: Term
    b: Term

    def __post_init__(self):
        _require(self.a.sort is Sort.PERSON and self.b.sort is Sort.PERSON,
                 "astall", f"{self.a}, {self.b} must both be people")


@dataclass(frozen=True)
class Eq(Formula):
    a: Term
    b: Term

    def __post_init__(self):
        _require(self.a.sort is self.b.sort, "eq", f"{self.a} and {self.b} have different sorts")


@dataclass(frozen=True)
class Not(Formula):
    f: Formula


@dataclass(frozen=True)
class And(Formula):
    fs: tuple

    def __post_init__(self):
        if not isinstance(self.fs, tuple):
            object.__setattr__(self, "fs", tuple(self.fs))
        if not self.fs:
            raise LogicError("and: needs at least one conjunct")
        if any(isinstance(g, And) for g in self.fs):
            raise LogicError("and: nested conjunction (use conj() to flatten)")


def _check_fresh(ctor: str, v: Variable, body: Formula):
    if v in bound_variables(body):
        raise LogicError(f"{ctor}: variable {v.name} is rebound inside its own scope")


@dataclass(frozen=True)
class ForAll(Formula):
    var: Variable
    body: Formula

    def __post_init__(self):
        _check_fresh("forall", self.var, self.body)


@dataclass(frozen=True)
class Exists(Formula):
    var: Variable
    body: Formula

    def __post_init__(self):
        _check_fresh("exists", self.var, self.body)


@dataclass(frozen=True)
class CountExact(Formula):
    """Exactly ``n`` elements of ``var``'s sort satisfy ``body``."""

    n: int
    var: Variable
    body: Formula

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int) or not 1 <= self.n <= 30:
            raise LogicError(f"count: n={self.n!r} outside [1, 30]")
        _check_fresh("count", self.var, self.body)


@dataclass(frozen=True)
class Iota(Formula):
    """``subject`` is the unique person satisfying ``prop`` (with ``var`` free in it)."""

    subject: Constant
    var: Variable
    prop: Formula

    def __post_init__(self):
        _require(isinstance(self.subject, Constant) and self.subject.sort is Sort.PERSON,
                 "iota", f"subject {self.subject} must be a person constant")
        _require(self.var.sort is Sort.PERSON, "iota", f"variable {self.var} must range over people")
        _check_fresh("iota", self.var, self.prop)


QUANTIFIERS = (ForAll, Exists, CountExact)
ATOMS = (Visit, Taller, AsTall, Eq)


def conj(*fs: Formula) -> Formula:
    """Flattened conjunction; a single conjunct is returned unwrapped."""
    flat = []
    for f in fs:
        flat.extend(f.fs if isinstance(f, And) else (f,))
    if not flat:
        raise LogicError("conj: no conjuncts")
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def negate(f: Formula) -> Formula:
    return f.f if isinstance(f, Not) else Not(f)


def children(f: Formula) -> tuple:
    if isinstance(f, Not):
        return (f.f,)
    if isinstance(f, And):
        return f.fs
    if isinstance(f, QUANTIFIERS):
        return (f.body,)
    if isinstance(f, Iota):
        return (f.prop,)
    return ()


def terms(f: Formula) -> tuple:
    if isinstance(f, Visit):
        return (f.agent, f.target)
    if isinstance(f, (Taller, AsTall, Eq)):
        return (f.a, f.b)
    if isinstance(f, Iota):
        return (f.subject,)
    return ()


def walk(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(children(g)))


def bound_variables(f: Formula) -> set:
    out = set()
    for g in walk(f):
        if isinstance(g, (ForAll, Exists, CountExact, Iota)):
            out.add(g.var)
    return out


def free_variables(f: Formula, bound: frozenset = frozenset()) -> set:
    if isinstance(f, (ForAll, Exists, CountExact)):
        return free_variables(f.body, bound | {f.var})
    if isinstance(f, Iota):
        return free_variables(f.prop, bound | {f.var})
    out = {t for t in terms(f) if isinstance(t, Variable) and t not in bound}
    for g in children(f):
        out |= free_variables(g, bound)
    return out


def is_sentence(f: Formula) -> bool:
    return not free_variables(f)


def constants(f: Formula) -> set:
    return {t for g in walk(f) for t in terms(g) if isinstance(t, Constant)}


def free_constants(f: Formula) -> tuple:
    """Constants occurring in ``f``, split into (people, places)."""
    cs = constants(f)
    return ({c for c in cs if c.sort is Sort.PERSON}, {c for c in cs if c.sort is Sort.PLACE})


_OP_NAMES = {Visit: "visit", Taller: "taller", AsTall: "astall", Eq: "eq", Not: "not",
             And: "and", ForAll: "forall", Exists: "exists", CountExact: "count", Iota: "iota"}


def operators(f: Formula) -> set:
    """Operator census: the set of constructor names used anywhere in ``f``."""
    return {_OP_NAMES[type(g)] for g in walk(f)}


def _map_terms(f: Formula, fn: Callable[[Term], Term]) -> Formula:
    if isinstance(f, Visit):
        return Visit(fn(f.agent), fn(f.target))
    if isinstance(f, (Taller, AsTall, Eq)):
        return type(f)(fn(f.a), fn(f.b))
    if isinstance(f, Not):
        return Not(_map_terms(f.f, fn))
    if isinstance(f, And):
        return And(tuple(_map_terms(g, fn) for g in f.fs))
    if isinstance(f, (ForAll, Exists)):
        return type(f)(f.var, _map_terms(f.body, fn))
    if isinstance(f, CountExact):
        return CountExact(f.n, f.var, _map_terms(f.body, fn))
    if isinstance(f, Iota):
        return Iota(fn(f.subject), f.var, _map_terms(f.prop, fn))
    raise TypeError(f"not a formula: {f!r}")


def rename_constants(f: Formula, mapping: Mapping[Constant, Constant]) -> Formula:
    """Apply an injective, sort-preserving renaming of constants."""
    check_renaming(mapping)
    return _map_terms(f, lambda t: mapping.get(t, t) if isinstance(t, Constant) else t)


def check_renaming(mapping: Mapping[Constant, Constant]):
    for src, dst in mapping.items():
        if src.sort is not dst.sort:
            raise SortError(f"rename: {src} ({src.sort.value}) -> {dst} ({dst.sort.value}) changes sort")
    if len(set(mapping.values())) != len(mapping):
        raise LogicError("rename: mapping is not injective")


# --- canonical text -------------------------------------------------------

_SYMBOL = re.compile(r"[a-z][a-z0-9_]*")


def print_formula(f: Formula) -> str:
    if isinstance(f, ATOMS):
        a, b = terms(f)
        return f"({_OP_NAMES[type(f)]} {a} {b})"
    if isinstance(f, Not):
        return f"(not {print_formula(f.f)})"
    if isinstance(f, And):
        return "(and " + " ".join(print_formula(g) for g in f.fs) + ")"
    if isinstance(f, (ForAll, Exists)):
        return f"({_OP_NAMES[type(f)]} ({f.var} {f.var.sort.value}) {print_formula(f.body)})"
    if isinstance(f, CountExact):
        return f"(count {f.n} ({f.var} {f.var.sort.value}) {print_formula(f.body)})"
    if isinstance(f, Iota):
        return f"(iota {f.subject} ({f.var}) {print_formula(f.prop)})"
    raise TypeError(f"not a formula: {f!r}")


_TOKEN = re.compile(r"\s+|\(|\)|[^\s()]+")


def _tokenize_sexpr(text: str) -> list:
    out = []
    for m in _TOKEN.finditer(text):
        if not m.group().isspace():
            out.append((m.group(), m.start()))
    return out


def _read(tokens: list, text: str):
    """Nested lists of (symbol, offset) from s-expression tokens."""
    pos = 0

    def eof_offset():
        return max(len(text.encode("utf-8")) - 1, 0)

    def byte_offset(i):
        return len(text[:i].encode("utf-8"))

    def read_one():
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError("unexpected end of input", eof_offset())
        tok, off = tokens[pos]
        pos += 1
        if tok == ")":
            raise ParseError("unexpected ')'", byte_offset(off))
        if tok != "(":
            return (tok, byte_offset(off))
        items = []
        while True:
            if pos >= len(tokens):
                raise ParseError("unbalanced parenthesis: expected ')'", eof_offset())
            if tokens[pos][0] == ")":
                pos += 1
                return (items, byte_offset(off))
            items.append(read_one())

    tree = read_one()
    if pos != len(tokens):
        raise ParseError("trailing input", byte_offset(tokens[pos][1]))
    return tree


class _Parser:
    def __init__(self, sorts):
        self.sorts = sorts
        self.inferred = {}

    def symbol(self, node, what="symbol"):
        val, off = node
        if isinstance(val, list) or not _SYMBOL.fullmatch(val):
            raise ParseError(f"expected {what}", off)
        return val

    def sort(self, node) -> Sort:
        name = self.symbol(node, "sort")
        try:
            return Sort(name)
        except ValueError:
            raise ParseError(f"unknown sort {name!r}", node[1]) from None

    def term(self, node, env, want: Sort | None):
        name = self.symbol(node, "term")
        if name in env:
            return env[name]
        if self.sorts is not None:
            if name not in self.sorts:
                raise SortError(f"constant {name!r} has no declared sort")
            return Constant(name, self.sorts[name])
        return _Pending(name, want)

    def binder(self, node, with_sort=True):
        items, off = node
        if not isinstance(items, list) or len(items) != (2 if with_sort else 1):
            raise ParseError("malformed variable binder", off)
        name = self.symbol(items[0], "variable")
        sort = self.sort(items[1]) if with_sort else Sort.PERSON
        return Variable(name, sort)

    def formula(self, node, env):
        items, off = node
        if not isinstance(items, list) or not items:
            raise ParseError("expected '('", off)
        head = self.symbol(items[0], "operator")
        args = items[1:]

        def arity(n):
            if len(args) != n:
                raise ParseError(f"{head}: expected {n} arguments, got {len(args)}", off)

        if head == "visit":
            arity(2)
            return ("visit", self.term(args[0], env, Sort.PERSON), self.term(args[1], env, None))
        if head in ("taller", "astall"):
            arity(2)
            return (head, self.term(args[0], env, Sort.PERSON), self.term(args[1], env, Sort.PERSON))
        if head == "eq":
            arity(2)
            return ("eq", self.term(args[0], env, None), self.term(args[1], env, None))
        if head == "not":
            arity(1)
            return ("not", self.formula(args[0], env))
        if head == "and":
            if not args:
                raise ParseError("and: expected at least one conjunct", off)
            return ("and", [self.formula(a, env) for a in args])
        if head in ("forall", "exists"):
            arity(2)
            v = self.binder(args[0])
            self._no_shadow(v, env, head)
            return (head, v, self.formula(args[1], {**env, v.name: v}))
        if head == "count":
            arity(3)
            n_txt, n_off = args[0]
            if isinstance(n_txt, list) or not n_txt.isdigit():
                raise ParseError("count: expected integer", n_off)
            v = self.binder(args[1])
            self._no_shadow(v, env, head)
            return ("count", int(n_txt), v, self.formula(args[2], {**env, v.name: v}))
        if head == "iota":
            arity(3)
            subj = self.term(args[0], env, Sort.PERSON)
            v = self.binder(args[1], with_sort=False)
            self._no_shadow(v, env, head)
            return ("iota", subj, v, self.formula(args[2], {**env, v.name: v}))
        raise ParseError(f"unknown operator {head!r}", items[0][1])

    @staticmethod
    def _no_shadow(v, env, head):
        if v.name in env:
            raise LogicError(f"{head}: variable {v.name} shadows an enclosing binder")


@dataclass
class _Pending:
    name: str
    want: Sort | None


def _collect_pending(raw, out: dict):
    if isinstance(raw, _Pending):
        if raw.want is not None:
            out.setdefault(raw.name, set()).add(raw.want)
        else:
            out.setdefault(raw.name, set())
    elif isinstance(raw, (tuple, list)):
        for x in raw:
            _collect_pending(x, out)


def _resolve(raw, sorts: dict):
    def term(t):
        return Constant(t.name, sorts[t.name]) if isinstance(t, _Pending) else t

    tag = raw[0]
    if tag == "visit":
        return Visit(term(raw[1]), term(raw[2]))
    if tag == "taller":
        return Taller(term(raw[1]), term(raw[2]))
    if tag == "astall":
        return AsTall(term(raw[1]), term(raw[2]))
    if tag == "eq":
        return Eq(term(raw[1]), term(raw[2]))
    if tag == "not":
        return Not(_resolve(raw[1], sorts))
    if tag == "and":
        return And(tuple(_resolve(g, sorts) for g in raw[1]))
    if tag == "forall":
        return ForAll(raw[1], _resolve(raw[2], sorts))
    if tag == "exists":
        return Exists(raw[1], _resolve(raw[2], sorts))
    if tag == "count":
        return CountExact(raw[1], raw[2], _resolve(raw[3], sorts))
    if tag == "iota":
        return Iota(term(raw[1]), raw[2], _resolve(raw[3], sorts))
    raise AssertionError(tag)


def infer_sorts(texts: Iterable[str]) -> dict:
    """Infer constant sorts from argument positions across several formulas.

    A constant is a person if it ever occurs in a person-only position
    (visit agent, comparative argument, iota subject); otherwise a place.
    """
    wanted: dict = {}
    for text in texts:
        p = _Parser(None)
        raw = p.formula(_read(_tokenize_sexpr(text), text), {})
        _collect_pending(raw, wanted)
    return {name: (Sort.PERSON if Sort.PERSON in ws else Sort.PLACE) for name, ws in wanted.items()}


def parse_formula(text: str, sorts: Mapping[str, Sort] | None = None) -> Formula:
    """Parse the canonical s-expression form.

    ``sorts`` maps constant ids to sorts. Without it, sorts are inferred from
    positions in ``text`` alone, and an ambiguous visit target becomes a place.
    """
    tokens = _tokenize_sexpr(text)
    tree = _read(tokens, text)
    parser = _Parser(dict(sorts) if sorts is not None else None)
    raw = parser.formula(tree, {})
    if sorts is None:
        sorts = infer_sorts([text])
    f = _resolve(raw, dict(sorts))
    if not is_sentence(f):
        raise LogicError(f"not a sentence: free variables {sorted(v.name for v in free_variables(f))}")
    return f


class TaskId(enum.IntEnum):
    SIMPLE_NEGATION = 1
    BOOLEAN_COORDINATION = 2
    QUANTIFICATION = 3
    DEFINITE_DESCRIPTION = 4
    COMPARATIVES = 5
    COUNTING = 6
    MIXED = 7


# task at which each operator first becomes available
OPERATOR_INTRODUCED = {"visit": 1, "not": 1, "and": 2, "forall": 3, "exists": 3,
                       "iota": 4, "eq": 4, "taller": 5, "astall": 5, "count": 6}


@dataclass(frozen=True)
class SymbolicPair:
    premise: tuple
    hypothesis: Formula
    label: Label
    task: TaskId
    template_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "premise", tuple(self.premise))
        object.__setattr__(self, "label", Label.parse(self.label))
        object.__setattr__(self, "task", TaskId(self.task))
        if not self.premise:
            raise LogicError("pair: empty premise")
        for f in (*self.premise, self.hypothesis):
            if not is_sentence(f):
                raise LogicError(f"pair: formula with free variables: {print_formula(f)}")

    @property
    def formulas(self) -> tuple:
        return (*self.premise, self.hypothesis)

    def operators(self) -> set:
        out = set()
        for f in self.formulas:
            out |= operators(f)
        return out

    def rename(self, mapping: Mapping[Constant, Constant]) -> "SymbolicPair":
        check_renaming(mapping)
        return SymbolicPair(tuple(rename_constants(f, mapping) for f in self.premise),
                            rename_constants(self.hypothesis, mapping),
                            self.label, self.task, self.template_id)
