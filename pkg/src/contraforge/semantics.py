"""Finite-model semantics, the production labeler, and a model-enumeration oracle.

Two independent routes decide satisfiability of a formula set over the same
bounded universe (mentioned constants plus fresh slack entities per sort):

* ``consistent`` grounds the visit fragment into propositional constraints,
  solves them by propagation with branching on disjunctions, and decides
  comparatives by cycle detection on the order graph.
* ``brute_force_consistent`` enumerates models, assigning one visit atom or
  one height at a time, and only evaluates formulas with the Tarskian
  evaluator (three-valued on partial models, to prune refuted branches).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .logic import (
    And, AsTall, Constant, CountExact, Eq, Exists, ForAll, Formula, Iota, Label,
    LogicError, Not, Sort, Taller, Variable, Visit, constants, walk,
)


class SemanticsError(LogicError):
    pass


class UnknownConstantError(SemanticsError):
    pass


class FragmentError(SemanticsError):
    """The formula set falls outside the fragment the task templates produce."""


class GuardError(SemanticsError):
    """The instance is too large for exhaustive model enumeration."""


@dataclass(frozen=True)
class UniverseBounds:
    extra_people: int = 1
    extra_places: int = 1

    def __post_init__(self):
        if self.extra_people < 0 or self.extra_places < 0:
            raise ValueError("universe bounds must be non-negative")


@dataclass
class Model:
    people: frozenset
    places: frozenset
    visits: frozenset = frozenset()
    heights: dict = field(default_factory=dict)

    def __post_init__(self):
        self.people = frozenset(self.people)
        self.places = frozenset(self.places)
        self.visits = frozenset(self.visits)
        if self.people & self.places:
            raise SemanticsError("people and places overlap")
        targets = self.people | self.places
        for a, b in self.visits:
            if a not in self.people or b not in targets:
                raise SemanticsError(f"visit ({a}, {b}) outside the domain")
        if set(self.heights) != set(self.people):
            raise SemanticsError("heights must be defined on exactly the people")

    def domain(self, sort: Sort) -> frozenset:
        return self.people if sort is Sort.PERSON else self.places


# --- total evaluation --------------------------------------------------------

def _value(t, env):
    return env[t] if isinstance(t, Variable) else t


def evaluate(m: Model, f: Formula) -> bool:
    """Tarskian truth of the sentence ``f`` in ``m``."""
    for c in constants(f):
        if c not in m.domain(c.sort):
            raise UnknownConstantError(f"constant {c} ({c.sort.value}) is not in the model")
    order = {s: sorted(m.domain(s)) for s in Sort}
    return _ev(m, f, {}, order)


def _ev(m: Model, f: Formula, env: dict, order: dict) -> bool:
    if isinstance(f, Visit):
        return (_value(f.agent, env), _value(f.target, env)) in m.visits
    if isinstance(f, Taller):
        return m.heights[_value(f.a, env)] > m.heights[_value(f.b, env)]
    if isinstance(f, AsTall):
        return m.heights[_value(f.a, env)] >= m.heights[_value(f.b, env)]
    if isinstance(f, Eq):
        return _value(f.a, env) == _value(f.b, env)
    if isinstance(f, Not):
        return not _ev(m, f.f, env, order)
    if isinstance(f, And):
        return all(_ev(m, g, env, order) for g in f.fs)
    if isinstance(f, ForAll):
        return all(_ev(m, f.body, {**env, f.var: d}, order) for d in order[f.var.sort])
    if isinstance(f, Exists):
        return any(_ev(m, f.body, {**env, f.var: d}, order) for d in order[f.var.sort])
    if isinstance(f, CountExact):
        return sum(_ev(m, f.body, {**env, f.var: d}, order) for d in order[f.var.sort]) == f.n
    if isinstance(f, Iota):
        subj = f.subject
        return all(_ev(m, f.prop, {**env, f.var: d}, order) == (d == subj) for d in order[Sort.PERSON])
    raise TypeError(f"not a formula: {f!r}")


# --- universe ---------------------------------------------------------------

def fresh_constant(sort: Sort, i: int) -> Constant:
    # '?' is not a symbol character in the canonical grammar, so these never collide
    return Constant(f"?{sort.value}{i}", sort)


def _count_slack(fs: Sequence[Formula], sort: Sort) -> int:
    return max((g.n for f in fs for g in walk(f) if isinstance(g, CountExact) and g.var.sort is sort),
               default=0)


def universe(fs: Sequence[Formula], bounds: UniverseBounds = UniverseBounds()) -> tuple:
    """(people, places) for satisfiability: mentioned constants plus fresh slack.

    The slack per sort is the larger of the configured bound and the largest
    counting index over that sort, so that every count can be witnessed.
    """
    mentioned = set()
    for f in fs:
        mentioned |= constants(f)
    people = sorted(c for c in mentioned if c.sort is Sort.PERSON)
    places = sorted(c for c in mentioned if c.sort is Sort.PLACE)
    n_people = max(bounds.extra_people, _count_slack(fs, Sort.PERSON))
    n_places = max(bounds.extra_places, _count_slack(fs, Sort.PLACE))
    people += [fresh_constant(Sort.PERSON, i) for i in range(1, n_people + 1)]
    places += [fresh_constant(Sort.PLACE, i) for i in range(1, n_places + 1)]
    return tuple(people), tuple(places)


# --- brute-force oracle ------------------------------------------------------

_UNKNOWN = None


def _ev3(f, env, vis, hts, doms, need):
    """Kleene three-valued evaluation on a partial model.

    Returns True/False/None. On None, ``need`` receives the first unassigned
    variable (a visit pair or ('h', person)) the evaluation depended on.
    """
    if isinstance(f, Visit):
        key = (_value(f.agent, env), _value(f.target, env))
        v = vis.get(key, _UNKNOWN)
        if v is _UNKNOWN and not need:
            need.append(key)
        return v
    if isinstance(f, (Taller, AsTall)):
        a, b = _value(f.a, env), _value(f.b, env)
        ha, hb = hts.get(a), hts.get(b)
        if ha is None or hb is None:
            if not need:
                need.append(("h", a if ha is None else b))
            return _UNKNOWN
        return ha > hb if isinstance(f, Taller) else ha >= hb
    if isinstance(f, Eq):
        return _value(f.a, env) == _value(f.b, env)
    if isinstance(f, Not):
        v = _ev3(f.f, env, vis, hts, doms, need)
        return v if v is _UNKNOWN else not v
    if isinstance(f, And):
        return _all3((_ev3(g, env, vis, hts, doms, need) for g in f.fs))
    if isinstance(f, ForAll):
        return _all3(_ev3(f.body, {**env, f.var: d}, vis, hts, doms, need) for d in doms[f.var.sort])
    if isinstance(f, Exists):
        return _any3(_ev3(f.body, {**env, f.var: d}, vis, hts, doms, need) for d in doms[f.var.sort])
    if isinstance(f, CountExact):
        vals = [_ev3(f.body, {**env, f.var: d}, vis, hts, doms, need) for d in doms[f.var.sort]]
        t = sum(1 for v in vals if v is True)
        u = sum(1 for v in vals if v is _UNKNOWN)
        if t > f.n or t + u < f.n:
            return False
        return True if u == 0 else _UNKNOWN
    if isinstance(f, Iota):
        vals = []
        for d in doms[Sort.PERSON]:
            v = _ev3(f.prop, {**env, f.var: d}, vis, hts, doms, need)
            vals.append(v if v is _UNKNOWN or d == f.subject else not v)
        return _all3(vals)
    raise TypeError(f"not a formula: {f!r}")


def _all3(vals):
    seen_unknown = False
    for v in vals:
        if v is False:
            return False
        if v is _UNKNOWN:
            seen_unknown = True
    return _UNKNOWN if seen_unknown else True


def _any3(vals):
    seen_unknown = False
    for v in vals:
        if v is True:
            return True
        if v is _UNKNOWN:
            seen_unknown = True
    return _UNKNOWN if seen_unknown else False


MAX_ORACLE_PER_SORT = 5


def brute_force_consistent(fs: Sequence[Formula], bounds: UniverseBounds = UniverseBounds()) -> bool:
    """Exhaustive search for a model of ``fs`` over the bounded universe.

    Visit atoms and heights (integer levels 1..#people) are assigned one at a
    time; a branch is abandoned only when some formula is already false under
    the partial assignment, and accepted once every formula is true.
    """
    fs = list(fs)
    mentioned = set()
    for f in fs:
        mentioned |= constants(f)
    n_pe = sum(1 for c in mentioned if c.sort is Sort.PERSON) + bounds.extra_people
    n_pl = sum(1 for c in mentioned if c.sort is Sort.PLACE) + bounds.extra_places
    if n_pe > MAX_ORACLE_PER_SORT or n_pl > MAX_ORACLE_PER_SORT:
        raise GuardError(f"enumeration guard: {n_pe} people / {n_pl} places exceeds "
                         f"{MAX_ORACLE_PER_SORT} per sort")
    people, places = universe(fs, bounds)
    doms = {Sort.PERSON: people, Sort.PLACE: places}
    levels = range(1, len(people) + 1)

    def search(vis, hts):
        need = None
        for f in fs:
            touched = []
            v = _ev3(f, {}, vis, hts, doms, touched)
            if v is False:
                return False
            if v is _UNKNOWN and need is None:
                need = touched
        if need is None:
            return True
        key = need[0]
        if key[0] == "h":
            for lvl in levels:
                if search(vis, {**hts, key[1]: lvl}):
                    return True
            return False
        return search({**vis, key: False}, hts) or search({**vis, key: True}, hts)

    return search({}, {})


# --- production decision procedure -------------------------------------------
#
# Grounded constraints in negation normal form:
#   ("lit", atom, polarity) | ("and", [..]) | ("or", [..]) | ("card", n, [(atom, pol), ..])
# plus the booleans True / False.

def _mk(kind, items):
    unit, zero = (True, False) if kind == "and" else (False, True)
    out = []
    for it in items:
        if it is zero:
            return zero
        if it is unit:
            continue
        if isinstance(it, tuple) and it[0] == kind:
            out.extend(it[1])
        else:
            out.append(it)
    if not out:
        return unit
    return out[0] if len(out) == 1 else (kind, out)


def _ground(f, env, pol, doms):
    if isinstance(f, Visit):
        return ("lit", (_value(f.agent, env), _value(f.target, env)), pol)
    if isinstance(f, Eq):
        return (_value(f.a, env) == _value(f.b, env)) == pol
    if isinstance(f, (Taller, AsTall)):
        raise FragmentError("comparatives inside connectives or quantifiers are not supported")
    if isinstance(f, Not):
        return _ground(f.f, env, not pol, doms)
    if isinstance(f, And):
        return _mk("and" if pol else "or", [_ground(g, env, pol, doms) for g in f.fs])
    if isinstance(f, (ForAll, Exists)):
        kind = "and" if isinstance(f, ForAll) == pol else "or"
        return _mk(kind, [_ground(f.body, {**env, f.var: d}, pol, doms) for d in doms[f.var.sort]])
    if isinstance(f, CountExact):
        if not pol:
            raise FragmentError("negated counting quantifiers are not supported")
        lits, fixed = [], 0
        for d in doms[f.var.sort]:
            g = _ground(f.body, {**env, f.var: d}, True, doms)
            if g is True:
                fixed += 1
            elif g is False:
                continue
            elif g[0] == "lit":
                lits.append((g[1], g[2]))
            else:
                raise FragmentError("counting quantifier body must be a visit literal")
        n = f.n - fixed
        if n < 0 or n > len(lits):
            return False
        return ("card", n, lits)
    if isinstance(f, Iota):
        parts = []
        for d in doms[Sort.PERSON]:
            want = pol if d == f.subject else not pol
            parts.append(_ground(f.prop, {**env, f.var: d}, want, doms))
        return _mk("and" if pol else "or", parts)
    raise TypeError(f"not a formula: {f!r}")


def _truth(c, asg):
    """Three-valued value of a grounded constraint under assignment ``asg``."""
    if c is True or c is False:
        return c
    kind = c[0]
    if kind == "lit":
        v = asg.get(c[1])
        return None if v is None else v == c[2]
    if kind == "card":
        t = u = 0
        for atom, p in c[2]:
            v = asg.get(atom)
            if v is None:
                u += 1
            elif v == p:
                t += 1
        if t > c[1] or t + u < c[1]:
            return False
        return True if u == 0 else None
    if kind == "and":
        return _all3(_truth(g, asg) for g in c[1])
    return _any3(_truth(g, asg) for g in c[1])


def _propagate(work, asg, ors, cards):
    """Assert constraints in ``work``; returns False on conflict."""
    while True:
        while work:
            c = work.pop()
            if c is True:
                continue
            if c is False:
                return False
            kind = c[0]
            if kind == "lit":
                cur = asg.get(c[1])
                if cur is None:
                    asg[c[1]] = c[2]
                elif cur != c[2]:
                    return False
            elif kind == "and":
                work.extend(c[1])
            elif kind == "or":
                ors.append(c)
            else:
                cards.append(c)
        changed = False
        keep = []
        for c in ors:
            live = [g for g in c[1] if _truth(g, asg) is not False]
            if any(_truth(g, asg) is True for g in live):
                continue
            if not live:
                return False
            if len(live) == 1:
                work.append(live[0])
                changed = True
            else:
                keep.append(("or", live))
        ors[:] = keep
        for c in cards:
            n, lits = c[1], c[2]
            t = sum(1 for a, p in lits if asg.get(a) == p)
            free = [(a, p) for a, p in lits if a not in asg]
            if t > n or t + len(free) < n:
                return False
            if free and t == n:
                work.extend(("lit", a, not p) for a, p in free)
                changed = True
            elif free and t + len(free) == n:
                work.extend(("lit", a, p) for a, p in free)
                changed = True
        if not changed and not work:
            return True


def _solve(work, asg, ors, cards) -> bool:
    if not _propagate(work, asg, ors, cards):
        return False
    if ors:
        choice = ors[0]
        for g in choice[1]:
            if _solve([g], dict(asg), list(ors[1:]), list(cards)):
                return True
        return False
    # cards over shared unassigned atoms are not independent; split on one
    owner = {}
    for i, c in enumerate(cards):
        for a, _ in c[2]:
            if a in asg:
                continue
            if a in owner and owner[a] != i:
                return (_solve([("lit", a, True)], dict(asg), [], list(cards))
                        or _solve([("lit", a, False)], dict(asg), [], list(cards)))
            owner[a] = i
    return True


def _order_consistent(edges: Iterable[tuple]) -> bool:
    """Strict/weak ``>=`` constraints are satisfiable iff no cycle has a strict edge."""
    succ: dict = {}
    strict = []
    for a, b, is_strict in edges:
        succ.setdefault(a, set()).add(b)
        if is_strict:
            strict.append((a, b))

    def reaches(src, dst):
        seen, stack = {src}, [src]
        while stack:
            x = stack.pop()
            if x == dst:
                return True
            for y in succ.get(x, ()):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return False

    return not any(reaches(b, a) for a, b in strict)


def _order_literal(f) -> tuple | None:
    """(a, b, strict) meaning height(a) > b or >= b, or None if not a comparative literal."""
    neg = False
    while isinstance(f, Not):
        neg, f = not neg, f.f
    if isinstance(f, Taller):
        return (f.b, f.a, False) if neg else (f.a, f.b, True)
    if isinstance(f, AsTall):
        return (f.b, f.a, True) if neg else (f.a, f.b, False)
    return None


def _has_comparative(f) -> bool:
    return any(isinstance(g, (Taller, AsTall)) for g in walk(f))


def _split_conjuncts(f):
    if isinstance(f, And):
        for g in f.fs:
            yield from _split_conjuncts(g)
    else:
        yield f


def consistent(fs: Sequence[Formula], bounds: UniverseBounds = UniverseBounds()) -> bool:
    """Decide satisfiability of ``fs`` over the bounded universe."""
    fs = list(fs)
    people, places = universe(fs, bounds)
    doms = {Sort.PERSON: people, Sort.PLACE: places}
    edges, work = [], []
    for f in fs:
        for g in _split_conjuncts(f):
            lit = _order_literal(g)
            if lit is not None:
                edges.append(lit)
            elif _has_comparative(g):
                raise FragmentError(f"unsupported comparative shape: {type(g).__name__}")
            else:
                work.append(_ground(g, {}, True, doms))
    if not _order_consistent(edges):
        return False
    return _solve(work, {}, [], [])


def label_pair(premise: Sequence[Formula], hypothesis: Formula) -> Label:
    if consistent([*premise, hypothesis]):
        return Label.NON_CONTRADICTION
    return Label.CONTRADICTION


def oracle_label(premise: Sequence[Formula], hypothesis: Formula,
                 bounds: UniverseBounds = UniverseBounds()) -> Label:
    if brute_force_consistent([*premise, hypothesis], bounds):
        return Label.NON_CONTRADICTION
    return Label.CONTRADICTION


def oracle_admissible(fs: Sequence[Formula], bounds: UniverseBounds = UniverseBounds()) -> bool:
    mentioned = set()
    for f in fs:
        mentioned |= constants(f)
    n_pe = sum(1 for c in mentioned if c.sort is Sort.PERSON) + bounds.extra_people
    n_pl = sum(1 for c in mentioned if c.sort is Sort.PLACE) + bounds.extra_places
    return n_pe <= MAX_ORACLE_PER_SORT and n_pl <= MAX_ORACLE_PER_SORT
