"""Seeded generators for Tasks 1-7 and train/test split construction.

Every example is produced from its own ``random.Random`` keyed by
``(seed, stream, index, attempt)``, so a split is order-stable and any single
example can be regenerated in isolation. Labels are fixed by index parity
(even indices contradict) before a seeded shuffle, giving exact balance.
"""

from __future__ import annotations

import random
import re
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from .logic import (
    And, AsTall, Constant, CountExact, Exists, ForAll, Formula, Iota, Label, LogicError, Not,
    Sort, SymbolicPair, Taller, TaskId, Variable, Visit, conj, negate, print_formula,
    OPERATOR_INTRODUCED,
)
from .semantics import label_pair

GENERATOR_VERSION = "1.0"

VOCAB_MODES = ("disjoint", "intersect")
TASK6_MODES = ("mixed", "both", "single")

# per-task default for facts_range: what a "fact" counts differs by task
DEFAULT_FACTS = {
    TaskId.SIMPLE_NEGATION: (2, 12),       # visit facts
    TaskId.BOOLEAN_COORDINATION: (1, 5),   # coordinated sentences
    TaskId.QUANTIFICATION: (0, 3),         # filler facts around the quantified sentence
    TaskId.DEFINITE_DESCRIPTION: (0, 2),   # filler facts after the description
    TaskId.COMPARATIVES: (4, 10),          # order atoms in the chain
    TaskId.COUNTING: (0, 0),               # unused
    TaskId.MIXED: (0, 0),                  # unused; sub-tasks keep their own defaults
}

MAX_CONSECUTIVE_COLLISIONS = 1000
_ATOM = re.compile(r"[^\s()]+")  # one token of a printed formula


class GenerationError(RuntimeError):
    pass


class PoolExhausted(GenerationError):
    pass


class LabelMismatch(GenerationError):
    """The labeler disagrees with a constructed label: a generator bug."""


class DisjointnessError(ValueError):
    pass


def _check_range(name, r, lo, hi=None):
    a, b = r
    if not (isinstance(a, int) and isinstance(b, int)) or a > b or a < lo or (hi is not None and b > hi):
        raise ValueError(f"{name}={r!r} must be an integer range within [{lo}, {hi if hi is not None else 'inf'}]")


@dataclass(frozen=True)
class TaskConfig:
    task: TaskId
    train_size: int = 10_000
    test_size: int = 1_000
    seed: int = 0
    facts_range: tuple | None = None
    count_range: tuple = (1, 30)
    coordination_range: tuple = (2, 4)
    vocab_mode: str = "disjoint"
    task6_mode: str = "mixed"
    mix_weights: tuple | None = None  # Task 7 weights over tasks 1-6; None is uniform
    strict_prob: float = 0.75         # Task 5 share of strict edges in a chain
    join_style: str = "comma"
    balance_alpha: float = 1e-3       # name-balance chi-square warning threshold

    def __post_init__(self):
        object.__setattr__(self, "task", TaskId(self.task))
        if self.facts_range is None:
            object.__setattr__(self, "facts_range", DEFAULT_FACTS[self.task])
        object.__setattr__(self, "facts_range", tuple(self.facts_range))
        object.__setattr__(self, "count_range", tuple(self.count_range))
        object.__setattr__(self, "coordination_range", tuple(self.coordination_range))
        for name in ("train_size", "test_size"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 2 or v % 2:
                raise ValueError(f"{name}={v!r} must be an even integer >= 2")
        lo_facts = {TaskId.SIMPLE_NEGATION: 1, TaskId.BOOLEAN_COORDINATION: 1,
                    TaskId.COMPARATIVES: 1}.get(self.task, 0)
        _check_range("facts_range", self.facts_range, lo_facts)
        _check_range("count_range", self.count_range, 1, 30)
        _check_range("coordination_range", self.coordination_range, 2)
        if self.vocab_mode not in VOCAB_MODES:
            raise ValueError(f"vocab_mode must be one of {VOCAB_MODES}")
        if self.task6_mode not in TASK6_MODES:
            raise ValueError(f"task6_mode must be one of {TASK6_MODES}")
        if self.mix_weights is not None:
            w = tuple(float(x) for x in self.mix_weights)
            if len(w) != 6 or min(w) < 0 or sum(w) <= 0:
                raise ValueError("mix_weights needs six non-negative weights with a positive sum")
            object.__setattr__(self, "mix_weights", w)
        if not 0.0 < self.strict_prob <= 1.0:
            raise ValueError("strict_prob must be in (0, 1]")

    def for_task(self, task) -> "TaskConfig":
        """This config retargeted at ``task`` with that task's default facts_range."""
        return replace(self, task=TaskId(task), facts_range=None)


@dataclass(frozen=True)
class ConstantPool:
    """Symbolic constants available to generators: x1..xN people, p1..pM places."""

    n_people: int = 40
    n_places: int = 40

    @property
    def people(self) -> tuple:
        return tuple(Constant(f"x{i}", Sort.PERSON) for i in range(1, self.n_people + 1))

    @property
    def places(self) -> tuple:
        return tuple(Constant(f"p{i}", Sort.PLACE) for i in range(1, self.n_places + 1))


class _Draw:
    """Draws distinct constants from a pool for one pair."""

    def __init__(self, rng: random.Random, pool: ConstantPool):
        self.rng = rng
        self.free = {Sort.PERSON: list(pool.people), Sort.PLACE: list(pool.places)}

    def take(self, sort: Sort, k: int = 1) -> list:
        free = self.free[sort]
        if k > len(free):
            raise PoolExhausted(f"pool has {len(free)} unused {sort.value} constants, need {k}")
        picked = self.rng.sample(free, k)
        for c in picked:
            free.remove(c)
        return picked

    def person(self) -> Constant:
        return self.take(Sort.PERSON)[0]

    def place(self) -> Constant:
        return self.take(Sort.PLACE)[0]


X = Variable("x", Sort.PERSON)
Y = Variable("y", Sort.PERSON)
Z = Variable("z", Sort.PERSON)
P = Variable("p", Sort.PLACE)

C, N = Label.CONTRADICTION, Label.NON_CONTRADICTION


def _span(rng, r):
    return rng.randint(r[0], r[1])


# --- Task 1: simple negation -------------------------------------------------

def _task1(rng, d: _Draw, cfg: TaskConfig, label: Label):
    k = _span(rng, cfg.facts_range)
    agents = d.take(Sort.PERSON, k)
    places = d.take(Sort.PLACE, k)
    facts = [Visit(a, p) for a, p in zip(agents, places)]
    if label is C:
        return facts, negate(rng.choice(facts)), "t1.negate_fact"
    if rng.random() < 0.5:
        return facts, Not(Visit(d.person(), rng.choice(places))), "t1.fresh_agent"
    return facts, Not(Visit(d.person(), d.place())), "t1.fresh_fact"


# --- Task 2: boolean coordination -------------------------------------------

def _task2(rng, d: _Draw, cfg: TaskConfig, label: Label):
    k = _span(rng, cfg.facts_range)
    groups = []
    for place in d.take(Sort.PLACE, k):
        agents = d.take(Sort.PERSON, _span(rng, cfg.coordination_range))
        groups.append((agents, place))
    premise = [conj(*(Visit(a, p) for a in agents)) for agents, p in groups]
    if label is C:
        agents, p = rng.choice(groups)
        return premise, Not(Visit(rng.choice(agents), p)), "t2.negate_coordinated"
    if rng.random() < 0.5:
        return premise, Not(Visit(d.person(), rng.choice(groups)[1])), "t2.fresh_agent"
    return premise, Not(Visit(d.person(), d.place())), "t2.fresh_fact"


# --- Task 3: quantification ---------------------------------------------------

def _fillers(rng, d: _Draw, k: int) -> list:
    return [Visit(d.person(), d.place() if rng.random() < 0.5 else d.person()) for _ in range(k)]


def _mentioned(fs, sort) -> list:
    from .logic import constants
    out = set()
    for f in fs:
        out |= {c for c in constants(f) if c.sort is sort}
    return sorted(out)


def _pick(rng, d: _Draw, fs, sort, exclude=()) -> Constant:
    """A constant of ``sort``: reused from ``fs`` or fresh, 50/50."""
    pool = [c for c in _mentioned(fs, sort) if c not in exclude]
    if pool and rng.random() < 0.5:
        return rng.choice(pool)
    return d.take(sort)[0]


def _task3(rng, d: _Draw, cfg: TaskConfig, label: Label):
    family = rng.choice("abcdef")
    fillers = _fillers(rng, d, _span(rng, cfg.facts_range))
    if family == "a":    # everyone has visited every place
        q = ForAll(X, ForAll(P, Visit(X, P)))
        prem = fillers + [q]
        x = _pick(rng, d, prem, Sort.PERSON)
        if label is C:
            h = Not(Visit(x, _pick(rng, d, prem, Sort.PLACE)))
        else:
            h = Not(Visit(x, _pick(rng, d, prem, Sort.PERSON, exclude=(x,))))
    elif family == "b":  # everyone has visited everyone
        q = ForAll(X, ForAll(Y, Visit(X, Y)))
        prem = fillers + [q]
        x = _pick(rng, d, prem, Sort.PERSON)
        if label is C:
            h = Not(Visit(x, _pick(rng, d, prem, Sort.PERSON, exclude=(x,))))
        else:
            h = Not(Visit(x, _pick(rng, d, prem, Sort.PLACE)))
    elif family == "c":  # a has visited every place
        a = _pick(rng, d, fillers, Sort.PERSON)
        q = ForAll(P, Visit(a, P))
        prem = fillers + [q]
        if label is C:
            h = Not(Visit(a, _pick(rng, d, prem, Sort.PLACE)))
        elif rng.random() < 0.5:
            h = Not(Visit(_pick(rng, d, prem, Sort.PERSON, exclude=(a,)), _pick(rng, d, prem, Sort.PLACE)))
        else:
            h = Not(Visit(a, _pick(rng, d, prem, Sort.PERSON, exclude=(a,))))
    elif family == "d":  # everyone has visited p
        p = _pick(rng, d, fillers, Sort.PLACE)
        q = ForAll(X, Visit(X, p))
        prem = fillers + [q]
        b = _pick(rng, d, prem, Sort.PERSON)
        if label is C:
            h = Not(Visit(b, p))
        else:
            h = Not(Visit(b, _pick(rng, d, prem, Sort.PLACE, exclude=(p,))))
    elif family == "e":  # someone has visited every place
        q = Exists(X, ForAll(P, Visit(X, P)))
        prem = fillers + [q]
        p = _pick(rng, d, prem, Sort.PLACE)
        if label is C:
            h = Not(Exists(X, Visit(X, p)))
        else:
            h = Not(Visit(_pick(rng, d, prem, Sort.PERSON), p))
    else:                # someone has visited p
        p = _pick(rng, d, fillers, Sort.PLACE)
        q = Exists(X, Visit(X, p))
        prem = fillers + [q]
        if label is C:
            h = Not(Exists(X, Visit(X, p)))
        else:
            h = Not(Visit(_pick(rng, d, prem, Sort.PERSON), p))
    if isinstance(h, Not) and h.f in fillers:
        return None  # reused constants happened to negate a filler fact
    premise = list(fillers)
    premise.insert(rng.randint(0, len(fillers)), q)
    return premise, h, f"t3.{family}"


# --- Task 4: definite description --------------------------------------------

def _task4(rng, d: _Draw, cfg: TaskConfig, label: Label):
    c, other = d.take(Sort.PERSON, 2)
    over_places = rng.random() < 0.5
    prop = ForAll(P, Visit(Y, P)) if over_places else ForAll(Z, Visit(Y, Z))
    premise = [Iota(c, Y, prop), Visit(c, other)]
    premise += [Visit(d.person(), d.place() if rng.random() < 0.5 else d.person())
                for _ in range(_span(rng, cfg.facts_range))]
    target = d.place() if over_places else d.person()
    kind = "places" if over_places else "people"
    if label is C:
        return premise, Not(Visit(c, target)), f"t4.{kind}.described_agent"
    return premise, Not(Visit(other, target)), f"t4.{kind}.other_agent"


# --- Task 5: comparatives ------------------------------------------------------

def _task5(rng, d: _Draw, cfg: TaskConfig, label: Label):
    k = _span(rng, cfg.facts_range)
    people = d.take(Sort.PERSON, k + 1)
    strict = [rng.random() < cfg.strict_prob for _ in range(k)]
    premise = [(Taller if s else AsTall)(a, b) for a, b, s in zip(people, people[1:], strict)]
    rel = rng.choice((Taller, AsTall))

    def pairs(pred):
        return [(i, j) for i in range(k + 1) for j in range(i + 1, k + 1) if pred(any(strict[i:j]))]

    if label is C:
        if rel is Taller:
            i, j = rng.choice(pairs(lambda s: True))
            return premise, Taller(people[j], people[i]), "t5.reverse_strict"
        cands = pairs(lambda s: s)
        if not cands:
            return None
        i, j = rng.choice(cands)
        return premise, AsTall(people[j], people[i]), "t5.reverse_weak_over_strict"
    weak_paths = pairs(lambda s: not s)
    if rel is AsTall and weak_paths and rng.random() < 0.5:
        i, j = rng.choice(weak_paths)
        return premise, AsTall(people[j], people[i]), "t5.reverse_weak_over_weak"
    i, j = rng.choice(pairs(lambda s: True))
    return premise, rel(people[i], people[j]), "t5.forward"


# --- Task 6: counting --------------------------------------------------------

def _task6(rng, d: _Draw, cfg: TaskConfig, label: Label):
    a = d.person()
    mode = cfg.task6_mode if cfg.task6_mode != "mixed" else rng.choice(("both", "single"))
    n_places, n_people = _span(rng, cfg.count_range), _span(rng, cfg.count_range)
    counts = {Sort.PLACE: CountExact(n_places, P, Visit(a, P)),
              Sort.PERSON: CountExact(n_people, Z, Visit(a, Z))}
    if mode == "both":
        premise = [conj(counts[Sort.PLACE], counts[Sort.PERSON])]
        sort = rng.choice((Sort.PLACE, Sort.PERSON))
    else:
        sort = rng.choice((Sort.PLACE, Sort.PERSON))
        premise = [counts[sort]]
    n = counts[sort].n
    if label is C:
        m, kind = n + 1, "exceed"
    elif rng.random() < 0.5:
        m, kind = 1, "fresh_fact"
    else:
        m, kind = rng.randint(1, n), "within"
    targets = d.take(sort, m)
    return premise, conj(*(Visit(a, t) for t in targets)), f"t6.{mode}.{sort.value}.{kind}"


_GENERATORS: dict[TaskId, Callable] = {
    TaskId.SIMPLE_NEGATION: _task1,
    TaskId.BOOLEAN_COORDINATION: _task2,
    TaskId.QUANTIFICATION: _task3,
    TaskId.DEFINITE_DESCRIPTION: _task4,
    TaskId.COMPARATIVES: _task5,
    TaskId.COUNTING: _task6,
}


def example_rng(seed: int, stream: str, index: int, attempt: int = 0) -> random.Random:
    return random.Random(f"{seed}/{stream}/{index}/{attempt}")


def generate_one(cfg: TaskConfig, pool: ConstantPool, label: Label, rng: random.Random) -> SymbolicPair:
    """One verified pair with the requested label."""
    task = cfg.task
    source = task
    if task is TaskId.MIXED:
        weights = cfg.mix_weights or (1,) * 6
        source = TaskId(rng.choices(range(1, 7), weights=weights)[0])
        sub = cfg.for_task(source)
    else:
        sub = cfg
    for _ in range(100):
        out = _GENERATORS[source](rng, _Draw(rng, pool), sub, label)
        if out is not None:
            break
    else:
        raise GenerationError(f"task {int(source)}: no admissible {label.text} template")
    premise, hypothesis, template = out
    pair = SymbolicPair(tuple(premise), hypothesis, label, task, template)
    got = label_pair(pair.premise, pair.hypothesis)
    if got is not label:
        raise LabelMismatch(
            f"template {template} built a {label.text} pair labeled {got.text}: "
            f"{[print_formula(f) for f in premise]} / {print_formula(hypothesis)}")
    return pair


def _labels(n: int, seed: int, stream: str) -> list:
    labels = [C if i % 2 == 0 else N for i in range(n)]
    random.Random(f"{seed}/{stream}/labels").shuffle(labels)
    return labels


def generate_pairs(cfg: TaskConfig, pool: ConstantPool = ConstantPool(), n: int | None = None,
                   stream: str = "train") -> list:
    """``n`` (default ``cfg.train_size``) balanced, label-verified symbolic pairs."""
    n = cfg.train_size if n is None else n
    if n % 2:
        raise ValueError("pair count must be even")
    return [generate_one(cfg, pool, label, example_rng(cfg.seed, stream, i))
            for i, label in enumerate(_labels(n, cfg.seed, stream))]


def generate_mixed(cfgs: Sequence[TaskConfig], total: int, seed: int,
                   pool: ConstantPool = ConstantPool()) -> list:
    """Task 7: a uniform mixture of tasks 1-6, each drawn with its own config."""
    by_task = {TaskId(c.task): c for c in cfgs}
    missing = [t for t in range(1, 7) if TaskId(t) not in by_task]
    if missing:
        raise ValueError(f"generate_mixed needs configs for tasks 1-6; missing {missing}")
    if total % 2:
        raise ValueError("total must be even")
    out = []
    for i, label in enumerate(_labels(total, seed, "mixed")):
        rng = example_rng(seed, "mixed", i)
        source = TaskId(rng.randint(1, 6))
        p = generate_one(by_task[source], pool, label, rng)
        out.append(SymbolicPair(p.premise, p.hypothesis, p.label, TaskId.MIXED, p.template_id))
    return out


def source_task(pair: SymbolicPair) -> int:
    """Originating task of a pair (Task 7 pairs carry it in template_id)."""
    return int(pair.template_id[1]) if pair.template_id.startswith("t") else int(pair.task)


def hierarchy_violations(pair: SymbolicPair) -> set:
    """Operators in ``pair`` introduced after its task."""
    return {op for op in pair.operators() if OPERATOR_INTRODUCED[op] > int(pair.task)}


# --- splits ----------------------------------------------------------------

def check_disjoint(lex_train, lex_test):
    clash = []
    for sort in (Sort.PERSON, Sort.PLACE):
        a = {n.casefold(): n for n in lex_train.names(sort)}
        clash += sorted(a[k] for k in a.keys() & {n.casefold() for n in lex_test.names(sort)})
    if clash:
        raise DisjointnessError(f"train and test lexicons share names: {clash}")


def dedupe_key(pair: SymbolicPair, indices: dict) -> tuple:
    """Language-independent identity of a realized pair: structure plus bound name indices."""
    ids = {c.id: f"{c.sort.value[:2]}{i}" for c, i in indices.items()}

    def canon(f):
        return _ATOM.sub(lambda m: ids.get(m.group(0), m.group(0)), print_formula(f))
    return tuple(canon(f) for f in pair.premise), canon(pair.hypothesis)


def name_balance_pvalue(examples, lex) -> float:
    """Chi-square p-value that name choice is independent of label, tested within each sort.

    Templates legitimately change how many people versus places a pair mentions,
    so only the distribution over names of one sort is compared across labels.
    The two per-sort p-values are Bonferroni-combined; 1.0 means untestable.
    """
    from scipy.stats import chi2_contingency
    people = set(lex.people)
    counts = ({}, {})
    for ex in examples:
        for _, name in ex.binding:
            row = counts[name not in people].setdefault(name, [0, 0])
            row[int(ex.label)] += 1
    pvalues = []
    for table in counts:
        rows = list(table.values())
        if len(rows) >= 2 and all(sum(r[j] for r in rows) for j in (0, 1)):
            pvalues.append(float(chi2_contingency(rows).pvalue))
    return min(1.0, min(pvalues) * len(pvalues)) if pvalues else 1.0


def realize_split_examples(cfg: TaskConfig, lex, role: str, size: int,
                           pool: ConstantPool = ConstantPool()) -> list:
    from .realization import draw_binding, pair_constants, realize_pair

    sizes = (len(lex.people), len(lex.places))
    seen = set()
    out = []
    labels = _labels(size, cfg.seed, role)
    for i, label in enumerate(labels):
        for attempt in range(MAX_CONSECUTIVE_COLLISIONS):
            rng = example_rng(cfg.seed, role, i, attempt)
            pair = generate_one(cfg, pool, label, rng)
            bind_seed = rng.getrandbits(64)
            people, places = pair_constants(pair.premise, pair.hypothesis)
            key = dedupe_key(pair, draw_binding(people, places, sizes, bind_seed))
            if key not in seen:
                seen.add(key)
                out.append(realize_pair(pair, lex, bind_seed, cfg.join_style))
                break
        else:
            raise GenerationError(
                f"{MAX_CONSECUTIVE_COLLISIONS} consecutive duplicate pairs at {role} index {i}")
    return out


def make_split(cfg: TaskConfig, lex_train, lex_test=None, pool: ConstantPool = ConstantPool()):
    """(train, test) DatasetSplits; intersect mode realizes both with ``lex_train``."""
    from .dataset import DatasetSplit

    if lex_test is None or cfg.vocab_mode == "intersect":
        if cfg.vocab_mode == "disjoint":
            raise DisjointnessError("disjoint mode needs a separate test lexicon")
        lex_test = lex_train
    else:
        check_disjoint(lex_train, lex_test)
    if lex_train.language != lex_test.language:
        raise ValueError("train and test lexicons must share a language")
    splits = []
    for role, lex, size in (("train", lex_train, cfg.train_size), ("test", lex_test, cfg.test_size)):
        examples = realize_split_examples(cfg, lex, role, size, pool)
        pvalue = name_balance_pvalue(examples, lex)
        if pvalue < cfg.balance_alpha:
            warnings.warn(f"{role} split: name usage depends on label (chi-square p={pvalue:.2e})")
        meta = {
            "task": int(cfg.task), "language": lex.language, "vocab_mode": cfg.vocab_mode,
            "seed": cfg.seed, "generator_version": GENERATOR_VERSION, "split_role": role,
            "lexicon": lex.name, "name_balance_p": pvalue,
        }
        splits.append(DatasetSplit(tuple(examples), meta))
    return tuple(splits)
