"""Realization: binding symbolic constants to names and formulas to sentences.

A lexicon file is UTF-8, tab-separated, one entry per line::

    # comment
    language    en
    person      Charles     masc
    place       Chile
    template    visit       {a} has visited {b}

``language`` must come first. ``template`` lines override the built-in
sentence templates for that language (keys listed in ``DEFAULT_TEMPLATES``).
"""

from __future__ import annotations

import os
import random
import re
import string
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from .logic import (
    And, AsTall, Constant, CountExact, Exists, ForAll, Formula, Iota, Label, Not, Sort,
    Taller, Variable, Visit, constants,
)

LANGUAGES = ("en", "pt")
GENDERS = ("masc", "fem")
LEXDIR_ENV = "CONTRA_FORGE_LEXDIR"

DEFAULT_TEMPLATES = {
    "en": {
        "visit": "{a} has visited {b}",
        "not_visit": "{a} didn't visit {b}",
        "coord_agents": "{agents} have visited {b}",
        "coord_targets": "{a} has visited {targets}",
        "everyone_every_place": "everyone has visited every place",
        "everyone_everyone": "everyone has visited everyone",
        "agent_every_place": "{a} has visited every place",
        "agent_everyone": "{a} has visited everyone",
        "everyone_target": "everyone has visited {b}",
        "someone_every_place": "someone has visited every place",
        "someone_everyone": "someone has visited everyone",
        "someone_target": "someone has visited {b}",
        "nobody_target": "nobody has visited {b}",
        "agent_some_place": "{a} has visited some place",
        "agent_no_place": "{a} didn't visit any place",
        "iota_every_place": "{a} is the person that has visited every place",
        "iota_everyone": "{a} is the person that has visited everyone",
        "taller": "{a} is taller than {b}",
        "astall": "{a} is as tall as {b}",
        "count": "{a} has visited {counts}",
        "count_places": "only {n} places",
        "count_place_one": "only one place",
        "count_people": "only {n} people",
        "count_person_one": "only one person",
        "and": "and",
    },
    "pt": {
        "visit": "{a} visitou {b}",
        "not_visit": "{a} não visitou {b}",
        "coord_agents": "{agents} visitaram {b}",
        "coord_targets": "{a} visitou {targets}",
        "everyone_every_place": "todo mundo visitou todo lugar",
        "everyone_everyone": "todo mundo visitou todo mundo",
        "agent_every_place": "{a} visitou todo lugar",
        "agent_everyone": "{a} visitou todo mundo",
        "everyone_target": "todo mundo visitou {b}",
        "someone_every_place": "alguém visitou todo lugar",
        "someone_everyone": "alguém visitou todo mundo",
        "someone_target": "alguém visitou {b}",
        "nobody_target": "ninguém visitou {b}",
        "agent_some_place": "{a} visitou algum lugar",
        "agent_no_place": "{a} não visitou nenhum lugar",
        "iota_every_place": "{a} é a pessoa que visitou todo lugar",
        "iota_everyone": "{a} é a pessoa que visitou todo mundo",
        "taller": "{a} é mais alto que {b}",
        "astall": "{a} é tão alto quanto {b}",
        "count": "{a} visitou {counts}",
        "count_places": "somente {n} lugares",
        "count_place_one": "somente um lugar",
        "count_people": "somente {n} pessoas",
        "count_person_one": "somente uma pessoa",
        "and": "e",
    },
}

_EN_UNITS = ["", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
             "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen",
             "eighteen", "nineteen"]
_EN_TENS = {20: "twenty", 30: "thirty"}
_PT_UNITS = ["", "um", "dois", "três", "quatro", "cinco", "seis", "sete", "oito", "nove", "dez",
             "onze", "doze", "treze", "catorze", "quinze", "dezesseis", "dezessete", "dezoito",
             "dezenove"]
_PT_TENS = {20: "vinte", 30: "trinta"}


def number_word(n: int, language: str, feminine: bool = False) -> str:
    if not 1 <= n <= 30:
        raise ValueError(f"no number word for {n}")
    if language == "en":
        if n < 20:
            return _EN_UNITS[n]
        tens, unit = divmod(n, 10)
        return _EN_TENS[tens * 10] + (f"-{_EN_UNITS[unit]}" if unit else "")

    def unit_pt(k):
        if feminine and k in (1, 2):
            return "uma" if k == 1 else "duas"
        return _PT_UNITS[k]

    if n < 20:
        return unit_pt(n)
    tens, unit = divmod(n, 10)
    return _PT_TENS[tens * 10] + (f" e {unit_pt(unit)}" if unit else "")


class LexiconError(ValueError):
    pass


class RealizationError(ValueError):
    pass


@dataclass(frozen=True)
class Lexicon:
    language: str
    person_names: tuple  # ((surface, gender), ...)
    place_names: tuple
    templates: Mapping[str, str] = field(default_factory=dict, compare=False, hash=False)
    name: str = ""

    def __post_init__(self):
        if self.language not in LANGUAGES:
            raise LexiconError(f"unsupported language {self.language!r}")
        merged = dict(DEFAULT_TEMPLATES[self.language])
        for key, text in dict(self.templates).items():
            if key not in merged:
                raise LexiconError(f"unknown template key {key!r}")
            merged[key] = text
        object.__setattr__(self, "templates", merged)
        object.__setattr__(self, "person_names", tuple((n, g) for n, g in self.person_names))
        object.__setattr__(self, "place_names", tuple(self.place_names))
        people = [n for n, _ in self.person_names]
        for n, g in self.person_names:
            if g not in GENDERS:
                raise LexiconError(f"person {n!r}: gender must be one of {GENDERS}")
        for kind, names in (("person", people), ("place", self.place_names)):
            for n in names:
                if not n or not n.strip() or any(ch in n for ch in "\t\n\r"):
                    raise LexiconError(f"{kind} name {n!r} is empty or contains tabs/newlines")
            seen = set()
            for n in names:
                if n.casefold() in seen:
                    raise LexiconError(f"duplicate {kind} name {n!r}")
                seen.add(n.casefold())
        clash = {n.casefold() for n in people} & {n.casefold() for n in self.place_names}
        if clash:
            raise LexiconError(f"names used for both people and places: {sorted(clash)}")

    @cached_property
    def people(self) -> tuple:
        return tuple(n for n, _ in self.person_names)

    @property
    def places(self) -> tuple:
        return self.place_names

    @property
    def list_conjunction(self) -> str:
        return self.templates["and"]

    def names(self, sort: Sort) -> tuple:
        return self.people if sort is Sort.PERSON else self.places

    def name_tokens(self) -> set:
        out = set()
        for n in (*self.people, *self.places):
            out.update(tokenize(n))
        return out

    def template_tokens(self) -> set:
        out = set()
        for text in self.templates.values():
            out.update(tokenize(string.Formatter().vformat(text, (), _Blank())))
        for n in range(1, 31):
            out.update(tokenize(number_word(n, self.language)))
            out.update(tokenize(number_word(n, self.language, feminine=True)))
        return out


class _Blank(dict):
    def __missing__(self, key):
        return ""


def load_lexicon(path) -> Lexicon:
    path = Path(path)
    language = None
    people, places, templates = [], [], {}
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            kind = fields[0]

            def bad(msg):
                return LexiconError(f"{path}:{lineno}: {msg}")

            if kind == "language":
                if len(fields) != 2 or fields[1] not in LANGUAGES:
                    raise bad(f"expected 'language<TAB>{{{'|'.join(LANGUAGES)}}}'")
                if language is not None:
                    raise bad("language declared twice")
                language = fields[1]
                continue
            if language is None:
                raise bad("'language' must be the first entry")
            if kind == "person":
                if len(fields) != 3 or fields[2] not in GENDERS:
                    raise bad("expected 'person<TAB>name<TAB>masc|fem'")
                people.append((fields[1], fields[2]))
            elif kind == "place":
                if len(fields) != 2:
                    raise bad("expected 'place<TAB>name'")
                places.append(fields[1])
            elif kind == "template":
                if len(fields) != 3:
                    raise bad("expected 'template<TAB>key<TAB>text'")
                if fields[1] not in DEFAULT_TEMPLATES[language]:
                    raise bad(f"unknown template key {fields[1]!r}")
                templates[fields[1]] = fields[2]
            else:
                raise bad(f"unknown entry type {kind!r}")
    if language is None:
        raise LexiconError(f"{path}: no 'language' entry")
    try:
        return Lexicon(language, tuple(people), tuple(places), templates, name=path.stem)
    except LexiconError as e:
        raise LexiconError(f"{path}: {e}") from None


def lexicon_dir() -> Path:
    env = os.environ.get(LEXDIR_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("contraforge") / "lexicons"))


def bundled_lexicon(language: str, role: str) -> Lexicon:
    """The default lexicon for ``language`` ('en'/'pt') and ``role`` ('train'/'test')."""
    if role not in ("train", "test"):
        raise ValueError(f"role must be 'train' or 'test', not {role!r}")
    return load_lexicon(lexicon_dir() / f"{language}_{role}.tsv")


# --- tokenization ------------------------------------------------------------

_WORD = re.compile(r"'[^\W\d_]+|[^\W_]+")


def tokenize(text: str) -> list:
    """Lowercased word tokens; punctuation is dropped and a clitic keeps its apostrophe.

    >>> tokenize("Joe didn't visit Japan")
    ['joe', 'didn', "'t", 'visit', 'japan']
    """
    return _WORD.findall(text.lower())


# --- formulas to sentences ---------------------------------------------------

def _join_list(items: Sequence[str], lex: Lexicon) -> str:
    conj = lex.list_conjunction
    if len(items) == 1:
        return items[0]
    if len(items) == 2:
        return f"{items[0]} {conj} {items[1]}"
    if lex.language == "en":
        return ", ".join(items[:-1]) + f", {conj} {items[-1]}"
    return ", ".join(items[:-1]) + f" {conj} {items[-1]}"


def _is_const(t) -> bool:
    return isinstance(t, Constant)


def _count_clause(f: CountExact, lex: Lexicon) -> str:
    t = lex.templates
    if f.var.sort is Sort.PLACE:
        return t["count_place_one"] if f.n == 1 else t["count_places"].format(
            n=number_word(f.n, lex.language))
    return t["count_person_one"] if f.n == 1 else t["count_people"].format(
        n=number_word(f.n, lex.language, feminine=True))


def _count_agent(f) -> Constant | None:
    if isinstance(f, CountExact) and isinstance(f.body, Visit) and f.body.target == f.var \
            and _is_const(f.body.agent):
        return f.body.agent
    return None


def _shape(f: Formula):
    """(template key, slots) for a realizable formula, or None."""
    if isinstance(f, Visit) and _is_const(f.agent) and _is_const(f.target):
        return "visit", {"a": f.agent, "b": f.target}
    if isinstance(f, (Taller, AsTall)) and _is_const(f.a) and _is_const(f.b):
        return ("taller" if isinstance(f, Taller) else "astall"), {"a": f.a, "b": f.b}
    if isinstance(f, Not):
        g = f.f
        if isinstance(g, Visit) and _is_const(g.agent) and _is_const(g.target):
            return "not_visit", {"a": g.agent, "b": g.target}
        if isinstance(g, Exists) and isinstance(g.body, Visit):
            v, body = g.var, g.body
            if v.sort is Sort.PERSON and body.agent == v and _is_const(body.target):
                return "nobody_target", {"b": body.target}
            if v.sort is Sort.PLACE and body.target == v and _is_const(body.agent):
                return "agent_no_place", {"a": body.agent}
        return None
    if isinstance(f, And):
        if all(isinstance(g, Visit) and _is_const(g.agent) and _is_const(g.target) for g in f.fs):
            agents = [g.agent for g in f.fs]
            targets = [g.target for g in f.fs]
            if len(set(targets)) == 1 and len(set(agents)) == len(agents):
                return "coord_agents", {"agents": agents, "b": targets[0]}
            if len(set(agents)) == 1 and len(set(targets)) == len(targets):
                return "coord_targets", {"a": agents[0], "targets": targets}
            return None
        agents = {_count_agent(g) for g in f.fs}
        if len(agents) == 1 and None not in agents:
            return "count", {"a": agents.pop(), "counts": list(f.fs)}
        return None
    if isinstance(f, CountExact):
        a = _count_agent(f)
        return ("count", {"a": a, "counts": [f]}) if a is not None else None
    if isinstance(f, (ForAll, Exists)):
        v, body = f.var, f.body
        prefix = "everyone" if isinstance(f, ForAll) else "someone"
        if v.sort is Sort.PERSON and isinstance(body, ForAll) and isinstance(body.body, Visit):
            inner = body.body
            if inner.agent == v and inner.target == body.var:
                suffix = "every_place" if body.var.sort is Sort.PLACE else "everyone"
                return f"{prefix}_{suffix}", {}
        if isinstance(body, Visit):
            if v.sort is Sort.PERSON and body.agent == v and _is_const(body.target):
                return f"{prefix}_target", {"b": body.target}
            if body.target == v and _is_const(body.agent):
                if isinstance(f, ForAll):
                    key = "agent_every_place" if v.sort is Sort.PLACE else "agent_everyone"
                    return key, {"a": body.agent}
                if v.sort is Sort.PLACE:
                    return "agent_some_place", {"a": body.agent}
        if isinstance(f, ForAll) and isinstance(body, Not) and isinstance(body.f, Visit):
            inner = body.f
            if v.sort is Sort.PERSON and inner.agent == v and _is_const(inner.target):
                return "nobody_target", {"b": inner.target}
            if v.sort is Sort.PLACE and inner.target == v and _is_const(inner.agent):
                return "agent_no_place", {"a": inner.agent}
        return None
    if isinstance(f, Iota) and isinstance(f.prop, ForAll) and isinstance(f.prop.body, Visit):
        inner = f.prop.body
        if inner.agent == f.var and inner.target == f.prop.var:
            key = "iota_every_place" if f.prop.var.sort is Sort.PLACE else "iota_everyone"
            return key, {"a": f.subject}
    return None


def _realize(f: Formula, lex: Lexicon, binding: Mapping[Constant, str]) -> tuple:
    shape = _shape(f)
    if shape is None:
        raise RealizationError(f"no template for formula shape {type(f).__name__}: {f!r}")
    key, slots = shape

    def name(c):
        try:
            return binding[c]
        except KeyError:
            raise RealizationError(f"constant {c} has no surface name") from None

    values = {}
    for slot, val in slots.items():
        if slot in ("agents", "targets"):
            values[slot] = _join_list([name(c) for c in val], lex)
        elif slot == "counts":
            values[slot] = f" {lex.list_conjunction} ".join(_count_clause(g, lex) for g in val)
        else:
            values[slot] = name(val)
    template = lex.templates[key]
    return template.format(**values), template.startswith("{")


def _capitalize(s: str) -> str:
    return s[:1].upper() + s[1:]


def realize_formula(f: Formula, lex: Lexicon, binding: Mapping[Constant, str]) -> str:
    text, _ = _realize(f, lex, binding)
    return _capitalize(text)


def join_premise(parts: Sequence[tuple], style: str = "comma") -> str:
    """Join (sentence, starts_with_name) parts into one premise text."""
    if style == "comma":
        return ", ".join(_capitalize(t) if i == 0 or named else t
                         for i, (t, named) in enumerate(parts))
    if style == "period":
        return " ".join(_capitalize(t) + "." for t, _ in parts)
    raise ValueError(f"unknown join style {style!r}")


@dataclass(frozen=True)
class RealizedPair:
    premise_text: str
    hypothesis_text: str
    label: Label
    task: int
    symbolic: object  # SymbolicPair
    language: str
    seed: int = 0
    binding: tuple = ()  # ((constant id, surface name), ...)


def pair_constants(premise: Sequence[Formula], hypothesis: Formula) -> tuple:
    """Constants of a pair, split by sort, each in sorted order."""
    cs = set()
    for f in (*premise, hypothesis):
        cs |= constants(f)
    return (sorted(c for c in cs if c.sort is Sort.PERSON),
            sorted(c for c in cs if c.sort is Sort.PLACE))


def draw_binding(people: Sequence[Constant], places: Sequence[Constant],
                 sizes: tuple, seed: int) -> dict:
    """Injective map constant -> inventory index, drawn without replacement per sort."""
    rng = random.Random(seed)
    out = {}
    for consts, size, kind in ((people, sizes[0], "person"), (places, sizes[1], "place")):
        if len(consts) > size:
            raise RealizationError(f"lexicon has {size} {kind} names, pair needs {len(consts)}")
        for c, idx in zip(consts, rng.sample(range(size), len(consts))):
            out[c] = idx
    return out


def realize_pair(pair, lex: Lexicon, seed: int, join_style: str = "comma") -> RealizedPair:
    people, places = pair_constants(pair.premise, pair.hypothesis)
    idx = draw_binding(people, places, (len(lex.people), len(lex.places)), seed)
    binding = {c: lex.names(c.sort)[i] for c, i in idx.items()}
    premise = join_premise([_realize(f, lex, binding) for f in pair.premise], join_style)
    hypothesis = realize_formula(pair.hypothesis, lex, binding)
    if join_style == "period":
        hypothesis += "."
    return RealizedPair(
        premise_text=premise,
        hypothesis_text=hypothesis,
        label=pair.label,
        task=pair.task,
        symbolic=pair,
        language=lex.language,
        seed=seed,
        binding=tuple((c.id, binding[c]) for c in (*people, *places)),
    )
