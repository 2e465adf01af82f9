"""Split persistence, corpus statistics, and ablation transforms.

JSONL layout: the first line is ``{"meta": {...}}``; every following line is one
example with the fields in ``JSONL_FIELDS``. ``constants`` maps each constant id
to its sort so logical forms parse without the generator; ``names`` records the
surface name each constant was bound to. TSV carries ``id, premise,
hypothesis, label`` only.
"""

from __future__ import annotations

import json
import random
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

from .logic import Label, LogicError, Sort, SymbolicPair, TaskId, parse_formula, print_formula
from .logic import constants as formula_constants
from .realization import RealizedPair, tokenize

JSONL_FIELDS = ("id", "task", "language", "premise", "hypothesis", "label", "logical_premise",
                "logical_hypothesis", "template_id", "seed", "constants", "names")
TSV_FIELDS = ("id", "premise", "hypothesis", "label")
ABLATIONS = ("noise-label", "premise-only", "hypothesis-only")


class SchemaError(ValueError):
    pass


class BalanceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DatasetSplit:
    examples: tuple
    meta: dict = field(default_factory=dict)
    ids: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "examples", tuple(self.examples))
        if not self.examples:
            raise ValueError("a split needs at least one example")
        if not self.ids:
            prefix = "-".join(str(self.meta.get(k, "x")) for k in ("task", "language", "split_role"))
            object.__setattr__(self, "ids", tuple(f"{prefix}-{i:05d}" for i in range(len(self.examples))))
        object.__setattr__(self, "ids", tuple(self.ids))
        if len(self.ids) != len(self.examples):
            raise ValueError("ids and examples differ in length")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("duplicate example ids")

    def __len__(self):
        return len(self.examples)

    @property
    def labels(self) -> list:
        return [int(ex.label) for ex in self.examples]

    def label_counts(self) -> dict:
        n1 = sum(self.labels)
        return {Label.CONTRADICTION: n1, Label.NON_CONTRADICTION: len(self) - n1}

    @property
    def is_balanced(self) -> bool:
        c = self.label_counts()
        return c[Label.CONTRADICTION] == c[Label.NON_CONTRADICTION]

    def texts(self) -> list:
        return [input_text(ex) for ex in self.examples]

    def subset(self, n: int) -> "DatasetSplit":
        return DatasetSplit(self.examples[:n], dict(self.meta), self.ids[:n])


def input_text(ex: RealizedPair) -> str:
    """Model input: premise and hypothesis concatenated."""
    return " ".join(t for t in (ex.premise_text, ex.hypothesis_text) if t)


# --- writing -----------------------------------------------------------------

def _record(ex: RealizedPair, ex_id: str) -> dict:
    sym = ex.symbolic
    consts = set()
    for f in sym.formulas:
        consts |= formula_constants(f)
    return {
        "id": ex_id,
        "task": int(ex.task),
        "language": ex.language,
        "premise": ex.premise_text,
        "hypothesis": ex.hypothesis_text,
        "label": int(ex.label),
        "logical_premise": [print_formula(f) for f in sym.premise],
        "logical_hypothesis": print_formula(sym.hypothesis),
        "template_id": sym.template_id,
        "seed": ex.seed,
        "constants": {c.id: c.sort.value for c in sorted(consts)},
        "names": dict(ex.binding),
    }


def write_split(split: DatasetSplit, path, fmt: str | None = None) -> Path:
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".")
    if fmt == "jsonl":
        lines = [json.dumps({"meta": split.meta}, ensure_ascii=False, sort_keys=True)]
        lines += [json.dumps(_record(ex, i), ensure_ascii=False)
                  for ex, i in zip(split.examples, split.ids)]
    elif fmt == "tsv":
        lines = ["\t".join(TSV_FIELDS)]
        for ex, i in zip(split.examples, split.ids):
            for text in (ex.premise_text, ex.hypothesis_text):
                if "\t" in text or "\n" in text:
                    raise SchemaError(f"{i}: text contains a tab or newline")
            lines.append("\t".join((i, ex.premise_text, ex.hypothesis_text, str(int(ex.label)))))
    else:
        raise ValueError(f"unknown split format {fmt!r} (use jsonl or tsv)")
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror}") from e
    return path


# --- reading -----------------------------------------------------------------

def _parse_record(rec: dict, where: str, default_lang: str) -> tuple:
    missing = [k for k in JSONL_FIELDS if k not in rec]
    if missing:
        raise SchemaError(f"{where}: missing fields {missing}")
    try:
        sorts = {cid: Sort(s) for cid, s in rec["constants"].items()}
        premise = tuple(parse_formula(t, sorts) for t in rec["logical_premise"])
        hypothesis = parse_formula(rec["logical_hypothesis"], sorts)
        label = Label.parse(rec["label"])
        sym = SymbolicPair(premise, hypothesis, label, TaskId(rec["task"]), rec["template_id"])
    except (LogicError, ValueError, TypeError, AttributeError) as e:
        raise SchemaError(f"{where}: {e}") from None
    ex = RealizedPair(
        premise_text=rec["premise"], hypothesis_text=rec["hypothesis"], label=label,
        task=sym.task, symbolic=sym, language=rec["language"] or default_lang,
        seed=rec["seed"], binding=tuple(rec["names"].items()),
    )
    return rec["id"], ex


def read_split(path) -> DatasetSplit:
    """Load a JSONL or TSV split; warns (BalanceWarning) on unbalanced labels."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such split file: {path}")
    fmt = path.suffix.lstrip(".")
    ids, examples, meta = [], [], {}
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if fmt == "jsonl":
        for lineno, line in enumerate(lines, 1):
            where = f"{path}:{lineno}"
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise SchemaError(f"{where}: invalid JSON ({e.msg})") from None
            if not isinstance(rec, dict):
                raise SchemaError(f"{where}: expected an object")
            if lineno == 1 and set(rec) == {"meta"}:
                meta = rec["meta"]
                continue
            i, ex = _parse_record(rec, where, meta.get("language", ""))
            ids.append(i)
            examples.append(ex)
    elif fmt == "tsv":
        if not lines or tuple(lines[0].split("\t")) != TSV_FIELDS:
            raise SchemaError(f"{path}:1: header must be {' '.join(TSV_FIELDS)}")
        for lineno, line in enumerate(lines[1:], 2):
            cols = line.split("\t")
            if len(cols) != len(TSV_FIELDS):
                raise SchemaError(f"{path}:{lineno}: expected {len(TSV_FIELDS)} columns, got {len(cols)}")
            try:
                label = Label.parse(cols[3])
            except ValueError as e:
                raise SchemaError(f"{path}:{lineno}: {e}") from None
            ids.append(cols[0])
            examples.append(RealizedPair(cols[1], cols[2], label, 0, None, ""))
        meta = {"format": "tsv"}
    else:
        raise ValueError(f"unknown split format for {path} (use .jsonl or .tsv)")
    if not examples:
        raise SchemaError(f"{path}: no examples")
    try:
        split = DatasetSplit(tuple(examples), meta, tuple(ids))
    except ValueError as e:
        raise SchemaError(f"{path}: {e}") from None
    if not split.is_balanced:
        c = split.label_counts()
        warnings.warn(f"{path}: unbalanced labels ({c[Label.CONTRADICTION]} contradiction, "
                      f"{c[Label.NON_CONTRADICTION]} non-contradiction)", BalanceWarning)
    return split


# --- statistics --------------------------------------------------------------

@dataclass(frozen=True)
class TaskStats:
    vocab_size: int
    vocab_intersection: int
    mean_input_words: float
    mean_input_chars: float
    max_input_words: int
    max_input_chars: int
    train_vocab: int = 0
    test_vocab: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def vocabulary(split: DatasetSplit) -> set:
    out = set()
    for t in split.texts():
        out.update(tokenize(t))
    return out


def compute_stats(train: DatasetSplit, test: DatasetSplit) -> TaskStats:
    for key in ("task", "language"):
        a, b = train.meta.get(key), test.meta.get(key)
        if a is not None and b is not None and a != b:
            raise ValueError(f"train and test differ in {key}: {a!r} vs {b!r}")
    v_train, v_test = vocabulary(train), vocabulary(test)
    texts = train.texts() + test.texts()
    words = [len(tokenize(t)) for t in texts]
    chars = [len(t) for t in texts]
    return TaskStats(
        vocab_size=len(v_train | v_test),
        vocab_intersection=len(v_train & v_test),
        mean_input_words=sum(words) / len(words),
        mean_input_chars=sum(chars) / len(chars),
        max_input_words=max(words),
        max_input_chars=max(chars),
        train_vocab=len(v_train),
        test_vocab=len(v_test),
    )


def shared_tokens(train: DatasetSplit, test: DatasetSplit) -> set:
    return vocabulary(train) & vocabulary(test)


# --- ablations ---------------------------------------------------------------

def ablate(split: DatasetSplit, mode: str, seed: int = 0) -> DatasetSplit:
    """noise-label: uniform random labels; premise-only / hypothesis-only: blank the other field."""
    mode = mode.replace("_", "-").lower()
    if mode == "noise-label":
        rng = random.Random(f"{seed}/noise-label")
        examples = [replace(ex, label=Label(rng.getrandbits(1))) for ex in split.examples]
    elif mode == "premise-only":
        examples = [replace(ex, hypothesis_text="") for ex in split.examples]
    elif mode == "hypothesis-only":
        examples = [replace(ex, premise_text="") for ex in split.examples]
    else:
        raise ValueError(f"unknown ablation {mode!r}; choose from {ABLATIONS}")
    return DatasetSplit(tuple(examples), {**split.meta, "ablation": mode}, split.ids)
