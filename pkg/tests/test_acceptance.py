"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Full-size splits (10,000 train / 1,000 test, seed 0) for all seven tasks in both
languages are generated once per session through the CLI and shared by every
criterion. Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import contextlib
import io
import json
import random
import time
import warnings
from collections import Counter

import pytest

from contraforge.baseline import ForestParams, run_baseline
from contraforge.cli import main, sha256
from contraforge.dataset import ablate, read_split, shared_tokens
from contraforge.logic import Constant, Label, Sort, SymbolicPair, constants, rename_constants
from contraforge.realization import bundled_lexicon
from contraforge.semantics import brute_force_consistent, label_pair, oracle_admissible
from contraforge.taskgen import ConstantPool, TaskConfig, generate_mixed, generate_pairs, make_split

from conftest import record

pytestmark = pytest.mark.slow

TASKS = range(1, 8)
LANGS = ("en", "pt")
TRAIN, TEST = 10_000, 1_000

# Criterion 1 configs: at most 4 people and 4 places per pair, so the
# enumeration oracle's guard admits every pair.
SMALL = {1: dict(facts_range=(2, 3)), 2: dict(facts_range=(1, 1), coordination_range=(2, 3)),
         3: dict(facts_range=(0, 1)), 4: dict(facts_range=(0, 0)), 5: dict(facts_range=(2, 3)),
         6: dict(count_range=(1, 1))}


def run_cli(*argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main([str(a) for a in argv])
    return code, buf.getvalue()


def load(path):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        return read_split(path)


@pytest.fixture(scope="session")
def suite(tmp_path_factory):
    """Disjoint-mode splits for every (task, language), generated via the CLI."""
    root = tmp_path_factory.mktemp("suite")
    dirs, seconds = {}, {}
    for lang in LANGS:
        for task in TASKS:
            out = root / f"{lang}-t{task}"
            start = time.perf_counter()
            code, _ = run_cli("generate", "--task", task, "--lang", lang, "--out", out, "--seed", 0)
            seconds[lang, task] = time.perf_counter() - start
            assert code == 0
            dirs[lang, task] = out
    splits = {key: (load(d / "train.jsonl"), load(d / "test.jsonl")) for key, d in dirs.items()}
    return {"dirs": dirs, "seconds": seconds, "splits": splits}


@pytest.fixture(scope="session")
def disjoint_baselines(suite):
    start = time.perf_counter()
    reports = {t: run_baseline(*suite["splits"]["en", t], ForestParams(seed=0))["report"] for t in TASKS}
    return reports, time.perf_counter() - start


def test_criterion_1_labeler_matches_oracle_on_small_domains():
    start = time.perf_counter()
    pool = ConstantPool(4, 4)
    cfgs = {t: TaskConfig(t, train_size=500, test_size=100, seed=0, **SMALL[t]) for t in SMALL}
    checked, disagree, inadmissible = Counter(), Counter(), Counter()
    for task in TASKS:
        pairs = (generate_mixed(list(cfgs.values()), 500, 0, pool) if task == 7
                 else generate_pairs(cfgs[task], pool, n=500))
        for pair in pairs:
            fs = [*pair.premise, pair.hypothesis]
            if not oracle_admissible(fs):
                inadmissible[task] += 1
                continue
            checked[task] += 1
            oracle = Label.NON_CONTRADICTION if brute_force_consistent(fs) else Label.CONTRADICTION
            if oracle is not label_pair(pair.premise, pair.hypothesis) or oracle is not pair.label:
                disagree[task] += 1
    elapsed = time.perf_counter() - start
    ok = (all(checked[t] == 500 for t in TASKS) and not disagree and not inadmissible and elapsed < 300)
    record(1, ok, f"{sum(checked.values())} pairs checked, {sum(disagree.values())} disagreements, "
                  f"{sum(inadmissible.values())} outside the guard, {elapsed:.1f}s")
    assert ok


def test_criterion_2_verify_reports_zero_mismatches(suite):
    start = time.perf_counter()
    files = [d / f"{role}.jsonl" for d in suite["dirs"].values() for role in ("train", "test")]
    code, out = run_cli("verify", *files)
    elapsed = time.perf_counter() - start
    lines = [ln for ln in out.splitlines() if "pairs," in ln]
    ok = code == 0 and len(lines) == 28 and all(ln.endswith(" 0 mismatches") for ln in lines) \
        and elapsed < 600
    record(2, ok, f"{len(lines)} split files verified, exit {code}, {elapsed:.1f}s")
    assert ok


def test_criterion_3_balance_sizes_and_generation_time(suite):
    total = sum(suite["seconds"].values())
    problems = []
    for key, (train, test) in suite["splits"].items():
        if (len(train), len(test)) != (TRAIN, TEST):
            problems.append(f"{key} sizes {len(train)}/{len(test)}")
        for split in (train, test):
            if 2 * sum(split.labels) != len(split):
                problems.append(f"{key} unbalanced")
    ok = not problems and total < 300
    record(3, ok, f"14 splits of {TRAIN}/{TEST}, all 50% contradiction: {not problems}, "
                  f"generation {total:.1f}s")
    assert ok, problems


def test_criterion_4_disjoint_names_and_template_only_intersection(suite):
    problems, sizes = [], []
    for (lang, task), (train, test) in suite["splits"].items():
        for sort in Sort:
            def names(split):
                return {n for ex in split.examples for c, n in ex.binding if _sorts(ex)[c] is sort}
            common = names(train) & names(test)
            if common:
                problems.append(f"{lang} t{task} shared {sort.value} names {sorted(common)[:3]}")
        lex_train, lex_test = bundled_lexicon(lang, "train"), bundled_lexicon(lang, "test")
        shared = shared_tokens(train, test)
        sizes.append(len(shared))
        stray = shared - lex_train.template_tokens()
        if stray or shared & (lex_train.name_tokens() | lex_test.name_tokens()):
            problems.append(f"{lang} t{task} non-template shared tokens {sorted(stray)[:5]}")
    ok = not problems
    record(4, ok, f"no shared names; intersections {min(sizes)}-{max(sizes)} tokens, all template words")
    assert ok, problems


def test_criterion_5_baseline_near_chance_on_structural_tasks(disjoint_baselines):
    reports, elapsed = disjoint_baselines
    acc = {t: reports[t]["accuracy"] for t in TASKS}
    ok = (all(0.45 <= acc[t] <= 0.60 for t in (1, 2, 4, 5)) and acc[3] >= 0.58 and acc[6] >= 0.53
          and elapsed < 900)
    shown = " ".join(f"T{t}={acc[t]:.3f}" for t in TASKS)
    record(5, ok, f"{shown}, {elapsed:.1f}s")
    assert ok


def test_criterion_6_intersection_raises_baseline_accuracy(disjoint_baselines):
    reports, _ = disjoint_baselines
    inter = {}
    for task in TASKS:
        cfg = TaskConfig(task, seed=0, vocab_mode="intersect")
        train, test = make_split(cfg, bundled_lexicon("en", "train"), bundled_lexicon("en", "test"))
        inter[task] = run_baseline(train, test, ForestParams(seed=0))["report"]["accuracy"]
    disjoint = sum(reports[t]["accuracy"] for t in TASKS) / len(TASKS)
    intersect = sum(inter.values()) / len(TASKS)
    gain = intersect - disjoint
    ok = gain >= 0.05
    record(6, ok, f"mean accuracy disjoint {disjoint:.3f}, intersect {intersect:.3f}, "
                  f"gain {100 * gain:+.1f} points")
    assert ok


def test_criterion_7_ablations(suite):
    accs = {}
    for task in (3, 6):
        train, test = suite["splits"]["en", task]
        noisy = ablate(train, "noise-label", seed=0)
        accs[task] = run_baseline(noisy, test, ForestParams(seed=0))["report"]["accuracy"]
    field_ok = True
    for (lang, task), (train, _) in suite["splits"].items():
        prem, hyp = ablate(train, "premise-only"), ablate(train, "hypothesis-only")
        field_ok &= prem.labels == train.labels and hyp.labels == train.labels
        field_ok &= all(a.hypothesis_text == "" and a.premise_text == b.premise_text
                        for a, b in zip(prem.examples, train.examples))
        field_ok &= all(a.premise_text == "" and a.hypothesis_text == b.hypothesis_text
                        for a, b in zip(hyp.examples, train.examples))
    ok = all(0.45 <= a <= 0.55 for a in accs.values()) and field_ok
    record(7, ok, f"noise-label test accuracy T3={accs[3]:.3f} T6={accs[6]:.3f}; "
                  f"single-field ablations keep labels and blank one field: {field_ok}")
    assert ok


def test_criterion_8_determinism_and_language_symmetry(suite, tmp_path):
    identical = True
    for lang in LANGS:
        src = suite["dirs"][lang, 7]
        config = json.loads((src / "manifest.json").read_text())["config"]
        argv = ["generate", "--out", tmp_path / lang]
        for key in ("task", "lang", "train", "test", "seed", "vocab_mode", "task6_mode", "join_style"):
            argv += [f"--{key.replace('_', '-')}", config[key]]
        code, _ = run_cli(*argv)
        identical &= code == 0
        for name in ("train.jsonl", "train.tsv", "test.jsonl", "test.tsv"):
            identical &= sha256(src / name) == sha256(tmp_path / lang / name)
    symmetric = True
    for task in TASKS:
        for role in (0, 1):
            en, pt = suite["splits"]["en", task][role], suite["splits"]["pt", task][role]
            symmetric &= [e.symbolic for e in en.examples] == [e.symbolic for e in pt.examples]
            symmetric &= en.labels == pt.labels
    ok = identical and symmetric
    record(8, ok, f"regeneration byte-identical: {identical}; EN/PT symbolic forms and labels equal "
                  f"on all 14 split pairs: {symmetric}")
    assert ok


def test_criterion_9_labels_invariant_under_renaming(suite):
    rng = random.Random(9)
    pool = [ex.symbolic for t in TASKS for ex in suite["splits"]["en", t][0].examples]
    fresh = {sort: [Constant(f"{sort.value[:2]}{i}", sort) for i in range(500)] for sort in Sort}
    changed = 0
    for pair in rng.sample(pool, 1000):
        consts = sorted({c for f in pair.formulas for c in constants(f)})
        targets = {sort: iter(rng.sample(fresh[sort], len(fresh[sort]))) for sort in Sort}
        sigma = {c: next(targets[c.sort]) for c in consts}
        renamed = SymbolicPair(tuple(rename_constants(f, sigma) for f in pair.premise),
                               rename_constants(pair.hypothesis, sigma), pair.label, pair.task)
        if label_pair(renamed.premise, renamed.hypothesis) is not pair.label:
            changed += 1
    ok = changed == 0
    record(9, ok, f"1000 random renamings, {changed} label changes")
    assert ok



def _sorts(ex):
    return {c.id: c.sort for f in ex.symbolic.formulas for c in constants(f)}
