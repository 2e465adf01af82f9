"""Command-line entry point: generate, verify, stats, ablate, baseline.

Exit status: 0 success, 1 validation failure or runtime error, 2 usage error.
Commands that write files also write a manifest: ``manifest.json`` in an output
directory, or ``<output>.manifest.json`` beside a single output file.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
import warnings
from pathlib import Path

from . import __version__
from .logic import Label, TaskId

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _range(text: str) -> tuple:
    try:
        a, b = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'LO,HI', got {text!r}") from None
    return a, b


def _proportions(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated fractions, got {text!r}") from None


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir: Path, command: str, args: argparse.Namespace, inputs, outputs,
                   started: float, seeds: dict, name: str = "manifest.json") -> Path:
    config = {k: (list(v) if isinstance(v, tuple) else v) for k, v in vars(args).items()
              if k not in ("func",)}
    manifest = {
        "command": command,
        "config": json.loads(json.dumps(config, default=str)),
        "seeds": seeds,
        "tool_version": __version__,
        "inputs": {str(p): sha256(p) for p in inputs},
        "outputs": {Path(p).name: sha256(p) for p in outputs},
        "wall_clock_seconds": round(time.time() - started, 3),
    }
    path = out_dir / name
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


# --- generate --------------------------------------------------------------------

def cmd_generate(args) -> int:
    from .dataset import write_split
    from .realization import bundled_lexicon, load_lexicon
    from .taskgen import TaskConfig, make_split

    started = time.time()
    cfg_kwargs = dict(task=args.task, train_size=args.train, test_size=args.test, seed=args.seed,
                      vocab_mode=args.vocab_mode, task6_mode=args.task6_mode,
                      join_style=args.join_style)
    for name in ("facts_range", "count_range", "coordination_range"):
        if getattr(args, name) is not None:
            cfg_kwargs[name] = getattr(args, name)
    cfg = TaskConfig(**cfg_kwargs)
    lex_train = load_lexicon(args.lexicon_train) if args.lexicon_train else bundled_lexicon(args.lang, "train")
    lex_test = load_lexicon(args.lexicon_test) if args.lexicon_test else bundled_lexicon(args.lang, "test")
    for lex in (lex_train, lex_test):
        if lex.language != args.lang:
            raise ValueError(f"lexicon {lex.name!r} is {lex.language}, expected {args.lang}")
    train, test = make_split(cfg, lex_train, lex_test)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs = []
    for split, role in ((train, "train"), (test, "test")):
        for fmt in ("jsonl", "tsv"):
            outputs.append(write_split(split, out / f"{role}.{fmt}", fmt))
    inputs = [p for p in (args.lexicon_train, args.lexicon_test) if p]
    write_manifest(out, "generate", args, inputs, outputs, started, {"master": args.seed})
    print(f"wrote {len(train)} train / {len(test)} test task-{int(cfg.task)} {args.lang} pairs to {out}")
    return EXIT_OK


# --- verify ------------------------------------------------------------------------

def _verify_chunk(payload):
    from .semantics import GuardError, brute_force_consistent, label_pair, oracle_admissible

    rows, use_oracle = payload
    mismatches, disagreements, checked = [], [], 0
    for ex_id, premise, hypothesis, stored in rows:
        got = label_pair(premise, hypothesis)
        if got is not stored:
            mismatches.append((ex_id, stored.text, got.text))
        if use_oracle and oracle_admissible([*premise, hypothesis]):
            try:
                sat = brute_force_consistent([*premise, hypothesis])
            except GuardError:
                continue
            checked += 1
            oracle = Label.NON_CONTRADICTION if sat else Label.CONTRADICTION
            if oracle is not got:
                disagreements.append((ex_id, got.text, oracle.text))
    return mismatches, disagreements, checked


def cmd_verify(args) -> int:
    from .dataset import read_split

    status = EXIT_OK
    for path in args.files:
        split = read_split(path)
        if split.examples[0].symbolic is None:
            print(f"{path}: no logical forms (TSV); verify needs JSONL", file=sys.stderr)
            return EXIT_FAIL
        rows = [(i, ex.symbolic.premise, ex.symbolic.hypothesis, ex.label)
                for i, ex in zip(split.ids, split.examples)]
        size = max(1, -(-len(rows) // max(1, args.jobs)))
        chunks = [(rows[k:k + size], args.oracle) for k in range(0, len(rows), size)]
        if args.jobs > 1:
            from concurrent.futures import ProcessPoolExecutor
            with ProcessPoolExecutor(args.jobs) as ex:
                results = list(ex.map(_verify_chunk, chunks))
        else:
            results = [_verify_chunk(c) for c in chunks]
        mismatches = [m for r in results for m in r[0]]
        disagreements = [d for r in results for d in r[1]]
        checked = sum(r[2] for r in results)
        for ex_id, stored, got in mismatches:
            print(f"{path}: {ex_id}: stored {stored}, computed {got}")
        for ex_id, got, oracle in disagreements:
            print(f"{path}: {ex_id}: labeler {got}, oracle {oracle}")
        line = f"{path}: {len(rows)} pairs, {len(mismatches)} mismatches"
        if args.oracle:
            line += f", oracle checked {checked}, {len(disagreements)} disagreements"
        print(line)
        if mismatches or disagreements:
            status = EXIT_FAIL
    return status


# --- stats -----------------------------------------------------------------------------

def cmd_stats(args) -> int:
    from .dataset import compute_stats, read_split, shared_tokens
    from .realization import tokenize

    started = time.time()
    train, test = read_split(args.train), read_split(args.test)
    stats = compute_stats(train, test)
    names = set()
    for split in (train, test):
        for ex in split.examples:
            for _, name in ex.binding:
                names.update(tokenize(name))
    shared = shared_tokens(train, test)
    report = {**stats.as_dict(), "name_tokens_in_intersection": sorted(shared & names),
              "task": train.meta.get("task"), "language": train.meta.get("language"),
              "vocab_mode": train.meta.get("vocab_mode")}
    width = max(len(k) for k in report)
    for k, v in report.items():
        shown = f"{v:.1f}" if isinstance(v, float) else v
        print(f"{k:<{width}}  {shown}")
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
        write_manifest(out.parent, "stats", args, [args.train, args.test], [out], started, {},
                       name=f"{out.stem}.manifest.json")
    return EXIT_OK


# --- ablate ----------------------------------------------------------------------------

def cmd_ablate(args) -> int:
    from .dataset import ablate, read_split, write_split

    started = time.time()
    split = read_split(args.input)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_split(ablate(split, args.mode, args.seed), out)
    write_manifest(out.parent, "ablate", args, [args.input], [out], started, {"ablation": args.seed},
                   name=f"{out.stem}.manifest.json")
    print(f"wrote {args.mode} ablation of {args.input} to {out}")
    return EXIT_OK


# --- baseline --------------------------------------------------------------------------

def cmd_baseline(args) -> int:
    from .baseline import ForestParams, proportion_sweep, run_baseline, save_model
    from .dataset import read_split

    started = time.time()
    train, test = read_split(args.train), read_split(args.test)
    params = ForestParams(n_trees=args.trees, max_depth=args.max_depth, min_leaf=args.min_leaf,
                          seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs = []
    if args.sweep:
        rows = proportion_sweep(train, test, args.sweep, params, seed=args.seed)
        path = out / "sweep.json"
        path.write_text(json.dumps({"params": params.__dict__, "curve": rows}, indent=2) + "\n",
                        encoding="utf-8")
        outputs.append(path)
        tsv = out / "sweep.tsv"
        tsv.write_text("proportion\tn_train\taccuracy\n" + "".join(
            f"{r['proportion']}\t{r['n_train']}\t{r['accuracy']:.4f}\n" for r in rows), encoding="utf-8")
        outputs.append(tsv)
        print("proportion  n_train  accuracy")
        for r in rows:
            print(f"{r['proportion']:<10}  {r['n_train']:>7}  {r['accuracy']:.4f}")
    else:
        result = run_baseline(train, test, params)
        report = {**result["report"], "params": params.__dict__,
                  "train": str(args.train), "test": str(args.test)}
        path = out / "metrics.json"
        path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
        outputs.append(path)
        if args.save_model:
            outputs.append(save_model(result["model"], out / "model.npz"))
        oob = report["oob_accuracy"]
        print(f"accuracy {report['accuracy']:.4f}  (n={report['n']}, oob "
              f"{'n/a' if oob is None else f'{oob:.4f}'}, vocab {report['vocab']})")
        print(f"confusion (gold rows, predicted columns): {report['confusion']}")
    write_manifest(out, "baseline", args, [args.train, args.test], outputs, started, {"forest": args.seed})
    return EXIT_OK


# --- parser ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="contraforge", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate train/test splits for one task")
    g.add_argument("--task", type=int, required=True, choices=[int(t) for t in TaskId])
    g.add_argument("--lang", choices=("en", "pt"), default="en")
    g.add_argument("--train", type=int, default=10_000, help="training pairs (even)")
    g.add_argument("--test", type=int, default=1_000, help="test pairs (even)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--vocab-mode", choices=("disjoint", "intersect"), default="disjoint")
    g.add_argument("--lexicon-train", help="lexicon file (default: bundled)")
    g.add_argument("--lexicon-test", help="lexicon file (default: bundled)")
    g.add_argument("--facts-range", type=_range, help="LO,HI")
    g.add_argument("--count-range", type=_range, help="LO,HI (Task 6)")
    g.add_argument("--coordination-range", type=_range, help="LO,HI (Task 2)")
    g.add_argument("--task6-mode", choices=("mixed", "both", "single"), default="mixed")
    g.add_argument("--join-style", choices=("comma", "period"), default="comma")
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("verify", help="re-label JSONL splits and report mismatches")
    v.add_argument("files", nargs="+")
    v.add_argument("--oracle", action="store_true", help="also cross-check with model enumeration")
    v.add_argument("--jobs", type=int, default=1)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("stats", help="vocabulary and length statistics")
    s.add_argument("--train", required=True)
    s.add_argument("--test", required=True)
    s.add_argument("--out", help="JSON report path")
    s.set_defaults(func=cmd_stats)

    a = sub.add_parser("ablate", help="noise-label / premise-only / hypothesis-only transforms")
    a.add_argument("--input", required=True)
    a.add_argument("--mode", required=True, choices=("noise-label", "premise-only", "hypothesis-only"))
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--out", required=True, help="output split (.jsonl or .tsv)")
    a.set_defaults(func=cmd_ablate)

    b = sub.add_parser("baseline", help="train and evaluate the Bag-of-Words random forest")
    b.add_argument("--train", required=True)
    b.add_argument("--test", required=True)
    b.add_argument("--out", required=True, help="output directory")
    b.add_argument("--trees", type=int, default=100)
    b.add_argument("--max-depth", type=int)
    b.add_argument("--min-leaf", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--sweep", type=_proportions, help="comma-separated training proportions")
    b.add_argument("--save-model", action="store_true")
    b.set_defaults(func=cmd_baseline)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            return args.func(args)
    except (ValueError, OSError, RuntimeError) as e:
        print(f"contraforge {args.command}: error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
