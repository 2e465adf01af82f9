"""Learning curves: baseline accuracy against the fraction of training data used.

    python scripts/sweep.py --lang en --tasks 3,6 --proportions 0.1,0.25,0.5,1
"""

import argparse
from pathlib import Path

from contraforge.baseline import ForestParams, proportion_sweep
from contraforge.realization import bundled_lexicon
from contraforge.taskgen import TaskConfig, make_split


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lang", choices=("en", "pt"), default="en")
    ap.add_argument("--tasks", default="1,2,3,4,5,6,7")
    ap.add_argument("--proportions", default="0.1,0.25,0.5,0.75,1")
    ap.add_argument("--vocab-mode", choices=("disjoint", "intersect"), default="disjoint")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()

    lex = bundled_lexicon(args.lang, "train"), bundled_lexicon(args.lang, "test")
    props = [float(p) for p in args.proportions.split(",")]
    lines = ["task\tproportion\tn_train\taccuracy"]
    for task in (int(t) for t in args.tasks.split(",")):
        cfg = TaskConfig(task, seed=args.seed, vocab_mode=args.vocab_mode)
        rows = proportion_sweep(*make_split(cfg, *lex), props, ForestParams(seed=args.seed), seed=args.seed)
        print(f"task {task}: " + "  ".join(f"{r['proportion']}:{r['accuracy']:.3f}" for r in rows))
        lines += [f"{task}\t{r['proportion']}\t{r['n_train']}\t{r['accuracy']:.4f}" for r in rows]
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
