"""Baseline accuracy under the noise-label, premise-only and hypothesis-only ablations.

The training split is ablated and the test split is ablated the same way, except
for noise-label where the test keeps its gold labels.

    python scripts/ablations.py --lang en --tasks 1,3,6
"""

import argparse
from pathlib import Path

from contraforge.baseline import ForestParams, run_baseline
from contraforge.dataset import ABLATIONS, ablate
from contraforge.realization import bundled_lexicon
from contraforge.taskgen import TaskConfig, make_split


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lang", choices=("en", "pt"), default="en")
    ap.add_argument("--tasks", default="1,2,3,4,5,6,7")
    ap.add_argument("--train", type=int, default=10_000)
    ap.add_argument("--test", type=int, default=1_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()

    lex = bundled_lexicon(args.lang, "train"), bundled_lexicon(args.lang, "test")
    params = ForestParams(seed=args.seed)
    header = ("task", "none") + ABLATIONS
    lines = ["\t".join(header)]
    print("".join(f"{h:>17}" for h in header))
    for task in (int(t) for t in args.tasks.split(",")):
        cfg = TaskConfig(task, train_size=args.train, test_size=args.test, seed=args.seed)
        train, test = make_split(cfg, *lex)
        accs = [run_baseline(train, test, params)["report"]["accuracy"]]
        for mode in ABLATIONS:
            eval_split = test if mode == "noise-label" else ablate(test, mode, args.seed)
            accs.append(run_baseline(ablate(train, mode, args.seed), eval_split, params)["report"]["accuracy"])
        print(f"{task:>17}" + "".join(f"{a:>17.3f}" for a in accs))
        lines.append(f"{task}\t" + "\t".join(f"{a:.4f}" for a in accs))
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
