"""Baseline accuracy per task in disjoint and intersect vocabulary modes.

    python scripts/baseline_table.py --lang en --out results/baseline_en.tsv
"""

import argparse
import time
from pathlib import Path

from contraforge.baseline import ForestParams, run_baseline
from contraforge.realization import bundled_lexicon
from contraforge.taskgen import TaskConfig, make_split


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lang", choices=("en", "pt"), default="en")
    ap.add_argument("--tasks", default="1,2,3,4,5,6,7")
    ap.add_argument("--train", type=int, default=10_000)
    ap.add_argument("--test", type=int, default=1_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--forest-seed", type=int, default=0)
    ap.add_argument("--trees", type=int, default=100)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()

    lex = bundled_lexicon(args.lang, "train"), bundled_lexicon(args.lang, "test")
    params = ForestParams(n_trees=args.trees, seed=args.forest_seed)
    rows = []
    print("task  disjoint  intersect  seconds")
    for task in (int(t) for t in args.tasks.split(",")):
        start = time.perf_counter()
        acc = {}
        for mode in ("disjoint", "intersect"):
            cfg = TaskConfig(task, train_size=args.train, test_size=args.test, seed=args.seed,
                             vocab_mode=mode)
            acc[mode] = run_baseline(*make_split(cfg, *lex), params)["report"]["accuracy"]
        rows.append((task, acc["disjoint"], acc["intersect"]))
        print(f"{task:>4}  {acc['disjoint']:8.3f}  {acc['intersect']:9.3f}  {time.perf_counter() - start:7.1f}")
    mean_d = sum(r[1] for r in rows) / len(rows)
    mean_i = sum(r[2] for r in rows) / len(rows)
    print(f"mean  {mean_d:8.3f}  {mean_i:9.3f}  gain {100 * (mean_i - mean_d):+.1f} points")
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text("task\tdisjoint\tintersect\n" + "".join(
            f"{t}\t{d:.4f}\t{i:.4f}\n" for t, d, i in rows), encoding="utf-8")


if __name__ == "__main__":
    main()
