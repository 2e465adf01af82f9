"""Vocabulary and input-length statistics for every task and language.

Lengths are reported in both words and characters.

    python scripts/stats_table.py --out results/stats.tsv
"""

import argparse
from pathlib import Path

from contraforge.dataset import compute_stats
from contraforge.realization import bundled_lexicon
from contraforge.taskgen import TaskConfig, make_split

COLUMNS = ("vocab_size", "vocab_intersection", "mean_input_words", "max_input_words",
           "mean_input_chars", "max_input_chars")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--langs", default="en,pt")
    ap.add_argument("--train", type=int, default=10_000)
    ap.add_argument("--test", type=int, default=1_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()

    lines = ["task\tlang\t" + "\t".join(COLUMNS)]
    print(f"{'task':<8}" + "".join(f"{c:>20}" for c in COLUMNS))
    for lang in args.langs.split(","):
        lex = bundled_lexicon(lang, "train"), bundled_lexicon(lang, "test")
        for task in range(1, 8):
            cfg = TaskConfig(task, train_size=args.train, test_size=args.test, seed=args.seed)
            d = compute_stats(*make_split(cfg, *lex)).as_dict()
            vals = [d[c] for c in COLUMNS]
            shown = [f"{v:.1f}" if isinstance(v, float) else str(v) for v in vals]
            print(f"{f'{task} ({lang})':<8}" + "".join(f"{s:>20}" for s in shown))
            lines.append(f"{task}\t{lang}\t" + "\t".join(shown))
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
