"""Bag-of-Words featurizer and a from-scratch Random Forest (CART, Gini impurity).

Trees split on raw token counts with ``x <= t`` tests. At each node features
are drawn without replacement until ``features_per_split`` non-constant ones
have been examined (constant features do not count). Equal-impurity candidates
resolve to the lowest feature index, then the lowest threshold. Leaves and the
forest vote both break ties toward label 0.

Tree growth runs in a numba kernel with its own splitmix64 stream per tree, so
results depend only on the seed, not on numba's global random state.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numba
import numpy as np

from .realization import tokenize

MODEL_FORMAT = "contraforge-forest"
MODEL_VERSION = 1


class BaselineError(ValueError):
    pass


# --- Bag of Words --------------------------------------------------------------

@dataclass(frozen=True)
class BowSpace:
    vocab: tuple                       # index -> token
    doc_freq: tuple = ()               # documents containing each token
    index: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "vocab", tuple(self.vocab))
        object.__setattr__(self, "doc_freq", tuple(self.doc_freq))
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.vocab)})
        if len(self.index) != len(self.vocab):
            raise BaselineError("duplicate tokens in vocabulary")

    def __len__(self):
        return len(self.vocab)

    @classmethod
    def build(cls, docs: Sequence[str]) -> "BowSpace":
        df = {}
        for doc in docs:
            for tok in set(tokenize(doc)):
                df[tok] = df.get(tok, 0) + 1
        vocab = sorted(df)
        return cls(tuple(vocab), tuple(df[t] for t in vocab))

    def transform(self, docs: Sequence[str]) -> np.ndarray:
        """Raw term counts; tokens outside the vocabulary are dropped."""
        X = np.zeros((len(docs), len(self.vocab)), dtype=np.uint16)
        for r, doc in enumerate(docs):
            for tok in tokenize(doc):
                j = self.index.get(tok)
                if j is not None:
                    X[r, j] += 1
        return X


def featurize(split, space: BowSpace | None = None) -> tuple:
    """(counts, labels, space) for a split; each document is premise + hypothesis."""
    docs = split.texts()
    if space is None:
        space = BowSpace.build(docs)
    return space.transform(docs), np.asarray(split.labels, dtype=np.int8), space


# --- tree kernel ---------------------------------------------------------------

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@numba.njit(cache=True)
def _rand_below(state, k):
    state[0] += _GOLDEN
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    z = z ^ (z >> np.uint64(31))
    return np.int64(z % np.uint64(k))


@numba.njit(cache=True)
def _grow(X, y, samples, maxval, n_feat, max_depth, min_leaf, seed):
    """Grow one tree over ``samples`` (row indices, repeats allowed)."""
    n = samples.shape[0]
    n_features = X.shape[1]
    cap = 2 * n + 1
    left = np.full(cap, -1, np.int32)
    right = np.full(cap, -1, np.int32)
    feature = np.full(cap, -1, np.int32)
    threshold = np.zeros(cap, np.int32)
    leaf_label = np.zeros(cap, np.int8)
    state = np.empty(1, np.uint64)
    state[0] = np.uint64(seed)

    idx = samples.copy()
    perm = np.arange(n_features)
    top = int(maxval.max()) + 1 if n_features else 1
    hist = np.zeros((top, 2), np.int64)

    # stack of (node, start, end, depth)
    st_node = np.empty(cap, np.int64)
    st_start = np.empty(cap, np.int64)
    st_end = np.empty(cap, np.int64)
    st_depth = np.empty(cap, np.int64)
    sp = 0
    st_node[0] = 0
    st_start[0] = 0
    st_end[0] = n
    st_depth[0] = 0
    sp = 1
    n_nodes = 1

    while sp > 0:
        sp -= 1
        node = st_node[sp]
        s = st_start[sp]
        e = st_end[sp]
        depth = st_depth[sp]
        m = e - s
        c1 = 0
        for i in range(s, e):
            c1 += y[idx[i]]
        c0 = m - c1
        leaf_label[node] = 1 if c1 > c0 else 0
        if c0 == 0 or c1 == 0 or m < 2 * min_leaf or (max_depth >= 0 and depth >= max_depth):
            continue

        best_crit = np.inf
        best_f = -1
        best_t = -1
        examined = 0
        drawn = 0
        while examined < n_feat and drawn < n_features:
            j = drawn + _rand_below(state, n_features - drawn)
            tmp = perm[drawn]
            perm[drawn] = perm[j]
            perm[j] = tmp
            f = perm[drawn]
            drawn += 1
            if maxval[f] == 0:
                continue
            lo = 1 << 30
            hi = -1
            for i in range(s, e):
                v = X[idx[i], f]
                hist[v, y[idx[i]]] += 1
                if v < lo:
                    lo = v
                if v > hi:
                    hi = v
            if lo == hi:
                hist[lo, 0] = 0
                hist[lo, 1] = 0
                continue
            examined += 1
            l0 = 0
            l1 = 0
            for v in range(lo, hi):
                l0 += hist[v, 0]
                l1 += hist[v, 1]
                nl = l0 + l1
                nr = m - nl
                if nl == 0 or nl < min_leaf or nr < min_leaf:
                    continue
                r0 = c0 - l0
                r1 = c1 - l1
                crit = (nl - (l0 * l0 + l1 * l1) / nl) + (nr - (r0 * r0 + r1 * r1) / nr)
                if crit < best_crit - 1e-9 or (
                    crit <= best_crit + 1e-9 and (f < best_f or (f == best_f and v < best_t))
                ):
                    best_crit = crit
                    best_f = f
                    best_t = v
            for v in range(lo, hi + 1):
                hist[v, 0] = 0
                hist[v, 1] = 0
        if best_f < 0:
            continue

        # partition [s, e) so that X[:, best_f] <= best_t comes first
        i = s
        k = e - 1
        while i <= k:
            if X[idx[i], best_f] <= best_t:
                i += 1
            else:
                tmp = idx[i]
                idx[i] = idx[k]
                idx[k] = tmp
                k -= 1
        feature[node] = best_f
        threshold[node] = best_t
        lnode = n_nodes
        rnode = n_nodes + 1
        n_nodes += 2
        left[node] = lnode
        right[node] = rnode
        # push right first so the left subtree is numbered first
        st_node[sp] = rnode
        st_start[sp] = i
        st_end[sp] = e
        st_depth[sp] = depth + 1
        sp += 1
        st_node[sp] = lnode
        st_start[sp] = s
        st_end[sp] = i
        st_depth[sp] = depth + 1
        sp += 1

    return (left[:n_nodes].copy(), right[:n_nodes].copy(), feature[:n_nodes].copy(),
            threshold[:n_nodes].copy(), leaf_label[:n_nodes].copy())


@numba.njit(cache=True)
def _predict_tree(X, left, right, feature, threshold, leaf_label):
    out = np.empty(X.shape[0], np.int8)
    for r in range(X.shape[0]):
        node = 0
        while left[node] >= 0:
            if X[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = leaf_label[node]
    return out


# --- forest --------------------------------------------------------------------

@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int | None = None
    min_leaf: int = 1
    features_per_split: str | int = "sqrt"
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        fps = self.features_per_split
        if not (fps in ("sqrt", "all") or (isinstance(fps, int) and fps >= 1)):
            raise ValueError("features_per_split must be 'sqrt', 'all' or a positive integer")

    def features_for(self, n_features: int) -> int:
        fps = self.features_per_split
        if fps == "sqrt":
            return max(1, int(math.sqrt(n_features)))
        if fps == "all":
            return max(1, n_features)
        return min(fps, max(1, n_features))


@dataclass(frozen=True)
class Tree:
    left: np.ndarray
    right: np.ndarray
    feature: np.ndarray
    threshold: np.ndarray
    leaf_label: np.ndarray

    def predict(self, X) -> np.ndarray:
        return _predict_tree(np.ascontiguousarray(X), self.left, self.right, self.feature,
                             self.threshold, self.leaf_label)

    @property
    def n_nodes(self) -> int:
        return len(self.left)


@dataclass(frozen=True)
class ForestModel:
    params: ForestParams
    trees: tuple
    n_features: int
    oob_accuracy: float | None = None
    space: BowSpace | None = None

    def tree_votes(self, X) -> np.ndarray:
        X = _as_counts(X, self.n_features)
        return np.stack([t.predict(X) for t in self.trees])

    def predict(self, X) -> np.ndarray:
        votes = self.tree_votes(X).astype(np.int64).sum(axis=0)
        # strict majority for label 1; ties go to 0
        return (2 * votes > len(self.trees)).astype(np.int8)


def _as_counts(X, n_features=None) -> np.ndarray:
    X = np.asarray(X)
    if X.ndim != 2:
        raise BaselineError("feature matrix must be 2-D")
    if n_features is not None and X.shape[1] != n_features:
        raise BaselineError(f"expected {n_features} features, got {X.shape[1]}")
    if X.size and (X.min() < 0 or X.max() > np.iinfo(np.uint16).max):
        raise BaselineError("features must be non-negative counts below 65536")
    return np.ascontiguousarray(X, dtype=np.uint16)


def train_forest(features, labels, params: ForestParams = ForestParams(),
                 space: BowSpace | None = None) -> ForestModel:
    X = _as_counts(features)
    y = np.ascontiguousarray(labels, dtype=np.int8)
    n = X.shape[0]
    if n < 2 or y.shape != (n,):
        raise BaselineError("need at least 2 examples and one label per row")
    if not set(np.unique(y)) <= {0, 1}:
        raise BaselineError("labels must be 0/1")
    if len(np.unique(y)) < 2:
        raise BaselineError("training labels contain a single class")
    maxval = X.max(axis=0).astype(np.int64) if X.shape[1] else np.zeros(0, np.int64)
    n_feat = params.features_for(X.shape[1])
    max_depth = -1 if params.max_depth is None else params.max_depth
    children = np.random.SeedSequence(params.seed).spawn(params.n_trees)
    trees = []
    oob_votes = np.zeros(n, np.int64)
    oob_seen = np.zeros(n, np.int64)
    for ss in children:
        rng = np.random.default_rng(ss)
        if params.bootstrap:
            samples = rng.integers(0, n, size=n).astype(np.int64)
        else:
            samples = np.arange(n, dtype=np.int64)
        tree_seed = int(rng.integers(0, 2**63 - 1))
        tree = Tree(*_grow(X, y, samples, maxval, n_feat, max_depth, params.min_leaf, tree_seed))
        trees.append(tree)
        if params.bootstrap:
            out = np.ones(n, bool)
            out[samples] = False
            if out.any():
                oob_votes[out] += tree.predict(X[out])
                oob_seen[out] += 1
    oob = None
    if params.bootstrap and oob_seen.any():
        m = oob_seen > 0
        pred = (2 * oob_votes[m] > oob_seen[m]).astype(np.int8)
        oob = float((pred == y[m]).mean())
    return ForestModel(params, tuple(trees), X.shape[1], oob, space)


# --- evaluation ----------------------------------------------------------------

def score(predictions, labels) -> dict:
    p = np.asarray(predictions, dtype=np.int64)
    y = np.asarray(labels, dtype=np.int64)
    if p.shape != y.shape or y.size == 0:
        raise BaselineError("predictions and labels must be nonempty and aligned")
    confusion = [[int(((y == a) & (p == b)).sum()) for b in (0, 1)] for a in (0, 1)]
    return {"accuracy": float((p == y).mean()), "confusion": confusion, "n": int(y.size)}


def evaluate(model: ForestModel, split, space: BowSpace | None = None) -> dict:
    """Accuracy and confusion (rows: gold 0/1, columns: predicted 0/1) on ``split``."""
    space = space or model.space
    if space is None:
        raise BaselineError("no BowSpace given and none stored on the model")
    X, y, _ = featurize(split, space)
    return score(model.predict(X), y)


def run_baseline(train, test, params: ForestParams = ForestParams()) -> dict:
    X, y, space = featurize(train)
    model = train_forest(X, y, params, space)
    report = evaluate(model, test)
    report["oob_accuracy"] = model.oob_accuracy
    report["vocab"] = len(space)
    return {"model": model, "report": report}


def proportion_sweep(train, test, proportions: Sequence[float],
                     params: ForestParams = ForestParams(), seed: int = 0) -> list:
    """Accuracy after training on seeded-shuffled prefixes of ``train``."""
    from .dataset import DatasetSplit

    for p in proportions:
        if not 0 < p <= 1:
            raise ValueError(f"proportion {p} outside (0, 1]")
    order = np.random.default_rng(np.random.SeedSequence(seed)).permutation(len(train))
    shuffled = DatasetSplit(tuple(train.examples[i] for i in order), dict(train.meta),
                            tuple(train.ids[i] for i in order))
    rows = []
    for p in proportions:
        k = int(round(p * len(train)))
        if k < 2:
            raise ValueError(f"proportion {p} leaves {k} training examples")
        part = shuffled.subset(k)
        if len(set(part.labels)) < 2:
            raise ValueError(f"proportion {p} leaves a single class")
        out = run_baseline(part, test, params)
        rows.append({"proportion": p, "n_train": k, "accuracy": out["report"]["accuracy"],
                     "oob_accuracy": out["report"]["oob_accuracy"]})
    return rows


# --- persistence -----------------------------------------------------------------

_TREE_FIELDS = ("left", "right", "feature", "threshold", "leaf_label")


def save_model(model: ForestModel, path) -> Path:
    path = Path(path)
    header = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "params": asdict(model.params),
        "n_features": model.n_features,
        "oob_accuracy": model.oob_accuracy,
        "vocab": list(model.space.vocab) if model.space else None,
        "doc_freq": list(model.space.doc_freq) if model.space else None,
        "tree_sizes": [t.n_nodes for t in model.trees],
    }
    arrays = {name: np.concatenate([getattr(t, name) for t in model.trees]) for name in _TREE_FIELDS}
    with open(path, "wb") as fh:
        np.savez_compressed(fh, header=np.frombuffer(json.dumps(header).encode(), np.uint8), **arrays)
    return path


def load_model(path) -> ForestModel:
    with np.load(Path(path)) as data:
        header = json.loads(bytes(data["header"]).decode())
        if header.get("format") != MODEL_FORMAT or header.get("version") != MODEL_VERSION:
            raise BaselineError(f"{path}: unsupported model format {header.get('format')} "
                                f"v{header.get('version')}")
        arrays = {name: data[name] for name in _TREE_FIELDS}
    trees, start = [], 0
    for size in header["tree_sizes"]:
        trees.append(Tree(*(arrays[name][start:start + size].copy() for name in _TREE_FIELDS)))
        start += size
    space = BowSpace(header["vocab"], header["doc_freq"]) if header["vocab"] is not None else None
    return ForestModel(ForestParams(**header["params"]), tuple(trees), header["n_features"],
                       header["oob_accuracy"], space)
