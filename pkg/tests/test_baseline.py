import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from contraforge.baseline import (
    BaselineError, BowSpace, ForestModel, ForestParams, featurize, load_model, proportion_sweep,
    run_baseline, save_model, train_forest,
)
from contraforge.dataset import DatasetSplit
from contraforge.realization import bundled_lexicon
from contraforge.taskgen import TaskConfig, make_split


def reference_tree(X, y, rows=None):
    """Plain CART (Gini, every feature, lowest feature then threshold on ties) as nested tuples."""
    rows = list(range(len(y))) if rows is None else rows
    c1 = sum(int(y[r]) for r in rows)
    c0 = len(rows) - c1
    label = 1 if c1 > c0 else 0
    if c0 == 0 or c1 == 0:
        return label
    best = None
    for f in range(X.shape[1]):
        values = sorted({int(X[r, f]) for r in rows})
        for t in values[:-1]:
            left = [r for r in rows if X[r, f] <= t]
            right = [r for r in rows if X[r, f] > t]
            crit = sum(len(part) - sum(sum(int(y[r]) == k for r in part) ** 2 for k in (0, 1)) / len(part)
                       for part in (left, right))
            if best is None or crit < best[0] - 1e-9:
                best = (crit, f, t, left, right)
    if best is None:
        return label
    _, f, t, left, right = best
    return (f, t, reference_tree(X, y, left), reference_tree(X, y, right))


def reference_predict(node, x):
    while isinstance(node, tuple):
        f, t, lo, hi = node
        node = lo if x[f] <= t else hi
    return node


@pytest.fixture(scope="module")
def task1():
    cfg = TaskConfig(1, train_size=300, test_size=100, seed=5, vocab_mode="intersect")
    return make_split(cfg, bundled_lexicon("en", "train"), bundled_lexicon("en", "test"))


def test_bag_of_words_counts_repeats():
    space = BowSpace.build(["joe visited japan joe", "ann stayed"])
    X = space.transform(["joe visited japan joe"])
    assert X[0, space.index["joe"]] == 2 and X[0, space.index["japan"]] == 1
    assert space.doc_freq[space.index["joe"]] == 1


def test_unseen_tokens_are_dropped():
    space = BowSpace.build(["joe visited japan"])
    assert space.transform(["zed visited oslo"]).sum() == 1


def test_separable_toy_is_fit_exactly():
    X = np.array([[0, 1], [1, 0], [0, 2], [2, 0], [0, 3], [3, 0]])
    y = np.array([0, 1, 0, 1, 0, 1])
    model = train_forest(X, y, ForestParams(n_trees=5, seed=1))
    assert (model.predict(X) == y).all()


@settings(max_examples=60, deadline=None)
@given(hnp.arrays(np.int64, st.tuples(st.integers(4, 30), st.integers(1, 5)), elements=st.integers(0, 3)),
       st.data())
def test_single_full_tree_matches_reference_cart(X, data):
    y = np.array(data.draw(st.lists(st.integers(0, 1), min_size=len(X), max_size=len(X))))
    if len(set(y)) < 2:
        y[0], y[1] = 0, 1
    params = ForestParams(n_trees=1, features_per_split="all", bootstrap=False, seed=data.draw(st.integers(0, 99)))
    model = train_forest(X, y, params)
    ref = reference_tree(X, y)
    assert [reference_predict(ref, x) for x in X] == model.predict(X).tolist()


def test_training_is_deterministic(task1):
    train, test = task1
    a = run_baseline(train, test, ForestParams(n_trees=15, seed=3))["report"]
    b = run_baseline(train, test, ForestParams(n_trees=15, seed=3))["report"]
    assert a == b
    assert sum(map(sum, a["confusion"])) == a["n"] == len(test)


def test_token_order_does_not_matter(task1):
    train, _ = task1
    X, y, space = featurize(train)
    model = train_forest(X, y, ForestParams(n_trees=10, seed=0))
    shuffled = [" ".join(reversed(t.split())) for t in train.texts()]
    assert (model.predict(space.transform(shuffled)) == model.predict(X)).all()


def test_vote_ties_go_to_non_contradiction():
    X = np.array([[0], [1]])
    y = np.array([0, 1])
    model = train_forest(X, y, ForestParams(n_trees=4, bootstrap=False, seed=0))
    flipped = tuple(model.trees[:2]) + tuple(
        type(t)(t.left, t.right, t.feature, t.threshold, 1 - t.leaf_label) for t in model.trees[2:])
    tied = ForestModel(model.params, flipped, 1)
    assert tied.predict(X).tolist() == [0, 0]


def test_majority_vote_equals_mode_of_tree_votes(task1):
    train, test = task1
    X, y, space = featurize(train)
    model = train_forest(X, y, ForestParams(n_trees=9, seed=2))
    Xt = space.transform(test.texts())
    votes = model.tree_votes(Xt)
    assert (model.predict(Xt) == (votes.sum(axis=0) >= 5)).all()


def test_save_load_round_trip(task1, tmp_path):
    train, test = task1
    out = run_baseline(train, test, ForestParams(n_trees=7, seed=4))
    model = out["model"]
    back = load_model(save_model(model, tmp_path / "forest.npz"))
    Xt = model.space.transform(test.texts())
    assert (back.predict(Xt) == model.predict(Xt)).all()
    assert back.space == model.space and back.params == model.params


def test_single_class_rejected(task1):
    train, _ = task1
    ones = DatasetSplit([e for e in train.examples if int(e.label) == 1][:10], train.meta)
    with pytest.raises(BaselineError, match="single class"):
        run_baseline(ones, ones)
    with pytest.raises(BaselineError):
        train_forest(np.array([[1, 2]]), np.array([1]))
    with pytest.raises(ValueError):
        ForestParams(n_trees=0)


def test_proportion_sweep(task1):
    train, test = task1
    props = [0.25, 0.5, 0.75, 1.0]
    params = ForestParams(n_trees=10, seed=0)
    rows = proportion_sweep(train, test, props, params, seed=1)
    assert [r["proportion"] for r in rows] == props
    assert [r["n_train"] for r in rows] == [75, 150, 225, 300]
    assert rows == proportion_sweep(train, test, props, params, seed=1)
    with pytest.raises(ValueError):
        proportion_sweep(train, test, [0.0], params)


def test_oob_accuracy_in_unit_interval(task1):
    report = run_baseline(*task1, ForestParams(n_trees=10))["report"]
    assert 0.0 <= report["oob_accuracy"] <= 1.0
    assert report["vocab"] > 0
