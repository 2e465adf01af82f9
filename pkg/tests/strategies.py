"""Hypothesis strategies for formulas, models, and formula sets."""

from hypothesis import strategies as st

from contraforge.logic import (
    And, AsTall, Constant, CountExact, Eq, Exists, ForAll, Iota, Not, Sort, Taller, Variable,
    Visit, conj,
)
from contraforge.semantics import Model

PEOPLE = tuple(Constant(n, Sort.PERSON) for n in ("ann", "bob", "cid"))
PLACES = tuple(Constant(n, Sort.PLACE) for n in ("rome", "oslo"))


def _terms(env, sort):
    consts = PEOPLE if sort is Sort.PERSON else PLACES
    return list(consts) + [v for v in env if v.sort is sort]


@st.composite
def formulas(draw, depth=3, env=(), comparatives_anywhere=True):
    """Well-sorted formulas whose free variables are all in ``env``."""
    kinds = ["visit", "eq"] + (["taller", "astall"] if comparatives_anywhere else [])
    if depth > 0:
        kinds += ["not", "and", "forall", "exists", "count", "iota"]
    kind = draw(st.sampled_from(kinds))
    sub = dict(depth=depth - 1, comparatives_anywhere=comparatives_anywhere)
    if kind == "visit":
        target_sort = draw(st.sampled_from(Sort))
        return Visit(draw(st.sampled_from(_terms(env, Sort.PERSON))),
                     draw(st.sampled_from(_terms(env, target_sort))))
    if kind in ("taller", "astall"):
        a, b = (draw(st.sampled_from(_terms(env, Sort.PERSON))) for _ in range(2))
        return (Taller if kind == "taller" else AsTall)(a, b)
    if kind == "eq":
        sort = draw(st.sampled_from(Sort))
        return Eq(draw(st.sampled_from(_terms(env, sort))), draw(st.sampled_from(_terms(env, sort))))
    if kind == "not":
        return Not(draw(formulas(env=env, **sub)))
    if kind == "and":
        return conj(*draw(st.lists(formulas(env=env, **sub), min_size=2, max_size=3)))
    var = Variable(f"v{len(env)}", Sort.PERSON if kind == "iota" else draw(st.sampled_from(Sort)))
    body = draw(formulas(env=(*env, var), **sub))
    if kind == "forall":
        return ForAll(var, body)
    if kind == "exists":
        return Exists(var, body)
    if kind == "count":
        return CountExact(draw(st.integers(1, 30)), var, body)
    return Iota(draw(st.sampled_from(PEOPLE)), var, body)


@st.composite
def models(draw):
    visits = draw(st.frozensets(st.tuples(st.sampled_from(PEOPLE), st.sampled_from(PEOPLE + PLACES))))
    heights = {p: draw(st.integers(1, 3)) for p in PEOPLE}
    return Model(frozenset(PEOPLE), frozenset(PLACES), visits, heights)


@st.composite
def solver_formulas(draw, depth=2, env=(), allow_count=True):
    """Formulas inside the fragment the production labeler accepts.

    Comparatives only as (negated) ground literals; counting only positive with a
    visit-literal body.
    """
    kinds = ["visit", "not_visit", "eq"]
    if depth > 0:
        kinds += ["visit", "and", "forall", "exists", "iota", "not_quant"]
        kinds += ["count"] if allow_count else []
    kind = draw(st.sampled_from(kinds))
    if kind in ("visit", "not_visit"):
        v = Visit(draw(st.sampled_from(_terms(env, Sort.PERSON))),
                  draw(st.sampled_from(_terms(env, draw(st.sampled_from(Sort))))))
        return v if kind == "visit" else Not(v)
    if kind == "eq":
        sort = draw(st.sampled_from(Sort))
        return Eq(draw(st.sampled_from(_terms(env, sort))), draw(st.sampled_from(_terms(env, sort))))
    if kind == "and":
        return conj(*draw(st.lists(solver_formulas(depth - 1, env, allow_count), min_size=2, max_size=3)))
    if kind == "count":
        var = Variable(f"v{len(env)}", draw(st.sampled_from(Sort)))
        agent = draw(st.sampled_from(_terms(env, Sort.PERSON)))
        body = Visit(agent, var)
        if var.sort is Sort.PERSON and draw(st.booleans()):
            body = Visit(var, draw(st.sampled_from(_terms(env, draw(st.sampled_from(Sort))))))
        return CountExact(draw(st.integers(1, 2)), var, body)
    var = Variable(f"v{len(env)}", Sort.PERSON if kind == "iota" else draw(st.sampled_from(Sort)))
    # iota and negated quantifiers put their body under negative polarity
    positive = kind in ("forall", "exists") and allow_count
    body = draw(solver_formulas(depth - 1, (*env, var), positive))
    if kind == "forall":
        return ForAll(var, body)
    if kind == "exists":
        return Exists(var, body)
    if kind == "not_quant":
        return Not(draw(st.sampled_from((ForAll, Exists)))(var, body))
    return Iota(draw(st.sampled_from(PEOPLE)), var, body)


def order_literals():
    def lit(draw_args):
        kind, neg, a, b = draw_args
        f = (Taller if kind else AsTall)(a, b)
        return Not(f) if neg else f
    return st.tuples(st.booleans(), st.booleans(), st.sampled_from(PEOPLE),
                     st.sampled_from(PEOPLE)).map(lit)


@st.composite
def solver_sets(draw):
    fs = draw(st.lists(solver_formulas(), min_size=1, max_size=4))
    fs += draw(st.lists(order_literals(), max_size=3))
    return fs


def random_formula(rng, depth=3, env=()):
    """Seeded plain-random counterpart of ``formulas`` for large sweeps."""
    kinds = ["visit", "eq", "taller", "astall"]
    if depth > 0:
        kinds += ["not", "and", "forall", "exists", "count", "iota"]
    kind = rng.choice(kinds)
    if kind == "visit":
        return Visit(rng.choice(_terms(env, Sort.PERSON)), rng.choice(_terms(env, rng.choice(list(Sort)))))
    if kind in ("taller", "astall"):
        return (Taller if kind == "taller" else AsTall)(rng.choice(_terms(env, Sort.PERSON)),
                                                        rng.choice(_terms(env, Sort.PERSON)))
    if kind == "eq":
        sort = rng.choice(list(Sort))
        return Eq(rng.choice(_terms(env, sort)), rng.choice(_terms(env, sort)))
    if kind == "not":
        return Not(random_formula(rng, depth - 1, env))
    if kind == "and":
        return conj(*(random_formula(rng, depth - 1, env) for _ in range(rng.randint(2, 3))))
    var = Variable(f"v{len(env)}", Sort.PERSON if kind == "iota" else rng.choice(list(Sort)))
    body = random_formula(rng, depth - 1, (*env, var))
    if kind == "forall":
        return ForAll(var, body)
    if kind == "exists":
        return Exists(var, body)
    if kind == "count":
        return CountExact(rng.randint(1, 30), var, body)
    return Iota(rng.choice(PEOPLE), var, body)
