import itertools

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from contraforge.logic import (
    AsTall, Constant, CountExact, Exists, ForAll, Iota, Label, Not, Sort, Taller, Variable, Visit,
    conj, rename_constants,
)
from contraforge.semantics import (
    FragmentError, GuardError, Model, UniverseBounds, UnknownConstantError, brute_force_consistent,
    consistent, evaluate, label_pair, oracle_admissible, universe,
)

from strategies import PEOPLE, PLACES, formulas, models, order_literals, solver_sets

P_ = lambda n: Constant(n, Sort.PERSON)  # noqa: E731
L_ = lambda n: Constant(n, Sort.PLACE)  # noqa: E731

charles, joe, lana, timothy, anthony = map(P_, ("charles", "joe", "lana", "timothy", "anthony"))
francis, ryan, philip, john, carla, bruce, carlos = map(
    P_, ("francis", "ryan", "philip", "john", "carla", "bruce", "carlos"))
chile, japan, france, elsalvador, germany = map(L_, ("chile", "japan", "france", "elsalvador", "germany"))
x = Variable("x", Sort.PERSON)
y = Variable("y", Sort.PERSON)
p = Variable("p", Sort.PLACE)

EVERYONE_EVERY_PLACE = ForAll(x, ForAll(p, Visit(x, p)))
relaxed = settings(max_examples=200, deadline=None, suppress_health_check=list(HealthCheck))


def test_eval_single_visit():
    m = Model({charles}, {chile}, {(charles, chile)}, {charles: 1})
    assert evaluate(m, Visit(charles, chile))


def test_eval_person_versus_place():
    people, places = {timothy, anthony}, {elsalvador}
    every = {(a, b) for a in people for b in people | places}
    m = Model(people, places, every, {timothy: 1, anthony: 1})
    assert evaluate(m, EVERYONE_EVERY_PLACE)
    assert not evaluate(m, Not(Visit(timothy, anthony)))
    m2 = Model(people, places, every - {(timothy, anthony)}, m.heights)
    assert evaluate(m2, EVERYONE_EVERY_PLACE)
    assert evaluate(m2, Not(Visit(timothy, anthony)))


def test_eval_heights():
    m = Model({francis, joe, ryan}, set(), set(), {francis: 3, joe: 2, ryan: 1})
    assert evaluate(m, Taller(francis, ryan))
    assert evaluate(m, AsTall(joe, joe)) and not evaluate(m, Taller(joe, joe))


def test_eval_unknown_constant():
    m = Model({charles}, {chile}, set(), {charles: 1})
    with pytest.raises(UnknownConstantError, match="japan"):
        evaluate(m, Visit(charles, japan))


def test_eval_counting_and_iota():
    m = Model({philip, john, carla}, {chile, japan},
              {(philip, john), (philip, chile), (philip, japan), (carla, chile)},
              {philip: 1, john: 1, carla: 1})
    assert evaluate(m, CountExact(2, p, Visit(philip, p)))
    assert evaluate(m, CountExact(1, x, Visit(philip, x)))
    assert evaluate(m, Iota(philip, y, ForAll(p, Visit(y, p))))
    assert not evaluate(m, Iota(carla, y, ForAll(p, Visit(y, p))))


@given(models(), formulas())
def test_eval_respects_negation(m, f):
    assert evaluate(m, Not(f)) is (not evaluate(m, f))


def test_oracle_examples():
    assert not brute_force_consistent([Visit(joe, japan), Not(Visit(joe, japan))])
    assert not brute_force_consistent([Taller(francis, joe), Taller(joe, ryan), Taller(ryan, francis)])
    assert brute_force_consistent([EVERYONE_EVERY_PLACE, Not(Visit(timothy, anthony))])


def test_oracle_guard():
    many = [Visit(P_(f"q{i}"), chile) for i in range(5)]
    assert not oracle_admissible(many)
    with pytest.raises(GuardError):
        brute_force_consistent(many)


def test_oracle_matches_hand_enumeration_of_person_place_case():
    # all models over {timothy, anthony} x {elsalvador, one fresh place}
    people, _ = universe([EVERYONE_EVERY_PLACE, Not(Visit(timothy, anthony))])
    assert len(people) == 3
    pe = [timothy, anthony]
    pl = [elsalvador, L_("fresh")]
    atoms = [(a, b) for a in pe for b in pe + pl]
    found = False
    for bits in itertools.product((False, True), repeat=len(atoms)):
        vis = {a for a, on in zip(atoms, bits) if on}
        m = Model(set(pe), set(pl), vis, {t: 1 for t in pe})
        if evaluate(m, EVERYONE_EVERY_PLACE) and evaluate(m, Not(Visit(timothy, anthony))):
            found = True
            break
    assert found is brute_force_consistent([EVERYONE_EVERY_PLACE, Not(Visit(timothy, anthony))])


def test_consistent_counting_examples():
    z = Variable("z", Sort.PERSON)
    premise = [conj(CountExact(2, z, Visit(philip, z)), CountExact(3, p, Visit(philip, p)))]
    three = conj(Visit(philip, john), Visit(philip, carla), Visit(philip, bruce))
    assert not consistent(premise + [three])
    assert consistent(premise + [Visit(philip, john)])


def test_consistent_definite_description_examples():
    premise = [Iota(carlos, y, ForAll(p, Visit(y, p))), Visit(carlos, john)]
    assert consistent(premise + [Not(Visit(john, germany))])
    assert not consistent(premise + [Not(Visit(carlos, germany))])


def test_label_pair_examples():
    premise = [Visit(charles, chile), Visit(joe, japan)]
    assert label_pair(premise, Not(Visit(joe, japan))) is Label.CONTRADICTION
    assert label_pair(premise, Not(Visit(lana, france))) is Label.NON_CONTRADICTION


def test_fragment_errors():
    with pytest.raises(FragmentError):
        consistent([ForAll(x, Taller(x, joe))])
    with pytest.raises(FragmentError):
        consistent([Not(CountExact(1, p, Visit(joe, p)))])


def test_large_count_uses_slack():
    premise = [CountExact(30, p, Visit(philip, p))]
    assert consistent(premise + [Visit(philip, chile)])
    targets = [L_(f"c{i}") for i in range(31)]
    assert not consistent(premise + [conj(*(Visit(philip, t) for t in targets))])


@relaxed
@given(solver_sets())
def test_labeler_agrees_with_oracle(fs):
    assert oracle_admissible(fs)
    assert consistent(fs) is brute_force_consistent(fs)


@relaxed
@given(solver_sets(), solver_sets())
def test_inconsistency_is_monotone(fs, gs):
    if not consistent(fs):
        assert not consistent(fs + gs[:1])


@relaxed
@given(st.lists(order_literals(), min_size=1, max_size=6))
def test_order_consistency_matches_height_enumeration(lits):
    people = sorted({c for f in lits for c in _people(f)})
    expected = any(
        all(evaluate(Model(set(people), set(), set(), dict(zip(people, hs))), f) for f in lits)
        for hs in itertools.product(range(1, len(people) + 1), repeat=len(people)))
    assert consistent(lits) is expected


def _people(f):
    while isinstance(f, Not):
        f = f.f
    return (f.a, f.b)


@relaxed
@given(solver_sets(), st.permutations(PEOPLE), st.permutations(PLACES))
def test_consistency_invariant_under_renaming(fs, people, places):
    sigma = dict(zip(PEOPLE + PLACES, tuple(people) + tuple(places)))
    assert consistent([rename_constants(f, sigma) for f in fs]) is consistent(fs)


def test_universe_adds_slack():
    people, places = universe([Visit(joe, japan)], UniverseBounds(2, 0))
    assert len(people) == 3 and places == (japan,)
    with pytest.raises(ValueError):
        UniverseBounds(-1, 0)
