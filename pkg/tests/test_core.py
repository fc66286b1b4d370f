import itertools

import pytest
from hypothesis import given, strategies as st

from helpers import ej, exp
from predim import core
from predim.errors import PredimError
from predim.generators import random_universe
from predim.rng import stream
from predim.universe import ClassId, Substructure, Universe, generate, whole


def one_pair():
    return ej([("c", [0, 0, 0, 0]), ("z", [1, 0, 0, 0], None, "s"), ("j", [0, 1, 0, 0], "h")],
              [("z", "j")])


def test_delta_of_constants_is_zero():
    U = one_pair()
    assert core.delta(generate(U)).delta == 0
    empty = Universe(ClassId.EJ_TOY, [])
    assert core.delta(whole(empty)).delta == 0


def test_delta_one_pair():
    r = core.delta(whole(one_pair()))
    assert (r.td, r.sigma, r.delta) == (2, 1, 1)
    assert r.basis_witness == (("z", "j"),)


def test_delta_two_pairs_sharing_a_class():
    # the example's own configuration; the audit rejects it (class-mates not parallel)
    U = ej([("z1", [1, 0, 0, 0], None, "s"), ("j1", [0, 1, 0, 0], "h"),
            ("z2", [0, 0, 1, 0], None, "s"), ("j2", [0, 0, 0, 1], "h")],
           [("z1", "j1"), ("z2", "j2")])
    r = core.delta(whole(U))
    assert (r.td, r.sigma, r.delta) == (4, 1, 3)


def test_delta_weight_three():
    U = ej([("z", [1, 0, 0, 0], None, "s"), ("j", [0, 1, 0, 0], "h"), ("j1", [0, 0, 1, 0]),
            ("j2", [0, 0, 0, 1])], [("z", "j", "j1", "j2")], cls=ClassId.EJ_DERIV_TOY)
    r = core.delta(whole(U))
    assert (r.td, r.sigma, r.delta) == (4, 1, 1)


def test_delta_errors():
    U = ej([("a", [1]), ("b", [2])])
    with pytest.raises(PredimError) as e:
        core.delta(Substructure(U, frozenset({"a"})))
    assert e.value.code == "UNCLOSED_INPUT"

    class Fake:
        universe = "dangling"
        members = frozenset()
    with pytest.raises(PredimError) as e:
        core.delta(Fake())
    assert e.value.code == "UNKNOWN_UNIVERSE"


def test_relative_delta_examples():
    U = ej([("z1", [1, 0, 0, 0], None, "s1"), ("j1", [0, 1, 0, 0], "h1"),
            ("z2", [0, 0, 1, 0], None, "s2"), ("j2", [0, 0, 0, 1], "h2")],
           [("z1", "j1"), ("z2", "j2")])
    A = generate(U, ["z1", "j1"])
    X = generate(U, ["z2", "j2"])
    assert core.relative_delta(A, A) == 0
    assert core.relative_delta(X, generate(U)) == core.delta(X).delta
    assert core.relative_delta(X, A) == 1


def test_is_strong_examples():
    U = one_pair()
    B = whole(U)
    assert core.is_strong(B, B)
    assert core.is_strong(generate(U), B)
    # two pairs in distinct classes adding one dimension together: delta drops by one
    V = two_cheap_pairs()
    A = generate(V, ["a", "b"])
    chk = core.is_strong(A, whole(V))
    assert not chk and chk.witness == V.closure(V.ids) and chk.deficit == -1


def test_is_strong_errors():
    U = one_pair()
    with pytest.raises(PredimError) as e:
        core.is_strong(whole(U), generate(U))
    assert e.value.code == "NOT_SUBSET"
    big = ej([(f"p{i}", [int(i == k) for k in range(17)]) for i in range(17)])
    with pytest.raises(PredimError) as e:
        core.is_strong(generate(big), whole(big))
    assert e.value.code == "CAP_EXCEEDED"


def two_cheap_pairs():
    return ej([("a", [1, 0, 0]), ("b", [0, 1, 0]),
               ("z1", [0, 0, 1], None, "s1"), ("j1", [1, 0, 1], "h1"),
               ("z2", [1, 0, 2], None, "s2"), ("j2", [0, 1, 1], "h2")],
              [("z1", "j1"), ("z2", "j2")])


def test_closure_examples():
    U = one_pair()
    B = whole(U)
    assert core.self_sufficient_closure([], B).members == generate(U).members
    assert core.self_sufficient_closure(["z", "j"], B).members == B.members
    V = two_cheap_pairs()
    assert core.self_sufficient_closure(["a"], whole(V)).members == frozenset({"a"})
    cl = core.self_sufficient_closure(["a", "b"], whole(V))
    assert cl.members == V.closure(V.ids)
    assert core.delta(cl).delta == 1 == core.dimension_d(["a", "b"], whole(V))


def test_pregeometry_examples():
    U = one_pair()
    B = whole(U)
    assert core.pregeometry_closure(B.members, B) == B.members
    assert generate(U).members <= core.pregeometry_closure([], B)


def brute_min(U, x):
    best = None
    for S in range(1 << len(U)):
        if S & x == x and U.is_closed_mask(S):
            d = core.delta_mask(U, S)
            best = d if best is None else min(best, d)
    return best


seeds = st.integers(0, 10 ** 6)
classes = st.sampled_from(list(ClassId))


@given(seeds, classes)
def test_closure_is_least_minimizer(seed, cid):
    U = random_universe(cid, stream(seed, "cl"), max_points=8)
    B = whole(U)
    rng = stream(seed, "x")
    for _ in range(4):
        X = [p for p in U.ids if rng.random() < 0.4]
        cl = core.self_sufficient_closure(X, B)
        x = U.close_mask(U.mask(X))
        assert core.delta(cl).delta == brute_min(U, x)
        assert core.is_strong(cl, B)
        assert core.self_sufficient_closure(cl.members, B) == cl


def flats(U):
    return core.flats_between(U, 0, U.full_mask)


@given(seeds, classes)
def test_delta_vs_d_and_strongness(seed, cid):
    U = random_universe(cid, stream(seed, "dd"), max_points=8)
    B = whole(U)
    for F in flats(U)[:12]:
        A = Substructure(U, U.ids_of(F))
        d = core.dimension_d(A.members, B)
        assert core.delta(A).delta >= d
        assert (core.delta(A).delta == d) == bool(core.is_strong(A, B))


@given(seeds, classes)
def test_intersection_of_strong_is_strong(seed, cid):
    U = random_universe(cid, stream(seed, "meet"), max_points=8)
    B = whole(U)
    strong = [F for F in flats(U) if core.is_strong(Substructure(U, U.ids_of(F)), B)]
    for a, b in itertools.combinations(strong[:10], 2):
        assert core.is_strong(Substructure(U, U.ids_of(a & b)), B)


@given(seeds, classes)
def test_transitivity(seed, cid):
    U = random_universe(cid, stream(seed, "tr"), max_points=7)
    fl = flats(U)[:10]
    for a, b in itertools.permutations(fl, 2):
        if a & ~b:
            continue
        A, Bs = Substructure(U, U.ids_of(a)), Substructure(U, U.ids_of(b))
        if core.is_strong(A, Bs) and core.is_strong(Bs, whole(U)):
            assert core.is_strong(A, whole(U))


@given(seeds, st.sampled_from([ClassId.AB_INITIO, ClassId.EJ_TOY, ClassId.EXP_TOY]))
def test_d_is_a_matroid_rank(seed, cid):
    U = random_universe(cid, stream(seed, "rank"), max_points=7)
    B = whole(U)
    ids = list(U.ids)
    rng = stream(seed, "sets")
    d = lambda X: core.dimension_d(X, B)
    for _ in range(5):
        X = [p for p in ids if rng.random() < 0.4]
        Y = [p for p in ids if rng.random() < 0.4]
        assert d(X) <= d(X + Y)
        assert d(X + Y) + d([p for p in X if p in Y]) <= d(X) + d(Y)


@given(seeds, st.sampled_from([ClassId.AB_INITIO, ClassId.EJ_TOY]))
def test_exchange_and_idempotence(seed, cid):
    U = random_universe(cid, stream(seed, "ex"), max_points=6)
    B = whole(U)
    ids = list(U.ids)
    rng = stream(seed, "exs")
    X = [p for p in ids if rng.random() < 0.3]
    clX = core.pregeometry_closure(X, B)
    assert core.pregeometry_closure(list(clX), B) == clX
    for a in ids:
        clXa = core.pregeometry_closure(X + [a], B)
        assert clX <= clXa
        for b in clXa - clX:
            assert a in core.pregeometry_closure(X + [b], B)


@given(seeds, st.sampled_from([ClassId.AB_INITIO, ClassId.EJ_TOY, ClassId.EXP_TOY, ClassId.EJ_DERIV_TOY]))
def test_submodularity_audit_finds_nothing(seed, cid):
    U = random_universe(cid, stream(seed, "sm"), max_points=12)
    assert core.submodularity_audit(whole(U), 200, seed).ok


def test_sigma_additivity_and_supermodularity():
    rng = stream(3, "sigma")
    for _ in range(40):
        U = random_universe(ClassId.EJ_TOY, rng, max_points=10)
        fl = flats(U)
        s = lambda m: U.parts(m).sigma
        for a, b in itertools.combinations(fl[:15], 2):
            assert s(U.close_mask(a | b)) >= s(a) + s(b) - s(a & b)


def test_set_level_counterexample_in_exp_toy():
    from predim.toy_fields import set_level_delta
    # delta(a) = delta(b) = 1 and delta(a, b) = 0; 2a is algebraic over a, e^(2a) over e^a
    U = exp([("a", [1, 0], [1, 0]), ("ea", [0, 1], None),
             ("a2", [2, 0], [2, 0]), ("ea2", [0, 2], None),
             ("b", [1, 1], [0, 1]), ("eb", [1, -1], None)],
            [("a", "ea"), ("a2", "ea2"), ("b", "eb")])
    A = [("a", "ea"), ("b", "eb")]
    Bp = [("a2", "ea2"), ("b", "eb")]
    inter = [("b", "eb")]
    union = A + [("a2", "ea2")]
    lhs = set_level_delta(U, union) + set_level_delta(U, inter)
    rhs = set_level_delta(U, A) + set_level_delta(U, Bp)
    assert (lhs, rhs) == (1, 0)  # submodularity fails for finite sets
    X = generate(U, ["a", "ea", "b", "eb"])
    Y = generate(U, ["a2", "ea2", "b", "eb"])
    m = lambda S: U.mask(S.members)
    join = U.close_mask(m(X) | m(Y))
    assert core.delta_mask(U, join) + core.delta_mask(U, m(X) & m(Y)) <= \
        core.delta_mask(U, m(X)) + core.delta_mask(U, m(Y))


def test_general_lin_vectors_break_sigma_supermodularity():
    # why the batteries use the axis model: x3 has lin a sum of the others but td independent
    U = exp([("x1", [1, 0, 0, 0, 0, 0], [1, 0]), ("y1", [0, 1, 0, 0, 0, 0], None),
             ("x2", [0, 0, 1, 0, 0, 0], [0, 1]), ("y2", [0, 0, 0, 1, 0, 0], None),
             ("x3", [0, 0, 0, 0, 1, 0], [1, 1]), ("y3", [0, 0, 0, 0, 0, 1], None)],
            [("x1", "y1"), ("x2", "y2"), ("x3", "y3")])
    a = U.mask(["x1", "y1", "x2", "y2"])
    b = U.mask(["x3", "y3"])
    s = lambda m: U.parts(m).sigma
    assert s(U.close_mask(a | b)) < s(a) + s(b) - s(a & b)
