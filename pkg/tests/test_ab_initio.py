import itertools

import pytest
from hypothesis import given, strategies as st

from predim.ab_initio import (TernaryStructure, canonical_code, closure_ab, delta_ab,
                              extension_types, free_amalgam_ab, generic_model_builder,
                              in_k0, is_strong_exhaustive, is_strong_flow, isomorphic,
                              min_delta_superset, subset_delta)
from predim.errors import PredimError
from predim.generators import ab_extension, ab_triple, random_ab
from predim.rng import stream

T = TernaryStructure


def test_delta_examples():
    assert delta_ab(T(frozenset())) == 0
    assert delta_ab(T({"a", "b", "c"}, {("a", "b", "c")})) == 2
    assert delta_ab(T({"a", "b"}, {("a", "a", "b"), ("b", "b", "a"), ("a", "b", "a")})) == -1


def test_malformed_triple():
    with pytest.raises(PredimError) as e:
        T({"a"}, {("a", "a", "z")})
    assert e.value.code == "MALFORMED_TRIPLE"


seeds = st.integers(0, 10 ** 6)


@given(seeds)
def test_flow_matches_exhaustive_search(seed):
    rng = stream(seed, "flow")
    A = random_ab(rng, 9)
    els = sorted(A.elements)
    sub = [a for a in els if rng.random() < 0.4]
    best = min(subset_delta(A, set(sub) | set(extra))
               for k in range(len(els) + 1)
               for extra in itertools.combinations(els, k))
    value, Y = min_delta_superset(A, sub)
    assert value == best and subset_delta(A, Y) == best and set(sub) <= Y
    assert is_strong_flow(A, sub) == (is_strong_exhaustive(A, sub) is None)
    # least minimizer: contained in every other minimizer
    for k in range(len(els) + 1):
        for extra in itertools.combinations(els, k):
            S = set(sub) | set(extra)
            if subset_delta(A, S) == best:
                assert Y <= S
    assert closure_ab(A, sub) == Y


def test_free_amalgam_disjoint_union():
    A0 = T(frozenset())
    A1 = T({"a", "b", "c"}, {("a", "b", "c")})
    A2 = T({"x", "y"})
    am = free_amalgam_ab(A0, A1, A2, {}, {})
    assert delta_ab(am.structure) == delta_ab(A1) + delta_ab(A2)
    assert am.b1_strong and am.b2_strong


def test_free_amalgam_absorption():
    rng = stream(1, "abs")
    A0 = T({"a", "b", "c"}, {("a", "b", "c")})
    A2 = ab_extension(A0, rng)
    ident = {a: a for a in A0.elements}
    am = free_amalgam_ab(A0, A0, A2, ident, ident)
    assert isomorphic(am.structure, A2)


def test_free_amalgam_rejects_weak_embedding():
    A0 = T({"a"})
    A1 = T({"a", "b"}, {("a", "b", "b"), ("b", "a", "b")})
    with pytest.raises(PredimError) as e:
        free_amalgam_ab(A0, A1, A1, {"a": "a"}, {"a": "a"})
    assert e.value.code == "NOT_STRONG"


@given(seeds)
def test_free_amalgam_battery(seed):
    A0, A1, A2 = ab_triple(stream(seed, "amal"))
    ident = {a: a for a in A0.elements}
    am = free_amalgam_ab(A0, A1, A2, ident, ident)
    B = am.structure
    assert delta_ab(B) == delta_ab(A1) + delta_ab(A2) - delta_ab(A0)
    assert is_strong_exhaustive(B, A1.elements) is None
    assert is_strong_exhaustive(B, am.embed2.values()) is None
    assert in_k0(B)


def test_canonical_code_is_label_free():
    A = T({"a", "b", "c"}, {("a", "b", "b"), ("c", "a", "a")})
    B = T({"x", "y", "z"}, {("y", "z", "z"), ("x", "y", "y")})
    assert isomorphic(A, B)
    C = T({"x", "y", "z"}, {("y", "z", "z"), ("y", "x", "x")})
    assert not isomorphic(A, C) or canonical_code(A) == canonical_code(C)


def _types_by_brute_force(size_cap):
    """Strong extensions of the empty structure, counted up to relabeling."""
    seen = set()
    for n in range(1, size_cap + 1):
        trips = list(itertools.product(range(n), repeat=3))
        for k in range(n + 1):
            for R in itertools.combinations(trips, k):
                S = T(frozenset(range(n)), frozenset(R))
                if min_delta_superset(S)[0] < 0:
                    continue
                forms = {tuple(sorted(tuple(p[a] for a in r) for r in R))
                         for p in itertools.permutations(range(n))}
                seen.add((n, min(forms)))
    return len(seen)


def test_extension_types_over_empty_base():
    for cap in (1, 2):
        assert len(extension_types((), 0, cap)) == _types_by_brute_force(cap)


def test_builder_cap_one():
    M, audit, _ = generic_model_builder(1, rounds=2, seed=0)
    assert audit.pending_by_level[1] == 0
    assert len(M) > 0 and audit.k0


def test_builder_cap_two_clears_level_two():
    M, audit, b = generic_model_builder(2, rounds=4, seed=3)
    assert audit.pending_by_level[2] == 0
    assert all(x >= y for x, y in zip(audit.history, audit.history[1:]))
    assert not b.verify_records()
    assert in_k0(M)


def test_builder_homogeneity_and_monotone_pending():
    b = generic_model_builder(3, rounds=3, seed=1)[2]
    h = b.history
    assert all(x >= y for x, y in zip(h, h[1:]))
    b.build(5)
    assert not b.pending()
    assert b.homogeneity_check()["ok"]


def test_builder_budget():
    with pytest.raises(PredimError) as e:
        generic_model_builder(3, rounds=2, seed=0, max_elements=10)
    assert e.value.code == "CAP_EXCEEDED"
    with pytest.raises(PredimError):
        generic_model_builder(0, rounds=1)
