import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from oracles import jac_rank, normality_oracle, rotundity_oracle, sym_variety
from predim import expr as E
from predim.acceptance import CATALOGUE
from predim.errors import PredimError
from predim.varieties import (Mode, Role, cut_to_dimension, dim_variety, intersect_generic_hyperplane,
                              is_free, is_normal, is_rotund, m_image, m_image_rank, pairs_variety,
                              project, rabinovich_transform, samples, variety)


def test_dimension_examples():
    assert dim_variety(pairs_variety(["a", "b"], ["a"], ["b"])) == 2
    assert dim_variety(pairs_variety(["t"], ["t"], ["(* t t)"])) == 1
    W = variety(["t", "s"], ["(+ t s)", "(* t s)", "(- t s)", "1"], ["X", "Y", "X", "Y"])
    assert dim_variety(W) == 2


def test_three_coordinate_example_against_sympy():
    ps, X, Y = sym_variety(["t", "s"], ["t + s", "t - s"], ["t*s", "1"])
    V = pairs_variety(["t", "s"], ["(+ t s)", "(- t s)"], ["(* t s)", "1"])
    assert dim_variety(V) == 2 == jac_rank(ps, X + Y[:1], random.Random(0))


def test_project_examples():
    V = pairs_variety(["t", "s"], ["t", "s"], ["(* t t)", "(^ s 3)"])
    assert project(V, [0, 1]) == V
    P = project(V, [0])
    assert [E.to_str(c) for c in P.components] == ["t", E.to_str(E.parse("(* t t)"))]
    with pytest.raises(PredimError) as e:
        project(V, [1, 0])
    assert e.value.code == "BAD_INDEX"


def test_m_image_examples():
    V = pairs_variety(["t", "s"], ["t", "s"], ["(* t t)", "s"])
    I = m_image(V, [[1, 0], [0, 1]])
    pt = {"t": Fraction(2), "s": Fraction(3)}
    assert [E.evaluate(c, pt) for c in I.components] == [E.evaluate(c, pt) for c in V.components]
    W = m_image(V, [[1, 1]])
    pt = {"t": Fraction(2), "s": Fraction(3)}
    assert [E.evaluate(c, pt) for c in W.components] == [5, 12]
    with pytest.raises(PredimError) as e:
        m_image(pairs_variety(["t"], ["t"], ["0"]), [[1]])
    assert e.value.code == "NEGATIVE_BASE"


rows = st.lists(st.integers(-2, 2), min_size=2, max_size=2)


@given(st.lists(rows, min_size=1, max_size=2), st.integers(0, 100))
@settings(max_examples=25)
def test_log_derivative_rank_matches_substitution(M, seed):
    V = pairs_variety(["t", "s", "u"], ["(+ t u)", "s"], ["(* t s)", "(+ u 2)"])
    if not any(any(r) for r in M):
        return
    direct = dim_variety(m_image(V, M), seed)
    log = max(m_image_rank(s, V, M) for s in samples(V, seed, 3))
    assert direct == log


def test_rotundity_examples():
    assert is_rotund(pairs_variety(["t", "s"], ["t"], ["s"])).verdict == "STRONGLY_ROTUND"
    assert is_rotund(pairs_variety(["t"], ["7"], ["t"])).verdict == "ROTUND"
    # (t, 1): any nonzero M sends it to a curve, so the image never drops below k
    assert is_rotund(pairs_variety(["t"], ["t"], ["1"])).verdict == "ROTUND"
    bad = is_rotund(pairs_variety(["t", "s"], ["t", "(- t)"], ["s", "(/ 1 s)"]))
    assert bad.verdict == "FAIL" and bad.witness in (((1, 1),), ((-1, -1),))


def test_normality_examples():
    assert is_normal(pairs_variety(["t"], ["t"], ["(* t t)"])).verdict == "NORMAL"
    assert is_normal(pairs_variety(["t", "s"], ["t"], ["s"])).verdict == "STRONGLY_NORMAL"
    V = pairs_variety(["t", "s", "u"], ["t", "s"], ["(* t t)", "u"])
    v = is_normal(V)
    assert v.verdict == "NORMAL" and (0,) in v.strong_failures
    assert v.dims[(0,)] == 1 and v.dims[(1,)] == 2 and v.dims[(0, 1)] == 3


def test_normal_mode_must_match_shape():
    with pytest.raises(PredimError):
        is_normal(pairs_variety(["t"], ["t"], ["t"]), Mode.DERIV)


def test_freeness_examples():
    assert is_free(pairs_variety(["t", "s"], ["t", "s"], ["t", "t"])).N == 1
    assert is_free(pairs_variety(["t", "s", "a", "b"], ["t", "s"], ["a", "b"])).verdict == "FREE"


def test_freeness_catches_a_level_two_relation():
    # y1 = j(tau), y2 = j(2 tau) parametrized on the level-2 modular curve by t:
    # with j = (t+16)^3 / t and j(2 tau) = (t+256)^3 / t^2
    V = pairs_variety(["t", "s", "u"], ["s", "u"],
                      ["(/ (^ (+ t 16) 3) t)", "(/ (^ (+ t 256) 3) (* t t))"])
    f1 = is_free(V, modular_bound=1)
    f2 = is_free(V, modular_bound=2)
    assert f1.verdict == "FREE"
    assert f2.verdict == "NOT_FREE" and f2.N == 2 and f2.pair == (0, 1)


def test_fibre_flag():
    V = pairs_variety(["t"], ["t"], ["3"])
    assert is_free(V, a_level=[3]).reason == "FIBRE"


def test_hyperplane_cuts_one_dimension():
    V = pairs_variety(["t", "s"], ["t"], ["s"])
    W, p = intersect_generic_hyperplane(V, seed=1)
    assert dim_variety(W) == 1 and len(p) == 2
    assert is_normal(W).verdict in ("NORMAL", "STRONGLY_NORMAL")
    for b in W.base_points:
        vals = [E.evaluate(c, dict(zip(W.params, b))) for c in W.components]
        assert sum(c * v for c, v in zip(p, vals)) == 1


def test_cut_to_dimension_keeps_normality():
    V = pairs_variety(["t", "s", "u", "v"], ["t", "(+ s u)"], ["(* s v)", "u"])
    W, cs = cut_to_dimension(V, 2, seed=2)
    assert dim_variety(W) == 2 and len(cs) == 2
    assert is_normal(W).verdict != "FAIL"


def test_rabinovich_examples():
    V = pairs_variety(["t"], ["t"], ["(* t t)"])
    W = rabinovich_transform(V, "y0")
    assert W.n == 2
    x_new = W.components[W.coords(Role.X)[1]]
    assert E.evaluate(x_new, {"t": Fraction(3), "u": Fraction(1)}) == Fraction(1, 9)
    assert is_normal(W).verdict != "FAIL"
    one = rabinovich_transform(V, "1")
    assert E.evaluate(one.components[one.coords(Role.X)[1]], {"t": Fraction(5), "u": Fraction(1)}) == 1
    with pytest.raises(PredimError) as e:
        rabinovich_transform(V, "(- y0 (* x0 x0))")
    assert e.value.code == "F_VANISHES"


INFIX = {"(- t)": "-t", "(/ 1 s)": "1/s", "(^ t 2)": "t**2", "(* 2 t)": "2*t",
         "(^ s 2)": "s**2", "(+ t 1)": "t + 1", "(* 2 s)": "2*s"}


@pytest.mark.parametrize("entry", CATALOGUE, ids=[c[0] for c in CATALOGUE])
def test_catalogue_against_the_sympy_oracle(entry):
    name, params, xs, ys, rot, nor = entry
    V = pairs_variety(params, xs, ys)
    assert is_rotund(V, bound=3).verdict == rot
    assert is_normal(V).verdict == nor
    ix = [INFIX.get(x, x) for x in xs]
    iy = [INFIX.get(y, y) for y in ys]
    if len(xs) <= 2:
        assert rotundity_oracle(params, ix, iy, bound=2) == rot
    assert normality_oracle(params, ix, iy) == nor


def test_verdicts_ignore_pair_order_and_reparametrization():
    V = pairs_variety(["t", "s", "u"], ["t", "s"], ["(* t t)", "u"])
    swapped = pairs_variety(["t", "s", "u"], ["s", "t"], ["u", "(* t t)"])
    repar = pairs_variety(["a", "s", "u"], ["(+ a 1)", "s"], ["(^ (+ a 1) 2)", "u"])
    for W in (swapped, repar):
        assert is_normal(W).verdict == is_normal(V).verdict
        assert is_rotund(W, bound=2).verdict == is_rotund(V, bound=2).verdict
        assert dim_variety(W) == dim_variety(V)
