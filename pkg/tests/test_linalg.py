from fractions import Fraction

from hypothesis import given, strategies as st

from oracles import frac_rank
from predim.linalg import Span, kernel, rank, rref, solve_in_basis, to_fraction, fraction_str

small = st.integers(-4, 4)
vectors = st.lists(st.lists(small, min_size=3, max_size=3), max_size=6)


@given(vectors)
def test_rank_matches_plain_elimination(rows):
    assert rank(rows) == frac_rank(rows)


@given(vectors)
def test_span_add_reports_growth(rows):
    s = Span()
    grew = [s.add(r) for r in rows]
    assert sum(grew) == s.rank == frac_rank(rows)


@given(vectors)
def test_rref_is_idempotent_and_pivoted(rows):
    red, piv = rref(rows)
    assert rref(red)[0] == red
    for r, p in zip(red, piv):
        assert r[p] == 1 and all(x == 0 for x in r[:p])


@given(vectors)
def test_kernel_vectors_are_annihilated(rows):
    K = kernel(rows, 3)
    assert len(K) == 3 - frac_rank(rows)
    for k in K:
        for r in rows:
            assert sum(Fraction(a) * b for a, b in zip(r, k)) == 0


@given(st.lists(small, min_size=3, max_size=3), st.lists(small, min_size=3, max_size=3),
       small, small)
def test_solve_in_basis_recovers_coefficients(u, v, a, b):
    if frac_rank([u, v]) < 2:
        return
    w = [a * x + b * y for x, y in zip(u, v)]
    assert solve_in_basis([u, v], w) == [a, b]


def test_solve_outside_span_is_none():
    assert solve_in_basis([[1, 0, 0]], [0, 1, 0]) is None


def test_fraction_strings_round_trip():
    for x in (Fraction(3, 7), Fraction(-5), Fraction(0)):
        assert to_fraction(fraction_str(x)) == x
    assert to_fraction("2/4") == Fraction(1, 2)
