from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from predim.errors import PredimError
from predim.modular import (QSeries, hecke_dependent, j_oracle, j_q_expansion, modular_polynomial,
                            psi, verify_modular_relation)

# classical level-2 polynomial, frozen
PHI2 = {(3, 0): 1, (0, 3): 1, (2, 2): -1, (2, 1): 1488, (1, 2): 1488,
        (2, 0): -162000, (0, 2): -162000, (1, 1): 40773375,
        (1, 0): 8748000000, (0, 1): 8748000000, (0, 0): -157464000000000}


def test_j_head():
    j = j_q_expansion(3)
    assert j.val == -1
    assert [j[e] for e in (-1, 0, 1, 2)] == [1, 744, 196884, 21493760]


def test_j_matches_the_eisenstein_route():
    a, b = j_q_expansion(20), j_oracle(20)
    assert all(a[e] == b[e] for e in range(-1, 20))


def test_bad_order():
    with pytest.raises(PredimError):
        j_q_expansion(0)


def test_level_one():
    P = modular_polynomial(1)
    assert P.as_dict() == {(1, 0): 1, (0, 1): -1} or P.as_dict() == {(1, 0): -1, (0, 1): 1}
    assert verify_modular_relation(P, 10)


def test_level_two_coefficients():
    P = modular_polynomial(2)
    assert P.as_dict() == PHI2
    assert P.degree() == (3, 3)
    assert verify_modular_relation(P, 30)


def test_perturbation_is_detected():
    P = modular_polynomial(2)
    for i, k in [(0, 0), (1, 1), (3, 0)]:
        assert not verify_modular_relation(P.perturbed(i, k), 30)


@pytest.mark.parametrize("N", [2, 3, 5])
def test_symmetry_and_degree(N):
    P = modular_polynomial(N)
    assert P.is_symmetric()
    assert P.degree() == (psi(N), psi(N))
    assert P.as_dict()[(psi(N), 0)] == 1


@pytest.mark.parametrize("N", [3, 4, 5])
def test_relations_hold(N):
    assert verify_modular_relation(modular_polynomial(N), 12)


def test_psi():
    assert [psi(n) for n in range(1, 7)] == [1, 3, 4, 6, 6, 12]


def test_hecke_labels():
    assert hecke_dependent("h", "h") and not hecke_dependent("h", "g")


small = st.lists(st.integers(-5, 5), min_size=1, max_size=6)


@given(small, small, st.integers(-2, 2), st.integers(-2, 2))
def test_series_product_commutes_and_distributes(a, b, va, vb):
    A, B = QSeries(va, a), QSeries(vb, b)
    AB, BA = A * B, B * A
    top = min(AB.prec, BA.prec)
    assert all(AB[e] == BA[e] for e in range(va + vb, top))
    S = A + B
    for e in range(min(va, vb), min(S.prec, A.prec, B.prec)):
        assert S[e] == A[e] + B[e]


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=6), st.integers(1, 5))
def test_series_inverse(rest, lead):
    A = QSeries(0, [lead] + rest)
    P = A * A.inverse()
    assert P[0] == 1 and all(P[e] == 0 for e in range(1, min(P.prec, len(rest) + 1)))
