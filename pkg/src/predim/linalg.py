"""Exact linear algebra over the rationals.

Only what the predimension calculus needs: rank, span membership,
coordinates with respect to an echelon basis, and kernels.
"""
from fractions import Fraction


def to_fraction(x):
    """Parse an int, Fraction or "p/q" string into a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot read {x!r} as a rational")


def fraction_str(x):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class Span:
    """A subspace of Q^n kept as rows in reduced echelon form.

    Rows are dicts pivot -> row tuple; adding a vector reduces it first,
    so `add` returns whether the span grew.
    """

    def __init__(self, vectors=()):
        self.rows = {}
        for v in vectors:
            self.add(v)

    @property
    def rank(self):
        return len(self.rows)

    def reduce(self, v):
        v = list(v)
        for p, row in self.rows.items():
            if p < len(v) and v[p]:
                c = v[p]
                for i in range(len(v)):
                    if row[i]:
                        v[i] -= c * row[i]
        return v

    def contains(self, v):
        return not any(self.reduce(v))

    def add(self, v):
        r = self.reduce(v)
        piv = next((i for i, x in enumerate(r) if x), None)
        if piv is None:
            return False
        inv = 1 / Fraction(r[piv])
        r = [x * inv for x in r]
        for p, row in list(self.rows.items()):
            if row[piv]:
                c = row[piv]
                self.rows[p] = tuple(a - c * b for a, b in zip(row, r))
        self.rows[piv] = tuple(r)
        return True

    def copy(self):
        s = Span()
        s.rows = dict(self.rows)
        return s


def rank(vectors):
    return Span(vectors).rank


def rref(rows):
    """Reduced row echelon form; returns (rows, pivot columns)."""
    s = Span(rows)
    piv = sorted(s.rows)
    return [s.rows[p] for p in piv], piv


def kernel(rows, ncols):
    """Basis of {x : rows . x = 0}."""
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(ncols)) for i in range(ncols)]
    red, piv = rref(rows)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for r, p in zip(red, piv):
            x[p] = -r[f]
        basis.append(tuple(x))
    return basis


def solve_in_basis(basis, v):
    """Coefficients c with sum c_i basis_i = v, or None if v is outside the span."""
    n = len(basis)
    if n == 0:
        return [] if not any(v) else None
    dim = len(v)
    # columns are basis vectors; augmented system
    rows = [[Fraction(basis[i][k]) for i in range(n)] + [Fraction(v[k])] for k in range(dim)]
    red, piv = rref(rows)
    if n in piv:
        return None
    coeffs = [Fraction(0)] * n
    for r, p in zip(red, piv):
        coeffs[p] = r[n]
    return coeffs


def matmul(a, b):
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)] for row in a]
