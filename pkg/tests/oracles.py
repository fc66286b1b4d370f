"""Independent brute-force routes used to derive and cross-check frozen values."""
import itertools
import random
from fractions import Fraction

import sympy


def frac_rank(rows):
    """Plain Gaussian elimination, kept separate from the package's echelon code."""
    m = [[Fraction(x) for x in r] for r in rows if any(r)]
    rank, col = 0, 0
    ncols = max((len(r) for r in m), default=0)
    while rank < len(m) and col < ncols:
        piv = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][col] != 0:
                f = m[i][col] / m[rank][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
        col += 1
    return rank


def sym_variety(params, xs, ys):
    ps = sympy.symbols(params)
    env = dict(zip(params, ps))
    X = [sympy.sympify(x, locals=env) for x in xs]
    Y = [sympy.sympify(y, locals=env) for y in ys]
    return ps, X, Y


def _point(ps, rng):
    return {p: sympy.Rational(rng.randint(-400, 400), rng.randint(1, 97)) for p in ps}


def jac_rank(ps, funcs, rng, trials=3):
    J = sympy.Matrix([[sympy.diff(f, p) for p in ps] for f in funcs]) if funcs else None
    if J is None or not ps:
        return 0
    best = 0
    for _ in range(trials):
        pt = _point(ps, rng)
        best = max(best, J.subs(pt).rank())
    return best


def rotundity_oracle(params, xs, ys, bound=3, seed=0):
    """Min over all integer k x n matrices of rank k of dim [M](V) - k."""
    rng = random.Random(seed)
    ps, X, Y = sym_variety(params, xs, ys)
    n = len(X)
    worst = None
    rng_vals = range(-bound, bound + 1)
    seen = set()
    for k in range(1, n + 1):
        for entries in itertools.product(rng_vals, repeat=k * n):
            M = [entries[i * n:(i + 1) * n] for i in range(k)]
            if sympy.Matrix(M).rank() != k:
                continue
            key = tuple(map(tuple, sympy.Matrix(M).rref()[0].tolist()))
            if key in seen:
                continue
            seen.add(key)
            us = [sum(a * x for a, x in zip(row, X)) for row in M]
            vs = [sum(a * sympy.log(y) for a, y in zip(row, Y)) for row in M]
            d = jac_rank(ps, us + vs, rng)
            m = d - k
            worst = m if worst is None else min(worst, m)
    if worst is None or worst > 0:
        return "STRONGLY_ROTUND"
    return "ROTUND" if worst == 0 else "FAIL"


def normality_oracle(params, xs, ys, seed=0):
    rng = random.Random(seed)
    ps, X, Y = sym_variety(params, xs, ys)
    n = len(X)
    margins = []
    for k in range(1, n + 1):
        for idx in itertools.combinations(range(n), k):
            d = jac_rank(ps, [X[i] for i in idx] + [Y[i] for i in idx], rng)
            margins.append(d - k)
    if min(margins) < 0:
        return "FAIL"
    return "NORMAL" if min(margins) == 0 else "STRONGLY_NORMAL"
