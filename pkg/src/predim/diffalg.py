"""Differential rational expressions over Q and the identities behind the j-equation.

Jet variables are (name, k), the k-th derivative of indeterminate `name`
with respect to the ambient derivation.  Named parameters are constants.
Equality is checked two ways: sympy normalization to a reduced fraction,
and exact evaluation at random rational jets.
"""
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

import sympy

from .errors import PredimError
from .rng import stream

MAX_TERMS = 20000


class DiffExpression:
    """Immutable expression tree with arithmetic operators."""
    __slots__ = ("tree",)

    def __init__(self, tree):
        self.tree = tree

    def __add__(self, other):
        return DiffExpression(("+", self.tree, lift(other).tree))

    __radd__ = __add__

    def __sub__(self, other):
        return DiffExpression(("+", self.tree, ("neg", lift(other).tree)))

    def __rsub__(self, other):
        return lift(other) - self

    def __neg__(self):
        return DiffExpression(("neg", self.tree))

    def __mul__(self, other):
        return DiffExpression(("*", self.tree, lift(other).tree))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return DiffExpression(("/", self.tree, lift(other).tree))

    def __rtruediv__(self, other):
        return lift(other) / self

    def __pow__(self, n):
        if not isinstance(n, int):
            raise PredimError("BAD_EXPRESSION", "integer exponents only")
        return DiffExpression(("^", self.tree, n))

    def __repr__(self):
        return f"DiffExpression({to_sympy(self)})"


def lift(x):
    if isinstance(x, DiffExpression):
        return x
    if isinstance(x, (int, Fraction)):
        return DiffExpression(("num", Fraction(x)))
    raise PredimError("BAD_EXPRESSION", f"cannot lift {x!r}")


def const(q):
    return lift(Fraction(q))


def jet(name, k=0):
    return DiffExpression(("jet", name, k))


def param(name):
    return DiffExpression(("par", name))


# -- derivation

def _default_rule(name, k):
    return ("jet", name, k + 1)


def derive(e, rules=None):
    """Formal derivative.  `rules` maps an indeterminate name to k -> derivative of its k-th jet."""
    rules = rules or {}
    memo = {}

    def d(t):
        key = id(t)
        if key in memo:
            return memo[key][1]
        tag = t[0]
        if tag in ("num", "par"):
            out = ("num", Fraction(0))
        elif tag == "jet":
            rule = rules.get(t[1])
            out = lift(rule(t[2])).tree if rule else _default_rule(t[1], t[2])
        elif tag == "+":
            out = ("+",) + tuple(d(a) for a in t[1:])
        elif tag == "neg":
            out = ("neg", d(t[1]))
        elif tag == "*":
            args = t[1:]
            terms = []
            for i in range(len(args)):
                terms.append(("*",) + args[:i] + (d(args[i]),) + args[i + 1:])
            out = ("+",) + tuple(terms)
        elif tag == "/":
            u, v = t[1], t[2]
            out = ("/", ("+", ("*", d(u), v), ("neg", ("*", u, d(v)))), ("^", v, 2))
        elif tag == "^":
            u, n = t[1], t[2]
            out = ("num", Fraction(0)) if n == 0 else ("*", ("num", Fraction(n)), ("^", u, n - 1), d(u))
        else:
            raise PredimError("BAD_EXPRESSION", f"unknown node {tag}")
        memo[key] = (t, out)
        return out

    return DiffExpression(d(lift(e).tree))


def derive_times(e, k, rules=None):
    for _ in range(k):
        e = derive(e, rules)
    return e


def relative(x, rules=None):
    """The derivation d/dx = (1/x') D, as a callable on expressions."""
    dx = derive(x, rules)
    return lambda e: derive(e, rules) / dx


# -- substitution and evaluation

def substitute(e, jets=None, params=None):
    """Replace jet variables (keys (name, k)) and parameters by expressions."""
    jets = {k: lift(v).tree for k, v in (jets or {}).items()}
    params = {k: lift(v).tree for k, v in (params or {}).items()}
    memo = {}

    def go(t):
        key = id(t)
        if key in memo:
            return memo[key][1]
        tag = t[0]
        if tag == "jet":
            out = jets.get((t[1], t[2]), t)
        elif tag == "par":
            out = params.get(t[1], t)
        elif tag == "num":
            out = t
        elif tag == "^":
            out = ("^", go(t[1]), t[2])
        else:
            out = (tag,) + tuple(go(a) for a in t[1:])
        memo[key] = (t, out)
        return out

    return DiffExpression(go(lift(e).tree))


def evaluate(e, jets, params=None):
    """Exact value; raises ZeroDivisionError at a pole."""
    params = params or {}
    memo = {}

    def go(t):
        key = id(t)
        if key in memo:
            return memo[key][1]
        tag = t[0]
        if tag == "num":
            v = t[1]
        elif tag == "jet":
            v = jets[(t[1], t[2])]
        elif tag == "par":
            v = params[t[1]]
        elif tag == "+":
            v = sum((go(a) for a in t[1:]), Fraction(0))
        elif tag == "neg":
            v = -go(t[1])
        elif tag == "*":
            v = Fraction(1)
            for a in t[1:]:
                v *= go(a)
        elif tag == "/":
            v = go(t[1]) / go(t[2])
        elif tag == "^":
            v = go(t[1]) ** t[2]
        memo[key] = (t, v)
        return v

    return go(lift(e).tree)


def symbols_of(e):
    jets, pars = set(), set()
    stack = [lift(e).tree]
    seen = set()
    while stack:
        t = stack.pop()
        if id(t) in seen:
            continue
        seen.add(id(t))
        if t[0] == "jet":
            jets.add((t[1], t[2]))
        elif t[0] == "par":
            pars.add(t[1])
        elif t[0] == "^":
            stack.append(t[1])
        elif t[0] != "num":
            stack.extend(t[1:])
    return jets, pars


# -- normalization

def _sym(name, k=None):
    return sympy.Symbol(name if k is None else f"{name}_{k}")


def to_sympy(e):
    memo = {}

    def go(t):
        key = id(t)
        if key in memo:
            return memo[key][1]
        tag = t[0]
        if tag == "num":
            v = sympy.Rational(t[1].numerator, t[1].denominator)
        elif tag == "jet":
            v = _sym(t[1], t[2])
        elif tag == "par":
            v = _sym(t[1])
        elif tag == "+":
            v = sympy.Add(*[go(a) for a in t[1:]])
        elif tag == "neg":
            v = -go(t[1])
        elif tag == "*":
            v = sympy.Mul(*[go(a) for a in t[1:]])
        elif tag == "/":
            v = go(t[1]) / go(t[2])
        elif tag == "^":
            v = go(t[1]) ** t[2]
        memo[key] = (t, v)
        return v

    return go(lift(e).tree)


@dataclass(frozen=True)
class Normal:
    """Reduced fraction with a monic-leading denominator in graded-lex order."""
    numerator: sympy.Poly
    denominator: sympy.Poly

    @property
    def is_zero(self):
        return self.numerator.is_zero

    def as_expr(self):
        return self.numerator.as_expr() / self.denominator.as_expr()

    def size(self):
        return len(self.numerator.terms()) + len(self.denominator.terms())

    def __eq__(self, other):
        return (self.numerator.as_expr() - other.numerator.as_expr()).expand() == 0 and \
            (self.denominator.as_expr() - other.denominator.as_expr()).expand() == 0

    def __hash__(self):
        return hash(str(self.numerator.as_expr()))


def _gens(ex):
    # fixed jet order: by name, then derivative order
    def key(s):
        base, _, k = s.name.rpartition("_")
        return (base, int(k)) if k.isdigit() and base else (s.name, -1)
    return sorted(ex.free_symbols, key=key)


def normalize(e, max_terms=MAX_TERMS):
    ex = to_sympy(e) if isinstance(e, DiffExpression) else sympy.sympify(e)
    num, den = sympy.fraction(sympy.cancel(sympy.together(ex)))
    gens = _gens(ex) or [sympy.Symbol("_1")]
    P = sympy.Poly(sympy.expand(num), *gens, domain="QQ")
    Q = sympy.Poly(sympy.expand(den), *gens, domain="QQ")
    if len(P.terms()) > max_terms:
        raise PredimError("NORMALIZATION_OVERFLOW", "numerator exceeds the term budget",
                          terms=len(P.terms()), partial=str(P.as_expr())[:400])
    if P.is_zero:
        return Normal(P, sympy.Poly(1, *gens, domain="QQ"))
    lc = Q.coeffs(order="grlex")[0]
    return Normal(P.quo_ground(lc), Q.quo_ground(lc))


def total_derivative(ex, rules=None):
    """Derivation applied to a sympy expression in jet symbols (second route for derive)."""
    rules = rules or {}
    out = 0
    for s in ex.free_symbols:
        base, _, k = s.name.rpartition("_")
        if not (base and k.isdigit()):
            continue
        k = int(k)
        ds = to_sympy(rules[base](k)) if base in rules else _sym(base, k + 1)
        out += sympy.diff(ex, s) * ds
    return out


# -- jet evaluation

def random_jets(e, rng, bound=50, fixed=None):
    jets, pars = symbols_of(e)
    fixed = fixed or {}
    jv = {j: Fraction(rng.randint(-bound, bound), rng.randint(1, bound)) for j in sorted(jets)}
    pv = {p: fixed.get(p, Fraction(rng.randint(-bound, bound), rng.randint(1, bound))) for p in sorted(pars)}
    return jv, pv


def jet_check(e, k=5, seed=0, tag="jet", bound=50):
    """Exact values of e at k random rational jets avoiding poles."""
    rng = stream(seed, tag)
    vals = []
    for _ in range(k):
        for _ in range(100):
            jv, pv = random_jets(e, rng, bound)
            try:
                vals.append(evaluate(e, jv, pv))
                break
            except ZeroDivisionError:
                continue
        else:
            raise PredimError("SINGULAR_SAMPLE_EXHAUSTED", "every jet hit a pole")
    return vals


# -- Schwarzian and the j-equation

def schwarzian(y, with_respect_to=None, rules=None):
    """S y = y'''/y' - 3/2 (y''/y')^2, optionally for the derivation d/dx."""
    y = jet(y) if isinstance(y, str) else lift(y)
    if with_respect_to is None:
        D = lambda e: derive(e, rules)
    else:
        x = jet(with_respect_to) if isinstance(with_respect_to, str) else lift(with_respect_to)
        D = relative(x, rules)
    y1 = D(y)
    y2 = D(y1)
    y3 = D(y2)
    return y3 / y1 - const(Fraction(3, 2)) * (y2 / y1) ** 2


def R(y):
    y = lift(y)
    return (y ** 2 - 1968 * y + 2654208) / (2 * y ** 2 * (y - 1728) ** 2)


def j_equation_F(y="y"):
    y0 = jet(y)
    return schwarzian(y) + R(y0) * jet(y, 1) ** 2


def j_equation_cleared(y="y"):
    """y'^2 y^2 (y-1728)^2 F as a differential polynomial."""
    y0, y1, y2, y3 = (jet(y, k) for k in range(4))
    return (y0 ** 2 * (y0 - 1728) ** 2 * (y1 * y3 - const(Fraction(3, 2)) * y2 ** 2)
            + const(Fraction(1, 2)) * (y0 ** 2 - 1968 * y0 + 2654208) * y1 ** 4)


def j_equation_cleared_product(y="y"):
    y0 = jet(y)
    return jet(y, 1) ** 2 * y0 ** 2 * (y0 - 1728) ** 2 * j_equation_F(y)


def mobius(x, a="a", b="b", c="c"):
    """(a x + b)/(c x + d) with d = (1 + b c)/a, so ad - bc = 1."""
    a, b, c = param(a), param(b), param(c)
    d = (1 + b * c) / a
    return (a * x + b) / (c * x + d), (a, b, c, d)


# -- identity battery

def _chain_rule():
    # j is an unknown function evaluated along h; its jets are J_k = j^(k)(h)
    rules = {"J": lambda k: jet("J", k + 1) * jet("h", 1)}
    f = jet("J")
    lhs = schwarzian(f, rules=rules)
    Sj = jet("J", 3) / jet("J", 1) - const(Fraction(3, 2)) * (jet("J", 2) / jet("J", 1)) ** 2
    rhs = Sj * jet("h", 1) ** 2 + schwarzian("h")
    return lhs, rhs


def _fibre():
    a, b = jet("a"), jet("b")
    lhs = derive(a) ** 2 * schwarzian(b, with_respect_to=a)
    rhs = schwarzian(b) - schwarzian(a)
    return lhs, rhs


def _mobius_zero():
    t = jet("t")
    g, _ = mobius(t)
    return schwarzian(g, rules={"t": lambda k: 1 if k == 0 else 0}), const(0)


def _a3(order, corrected=False):
    x1, y = jet("x"), jet("y")
    x2, (a, b, c, d) = mobius(x1)
    u = c * x1 + d
    d1, d2 = relative(x1), relative(x2)
    if order == 1:
        return d2(y), d1(y) * u ** 2
    lhs = d2(d2(y))
    if corrected:
        return lhs, d1(d1(y)) * u ** 4 + 2 * c * d1(y) * u ** 3
    return lhs, d1(d1(y)) * u ** 2 - 2 * c * d1(y) * u ** 3


def _phi_expr(P, X, Y, dx=0, dy=0):
    """Partial derivative d^dx/dX d^dy/dY of the modular polynomial, evaluated at (X, Y)."""
    terms = []
    for i, k, c in P.coeffs:
        if i < dx or k < dy:
            continue
        f = Fraction(c)
        for m in range(dx):
            f *= i - m
        for m in range(dy):
            f *= k - m
        terms.append(const(f) * X ** (i - dx) * Y ** (k - dy))
    out = const(0)
    for t in terms:
        out = out + t
    return out


def _a4(order, N=2):
    from .modular import modular_polynomial
    P = modular_polynomial(N)
    j1, j2 = jet("j1"), jet("j2")
    phi = _phi_expr(P, j1, j2)
    px, py = _phi_expr(P, j1, j2, 1, 0), _phi_expr(P, j1, j2, 0, 1)
    if order == 1:
        return derive(phi), px * jet("j1", 1) + py * jet("j2", 1)
    pxx, pyy, pxy = (_phi_expr(P, j1, j2, 2, 0), _phi_expr(P, j1, j2, 0, 2), _phi_expr(P, j1, j2, 1, 1))
    rhs = (pxx * jet("j1", 1) ** 2 + pyy * jet("j2", 1) ** 2 + 2 * pxy * jet("j1", 1) * jet("j2", 1)
           + px * jet("j1", 2) + py * jet("j2", 2))
    return derive(derive(phi)), rhs


IDENTITIES = {
    "MOBIUS_ZERO": _mobius_zero,
    "CHAIN_RULE": _chain_rule,
    "FIBRE": _fibre,
    "A3_PRIME_1": lambda: _a3(1),
    "A3_PRIME_2": lambda: _a3(2),
    "A3_PRIME_2_CORRECTED": lambda: _a3(2, corrected=True),
    "A4_PRIME_1": lambda: _a4(1),
    "A4_PRIME_2": lambda: _a4(2),
}
DISPLAYED = ("CHAIN_RULE", "FIBRE", "A3_PRIME_1", "A3_PRIME_2", "A4_PRIME_1", "A4_PRIME_2", "MOBIUS_ZERO")


@dataclass
class IdentityReport:
    name: str
    holds: bool
    residual: str
    residual_terms: int
    jet_values: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def jets_agree(self):
        return all(v == 0 for v in self.jet_values) == self.holds

    def to_json(self):
        return {"name": self.name, "holds": self.holds, "residual": self.residual,
                "residual_terms": self.residual_terms, "jet_checks": len(self.jet_values),
                "jets_zero": all(v == 0 for v in self.jet_values), "jets_agree": self.jets_agree,
                "seconds": round(self.seconds, 3)}


def identity_sides(name):
    if name not in IDENTITIES:
        raise PredimError("UNKNOWN_IDENTITY", f"no identity named {name}", known=sorted(IDENTITIES))
    return IDENTITIES[name]()


def verify_identity(name, jet_checks=5, seed=0, max_terms=MAX_TERMS):
    t0 = time.perf_counter()
    lhs, rhs = identity_sides(name)
    res = lhs - rhs
    nf = normalize(res, max_terms)
    vals = jet_check(res, jet_checks, seed, tag=name) if jet_checks else []
    text = str(nf.as_expr())
    return IdentityReport(name, nf.is_zero, text if len(text) < 400 else text[:400] + "...",
                          len(nf.numerator.terms()) if not nf.is_zero else 0, vals,
                          time.perf_counter() - t0)
