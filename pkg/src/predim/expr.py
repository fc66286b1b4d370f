"""Prefix expression grammar for variety components.

    expr := number | name | "(" op expr* ")"
    op   := + | - | * | / | ^        (^ takes an integer literal exponent)

Numbers are integers or "p/q" rationals.  Trees are plain tuples:
("num", Fraction), ("var", name) or (op, child, ...).
"""
import re
from fractions import Fraction

from .errors import PredimError

_TOKEN = re.compile(r"\(|\)|[^\s()]+")
_NUM = re.compile(r"^-?\d+(/\d+)?$")
OPS = {"+", "-", "*", "/", "^"}


def parse(text):
    tokens = _TOKEN.findall(text)
    if not tokens:
        raise PredimError("BAD_EXPRESSION", "empty expression")
    tree, pos = _parse(tokens, 0)
    if pos != len(tokens):
        raise PredimError("BAD_EXPRESSION", f"trailing tokens in {text!r}")
    return tree


def _parse(tokens, i):
    tok = tokens[i]
    if tok == "(":
        if i + 1 >= len(tokens) or tokens[i + 1] not in OPS:
            raise PredimError("BAD_EXPRESSION", "expected an operator after '('")
        op = tokens[i + 1]
        args, i = [], i + 2
        while i < len(tokens) and tokens[i] != ")":
            a, i = _parse(tokens, i)
            args.append(a)
        if i >= len(tokens):
            raise PredimError("BAD_EXPRESSION", "unbalanced parentheses")
        _check_arity(op, args)
        return (op, *args), i + 1
    if tok == ")":
        raise PredimError("BAD_EXPRESSION", "unexpected ')'")
    if _NUM.match(tok):
        return ("num", Fraction(tok)), i + 1
    return ("var", tok), i + 1


def _check_arity(op, args):
    if op in "+*" and not args:
        raise PredimError("BAD_EXPRESSION", f"{op} needs arguments")
    if op == "-" and len(args) not in (1, 2):
        raise PredimError("BAD_EXPRESSION", "- takes one or two arguments")
    if op == "/" and len(args) != 2:
        raise PredimError("BAD_EXPRESSION", "/ takes two arguments")
    if op == "^" and (len(args) != 2 or args[1][0] != "num" or args[1][1].denominator != 1):
        raise PredimError("BAD_EXPRESSION", "^ takes a base and an integer literal")


def to_str(e):
    if e[0] == "num":
        v = e[1]
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if e[0] == "var":
        return e[1]
    return "(" + " ".join([e[0]] + [to_str(a) for a in e[1:]]) + ")"


def num(v):
    return ("num", Fraction(v))


def var(name):
    return ("var", name)


def add(*args):
    return ("+", *args)


def sub(a, b):
    return ("-", a, b)


def mul(*args):
    return ("*", *args)


def div(a, b):
    return ("/", a, b)


def power(a, k):
    return ("^", a, num(int(k)))


def variables(e, acc=None):
    acc = set() if acc is None else acc
    if e[0] == "var":
        acc.add(e[1])
    elif e[0] != "num":
        for a in e[1:]:
            variables(a, acc)
    return acc


def substitute(e, mapping):
    if e[0] == "var":
        return mapping.get(e[1], e)
    if e[0] == "num":
        return e
    if e[0] == "^":
        return ("^", substitute(e[1], mapping), e[2])
    return (e[0], *(substitute(a, mapping) for a in e[1:]))


def evaluate(e, values):
    """Exact value; ZeroDivisionError on a pole."""
    op = e[0]
    if op == "num":
        return e[1]
    if op == "var":
        return values[e[1]]
    if op == "^":
        base, k = evaluate(e[1], values), int(e[2][1])
        if k < 0 and base == 0:
            raise ZeroDivisionError
        return base ** k
    vals = [evaluate(a, values) for a in e[1:]]
    if op == "+":
        return sum(vals, Fraction(0))
    if op == "-":
        return -vals[0] if len(vals) == 1 else vals[0] - vals[1]
    if op == "*":
        out = Fraction(1)
        for v in vals:
            out *= v
        return out
    return vals[0] / vals[1]


def evaluate_grad(e, values, names):
    """Value and gradient with respect to `names` (forward mode)."""
    idx = {n: i for i, n in enumerate(names)}
    zero = (Fraction(0),) * len(names)
    memo = {}

    def go(e):
        key = id(e)
        if key in memo:
            return memo[key]
        op = e[0]
        if op == "num":
            out = (e[1], zero)
        elif op == "var":
            g = list(zero)
            if e[1] in idx:
                g[idx[e[1]]] = Fraction(1)
            out = (values[e[1]], tuple(g))
        elif op == "+":
            parts = [go(a) for a in e[1:]]
            out = (sum((p[0] for p in parts), Fraction(0)),
                   tuple(sum(col, Fraction(0)) for col in zip(*(p[1] for p in parts))))
        elif op == "-":
            if len(e) == 2:
                v, g = go(e[1])
                out = (-v, tuple(-x for x in g))
            else:
                (v1, g1), (v2, g2) = go(e[1]), go(e[2])
                out = (v1 - v2, tuple(a - b for a, b in zip(g1, g2)))
        elif op == "*":
            v, g = go(e[1])
            for a in e[2:]:
                v2, g2 = go(a)
                g = tuple(x * v2 + v * y for x, y in zip(g, g2))
                v = v * v2
            out = (v, g)
        elif op == "/":
            (v1, g1), (v2, g2) = go(e[1]), go(e[2])
            if v2 == 0:
                raise ZeroDivisionError
            out = (v1 / v2, tuple((a * v2 - v1 * b) / (v2 * v2) for a, b in zip(g1, g2)))
        else:
            v, g = go(e[1])
            k = int(e[2][1])
            if k == 0:
                out = (Fraction(1), zero)
            else:
                if v == 0 and k < 1:
                    raise ZeroDivisionError
                c = k * v ** (k - 1)
                out = (v ** k, tuple(c * x for x in g))
        memo[key] = out
        return out

    return go(e)


def to_sympy(e, symbols):
    """Sympy expression; used only by test oracles."""
    import sympy
    op = e[0]
    if op == "num":
        return sympy.Rational(e[1].numerator, e[1].denominator)
    if op == "var":
        return symbols[e[1]]
    args = [to_sympy(a, symbols) for a in e[1:]]
    if op == "+":
        return sympy.Add(*args)
    if op == "-":
        return -args[0] if len(args) == 1 else args[0] - args[1]
    if op == "*":
        return sympy.Mul(*args)
    if op == "/":
        return args[0] / args[1]
    return args[0] ** args[1]
