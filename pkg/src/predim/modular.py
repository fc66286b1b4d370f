"""q-expansions of j and the classical modular polynomials Phi_N.

Phi_N(X, j) is the product of X - j(g tau) over the psi(N) cosets
g = (a b; 0 d), ad = N, 0 <= b < d, gcd(a, b, d) = 1.  Rather than expanding
with roots of unity we take power sums of the conjugates: the sum over b of
zeta_d^(b n) restricted to gcd(b, gcd(a, d)) = 1 is an integer (Moebius
inversion), so everything stays in Z((q^(1/N))).  Newton's identities turn
power sums into elementary symmetric functions, and each of those is read
off as a polynomial in j by peeling leading terms.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

from .errors import PredimError


class QSeries:
    """Truncated Laurent series in q^(1/ram).

    coeffs[i] is the coefficient of q^((val + i) / ram); every term with
    exponent below val + len(coeffs) (in units of 1/ram) is known.
    """

    def __init__(self, val, coeffs, ram=1):
        self.val = val
        self.coeffs = list(coeffs)
        self.ram = ram

    @property
    def prec(self):
        return self.val + len(self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, e):
        i = e - self.val
        if e >= self.prec:
            raise IndexError(f"q^{e}/{self.ram} is beyond the truncation")
        return self.coeffs[i] if i >= 0 else 0

    def terms(self):
        return {self.val + i: c for i, c in enumerate(self.coeffs) if c}

    def _align(self, other):
        if self.ram != other.ram:
            r = self.ram * other.ram // gcd(self.ram, other.ram)
            return self.ramify(r), other.ramify(r)
        return self, other

    def ramify(self, r):
        if r % self.ram:
            raise ValueError("can only refine the ramification")
        k = r // self.ram
        out = [0] * (len(self.coeffs) * k)
        for i, c in enumerate(self.coeffs):
            out[i * k] = c
        return QSeries(self.val * k, out, r)

    def __add__(self, other):
        if not isinstance(other, QSeries):
            other = QSeries(0, [other] + [0] * max(self.prec, 1), self.ram)
        a, b = self._align(other)
        val, prec = min(a.val, b.val), min(a.prec, b.prec)
        return QSeries(val, [a[e] + b[e] for e in range(val, prec)], a.ram)

    __radd__ = __add__

    def __neg__(self):
        return QSeries(self.val, [-c for c in self.coeffs], self.ram)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            return QSeries(self.val, [c * other for c in self.coeffs], self.ram)
        a, b = self._align(other)
        n = min(len(a), len(b))
        out = [0] * n
        for i, x in enumerate(a.coeffs[:n]):
            if x:
                for k, y in enumerate(b.coeffs[: n - i]):
                    out[i + k] += x * y
        return QSeries(a.val + b.val, out, a.ram)

    __rmul__ = __mul__

    def normalized(self):
        """Drop leading zeros (loses nothing: precision is kept)."""
        i = 0
        while i < len(self.coeffs) and self.coeffs[i] == 0:
            i += 1
        return QSeries(self.val + i, self.coeffs[i:], self.ram)

    def inverse(self):
        s = self.normalized()
        if not s.coeffs:
            raise ZeroDivisionError("series is zero to its precision")
        lead = s.coeffs[0]
        n = len(s.coeffs)
        inv_lead = Fraction(1, 1) / lead
        out = [0] * n
        out[0] = _tidy(inv_lead)
        for k in range(1, n):
            acc = sum(s.coeffs[i] * out[k - i] for i in range(1, k + 1))
            out[k] = _tidy(-acc * inv_lead)
        return QSeries(-s.val, out, s.ram)

    def __truediv__(self, other):
        if isinstance(other, QSeries):
            return self * other.inverse()
        return QSeries(self.val, [_tidy(Fraction(c) / other) for c in self.coeffs], self.ram)

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        out = QSeries(0, [1] + [0] * (len(self.coeffs) - 1), self.ram)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def subs_power(self, k):
        """q -> q^k."""
        out = [0] * (len(self.coeffs) * k)
        for i, c in enumerate(self.coeffs):
            out[i * k] = c
        return QSeries(self.val * k, out, self.ram)

    def truncate(self, prec):
        return QSeries(self.val, self.coeffs[: max(0, prec - self.val)], self.ram)

    def is_zero(self):
        return not any(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        a, b = self._align(other)
        prec = min(a.prec, b.prec)
        lo = min(a.val, b.val)
        return all(a[e] == b[e] for e in range(lo, prec))

    def __repr__(self):
        shown = ", ".join(f"{c}q^{e}" + (f"/{self.ram}" if self.ram > 1 else "")
                          for e, c in list(self.terms().items())[:6])
        return f"QSeries({shown} + O(q^{self.prec}))"


def _tidy(x):
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


def _sigma(k, n):
    return sum(d ** k for d in range(1, n + 1) if n % d == 0)


def eisenstein(weight, length):
    """E_4 or E_6 as a power series with `length` known coefficients."""
    c = {4: 240, 6: -504}[weight]
    return QSeries(0, [1] + [c * _sigma(weight - 1, n) for n in range(1, length)])


def delta_series(length):
    """Delta = q prod (1 - q^n)^24."""
    prod = [1] + [0] * (length - 1)
    for n in range(1, length):
        for _ in range(24):
            for i in range(length - 1, n - 1, -1):
                prod[i] -= prod[i - n]
    return QSeries(1, prod[: length - 1] if length > 1 else [])


@lru_cache(maxsize=None)
def _j_coeffs(length):
    e4 = eisenstein(4, length + 1)
    j = (e4 * e4 * e4) * delta_series(length + 2).inverse()
    return tuple(j.coeffs[:length])


def j_q_expansion(T):
    """j(q) with every coefficient of q^-1 .. q^(T-1) (T + 1 terms)."""
    if T < 1:
        raise PredimError("BAD_INPUT", "order must be at least 1")
    return QSeries(-1, _j_coeffs(T + 1))


def j_oracle(T):
    """Independent route: j = 1728 E4^3 / (E4^3 - E6^2)."""
    e4, e6 = eisenstein(4, T + 3), eisenstein(6, T + 3)
    num = e4 * e4 * e4
    den = num - e6 * e6
    return (num * 1728 / den).truncate(T)


# -- modular polynomials

@dataclass(frozen=True)
class ModularPolynomial:
    N: int
    coeffs: tuple  # ((i, k, c), ...) meaning c X^i Y^k

    def as_dict(self):
        return {(i, k): c for i, k, c in self.coeffs}

    def __call__(self, x, y):
        return sum(c * x ** i * y ** k for i, k, c in self.coeffs)

    def degree(self):
        return max((i for i, _, _ in self.coeffs), default=0), max((k for _, k, _ in self.coeffs), default=0)

    def is_symmetric(self):
        d = self.as_dict()
        return all(d.get((k, i)) == c for (i, k), c in d.items())

    def diagonal(self):
        """Phi_N(X, X) as {power: coefficient}."""
        out = {}
        for i, k, c in self.coeffs:
            out[i + k] = out.get(i + k, 0) + c
        return {e: c for e, c in out.items() if c}

    def perturbed(self, i, k, by=1):
        d = self.as_dict()
        d[(i, k)] = d.get((i, k), 0) + by
        return ModularPolynomial(self.N, _pack(d))

    def to_text(self):
        terms = []
        for i, k, c in sorted(self.coeffs, key=lambda t: (-(t[0] + t[1]), -t[0])):
            mono = "*".join(p for p in ((f"X^{i}" if i > 1 else "X" if i else ""),
                                        (f"Y^{k}" if k > 1 else "Y" if k else "")) if p)
            if not mono:
                terms.append(str(c))
            elif c == 1:
                terms.append(mono)
            elif c == -1:
                terms.append("-" + mono)
            else:
                terms.append(f"{c}*{mono}")
        return " + ".join(terms).replace("+ -", "- ")

    def to_json(self):
        return {"N": self.N, "terms": [[i, k, str(c)] for i, k, c in self.coeffs]}


def _pack(d):
    return tuple(sorted((i, k, c) for (i, k), c in d.items() if c))


def psi(N):
    out, n, p = N, N, 2
    while p * p <= n:
        if n % p == 0:
            out = out // p * (p + 1)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out = out // n * (n + 1)
    return out


def _mobius(n):
    out, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            out = -out
        p += 1
    return -out if n > 1 else out


def _coset_power_sum(jm, N):
    """Sum over cosets g of (j^m)(g tau), as a series in q^(1/N)."""
    out = {}
    for a in range(1, N + 1):
        if N % a:
            continue
        d = N // a
        g = gcd(a, d)
        for n, c in jm.terms().items():
            weight = sum(_mobius(e) * (d // e) for e in range(1, g + 1)
                         if g % e == 0 and n % (d // e) == 0)
            if weight:
                out[a * a * n] = out.get(a * a * n, 0) + c * weight
    return out


def modular_polynomial(N, T=8):
    """Phi_N for 1 <= N <= 5 with integer coefficients.

    T is the number of positive q-exponents on which the expansion of each
    symmetric function in j is checked; it is raised automatically when the
    peeling does not close up.
    """
    if not 1 <= N <= 5:
        raise PredimError("BAD_INPUT", "levels 1..5 only")
    for attempt in range(4):
        try:
            return _modular_polynomial(N, T * (attempt + 1))
        except PredimError as err:
            if err.code != "ORDER_TOO_SMALL":
                raise
    raise PredimError("ORDER_TOO_SMALL", f"Phi_{N} did not stabilize")


@lru_cache(maxsize=None)
def _modular_polynomial(N, T):
    n_conj = psi(N)
    # exponents are in units of q^(1/N); `cut` is where results are trusted,
    # `high` leaves room for the poles met in Newton's identities
    cut = N * (T + 1)
    high = cut + 2 * N * N * n_conj
    j = QSeries(-1, _j_coeffs(high + n_conj + 2))
    jm = [None, j]
    for m in range(2, n_conj + 1):
        jm.append(jm[-1] * j)
    p = [None]
    for m in range(1, n_conj + 1):
        terms = _coset_power_sum(jm[m], N)
        p.append({e: c for e, c in terms.items() if e < high})
    e = [{0: Fraction(1)}]
    for i in range(1, n_conj + 1):
        acc = {}
        for k in range(1, i + 1):
            sign = 1 if k % 2 else -1
            for x, cx in e[i - k].items():
                for y, cy in p[k].items():
                    if x + y < high:
                        acc[x + y] = acc.get(x + y, 0) + sign * cx * cy
        e.append({x: c / i for x, c in acc.items() if c})
    e = [{x: c for x, c in ei.items() if x < cut} for ei in e]
    coeffs = {}
    for i in range(1, n_conj + 1):
        poly = _peel(e[i], N, cut, jm, T)
        sign = -1 if i % 2 else 1
        for k, c in poly.items():
            coeffs[(n_conj - i, k)] = sign * c
    coeffs[(n_conj, 0)] = coeffs.get((n_conj, 0), 0) + 1
    return ModularPolynomial(N, _pack(coeffs))


def _peel(series, N, cut, jm, T):
    """Write a q^(1/N)-series as a polynomial in j (integer exponents only)."""
    rest = {x: c for x, c in series.items() if c}
    if any(x % N for x in rest):
        raise PredimError("NONINTEGER_RESULT", "fractional exponent survived the coset sum")
    rest = {x // N: c for x, c in rest.items()}
    top = cut // N
    poly = {}
    while True:
        neg = [x for x in rest if x < 0 and rest[x]]
        if not neg:
            break
        v = -min(neg)
        c = rest[-v]
        if Fraction(c).denominator != 1:
            raise PredimError("NONINTEGER_RESULT", f"coefficient {c} is not integral")
        c = int(c)
        poly[v] = c
        for x, cj in jm[v].terms().items():
            if x < top:
                rest[x] = rest.get(x, 0) - c * cj
        rest = {x: cx for x, cx in rest.items() if cx}
        if v > len(jm):
            raise PredimError("ORDER_TOO_SMALL", "pole order exceeds available powers")
    const = rest.pop(0, 0)
    if Fraction(const).denominator != 1:
        raise PredimError("NONINTEGER_RESULT", f"constant {const} is not integral")
    if const:
        poly[0] = int(const)
    if any(rest.get(x) for x in range(1, min(top, T + 1))):
        raise PredimError("ORDER_TOO_SMALL", "positive-order residue after peeling")
    return poly


def verify_modular_relation(P, T):
    """P(j(q), j(q^N)) vanishes for every exponent below T."""
    dx, dy = P.degree()
    length = T + dx + P.N * dy + 2
    j = QSeries(-1, _j_coeffs(length))
    jN = j.subs_power(P.N)
    xs = [QSeries(0, [1] + [0] * (length + P.N * length))]
    for _ in range(dx):
        xs.append(xs[-1] * j)
    ys = [QSeries(0, [1] + [0] * (P.N * length + length))]
    for _ in range(dy):
        ys.append(ys[-1] * jN)
    total = None
    for i, k, c in P.coeffs:
        term = xs[i] * ys[k] * c
        total = term if total is None else total + term
    if total is None:
        return True
    if total.prec < T:
        raise PredimError("ORDER_TOO_SMALL", "not enough precision for the requested order")
    return all(total[e] == 0 for e in range(total.val, T))


def hecke_dependent(label_a, label_b):
    return label_a == label_b
