"""Exact polynomial arithmetic over the rationals.

Sparse bivariate polynomials (:class:`BiPoly`), dense univariate polynomials
(:class:`UniPoly`), a small expression parser, GCDs, Buchberger's algorithm
with cofactor tracking, and the gradient-ideal certificate

    M(f) = a * f_x + b * f_y

used to divide two-forms by ``df``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "BiPoly",
    "UniPoly",
    "ParseError",
    "UnsupportedInput",
    "ResourceLimit",
    "GradientCertificate",
    "parse_polynomial",
    "poly_gcd",
    "groebner_basis",
    "reduce_with_cofactors",
    "standard_monomials",
    "multiplication_matrix",
    "charpoly",
    "minimal_polynomial",
    "gradient_certificate",
    "X",
    "Y",
]


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class UnsupportedInput(ValueError):
    """Raised for inputs outside the supported class (e.g. non-isolated critical points)."""


class ResourceLimit(RuntimeError):
    """Raised when Buchberger's algorithm exceeds its pair budget."""


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, float):
        return Fraction(c).limit_denominator(10**12) if c != int(c) else Fraction(int(c))
    return Fraction(c)


# ---------------------------------------------------------------------------
# monomial orders
# ---------------------------------------------------------------------------

def _key_grevlex(m):
    # two variables, x > y: grevlex ties are broken by the smaller y exponent
    return (m[0] + m[1], -m[1])


def _key_lex(m):
    return m


ORDERS: dict[str, Callable] = {
    "grevlex": _key_grevlex,
    "grlex": _key_grevlex,
    "lex": _key_lex,
}


def _divides(a, b) -> bool:
    return a[0] <= b[0] and a[1] <= b[1]


# ---------------------------------------------------------------------------
# univariate
# ---------------------------------------------------------------------------

class UniPoly:
    """Dense univariate polynomial with rational coefficients, lowest degree first."""

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs: Iterable = ()):
        cs = [_frac(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)
        self._hash = None

    @classmethod
    def from_roots(cls, roots) -> "UniPoly":
        p = cls([1])
        for r in roots:
            p = p * cls([-_frac(r), 1])
        return p

    @classmethod
    def monomial(cls, n: int, c=1) -> "UniPoly":
        return cls([0] * n + [c])

    # -- basics --
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = UniPoly([other])
        return isinstance(other, UniPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("UniPoly", self.coeffs))
        return self._hash

    def __repr__(self):
        return f"UniPoly({self.to_string()!r})"

    def to_string(self, var: str = "t") -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for n in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[n]
            if c == 0:
                continue
            mono = "" if n == 0 else (var if n == 1 else f"{var}^{n}")
            parts.append(_format_term(c, mono))
        return _join_terms(parts)

    # -- arithmetic --
    def _coerce(self, other) -> "UniPoly":
        if isinstance(other, UniPoly):
            return other
        return UniPoly([other])

    def __add__(self, other):
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return UniPoly([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return UniPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if not self.coeffs or not other.coeffs:
            return UniPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return UniPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = UniPoly([1])
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __divmod__(self, other: "UniPoly"):
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        q = [Fraction(0)] * max(len(rem) - dq, 0)
        lc = other.lc
        for n in range(len(rem) - 1, dq - 1, -1):
            c = rem[n]
            if c == 0:
                continue
            k = c / lc
            q[n - dq] = k
            for j, b in enumerate(other.coeffs):
                rem[n - dq + j] -= k * b
        return UniPoly(q), UniPoly(rem[:dq] if dq > 0 else [])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def exact_div(self, other) -> "UniPoly":
        q, r = divmod(self, other)
        if not r.is_zero():
            raise ArithmeticError(f"{other} does not divide {self}")
        return q

    def divides(self, other: "UniPoly") -> bool:
        return divmod(other, self)[1].is_zero()

    def derivative(self) -> "UniPoly":
        return UniPoly([n * c for n, c in enumerate(self.coeffs)][1:])

    def monic(self) -> "UniPoly":
        if self.is_zero():
            return self
        lc = self.lc
        return UniPoly([c / lc for c in self.coeffs])

    def gcd(self, other: "UniPoly") -> "UniPoly":
        a, b = self, self._coerce(other)
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def squarefree(self) -> "UniPoly":
        """Product of the distinct irreducible factors, monic."""
        if self.degree <= 0:
            return UniPoly([1]) if not self.is_zero() else self
        return self.exact_div(self.gcd(self.derivative())).monic()

    # -- evaluation --
    def __call__(self, v):
        if isinstance(v, BiPoly):
            return self.compose(v)
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * v + (float(c) if not isinstance(v, Fraction) else c)
        return acc

    def eval_exact(self, v) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * v + c
        return acc

    def compose(self, p: "BiPoly") -> "BiPoly":
        """The bivariate polynomial q(p)."""
        acc = BiPoly()
        for c in reversed(self.coeffs):
            acc = acc * p + c
        return acc

    def to_numpy(self) -> np.ndarray:
        """Coefficients as floats, highest degree first (``np.roots`` order)."""
        return np.array([float(c) for c in reversed(self.coeffs)], dtype=float)

    def roots(self) -> np.ndarray:
        if self.degree < 1:
            return np.zeros(0, dtype=complex)
        return np.roots(self.to_numpy())


# ---------------------------------------------------------------------------
# bivariate
# ---------------------------------------------------------------------------

class BiPoly:
    """Sparse polynomial in x, y: ``{(i, j): c}`` stands for sum c x^i y^j.

    Instances are treated as immutable; all operations return new objects.
    """

    __slots__ = ("terms", "_hash", "__dict__")

    def __init__(self, terms: dict | None = None):
        clean = {}
        if terms:
            for m, c in terms.items():
                c = _frac(c)
                if c != 0:
                    clean[(int(m[0]), int(m[1]))] = c
        self.terms: dict[tuple[int, int], Fraction] = clean
        self._hash = None

    @classmethod
    def const(cls, c) -> "BiPoly":
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, i: int, j: int, c=1) -> "BiPoly":
        return cls({(i, j): c})

    # -- basics --
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(m == (0, 0) for m in self.terms)

    def constant_value(self) -> Fraction:
        return self.terms.get((0, 0), Fraction(0))

    @property
    def total_degree(self) -> int:
        return max((i + j for i, j in self.terms), default=-1)

    def degree_in(self, var: int) -> int:
        return max((m[var] for m in self.terms), default=-1)

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = BiPoly.const(other)
        return isinstance(other, BiPoly) and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def sort_key(self):
        return tuple(sorted(self.terms.items()))

    def __repr__(self):
        return f"BiPoly({str(self)!r})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=_key_grevlex, reverse=True):
            c = self.terms[m]
            i, j = m
            factors = []
            if i:
                factors.append("x" if i == 1 else f"x^{i}")
            if j:
                factors.append("y" if j == 1 else f"y^{j}")
            parts.append(_format_term(c, "*".join(factors)))
        return _join_terms(parts)

    # -- arithmetic --
    @staticmethod
    def _coerce(other) -> "BiPoly":
        if isinstance(other, BiPoly):
            return other
        return BiPoly.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return BiPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return BiPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) - c
        return BiPoly(out)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, BiPoly):
            c = _frac(other)
            if c == 0:
                return BiPoly()
            return BiPoly({m: v * c for m, v in self.terms.items()})
        out: dict = {}
        for (i1, j1), a in self.terms.items():
            for (i2, j2), b in other.terms.items():
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, 0) + a * b
        return BiPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = _frac(other)
        if c == 0:
            raise ZeroDivisionError("division by zero")
        return BiPoly({m: v / c for m, v in self.terms.items()})

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative exponent")
        result = BiPoly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def diff(self, var: int) -> "BiPoly":
        out = {}
        for (i, j), c in self.terms.items():
            e = (i, j)[var]
            if e:
                out[(i - 1, j) if var == 0 else (i, j - 1)] = c * e
        return BiPoly(out)

    @property
    def dx(self) -> "BiPoly":
        return self.diff(0)

    @property
    def dy(self) -> "BiPoly":
        return self.diff(1)

    def shift(self, cx, cy) -> "BiPoly":
        """The polynomial p(x + cx, y + cy), computed exactly."""
        cx, cy = _frac(cx), _frac(cy)
        xs = BiPoly({(1, 0): 1, (0, 0): cx})
        ys = BiPoly({(0, 1): 1, (0, 0): cy})
        return self.substitute(xs, ys)

    def substitute(self, px: "BiPoly", py: "BiPoly") -> "BiPoly":
        by_i: dict[int, dict[int, Fraction]] = {}
        for (i, j), c in self.terms.items():
            by_i.setdefault(i, {})[j] = c
        xpow = [BiPoly.const(1)]
        ypow = [BiPoly.const(1)]
        for _ in range(self.degree_in(0)):
            xpow.append(xpow[-1] * px)
        for _ in range(self.degree_in(1)):
            ypow.append(ypow[-1] * py)
        acc = BiPoly()
        for i, row in by_i.items():
            inner = BiPoly()
            for j, c in row.items():
                inner = inner + ypow[j] * c
            acc = acc + xpow[i] * inner
        return acc

    # -- monomial-order helpers --
    def leading(self, order: str = "grevlex"):
        key = ORDERS[order]
        m = max(self.terms, key=key)
        return m, self.terms[m]

    def monic(self, order: str = "grevlex") -> "BiPoly":
        if self.is_zero():
            return self
        _, c = self.leading(order)
        return self / c

    def content(self) -> Fraction:
        """Positive rational g with self / g primitive with integer coefficients."""
        from math import gcd

        if not self.terms:
            return Fraction(0)
        num = 0
        den = 1
        for c in self.terms.values():
            num = gcd(num, c.numerator)
            den = den * c.denominator // gcd(den, c.denominator)
        return Fraction(num, den)

    def exact_div(self, other: "BiPoly") -> "BiPoly":
        if other.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        q, r = _divide(self, [other], "grevlex")
        if not r.is_zero():
            raise ArithmeticError("inexact polynomial division")
        return q[0]

    # -- numerics --
    @cached_property
    def _compiled(self) -> Callable:
        return _compile(self.terms)

    def __call__(self, x, y):
        """Evaluate at numbers, numpy arrays, or any ring-like objects (e.g. jets)."""
        return self._compiled(x, y)

    def eval_exact(self, x, y) -> Fraction:
        x, y = _frac(x), _frac(y)
        return sum((c * x**i * y**j for (i, j), c in self.terms.items()), Fraction(0))


X = BiPoly.monomial(1, 0)
Y = BiPoly.monomial(0, 1)


def _format_term(c: Fraction, mono: str) -> str:
    sign = "-" if c < 0 else "+"
    a = abs(c)
    if mono:
        if a == 1:
            body = mono
        else:
            body = f"{a}*{mono}"
    else:
        body = str(a)
    return f"{sign} {body}"


def _join_terms(parts: list[str]) -> str:
    s = " ".join(parts)
    if s.startswith("+ "):
        return s[2:]
    return "-" + s[2:]


def _compile(terms: dict) -> Callable:
    """Build a Horner-form evaluator (nested in x, then y) as Python source."""
    if not terms:
        return lambda x, y: 0.0 * x + 0.0 * y
    by_i: dict[int, dict[int, float]] = {}
    for (i, j), c in terms.items():
        by_i.setdefault(i, {})[j] = float(c)

    def horner(coeffs: dict[int, float], var: str) -> str:
        top = max(coeffs)
        expr = repr(coeffs[top])
        for n in range(top - 1, -1, -1):
            c = coeffs.get(n)
            expr = f"({expr})*{var}" + (f" + {c!r}" if c is not None else "")
        return expr

    rows = {i: horner(row, "y") for i, row in by_i.items()}
    top = max(rows)
    expr = rows[top]
    for n in range(top - 1, -1, -1):
        r = rows.get(n)
        expr = f"({expr})*x" + (f" + ({r})" if r is not None else "")
    # keeps array shape when the polynomial is constant
    src = f"def _p(x, y):\n    return {expr} + 0.0 * x + 0.0 * y\n"
    ns: dict = {}
    exec(src, ns)  # noqa: S102 - generated from exact coefficients only
    return ns["_p"]


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class _Parser:
    """Recursive descent for: expr := term (('+'|'-') term)* ;
    term := unary (('*'|'/') unary)* ; unary := '-' unary | power ;
    power := atom ('^' int)? ; atom := number | x | y | '(' expr ')'."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self._skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self) -> BiPoly:
        if not self.text.strip():
            raise ParseError("empty expression", 0)
        p = self.expr()
        if self.peek():
            raise ParseError(f"unexpected {self.peek()!r}", self.pos)
        return p

    def expr(self) -> BiPoly:
        acc = self.term()
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self) -> BiPoly:
        acc = self.unary()
        while self.peek() in ("*", "/"):
            op = self.text[self.pos]
            self.pos += 1
            start = self.pos
            rhs = self.unary()
            if op == "*":
                acc = acc * rhs
            else:
                if not rhs.is_constant():
                    raise ParseError("division only by numeric literals", start)
                c = rhs.constant_value()
                if c == 0:
                    raise ParseError("division by zero", start)
                acc = acc / c
        return acc

    def unary(self) -> BiPoly:
        if self.peek() == "-":
            self.pos += 1
            return -self.unary()
        if self.peek() == "+":
            self.pos += 1
            return self.unary()
        return self.power()

    def power(self) -> BiPoly:
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            self._skip()
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if start == self.pos:
                raise ParseError("expected nonnegative integer exponent", start)
            base = base ** int(self.text[start:self.pos])
        return base

    def atom(self) -> BiPoly:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            inner = self.expr()
            if self.peek() != ")":
                raise ParseError("expected ')'", self.pos)
            self.pos += 1
            return inner
        if ch.isdigit() or ch == ".":
            start = self.pos
            while self.pos < len(self.text) and (self.text[self.pos].isdigit() or self.text[self.pos] == "."):
                self.pos += 1
            try:
                return BiPoly.const(Fraction(self.text[start:self.pos]))
            except ValueError:
                raise ParseError("malformed number", start) from None
        if ch.isalpha() or ch == "_":
            start = self.pos
            while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
                self.pos += 1
            name = self.text[start:self.pos]
            if name == "x":
                return X
            if name == "y":
                return Y
            raise ParseError(f"unknown identifier {name!r}", start)
        if not ch:
            raise ParseError("unexpected end of input", self.pos)
        raise ParseError(f"unexpected {ch!r}", self.pos)


def parse_polynomial(text: str) -> BiPoly:
    """Parse an expression in x, y into an exact expanded polynomial.

    >>> str(parse_polynomial("y^2 + (x^2-1)^2"))
    'x^4 - 2*x^2 + y^2 + 1'
    """
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# gcd
# ---------------------------------------------------------------------------

def _as_poly_in_x(p: BiPoly) -> dict[int, UniPoly]:
    rows: dict[int, dict[int, Fraction]] = {}
    for (i, j), c in p.terms.items():
        rows.setdefault(i, {})[j] = c
    out = {}
    for i, row in rows.items():
        out[i] = UniPoly([row.get(j, 0) for j in range(max(row) + 1)])
    return out


def _from_poly_in_x(rows: dict[int, UniPoly]) -> BiPoly:
    terms = {}
    for i, u in rows.items():
        for j, c in enumerate(u.coeffs):
            if c:
                terms[(i, j)] = c
    return BiPoly(terms)


def _content_y(rows: dict[int, UniPoly]) -> UniPoly:
    g = UniPoly()
    for u in rows.values():
        g = g.gcd(u) if not g.is_zero() else u.monic()
        if g.is_constant():
            return UniPoly([1])
    return g


def _prem(a: dict[int, UniPoly], b: dict[int, UniPoly]) -> dict[int, UniPoly]:
    """Pseudo-remainder in Q[y][x]."""
    a = {k: v for k, v in a.items() if not v.is_zero()}
    db = max(b)
    lcb = b[db]
    while a and max(a) >= db:
        da = max(a)
        lca = a[da]
        new = {k: v * lcb for k, v in a.items()}
        for k, v in b.items():
            kk = k + da - db
            new[kk] = new.get(kk, UniPoly()) - v * lca
        a = {k: v for k, v in new.items() if not v.is_zero()}
    return a


def poly_gcd(p: BiPoly, q: BiPoly) -> BiPoly:
    """Monic (grevlex) greatest common divisor via primitive remainder sequences.

    >>> str(poly_gcd(parse_polynomial("x^2-1"), parse_polynomial("x-1")))
    'x - 1'
    """
    if p.is_zero():
        return q.monic()
    if q.is_zero():
        return p.monic()
    a, b = _as_poly_in_x(p), _as_poly_in_x(q)
    ca, cb = _content_y(a), _content_y(b)
    g_cont = ca.gcd(cb)
    a = {k: v.exact_div(ca) for k, v in a.items()}
    b = {k: v.exact_div(cb) for k, v in b.items()}
    if max(a) < max(b):
        a, b = b, a
    while True:
        if max(b) == 0:
            # b is primitive and free of x, hence constant: the primitive parts are coprime
            a = {0: UniPoly([1])}
            break
        r = _prem(a, b)
        if not r:
            a = b
            break
        a, b = b, {k: v.exact_div(_content_y(r)) for k, v in r.items()}
    g = _from_poly_in_x(a)
    g = g * _from_poly_in_x({0: g_cont})
    return g.monic()


# ---------------------------------------------------------------------------
# division and Groebner bases
# ---------------------------------------------------------------------------

def _divide(p: BiPoly, basis: Sequence[BiPoly], order: str):
    """Multivariate division: returns (quotients, remainder) with p = sum q_i b_i + r."""
    key = ORDERS[order]
    lead = [b.leading(order) for b in basis]
    quot: list[dict] = [{} for _ in basis]
    rem: dict = {}
    work = dict(p.terms)
    while work:
        m = max(work, key=key)
        c = work[m]
        for idx, (lm, lc) in enumerate(lead):
            if _divides(lm, m):
                k = c / lc
                shift = (m[0] - lm[0], m[1] - lm[1])
                quot[idx][shift] = quot[idx].get(shift, 0) + k
                for (i, j), bc in basis[idx].terms.items():
                    t = (i + shift[0], j + shift[1])
                    v = work.get(t, 0) - k * bc
                    if v == 0:
                        work.pop(t, None)
                    else:
                        work[t] = v
                break
        else:
            rem[m] = c
            del work[m]
    return [BiPoly(q) for q in quot], BiPoly(rem)


def reduce_with_cofactors(p: BiPoly, basis: Sequence[BiPoly], order: str = "grevlex"):
    """Divide ``p`` by ``basis``; return ``(remainder, cofactors)`` with
    ``p == sum(c * b for c, b in zip(cofactors, basis)) + remainder``."""
    quot, rem = _divide(p, basis, order)
    return rem, quot


def _lcm(a, b):
    return (max(a[0], b[0]), max(a[1], b[1]))


def _groebner_tracked(gens: Sequence[BiPoly], order: str = "grevlex", max_pairs: int = 20000):
    """Reduced Groebner basis plus, for each element g, the list c with g = sum c_i gens_i."""
    key = ORDERS[order]
    n = len(gens)
    basis: list[BiPoly] = []
    combos: list[list[BiPoly]] = []
    for idx, g in enumerate(gens):
        if g.is_zero():
            continue
        basis.append(g)
        combos.append([BiPoly.const(1) if i == idx else BiPoly() for i in range(n)])
    if not basis:
        return [], []

    def lin(cs, scale):
        return [c * scale for c in cs]

    pairs = [(i, j) for i in range(len(basis)) for j in range(i)]
    budget = 0
    while pairs:
        budget += 1
        if budget > max_pairs:
            raise ResourceLimit("Groebner pair budget exhausted")
        pairs.sort(key=lambda ij: key(_lcm(basis[ij[0]].leading(order)[0], basis[ij[1]].leading(order)[0])))
        i, j = pairs.pop(0)
        (mi, ci), (mj, cj) = basis[i].leading(order), basis[j].leading(order)
        if min(mi[0], mj[0]) == 0 and min(mi[1], mj[1]) == 0:
            # coprime leading monomials: the S-polynomial reduces to zero
            continue
        L = _lcm(mi, mj)
        ui = BiPoly.monomial(L[0] - mi[0], L[1] - mi[1], 1 / ci)
        uj = BiPoly.monomial(L[0] - mj[0], L[1] - mj[1], 1 / cj)
        s = ui * basis[i] - uj * basis[j]
        s_combo = [a * ui - b * uj for a, b in zip(combos[i], combos[j])]
        quot, rem = _divide(s, basis, order)
        if rem.is_zero():
            continue
        r_combo = list(s_combo)
        for q, cb in zip(quot, combos):
            if q.is_zero():
                continue
            r_combo = [a - q * b for a, b in zip(r_combo, cb)]
        basis.append(rem)
        combos.append(r_combo)
        k = len(basis) - 1
        pairs.extend((k, j2) for j2 in range(k))

    # minimalize
    lms = [g.leading(order)[0] for g in basis]
    keep = [
        i for i, mi in enumerate(lms)
        if not any(j != i and _divides(mj, mi) and (mj != mi or j < i) for j, mj in enumerate(lms))
    ]
    basis = [basis[i] for i in keep]
    combos = [combos[i] for i in keep]
    # interreduce and normalize
    out, out_c = [], []
    for i, g in enumerate(basis):
        others = basis[:i] + basis[i + 1:]
        others_c = combos[:i] + combos[i + 1:]
        quot, rem = _divide(g, others, order) if others else ([], g)
        c = list(combos[i])
        for q, cb in zip(quot, others_c):
            if not q.is_zero():
                c = [a - q * b for a, b in zip(c, cb)]
        _, lc = rem.leading(order)
        out.append(rem / lc)
        out_c.append([a / lc for a in c])
        basis[i] = rem / lc
        combos[i] = out_c[-1]
    srt = sorted(range(len(out)), key=lambda i: key(out[i].leading(order)[0]))
    return [out[i] for i in srt], [out_c[i] for i in srt]


def groebner_basis(gens: Sequence[BiPoly], order: str = "grevlex", max_pairs: int = 20000) -> list[BiPoly]:
    """Reduced Groebner basis of the ideal generated by ``gens``."""
    if not gens:
        raise ValueError("need at least one generator")
    return _groebner_tracked(gens, order, max_pairs)[0]


# ---------------------------------------------------------------------------
# quotient algebra
# ---------------------------------------------------------------------------

def standard_monomials(basis: Sequence[BiPoly], order: str = "grevlex") -> list[tuple[int, int]]:
    """Monomials not divisible by any leading monomial; raises if infinitely many."""
    lms = [g.leading(order)[0] for g in basis]
    if any(m == (0, 0) for m in lms):
        return []
    xs = [m[0] for m in lms if m[1] == 0]
    ys = [m[1] for m in lms if m[0] == 0]
    if not xs or not ys:
        raise UnsupportedInput("ideal is not zero-dimensional")
    out = []
    for i in range(min(xs)):
        for j in range(min(ys)):
            if not any(_divides(m, (i, j)) for m in lms):
                out.append((i, j))
    return sorted(out, key=ORDERS[order])


def _vector(p: BiPoly, monos) -> list[Fraction]:
    return [p.terms.get(m, Fraction(0)) for m in monos]


def multiplication_matrix(f: BiPoly, basis: Sequence[BiPoly], order: str = "grevlex"):
    """Exact matrix (list of rows) of multiplication by f on the quotient ring."""
    monos = standard_monomials(basis, order)
    cols = []
    for m in monos:
        _, nf = _divide(f * BiPoly.monomial(*m), basis, order)
        cols.append(_vector(nf, monos))
    n = len(monos)
    return [[cols[j][i] for j in range(n)] for i in range(n)], monos


def charpoly(matrix) -> UniPoly:
    """Characteristic polynomial det(lambda I - A) by Faddeev-LeVerrier."""
    n = len(matrix)
    A = [[Fraction(v) for v in row] for row in matrix]
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    Mk = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{n-k+1} I
        prev = Mk
        Mk = [[sum(A[i][l] * prev[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        for i in range(n):
            Mk[i][i] += coeffs[n - k + 1]
        AM = [[sum(A[i][l] * Mk[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        coeffs[n - k] = -sum(AM[i][i] for i in range(n)) / k
    return UniPoly(coeffs)


def minimal_polynomial(f: BiPoly, basis: Sequence[BiPoly], order: str = "grevlex") -> UniPoly:
    """Monic minimal polynomial of multiplication by f modulo the ideal with Groebner basis ``basis``.

    Since the quotient is cyclic over itself, p(f) = 0 in the quotient iff
    p annihilates the operator; the first linear dependency among the normal
    forms of 1, f, f^2, ... gives the answer.
    """
    monos = standard_monomials(basis, order)
    if not monos:
        return UniPoly([1])
    rows: list[tuple[list[Fraction], list[Fraction], int]] = []  # (reduced vec, combo, pivot)
    power = BiPoly.const(1)
    for deg in range(len(monos) + 1):
        _, nf = _divide(power, basis, order)
        vec = _vector(nf, monos)
        combo = [Fraction(0)] * (deg + 1)
        combo[deg] = Fraction(1)
        for rv, rc, piv in rows:
            c = vec[piv]
            if c:
                vec = [a - c * b for a, b in zip(vec, rv)]
                combo = [a - c * (rc[i] if i < len(rc) else 0) for i, a in enumerate(combo)]
        piv = next((i for i, v in enumerate(vec) if v != 0), None)
        if piv is None:
            return UniPoly(combo).monic()
        s = vec[piv]
        rows.append(([v / s for v in vec], [c / s for c in combo], piv))
        power = nf * f
    raise AssertionError("minimal polynomial degree exceeds quotient dimension")


@dataclass(frozen=True)
class GradientCertificate:
    """Certificate ``multiplier(f) = a*f_x + b*f_y`` for a nonconstant f.

    ``m`` is the minimal polynomial of multiplication by f on the reduced
    gradient quotient; ``M`` the annihilator squarefree(m)*m. The multiplier
    actually used for the cofactors (``m`` when it already lies in the
    gradient ideal, else ``M`` or a higher power) is ``multiplier``.
    """

    f: BiPoly
    D: BiPoly
    m: UniPoly
    M: UniPoly
    multiplier: UniPoly
    a: BiPoly
    b: BiPoly
    crit: tuple = field(default=())

    @property
    def fx(self) -> BiPoly:
        return self.f.dx

    @property
    def fy(self) -> BiPoly:
        return self.f.dy

    def residual(self) -> BiPoly:
        """a f_x + b f_y - multiplier(f); identically zero for a valid certificate."""
        return self.a * self.fx + self.b * self.fy - self.multiplier.compose(self.f)

    @property
    def real_crit(self) -> list[float]:
        return sorted(float(c.real) for c in self.crit if abs(c.imag) < 1e-9)


def gradient_certificate(f: BiPoly, order: str = "grevlex", max_power: int = 6) -> GradientCertificate:
    if f.is_constant():
        raise UnsupportedInput("f must be nonconstant")
    fx, fy = f.dx, f.dy
    D = poly_gcd(fx, fy)
    if D.is_zero():
        D = BiPoly.const(1)
    if D.is_constant():
        red = [fx, fy]
    else:
        red = [fx.exact_div(D), fy.exact_div(D)]
    red_basis = groebner_basis(red, order)
    try:
        m = minimal_polynomial(f, red_basis, order)
    except UnsupportedInput:
        raise UnsupportedInput("f has non-isolated critical points (reduced gradient ideal not zero-dimensional)") from None
    sq = m.squarefree()
    M = sq * m
    J_basis, J_combos = _groebner_tracked([fx, fy], order)
    candidates = [m] + [sq**p * m for p in range(1, max_power + 1)]
    for mult in candidates:
        rem, quot = reduce_with_cofactors(mult.compose(f), J_basis, order)
        if not rem.is_zero():
            continue
        a, b = BiPoly(), BiPoly()
        for q, (ca, cb) in zip(quot, J_combos):
            a = a + q * ca
            b = b + q * cb
        crit = tuple(complex(c) for c in sq.roots())
        cert = GradientCertificate(f=f, D=D, m=m, M=M, multiplier=mult, a=a, b=b, crit=crit)
        if not cert.residual().is_zero():
            raise AssertionError("cofactor reconstruction failed")
        return cert
    raise UnsupportedInput("no power of squarefree(m) * m found in the gradient ideal")
