"""Rational differential forms relative to a polynomial f.

A one-form is stored as ``(A dx + B dy) / q(f)`` and a two-form as
``C dx^dy / q(f)``, with A, B, C exact polynomials and q a univariate
polynomial evaluated at f.  Denominators only ever pick up factors of the
gradient multiplier, so every form is analytic on regular fibers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exactpoly import BiPoly, GradientCertificate, UniPoly

__all__ = [
    "RationalOneForm",
    "RationalTwoForm",
    "exterior_derivative",
    "wedge",
    "gelfand_leray",
    "df_form",
    "transversal_pullback",
    "denominator_ok",
]

ONE = UniPoly([1])


def _normalize(nums: list[BiPoly], den: UniPoly):
    if den.is_zero():
        raise ZeroDivisionError("zero denominator")
    lc = den.lc
    if lc != 1:
        nums = [n / lc for n in nums]
        den = den.monic()
    return nums, den


@dataclass(frozen=True, eq=True)
class RationalOneForm:
    num_dx: BiPoly
    num_dy: BiPoly
    den: UniPoly = ONE

    def __post_init__(self):
        (a, b), den = _normalize([self.num_dx, self.num_dy], self.den)
        object.__setattr__(self, "num_dx", a)
        object.__setattr__(self, "num_dy", b)
        object.__setattr__(self, "den", den)

    @classmethod
    def polynomial(cls, P, Q) -> "RationalOneForm":
        return cls(BiPoly._coerce(P), BiPoly._coerce(Q), ONE)

    def is_zero(self) -> bool:
        return self.num_dx.is_zero() and self.num_dy.is_zero()

    def sort_key(self):
        return (self.num_dx.sort_key(), self.num_dy.sort_key(), self.den.coeffs)

    def __str__(self):
        body = f"({self.num_dx}) dx + ({self.num_dy}) dy"
        if self.den == ONE:
            return body
        return f"[{body}] / ({self.den.to_string('f')})"

    def __neg__(self):
        return RationalOneForm(-self.num_dx, -self.num_dy, self.den)

    def scale(self, c) -> "RationalOneForm":
        return RationalOneForm(self.num_dx * c, self.num_dy * c, self.den)

    def add(self, other: "RationalOneForm", f: BiPoly) -> "RationalOneForm":
        if self.den == other.den:
            return RationalOneForm(self.num_dx + other.num_dx, self.num_dy + other.num_dy, self.den)
        g = self.den.gcd(other.den)
        s1 = other.den.exact_div(g).compose(f)
        s2 = self.den.exact_div(g).compose(f)
        den = self.den * other.den.exact_div(g)
        return RationalOneForm(self.num_dx * s1 + other.num_dx * s2, self.num_dy * s1 + other.num_dy * s2, den)

    def times_poly(self, h: BiPoly) -> "RationalOneForm":
        return RationalOneForm(self.num_dx * h, self.num_dy * h, self.den)

    def evaluate(self, x, y, t):
        """Components (P, Q) at points (x, y) on the fiber f = t."""
        d = float(self.den.coeffs[0]) if self.den.is_constant() else self.den(t)
        return self.num_dx(x, y) / d, self.num_dy(x, y) / d


@dataclass(frozen=True, eq=True)
class RationalTwoForm:
    num: BiPoly
    den: UniPoly = ONE

    def __post_init__(self):
        (n,), den = _normalize([self.num], self.den)
        object.__setattr__(self, "num", n)
        object.__setattr__(self, "den", den)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __str__(self):
        if self.den == ONE:
            return f"({self.num}) dx^dy"
        return f"({self.num}) dx^dy / ({self.den.to_string('f')})"

    def add(self, other: "RationalTwoForm", f: BiPoly) -> "RationalTwoForm":
        if self.den == other.den:
            return RationalTwoForm(self.num + other.num, self.den)
        g = self.den.gcd(other.den)
        den = self.den * other.den.exact_div(g)
        return RationalTwoForm(
            self.num * other.den.exact_div(g).compose(f) + other.num * self.den.exact_div(g).compose(f), den
        )

    def equals(self, other: "RationalTwoForm", f: BiPoly) -> bool:
        """Exact equality as rational forms (cross-multiplied)."""
        return (self.num * other.den.compose(f) - other.num * self.den.compose(f)).is_zero()


def df_form(f: BiPoly) -> RationalOneForm:
    return RationalOneForm(f.dx, f.dy, ONE)


def _poly_wedge(a1: BiPoly, b1: BiPoly, a2: BiPoly, b2: BiPoly) -> BiPoly:
    # (a1 dx + b1 dy) ^ (a2 dx + b2 dy) = (a1 b2 - b1 a2) dx^dy
    return a1 * b2 - b1 * a2


def wedge(w1: RationalOneForm, w2: RationalOneForm) -> RationalTwoForm:
    """Exterior product; the denominators multiply."""
    return RationalTwoForm(_poly_wedge(w1.num_dx, w1.num_dy, w2.num_dx, w2.num_dy), w1.den * w2.den)


def exterior_derivative(w: RationalOneForm, f: BiPoly) -> RationalTwoForm:
    """d(eta / q(f)) = dq-free part over the reduced denominator.

    With g = gcd(q, q'):  d(eta/q) = [(q/g)(f) d eta - (q'/g)(f) df^eta] / (q * q/g).
    """
    A, B, q = w.num_dx, w.num_dy, w.den
    d_eta = B.dx - A.dy
    if q.is_constant():
        return RationalTwoForm(d_eta, q)
    dq = q.derivative()
    g = q.gcd(dq)
    qg = q.exact_div(g)
    dqg = dq.exact_div(g)
    df_eta = _poly_wedge(f.dx, f.dy, A, B)
    num = qg.compose(f) * d_eta - dqg.compose(f) * df_eta
    return RationalTwoForm(num, q * qg)


def gelfand_leray(eta: RationalTwoForm, cert: GradientCertificate) -> RationalOneForm:
    """A one-form w with df ^ w = eta, from the cofactor identity.

    multiplier(f) dx^dy = a f_x + b f_y = df ^ (a dy - b dx), so
    C dx^dy / q(f) = df ^ (C a dy - C b dx) / (q * multiplier)(f).
    """
    C = eta.num
    return RationalOneForm(-(cert.b * C), cert.a * C, eta.den * cert.multiplier)


def denominator_ok(w, cert: GradientCertificate) -> bool:
    """True when every root of the denominator is a critical value of f."""
    den = w.den
    if den.is_constant():
        return True
    crit = cert.m.squarefree()
    return den.squarefree().divides(crit) if crit.degree >= 1 else False


def transversal_pullback(w: RationalOneForm, tau, t):
    """R(t) with (tau o f)^* w = R(f) df, for a transversal tau with f(tau(t)) = t.

    ``tau`` is any object with ``point(t)`` and ``velocity(t)`` returning
    coordinate pairs (see :class:`pontryagin.geometry.TransversalSpec`).
    """
    t = np.asarray(t, dtype=float)
    px, py = tau.point(t)
    vx, vy = tau.velocity(t)
    P, Q = w.evaluate(px, py, t)
    return P * vx + Q * vy


