"""Higher-order Melnikov functions through the Francoise recursion in iterated integrals.

A :class:`WordCombination` is a finite sum ``sum c_W(t) * int W`` over words
W of rational one-forms.  The coefficients are polynomials in *atoms*
``(eta, j)`` standing for the j-th derivative of R_eta(t), where the
transversal tau (with f(tau(t)) = t) pulls eta back to ``R_eta(t) dt``.
Atoms are evaluated numerically from Taylor jets of tau.

Recursion: w_1 = omega, w_{i+1} = -omega * D(w_i), where D is the derivative
in t of the inner integral from the transversal basepoint; M_k = int_gamma w_k.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .chen import ChenEvaluator
from .exactpoly import BiPoly, GradientCertificate, gradient_certificate
from .forms import (
    RationalOneForm,
    RationalTwoForm,
    exterior_derivative,
    gelfand_leray,
    wedge,
)
from .geometry import Jet, Path, Segment, TransversalSpec, trace_oval

__all__ = [
    "Scenario",
    "MelnikovTable",
    "WordCombination",
    "PreconditionError",
    "gl_derivative",
    "gl_wedge",
    "word_derivative",
    "closed_word_derivative",
    "recursion_combination",
    "evaluate_combination",
    "combination_table",
    "melnikov_1",
    "melnikov_2",
    "melnikov_3",
    "melnikov_4_closed",
    "francoise_mk",
    "first_nonvanishing_order",
    "subsampled",
    "rotated",
]

K_MAX = 6


class PreconditionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# scenario and tables
# ---------------------------------------------------------------------------

@dataclass
class Scenario:
    """f, the perturbation omega = P dx + Q dy, an oval family and tolerances."""

    f: BiPoly
    P: BiPoly
    Q: BiPoly
    transversal: TransversalSpec
    t_grid: np.ndarray
    name: str = ""
    quad_tol: float = 1e-8
    vanish_tol: float = 1e-8
    eps_grid: tuple = (1e-2, 5e-3, 2.5e-3, 1.25e-3)
    h_max: float = 2e-3
    crit_margin: float = 1e-3
    fiber_tol: float = 1e-10
    closure_tol: float = 1e-8
    oracle_rtol: float = 1e-12
    _ovals: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.t_grid = np.asarray(self.t_grid, dtype=float)
        for c in self.cert.real_crit:
            if np.any(np.abs(self.t_grid - c) < self.crit_margin):
                raise ValueError(f"t-grid comes within {self.crit_margin} of the critical value {c}")
        for name in ("quad_tol", "vanish_tol", "h_max", "crit_margin", "fiber_tol", "closure_tol", "oracle_rtol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"tolerance {name} must be positive")

    @cached_property
    def cert(self) -> GradientCertificate:
        return gradient_certificate(self.f)

    @property
    def omega(self) -> RationalOneForm:
        return RationalOneForm.polynomial(self.P, self.Q)

    def oval(self, t: float) -> Path:
        key = float(t)
        if key not in self._ovals:
            self._ovals[key] = trace_oval(self.f, key, self.transversal, fiber_tol=self.fiber_tol,
                                          closure_tol=self.closure_tol, h_max=self.h_max)
        return self._ovals[key]

    def vanish_scale(self) -> float:
        """Largest oval length on the grid (vanishing is judged relative to it)."""
        return max(self.oval(t).arclength() for t in self.t_grid)


@dataclass
class MelnikovTable:
    k: int
    t: np.ndarray
    values: np.ndarray
    err: np.ndarray
    provenance: str
    flags: dict = field(default_factory=dict)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def rows(self):
        return list(zip(self.t, self.values, self.err))


# ---------------------------------------------------------------------------
# coefficient polynomials in atoms
# ---------------------------------------------------------------------------

def _atom_key(atom):
    form, j = atom
    return (form.sort_key(), j)


def _mono(atoms) -> tuple:
    return tuple(sorted(atoms, key=_atom_key))


ONE_COEF = {(): Fraction(1)}


def _coef_add(a: dict, b: dict, s=1) -> dict:
    out = dict(a)
    for m, c in b.items():
        v = out.get(m, 0) + s * c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def _coef_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = _mono(m1 + m2)
            v = out.get(m, 0) + c1 * c2
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def _coef_derivative(a: dict) -> dict:
    out: dict = {}
    for m, c in a.items():
        for i, (form, j) in enumerate(m):
            mm = _mono(m[:i] + ((form, j + 1),) + m[i + 1:])
            v = out.get(mm, 0) + c
            if v:
                out[mm] = v
            else:
                out.pop(mm, None)
    return out


class WordCombination:
    """sum of coefficient(t) * int(word); words are tuples of RationalOneForm."""

    def __init__(self, terms: dict | None = None):
        self.terms: dict[tuple, dict] = {}
        for w, c in (terms or {}).items():
            self._add_term(tuple(w), c)

    @classmethod
    def word(cls, *forms, coef=None) -> "WordCombination":
        return cls({tuple(forms): dict(coef) if coef is not None else dict(ONE_COEF)})

    def _add_term(self, w: tuple, c: dict, s=1):
        if any(e.is_zero() for e in w):
            return
        cur = _coef_add(self.terms.get(w, {}), c, s)
        if cur:
            self.terms[w] = cur
        else:
            self.terms.pop(w, None)

    def __add__(self, other: "WordCombination") -> "WordCombination":
        out = WordCombination(self.terms)
        for w, c in other.terms.items():
            out._add_term(w, c)
        return out

    def __neg__(self) -> "WordCombination":
        return WordCombination({w: {m: -v for m, v in c.items()} for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, coef: dict) -> "WordCombination":
        out = WordCombination()
        for w, c in self.terms.items():
            out._add_term(w, _coef_mul(c, coef))
        return out

    def prepend(self, form: RationalOneForm) -> "WordCombination":
        out = WordCombination()
        for w, c in self.terms.items():
            out._add_term((form,) + w, c)
        return out

    @property
    def max_length(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def atoms(self) -> set:
        return {a for c in self.terms.values() for m in c for a in m}

    def entries(self) -> set:
        return {e for w in self.terms for e in w}

    def __len__(self):
        return len(self.terms)

    def __str__(self):
        lines = []
        for w, c in self.terms.items():
            coef = " + ".join(
                f"{v}" + "".join(f"*R[{j}]" for _, j in m) for m, v in c.items()
            )
            lines.append(f"({coef}) * int[" + ", ".join(str(e) for e in w) + "]")
        return "\n".join(lines) or "0"


# ---------------------------------------------------------------------------
# Gelfand-Leray helpers and the word derivative
# ---------------------------------------------------------------------------

def gl_derivative(w: RationalOneForm, cert: GradientCertificate) -> RationalOneForm:
    """A Gelfand-Leray form of d(w)."""
    return gelfand_leray(exterior_derivative(w, cert.f), cert)


def gl_wedge(w1: RationalOneForm, w2: RationalOneForm, cert: GradientCertificate) -> RationalOneForm:
    """A Gelfand-Leray form of w1 ^ w2."""
    return gelfand_leray(wedge(w1, w2), cert)


class _Derivatives:
    """Memoized entry derivatives so repeated entries share one representative."""

    def __init__(self, cert: GradientCertificate, overrides: dict | None = None):
        self.cert = cert
        self.d_cache: dict = dict(overrides or {})
        self.w_cache: dict = {}

    def d(self, w):
        if w not in self.d_cache:
            self.d_cache[w] = gl_derivative(w, self.cert)
        return self.d_cache[w]

    def wedge(self, w1, w2):
        key = (w1, w2)
        if key not in self.w_cache:
            self.w_cache[key] = gl_wedge(w1, w2, self.cert)
        return self.w_cache[key]


def _word_derivative(comb: WordCombination, ders: _Derivatives, closed: bool) -> WordCombination:
    out = WordCombination()
    for w, c in comb.terms.items():
        m = len(w)
        dc = _coef_derivative(c)
        if dc:
            out._add_term(w, dc)
        for i in range(m):
            out._add_term(w[:i] + (ders.d(w[i]),) + w[i + 1:], c)
        for i in range(m - 1):
            out._add_term(w[:i] + (ders.wedge(w[i], w[i + 1]),) + w[i + 2:], c, -1)
        if m >= 2:
            # moving the basepoint along the transversal
            out._add_term(w[:-1], _coef_mul(c, {((w[-1], 0),): Fraction(1)}), -1)
            if closed:
                # the endpoint moves with it on a closed loop
                out._add_term(w[1:], _coef_mul(c, {((w[0], 0),): Fraction(1)}))
    return out


def word_derivative(comb: WordCombination, cert: GradientCertificate, overrides: dict | None = None) -> WordCombination:
    """d/dt of the inner integral from the transversal basepoint, as a new combination.

    Entries are replaced by Gelfand-Leray forms of their differentials, adjacent
    pairs by Gelfand-Leray forms of their wedge (with a minus sign), and the
    last entry is dropped against its transversal pullback R (minus sign).
    Single-letter words carry no transversal term: on the closed loops used
    downstream it only contributes a multiple of the lower-order function.
    """
    return _word_derivative(comb, _Derivatives(cert, overrides), closed=False)


def closed_word_derivative(comb: WordCombination, cert: GradientCertificate, overrides: dict | None = None):
    """d/dt of the combination integrated over the closed ovals gamma(t) based on the transversal."""
    return _word_derivative(comb, _Derivatives(cert, overrides), closed=True)


def recursion_combination(omega: RationalOneForm, cert: GradientCertificate, k: int,
                          omega_prime: RationalOneForm | None = None) -> WordCombination:
    """w_k of the recursion, a combination of words of length <= k.

    ``omega_prime`` fixes the Gelfand-Leray representative used for d(omega).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > K_MAX:
        raise ValueError(f"k exceeds k_max = {K_MAX}")
    ders = _Derivatives(cert, {omega: omega_prime} if omega_prime is not None else None)
    comb = WordCombination.word(omega)
    for _ in range(k - 1):
        comb = -(_word_derivative(comb, ders, closed=False).prepend(omega))
    return comb


# ---------------------------------------------------------------------------
# numeric evaluation
# ---------------------------------------------------------------------------

def subsampled(path: Path) -> Path:
    """Every other sample (segments must have an even number of intervals)."""
    segs = []
    for seg in path.segments:
        if (len(seg.s) - 1) % 2:
            raise ValueError("segment needs an even number of intervals")
        segs.append(Segment(seg.s[::2], seg.x[::2], seg.y[::2], seg.vx[::2], seg.vy[::2]))
    return Path(tuple(segs), path.t, path.closed)


def rotated(path: Path, index: int) -> Path:
    """The same closed single-segment loop started at sample ``index``."""
    if not path.closed or len(path.segments) != 1:
        raise ValueError("rotation needs a closed single-segment path")
    seg = path.segments[0]
    n = len(seg.s) - 1
    i = index % n
    idx = np.r_[np.arange(i, n), np.arange(0, i + 1)]
    return Path((Segment(seg.s, seg.x[idx], seg.y[idx], seg.vx[idx], seg.vy[idx]),), path.t, True)


def _atom_values(transversal: TransversalSpec, t: float, atoms) -> dict:
    by_form: dict = {}
    for form, j in atoms:
        by_form[form] = max(by_form.get(form, 0), j)
    out = {}
    for form, jmax in by_form.items():
        x, y = transversal.jet(t, jmax + 1)
        P, Q = form.evaluate(x, y, t)
        dx, dy = x.derivative(), y.derivative()
        num = P * dx + Q * dy
        if form.den.is_constant():
            r = num / float(form.den.coeffs[0])
        else:
            r = num / form.den(Jet.variable(t, jmax + 1))
        ders = r.taylor_derivatives()
        for j in range(jmax + 1):
            out[(form, j)] = float(ders[j])
    return out


def _coef_value(c: dict, atoms: dict) -> float:
    total = 0.0
    for m, v in c.items():
        term = float(v)
        for a in m:
            term *= atoms[a]
        total += term
    return total


def evaluate_combination(comb: WordCombination, path: Path, transversal: TransversalSpec | None = None,
                         t: float | None = None, evaluator: ChenEvaluator | None = None) -> complex:
    ev = evaluator or ChenEvaluator(path)
    atoms = comb.atoms()
    av = _atom_values(transversal, path.t if t is None else t, atoms) if atoms else {}
    total = 0.0 + 0.0j
    for w, c in comb.terms.items():
        total += _coef_value(c, av) * ev.value(w)
    return total


def combination_table(s: Scenario, comb: WordCombination, k: int, provenance: str,
                      paths: Sequence[Path] | None = None) -> MelnikovTable:
    """Evaluate on the scenario's grid; the error estimate compares with half the samples."""
    vals, errs = [], []
    for i, t in enumerate(s.t_grid):
        path = paths[i] if paths is not None else s.oval(t)
        full = evaluate_combination(comb, path, s.transversal, t)
        half = evaluate_combination(comb, subsampled(path), s.transversal, t)
        vals.append(full)
        errs.append(abs(full - half) / 15.0)
    return MelnikovTable(k, s.t_grid.copy(), np.array(vals), np.array(errs), provenance)


def _threshold(s: Scenario) -> float:
    return s.vanish_tol * max(1.0, s.vanish_scale())


def _check_lower(s: Scenario, k: int, tables: dict | None = None):
    """None if M_1..M_{k-1} vanish on the grid, else the first nonvanishing table."""
    for j in range(1, k):
        tab = tables.get(j) if tables else None
        if tab is None:
            tab = francoise_mk(s, j, check=False)[1]
        if tab.max_abs() > _threshold(s):
            tab.flags["first_nonvanishing"] = j
            return tab
    return None


def melnikov_1(s: Scenario) -> MelnikovTable:
    return combination_table(s, WordCombination.word(s.omega), 1, "abelian integral int omega")


def melnikov_2(s: Scenario, omega_prime: RationalOneForm | None = None, check: bool = True) -> MelnikovTable:
    """-int omega omega' (omega' a Gelfand-Leray form of d omega)."""
    if check:
        low = _check_lower(s, 2, {1: melnikov_1(s)})
        if low is not None:
            return low
    w = s.omega
    wp = omega_prime if omega_prime is not None else gl_derivative(w, s.cert)
    comb = -WordCombination.word(w, wp)
    return combination_table(s, comb, 2, "-int omega omega'")


def melnikov_3(s: Scenario, omega_prime: RationalOneForm | None = None, check: bool = True,
               paths: Sequence[Path] | None = None) -> MelnikovTable:
    """int omega omega' omega' + int omega omega omega'' - int omega GL(omega ^ omega')."""
    if check:
        low = _check_lower(s, 3)
        if low is not None:
            return low
    w = s.omega
    wp = omega_prime if omega_prime is not None else gl_derivative(w, s.cert)
    wpp = gl_derivative(wp, s.cert)
    comb = (WordCombination.word(w, wp, wp) + WordCombination.word(w, w, wpp)
            - WordCombination.word(w, gl_wedge(w, wp, s.cert)))
    return combination_table(s, comb, 3, "int w w'w' + int w w w'' - int w GL(w^w')", paths)


def melnikov_4_closed(s: Scenario, omega_prime: RationalOneForm) -> MelnikovTable:
    """M_4 for a closed Gelfand-Leray representative omega' (so omega'' = 0).

    With G = GL(omega ^ omega'):
      -int w w'w'w' + int w w' G + int w w G' + int w G w' - int w GL(w ^ G).
    """
    cert = s.cert
    if not exterior_derivative(omega_prime, s.f).is_zero():
        raise PreconditionError("omega' must be closed")
    w, wp = s.omega, omega_prime
    G = gl_wedge(w, wp, cert)
    comb = (-WordCombination.word(w, wp, wp, wp) + WordCombination.word(w, wp, G)
            + WordCombination.word(w, w, gl_derivative(G, cert)) + WordCombination.word(w, G, wp)
            - WordCombination.word(w, gl_wedge(w, G, cert)))
    return combination_table(s, comb, 4, "closed formula, closed omega'")


def francoise_mk(s: Scenario, k: int, check: bool = True, omega_prime: RationalOneForm | None = None):
    """(w_k, table of M_k).  If a lower order does not vanish, its table is returned flagged."""
    comb = recursion_combination(s.omega, s.cert, k, omega_prime)
    if check and k > 1:
        low = _check_lower(s, k)
        if low is not None:
            return comb, low
    return comb, combination_table(s, comb, k, f"recursion k={k}")


def first_nonvanishing_order(s: Scenario, k_max: int = 4):
    """(k, table) for the smallest k with max |M_k| above the vanishing threshold, else (None, last table)."""
    thr = _threshold(s)
    tab = None
    for k in range(1, k_max + 1):
        _, tab = francoise_mk(s, k, check=False)
        if tab.max_abs() > thr:
            return k, tab
    return None, tab
