"""Iterated path integrals, free-group words and Witt-number arithmetic.

Convention: in ``int w1 w2 ... wk`` the first entry is outermost, i.e.

    int_l w1 w2 = int_l w1(P) * int_{l(0)}^{P} w2,

so running integrals are built from the innermost (last) entry outward.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .geometry import Path, PathError, Segment, circle_path, cumulative_integral, path_concat, path_reverse

__all__ = [
    "AnalyticOneForm",
    "ChenEvaluator",
    "iterated_integral",
    "iterated_integrals",
    "FreeWord",
    "realize_free_word",
    "punctured_plane_fixture",
    "chen_residuals",
    "mobius",
    "witt_number",
    "order_bound",
    "REFERENCE_WITT_TABLE",
    "witt_table",
]


class AnalyticOneForm:
    """P(x, y) dx + Q(x, y) dy given by vectorized callables (for synthetic fixtures)."""

    def __init__(self, P: Callable, Q: Callable | None = None, name: str = ""):
        self.P = P
        self.Q = Q
        self.name = name

    def evaluate(self, x, y, t=None):
        p = self.P(x, y) if self.P is not None else 0 * x
        q = self.Q(x, y) if self.Q is not None else 0 * x
        return p, q

    def __repr__(self):
        return f"AnalyticOneForm({self.name or id(self)})"


def _pullback(form, seg, t):
    P, Q = form.evaluate(seg.x, seg.y, t)
    v = P * seg.vx + Q * seg.vy
    v = np.broadcast_to(v, seg.s.shape)
    if not np.all(np.isfinite(v)):
        raise ValueError("one-form is singular on the path")
    return v


class ChenEvaluator:
    """Iterated integrals of many words over one path, sharing inner running integrals.

    Running integrals are cached per word suffix, so words with a common
    tail are integrated once.
    """

    def __init__(self, path: Path):
        self.path = path
        self._pull: dict = {}
        self._run: dict = {}

    def pullback(self, form) -> list[np.ndarray]:
        key = form
        try:
            return self._pull[key]
        except KeyError:
            pass
        vals = [_pullback(form, seg, self.path.t) for seg in self.path.segments]
        self._pull[key] = vals
        return vals

    def running(self, word: tuple) -> list[np.ndarray]:
        """I_word(s) = int over the path up to s, per segment."""
        try:
            return self._run[word]
        except KeyError:
            pass
        head, tail = word[0], word[1:]
        f = self.pullback(head)
        inner = self.running(tail) if tail else None
        out = []
        state = 0.0
        for i, seg in enumerate(self.path.segments):
            integrand = f[i] if inner is None else f[i] * inner[i]
            cum = cumulative_integral(integrand, seg.h) + state
            out.append(cum)
            state = cum[-1]
        self._run[word] = out
        return out

    def value(self, word: Sequence) -> complex:
        word = tuple(word)
        if not word:
            return 1.0
        return complex(self.running(word)[-1][-1])

    def values(self, words: Iterable[Sequence]) -> list[complex]:
        return [self.value(w) for w in words]


def iterated_integral(path: Path, word: Sequence) -> complex:
    """int_path w1 ... wk; the empty word gives 1."""
    return ChenEvaluator(path).value(word)


def iterated_integrals(path: Path, words: Iterable[Sequence]) -> list[complex]:
    return ChenEvaluator(path).values(words)


# ---------------------------------------------------------------------------
# free groups
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FreeWord:
    """Reduced word in a free group; letter +i is generator i-1, -i its inverse."""

    letters: tuple[int, ...] = ()

    def __post_init__(self):
        out: list[int] = []
        for a in self.letters:
            if a == 0:
                raise ValueError("letter 0 is not a generator")
            if out and out[-1] == -a:
                out.pop()
            else:
                out.append(int(a))
        object.__setattr__(self, "letters", tuple(out))

    @classmethod
    def generator(cls, i: int) -> "FreeWord":
        return cls((i + 1,))

    def inverse(self) -> "FreeWord":
        return FreeWord(tuple(-a for a in reversed(self.letters)))

    def __mul__(self, other: "FreeWord") -> "FreeWord":
        return FreeWord(self.letters + other.letters)

    def __len__(self):
        return len(self.letters)

    @staticmethod
    def commutator(a: "FreeWord", b: "FreeWord") -> "FreeWord":
        """a^-1 b^-1 a b."""
        return a.inverse() * b.inverse() * a * b


def realize_free_word(word: FreeWord, gens: Sequence[Path]) -> Path:
    """Concatenate generator loops according to the word (first letter traversed first).

    The empty word (e.g. a reduced a a^-1) gives the constant loop at the basepoint.
    """
    if not gens:
        raise PathError("no generators")
    base = gens[0].start
    for g in gens:
        if not g.closed:
            raise PathError("generators must be closed loops")
        if abs(g.start.x - base.x) > 1e-8 or abs(g.start.y - base.y) > 1e-8:
            raise PathError("basepoint mismatch")
    if not word.letters:
        s = np.linspace(0.0, 1.0, 5)
        z = np.zeros_like(s)
        seg = Segment(s, z + base.x, z + base.y, z, z)
        return Path((seg,), gens[0].t, True)
    pieces = [gens[a - 1] if a > 0 else path_reverse(gens[-a - 1]) for a in word.letters]
    if len(pieces) == 1:
        return pieces[0]
    return path_concat(*pieces)


def punctured_plane_fixture(base: complex = 0.0, n: int = 4000):
    """Residue-normalized forms dz / (2 pi i (z -+ 1)) and loops a (around 1), b (around -1) based at ``base``.

    Both loops are counterclockwise circles in the x-line, so int_a w1 = int_b w2 = 1
    and int_a w2 = int_b w1 = 0.
    """
    w1 = AnalyticOneForm(lambda x, y: 1.0 / (2j * np.pi * (x - 1.0)), None, "w1")
    w2 = AnalyticOneForm(lambda x, y: 1.0 / (2j * np.pi * (x + 1.0)), None, "w2")
    loops = []
    for c in (1.0, -1.0):
        r = base - c
        loops.append(circle_path(c, abs(r), float(np.angle(r)), 1.0, n))
    return w1, w2, loops[0], loops[1]


def chen_residuals(l1: Path, l2: Path, forms: Sequence, max_len: int = 4) -> dict:
    """Largest violations of the standard identities over all words of length <= max_len in ``forms``.

    composition: int_{l1 l2} w = sum_i int_{l2} w[:i] int_{l1} w[i:]  (l1 traversed first)
    reversal:    int_{l^-1} w = (-1)^len int_l reversed(w)
    repeated:    int_l w^j = (int_l w)^j / j!  (j <= 5, first form)
    """
    from itertools import product
    from math import factorial

    l12 = path_concat(l1, l2)
    r1 = path_reverse(l1)
    e1, e2, e12, er = ChenEvaluator(l1), ChenEvaluator(l2), ChenEvaluator(l12), ChenEvaluator(r1)
    comp = rev = 0.0
    for n in range(1, max_len + 1):
        for word in product(forms, repeat=n):
            lhs = e12.value(word)
            rhs = sum(e2.value(word[:i]) * e1.value(word[i:]) for i in range(n + 1))
            comp = max(comp, abs(lhs - rhs) / max(1.0, abs(lhs)))
            lr = er.value(word)
            rr = (-1) ** n * e1.value(word[::-1])
            rev = max(rev, abs(lr - rr) / max(1.0, abs(lr)))
    w = forms[0]
    base = e1.value((w,))
    rep = max(abs(e1.value((w,) * j) - base**j / factorial(j)) / max(1.0, abs(base) ** j / factorial(j))
              for j in range(1, 6))
    return {"composition": comp, "reversal": rev, "repeated": rep}


# ---------------------------------------------------------------------------
# Witt numbers
# ---------------------------------------------------------------------------

def mobius(n: int) -> int:
    if n < 1:
        raise ValueError("mobius is defined for n >= 1")
    result = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    if n > 1:
        result = -result
    return result


def witt_number(r: int, k: int) -> int:
    """Rank of the k-th lower central quotient of the free group on r generators."""
    if r < 1 or k < 1:
        raise ValueError("r and k must be positive")
    total = sum(mobius(d) * r ** (k // d) for d in range(1, k + 1) if k % d == 0)
    q, rem = divmod(total, k)
    if rem:
        raise ArithmeticError("Witt sum not divisible by k")
    return q


def order_bound(r: int, k: int) -> tuple[int, int]:
    """(sum_{i<=k} M_r(i), r^k)."""
    s = sum(witt_number(r, i) for i in range(1, k + 1))
    cap = r ** k
    assert s <= cap
    return s, cap


# Reference table for r <= 4, k <= 8 (rows r, columns k).
REFERENCE_WITT_TABLE = {
    1: [1, 0, 0, 0, 0, 0, 0, 0],
    2: [2, 1, 2, 3, 6, 9, 18, 30],
    3: [3, 3, 8, 18, 32, 116, 312, 810],
    4: [4, 6, 20, 60, 204, 4020, 4095, 8160],
}


def witt_table(rmax: int = 4, kmax: int = 8):
    """Rows (r, k, computed, reference or None)."""
    rows = []
    for r in range(1, rmax + 1):
        for k in range(1, kmax + 1):
            pub = REFERENCE_WITT_TABLE.get(r)
            pub_v = pub[k - 1] if pub is not None and k <= len(pub) else None
            rows.append((r, k, witt_number(r, k), pub_v))
    return rows
