import math

import numpy as np
import pytest

from pontryagin.chen import (REFERENCE_WITT_TABLE, AnalyticOneForm, ChenEvaluator, FreeWord, chen_residuals,
                             iterated_integral, mobius, order_bound, punctured_plane_fixture, realize_free_word,
                             witt_number, witt_table)
from pontryagin.geometry import PathError, analytic_path, commutator_path, path_concat, segment_path

DX = AnalyticOneForm(lambda x, y: 1.0 + 0 * x, None, "dx")


def test_segment_simplex_volume():
    seg = segment_path(0.0, 1.0, n=10)
    assert iterated_integral(seg, ()) == 1.0
    assert iterated_integral(seg, (DX,)) == pytest.approx(1.0, abs=1e-14)
    assert iterated_integral(seg, (DX, DX)) == pytest.approx(0.5, abs=1e-14)
    assert iterated_integral(seg, (DX, DX, DX)) == pytest.approx(1 / 6, abs=1e-14)


def test_repeated_entries():
    w1, w2, a, b = punctured_plane_fixture(0.2 + 0.1j)
    w = AnalyticOneForm(lambda x, y: 1 / (2j * np.pi * (x - 1)) + 0.3 * x, None)
    ev = ChenEvaluator(path_concat(a, b))
    base = ev.value((w,))
    for k in range(1, 6):
        assert abs(ev.value((w,) * k) - base**k / math.factorial(k)) < 1e-8


def test_residue_loop():
    w1, w2, a, b = punctured_plane_fixture()
    assert abs(iterated_integral(a, (w1,)) - 1) < 1e-9
    assert abs(iterated_integral(b, (w2,)) - 1) < 1e-9
    assert abs(iterated_integral(a, (w2,))) < 1e-9


def test_commutator_value():
    w1, w2, a, b = punctured_plane_fixture()
    ev = ChenEvaluator(commutator_path(a, b))
    assert abs(ev.value((w1, w2)) + 1) < 1e-6
    assert abs(ev.value((w2, w1)) - 1) < 1e-6
    assert abs(ev.value((w1,))) < 1e-8 and abs(ev.value((w2,))) < 1e-8


def test_commutator_of_loop_with_itself():
    w1, w2, a, _ = punctured_plane_fixture()
    ev = ChenEvaluator(commutator_path(a, a))
    for word in [(w1,), (w2,), (w1, w1), (w1, w2), (w2, w1), (w2, w2)]:
        assert abs(ev.value(word)) < 1e-8


def test_identities_on_fixture():
    w1, w2, a, b = punctured_plane_fixture()
    res = chen_residuals(a, b, [w1, w2], 4)
    assert max(res.values()) < 1e-8


def test_reversal_cancels():
    w1, w2, a, b = punctured_plane_fixture()
    for form in (w1, w2):
        assert abs(iterated_integral(realize_free_word(FreeWord((1, -1)), [a, b]), (form,))) < 1e-9
        lp = path_concat(a, realize_free_word(FreeWord((-1,)), [a, b]))
        assert abs(iterated_integral(lp, (form,))) < 1e-9


def test_free_words():
    a, b = FreeWord.generator(0), FreeWord.generator(1)
    assert FreeWord((1, 2, -2, -1)).letters == ()
    assert (a * a.inverse()).letters == ()
    assert FreeWord.commutator(a, b).letters == (-1, -2, 1, 2)
    with pytest.raises(ValueError):
        FreeWord((0,))


def test_realize_matches_commutator_path():
    _, _, a, b = punctured_plane_fixture()
    assert realize_free_word(FreeWord((1,)), [a, b]) is a
    w = realize_free_word(FreeWord.commutator(FreeWord.generator(0), FreeWord.generator(1)), [a, b])
    c = commutator_path(a, b)
    for s1, s2 in zip(w.segments, c.segments):
        assert np.array_equal(s1.x, s2.x) and np.array_equal(s1.s, s2.s)


def test_realize_basepoint_mismatch():
    _, _, a, _ = punctured_plane_fixture()
    _, _, _, b = punctured_plane_fixture(0.5j)
    with pytest.raises(PathError):
        realize_free_word(FreeWord((1, 2)), [a, b])


def test_mobius_values():
    assert [mobius(n) for n in (1, 2, 3, 4, 5, 6, 12, 30)] == [1, -1, -1, 0, -1, 1, 0, -1]
    with pytest.raises(ValueError):
        mobius(0)


def test_witt_examples():
    assert witt_number(2, 3) == 2
    assert witt_number(3, 6) == 116
    assert witt_number(4, 6) == 670
    assert all(witt_number(r, 1) == r for r in range(1, 9))
    assert witt_number(1, 5) == 0


def test_witt_divisibility():
    for r in range(1, 13):
        for k in range(1, 13):
            total = sum(mobius(d) * r ** (k // d) for d in range(1, k + 1) if k % d == 0)
            assert total % k == 0


def test_witt_table_discrepancies():
    diffs = {(r, k): (v, pub) for r, k, v, pub in witt_table(4, 8) if pub != v}
    assert diffs == {(3, 5): (48, 32), (4, 6): (670, 4020), (4, 7): (2340, 4095)}
    assert len(REFERENCE_WITT_TABLE) == 4


def test_order_bound():
    assert order_bound(2, 3) == (5, 8)
    assert order_bound(3, 2) == (6, 9)
    assert all(order_bound(1, k) == (1, 1) for k in range(1, 6))


def test_reparameterization():
    w = AnalyticOneForm(lambda x, y: 1 / (2j * np.pi * (x - 1)) + x**2, None)
    v = AnalyticOneForm(lambda x, y: 1 / (2j * np.pi * (x + 1)) - 0.5j * x, None)

    def loop(phi, dphi, n):
        z = lambda s: 1 - np.exp(1j * phi(s))  # noqa: E731
        dz = lambda s: -1j * dphi(s) * np.exp(1j * phi(s))  # noqa: E731
        return analytic_path(z, dz, 0.0, 1.0, n)

    base = loop(lambda s: 2 * np.pi * s, lambda s: 2 * np.pi + 0 * s, 4000)
    dense = loop(lambda s: 2 * np.pi * s, lambda s: 2 * np.pi + 0 * s, 8000)
    warped = loop(lambda s: 2 * np.pi * (s + 0.1 * np.sin(2 * np.pi * s)),
                  lambda s: 2 * np.pi * (1 + 0.2 * np.pi * np.cos(2 * np.pi * s)), 8000)
    for word in [(w,), (w, v), (v, w, w), (w, v, v, w)]:
        ref = iterated_integral(base, word)
        assert abs(iterated_integral(dense, word) - ref) < 1e-8
        assert abs(iterated_integral(warped, word) - ref) < 1e-8
