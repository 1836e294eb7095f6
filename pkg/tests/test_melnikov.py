import dataclasses

import numpy as np
import pytest
from conftest import scenario

from pontryagin.exactpoly import parse_polynomial as P
from pontryagin.forms import RationalOneForm, denominator_ok, df_form
from pontryagin.melnikov import (WordCombination, closed_word_derivative, combination_table, evaluate_combination,
                                 first_nonvanishing_order, francoise_mk, gl_derivative, melnikov_1, melnikov_2,
                                 melnikov_3, melnikov_4_closed, recursion_combination, rotated)

# areas and moments of the ovals of y^2 + (x^2-1)^2 = t, by scipy quad (see demos/)
INTERIOR_AREA = {0.25: 0.4028698615212542, 0.5: 0.8314631839162832, 0.75: 1.3010168341054262}
EXTERIOR_AREA = {1.5: 5.810486275818293, 2.0: 7.345439657036357, 3.0: 9.941893850610846}
EXTERIOR_X3DY = {1.5: -13.151156485764364, 2.0: -17.15064140364674, 3.0: -25.110436271439607}


def with_omega(name, p, q, grid=None):
    s = scenario(name, grid)
    return dataclasses.replace(s, P=P(p), Q=P(q))


def test_circle_abelian_integral():
    s = scenario("circle")
    tab = melnikov_1(s)
    assert np.max(np.abs(tab.values + 2 * np.pi * s.t_grid)) < 1e-8
    assert tab.k == 1 and np.all(np.isfinite(tab.values))


def test_exact_form_vanishes():
    f = "(x^2 + y^2)/2"
    s = with_omega("circle", "x", "y", grid=[0.3, 1.0, 1.7])
    assert np.max(np.abs(melnikov_1(s).values)) < 1e-10
    assert np.max(np.abs(melnikov_2(s).values)) < 1e-10
    assert np.max(np.abs(melnikov_3(s).values)) < 1e-10
    assert first_nonvanishing_order(s, 3)[0] is None
    assert P(f) == s.f


@pytest.mark.parametrize("t", sorted(INTERIOR_AREA))
def test_interior_area(t):
    s = scenario("elliptic_interior", [t])
    assert abs(melnikov_1(s).values[0] - INTERIOR_AREA[t]) < 1e-9


@pytest.mark.parametrize("t", sorted(EXTERIOR_X3DY))
def test_exterior_moment(t):
    s = scenario("elliptic_exterior", [t])
    assert abs(melnikov_1(s).values[0] - EXTERIOR_X3DY[t]) < 1e-8


@pytest.mark.parametrize("t", sorted(EXTERIOR_AREA))
def test_example2_second_order(t):
    s = scenario("example2", [t])
    assert np.max(np.abs(melnikov_1(s).values)) < 1e-8
    assert abs(melnikov_2(s).values[0] + EXTERIOR_AREA[t]) < 1e-8
    _, tab = francoise_mk(s, 2)
    assert abs(tab.values[0] + EXTERIOR_AREA[t]) < 1e-8


def test_circle_second_order_vanishes():
    s = with_omega("circle", "0", "x^2", grid=[0.2, 0.7, 1.3, 2.0])
    assert np.max(np.abs(melnikov_1(s).values)) < 1e-8
    assert np.max(np.abs(melnikov_2(s).values)) < 1e-8


def test_precondition_reports_lower_order():
    s = scenario("circle", [0.5, 1.0])
    tab = melnikov_2(s)
    assert tab.k == 1 and tab.flags["first_nonvanishing"] == 1
    assert francoise_mk(s, 3)[1].flags["first_nonvanishing"] == 1


def test_example1_order():
    s = scenario("example1")
    assert melnikov_1(s).max_abs() < s.vanish_tol
    k, tab = first_nonvanishing_order(s, 4)
    assert k == 3
    assert tab.max_abs() > 1e3 * s.vanish_tol


def test_k1_recursion_is_abelian_integral():
    s = scenario("circle", [0.4, 1.1])
    assert np.array_equal(francoise_mk(s, 1)[1].values, melnikov_1(s).values)


@pytest.mark.parametrize("name", ["example2", "circle_k2"])
def test_recursion_matches_second_order_formula(name):
    s = scenario(name)
    a = melnikov_2(s).values
    b = francoise_mk(s, 2)[1].values
    assert np.max(np.abs(a - b)) < 1e-8


def test_recursion_matches_third_order_formula():
    s = scenario("example1")
    a = melnikov_3(s).values
    b = francoise_mk(s, 3)[1].values
    assert np.max(np.abs(a - b)) < 1e-7


def test_fourth_order_closed_formula():
    s = scenario("circle_k4")
    dx = RationalOneForm.polynomial(P("1"), P("0"))
    closed = melnikov_4_closed(s, dx).values
    _, tab = francoise_mk(s, 4, omega_prime=dx)
    assert np.max(np.abs(closed - tab.values)) < 1e-8
    assert np.max(np.abs(closed + 6 * np.pi * s.t_grid**3)) < 1e-6 * np.max(np.abs(closed))


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_word_lengths_and_denominators(k):
    s = scenario("example1")
    comb = recursion_combination(s.omega, s.cert, k)
    assert comb.max_length <= k
    assert all(denominator_ok(w, s.cert) for w in comb.entries())


def test_gelfand_leray_representative_independence():
    s = scenario("example1")
    w = s.omega
    wp = gl_derivative(w, s.cert)
    h = P("1 - x*y + 2*y^3")
    shifted = wp.add(df_form(s.f).times_poly(h), s.f)
    a = melnikov_3(s).values
    b = melnikov_3(s, omega_prime=shifted).values
    assert np.max(np.abs(a - b)) < 1e-6 * np.max(np.abs(a))
    s2 = scenario("example2")
    wp2 = gl_derivative(s2.omega, s2.cert).add(df_form(s2.f).times_poly(P("x^2 - 3*y")), s2.f)
    a2 = melnikov_2(s2).values
    b2 = melnikov_2(s2, omega_prime=wp2).values
    assert np.max(np.abs(a2 - b2)) < 1e-6 * np.max(np.abs(a2))


@pytest.mark.parametrize("name,k", [("example2", 2), ("example1", 3)])
def test_basepoint_independence(name, k):
    s = scenario(name)
    comb, tab = francoise_mk(s, k)
    paths = []
    for t in s.t_grid:
        oval = s.oval(t)
        paths.append(rotated(oval, (len(oval.segments[0].s) - 1) // 3))
    moved = combination_table(s, comb, k, "moved", paths)
    assert np.max(np.abs(moved.values - tab.values)) < 1e-6 * tab.max_abs()


def test_closed_loop_derivative_identity():
    # d/dt of the abelian integral equals the integral of a Gelfand-Leray form of d(omega)
    s = scenario("elliptic_exterior")
    comb = WordCombination.word(s.omega)
    der = closed_word_derivative(comb, s.cert)
    assert len(der) == 1
    h = 1e-3
    for t in (1.5, 2.2):
        fd = (evaluate_combination(comb, s.oval(t + h)) - evaluate_combination(comb, s.oval(t - h))) / (2 * h)
        exact = evaluate_combination(der, s.oval(t), s.transversal, t)
        assert abs(fd - exact) < 1e-6 * max(1.0, abs(exact))


@pytest.mark.parametrize("name,k", [("example2", 2), ("example1", 3)])
def test_derivative_finite_difference(name, k):
    s = scenario(name)
    comb = recursion_combination(s.omega, s.cert, k)
    der = closed_word_derivative(comb, s.cert)
    h = 1e-3
    for t in s.t_grid[2:4]:
        fp = evaluate_combination(comb, s.oval(t + h), s.transversal, t + h)
        fm = evaluate_combination(comb, s.oval(t - h), s.transversal, t - h)
        fd = (fp - fm) / (2 * h)
        exact = evaluate_combination(der, s.oval(t), s.transversal, t)
        assert abs(fd - exact) < 1e-5 * abs(exact)


def test_derivative_consistency_on_grid():
    grid = np.linspace(1.5, 1.6, 21)
    s = scenario("example2", grid)
    comb = recursion_combination(s.omega, s.cert, 2)
    tab = combination_table(s, comb, 2, "M2")
    der = combination_table(s, closed_word_derivative(comb, s.cert), 2, "dM2")
    num = np.gradient(tab.values.real, grid)
    inner = slice(2, -2)
    rel = np.abs(num[inner] - der.values.real[inner]) / np.max(np.abs(der.values))
    assert np.max(rel) < 1e-4


def test_word_combination_algebra():
    w = RationalOneForm.polynomial(P("y"), P("0"))
    v = RationalOneForm.polynomial(P("0"), P("x"))
    a = WordCombination.word(w, v)
    assert len(a - a) == 0
    assert (a + a).prepend(v).max_length == 3
    assert str(WordCombination()) is not None
