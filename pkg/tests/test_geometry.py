import math

import numpy as np
import pytest
from scipy.optimize import bisect

from pontryagin.exactpoly import parse_polynomial
from pontryagin.geometry import (PathError, TracingError, TransversalSpec, circle_path, commutator_path,
                                 critical_points, cumulative_integral, path_concat, path_reverse, segment_path,
                                 trace_oval, transversal_point)

from conftest import CIRCLE, ELLIPTIC, EXAMPLE1

P = parse_polynomial


def kinds(f):
    return [(c.kind, round(c.point.x, 9), round(c.point.y, 9), round(c.value, 9)) for c in critical_points(P(f))]


def test_critical_points_bundled():
    assert kinds(CIRCLE) == [("min", 0.0, 0.0, 0.0)]
    assert kinds(ELLIPTIC) == [("min", -1.0, 0.0, 0.0), ("saddle", 0.0, 0.0, 1.0), ("min", 1.0, 0.0, 0.0)]
    ex = kinds(EXAMPLE1)
    assert ("min", 1.0, 0.0, -4.0) in ex
    assert [k for k, *_ in ex].count("saddle") == 3
    assert sorted(v for *_, v in ex) == [-4.0, 0.0, 0.0, 0.0]


def test_critical_points_non_morse():
    assert kinds("x^3 + y^2")[0][0] == "non-Morse"


def test_transversal_points():
    f = P(CIRCLE)
    tr = TransversalSpec.auto(f, (0, 0), (1, 0), 3.0)
    for t in (0.1, 0.5, 2.0):
        p = transversal_point(f, tr, t)
        assert p.x == pytest.approx(math.sqrt(2 * t), rel=1e-14) and p.y == 0
    fe = P(ELLIPTIC)
    tr = TransversalSpec.auto(fe, (1, 0), (1, 0), 0.99)
    for t in (0.1, 0.5, 0.9):
        assert tr.point(t)[0] == pytest.approx(math.sqrt(1 + math.sqrt(t)), rel=1e-14)
    f1 = P(EXAMPLE1)
    tr = TransversalSpec.auto(f1, (1, 0), (1, 0), -0.01)
    for t in (-3.0, -1.0):
        x = tr.point(t)[0]
        oracle = bisect(lambda u: -u * (u - 3) ** 2 - t, 1.0, 3.0, xtol=1e-15)
        assert x == pytest.approx(oracle, abs=1e-12)
        assert abs(f1(x, 0.0) - t) < 1e-12
    with pytest.raises(ValueError):
        tr.point(0.5)


def test_transversal_must_be_monotone():
    f = P(ELLIPTIC)
    with pytest.raises(ValueError):
        TransversalSpec(f, (0.0, 0.0), (1.0, 0.0), (0.0, 2.0))


def test_trace_circle():
    f = P(CIRCLE)
    tr = TransversalSpec.auto(f, (0, 0), (1, 0), 3.0)
    path = trace_oval(f, 0.5, tr)
    assert path.closed and path.closure_gap() == 0.0
    assert path.meta["period"] == pytest.approx(2 * math.pi, abs=1e-8)
    assert path.fiber_residual(f) < 1e-10
    x, y = path.points()
    assert np.allclose(np.hypot(x, y), 1.0, atol=1e-10)
    seg = path.segments[0]
    # clockwise: leaving (1, 0) downward
    assert seg.x[0] == pytest.approx(1.0) and seg.vy[0] < 0
    assert path.max_spacing() <= 2e-3


def test_trace_elliptic_interior_and_exterior():
    f = P(ELLIPTIC)
    inner = trace_oval(f, 0.5, (1.5, 0.0))
    x, _ = inner.points()
    assert inner.fiber_residual(f) < 1e-10 and x.min() > 0
    outer = trace_oval(f, 2.0, (0.0, 1.5))
    x, _ = outer.points()
    assert outer.fiber_residual(f) < 1e-10
    assert x.min() < -1 and x.max() > 1  # encloses both centers


def test_period_stable_under_refinement():
    f = P(ELLIPTIC)
    tr = TransversalSpec.auto(f, (1, 0), (1, 0), 0.99)
    a = trace_oval(f, 0.5, tr).meta["period"]
    b = trace_oval(f, 0.5, tr, rtol=1e-13, h_max=1e-3).meta["period"]
    assert abs(a - b) < 1e-6 * a


def test_trace_unbounded_fails():
    f = P("x^2 - y^2 + 3")
    with pytest.raises(TracingError):
        trace_oval(f, 1.0, (0.0, 1.4142135623730951), max_steps=2000)


def test_cumulative_integral_order():
    errs = []
    for n in (16, 32, 64):
        s = np.linspace(0, 1, n + 1)
        errs.append(abs(cumulative_integral(np.exp(s), 1 / n)[-1] - (math.e - 1)))
    assert errs[-1] < 1e-8
    assert np.log2(errs[1] / errs[2]) > 3.8
    assert cumulative_integral(np.ones(2), 0.5)[-1] == 0.5
    assert cumulative_integral(np.array([0.0, 1, 2]), 1.0)[-1] == pytest.approx(2.0)


def test_path_algebra():
    a = circle_path(1.0, 1.0, math.pi, n=64)
    b = circle_path(-1.0, 1.0, 0.0, n=64)
    assert path_reverse(path_reverse(a)).segments[0].x.tolist() == a.segments[0].x.tolist()
    ab = path_concat(a, b)
    assert ab.closed and len(ab.segments) == 2
    c = commutator_path(a, b)
    assert len(c.segments) == 4 and c.closed
    with pytest.raises(PathError):
        path_concat(a, segment_path(5.0, 6.0))
    with pytest.raises(PathError):
        commutator_path(a, circle_path(3.0, 1.0, 0.0, n=64))
