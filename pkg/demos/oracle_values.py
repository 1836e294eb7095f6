"""Independent reference values frozen into the tests.

Ovals of f = y^2 + (x^2 - 1)^2 = t are described by y = +-sqrt(t - (x^2-1)^2),
so areas and moments reduce to one-dimensional quadratures (scipy.quad).
Clockwise orientation turns the loop integrals into
    oint y dx   = +area,
    oint x^3 dy = -3 * int x^2 dA.
The transversal values for x*(y^2 - (x-3)^2) come from bisection on y = 0.
"""
import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq


def half_height(x, t):
    return np.sqrt(max(t - (x * x - 1) ** 2, 0.0))


def interior_area(t):
    a, b = np.sqrt(1 - np.sqrt(t)), np.sqrt(1 + np.sqrt(t))
    return 2 * quad(half_height, a, b, args=(t,), epsabs=1e-13, epsrel=1e-13, limit=200)[0]


def exterior_area(t):
    b = np.sqrt(1 + np.sqrt(t))
    return 2 * quad(half_height, -b, b, args=(t,), epsabs=1e-13, epsrel=1e-13, limit=200, points=[0.0])[0]


def exterior_x3dy(t):
    b = np.sqrt(1 + np.sqrt(t))
    g = lambda x: 2 * x * x * half_height(x, t)  # noqa: E731
    return -3 * quad(g, -b, b, epsabs=1e-13, epsrel=1e-13, limit=200)[0]


def example1_root(t):
    # along y = 0 from the minimum (1, 0), f = -x (x - 3)^2 rises from -4 to 0 at x = 3
    return brentq(lambda x: -x * (x - 3) ** 2 - t, 1.0, 3.0, xtol=1e-15)


if __name__ == "__main__":
    for t in (0.25, 0.5, 0.75):
        print(f"interior area      t={t}: {interior_area(t)!r}")
    for t in (1.5, 2.0, 3.0):
        print(f"exterior area      t={t}: {exterior_area(t)!r}")
        print(f"exterior oint x^3dy t={t}: {exterior_x3dy(t)!r}")
    for t in (-3.0, -1.0):
        print(f"example1 transversal x at t={t}: {example1_root(t)!r}")
