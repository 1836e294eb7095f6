"""Independent ground truth: the first-return map of the perturbed foliation.

The foliation df - eps*omega = 0 is integrated as the vector field
(f_y - eps*Q, -f_x + eps*P) from the transversal point of f = t to the next
crossing of the same ray.  The leading order k and M_k are then extracted
from t'(eps) - t by a log-log slope and polynomial extrapolation in eps.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exactpoly import BiPoly
from .geometry import TracingError, _integrate_to_return, _Section
from .melnikov import Scenario

__all__ = [
    "ReturnSample",
    "RichardsonResult",
    "NoSignal",
    "perturbed_velocity",
    "first_return",
    "return_displacements",
    "richardson_mk",
    "neville_at_zero",
    "extrapolation_weights",
]


class NoSignal(RuntimeError):
    """The return displacement is indistinguishable from integrator noise."""


@dataclass(frozen=True)
class ReturnSample:
    t: float
    eps: float
    t_return: float
    err_est: float

    @property
    def displacement(self) -> float:
        return self.t_return - self.t


@dataclass(frozen=True)
class RichardsonResult:
    k: int
    value: float
    uncertainty: float
    slope: float
    slope_residual: float
    eps: tuple = ()
    displacements: tuple = ()
    displacements_neg: tuple = ()


def perturbed_velocity(f: BiPoly, P: BiPoly, Q: BiPoly, eps, x, y):
    """Velocity annihilating df - eps*(P dx + Q dy)."""
    return f.dy(x, y) - eps * Q(x, y), -f.dx(x, y) + eps * P(x, y)


def _return_once(s: Scenario, eps: float, t: float, rtol: float, max_steps: int):
    f, P, Q = s.f, s.P, s.Q
    fx, fy = f.dx, f.dy

    def rhs(_u, p):
        x, y = p[0], p[1]
        return np.array([fy(x, y) - eps * Q(x, y), -fx(x, y) + eps * P(x, y)])

    tr = s.transversal
    p0 = np.array(tr.point(t), dtype=float)
    section = _Section(tr.center, tr.direction, halfline=True)
    lo, hi = tr.bracket

    def inside(q):
        a = section.along(q)
        return lo - 1e-9 <= a <= hi + 1e-9

    scale = max(1.0, float(np.abs(p0).max()))
    _, q, _, _ = _integrate_to_return(rhs, p0, section, rtol=rtol, atol=rtol * 1e-2 * scale,
                                      max_steps=max_steps, min_along=inside)
    return float(f(q[0], q[1]))


def first_return(s: Scenario, eps: float, t: float, rtol: float | None = None, max_steps: int = 50000,
                 estimate_error: bool = False) -> ReturnSample:
    """One return from the transversal point of f = t; raises TracingError when there is none."""
    rtol = rtol or s.oracle_rtol
    t1 = _return_once(s, eps, t, rtol, max_steps)
    if estimate_error:
        t2 = _return_once(s, eps, t, rtol * 100, max_steps)
        err = abs(t1 - t2)
    else:
        err = rtol * max(1.0, abs(t))
    return ReturnSample(float(t), float(eps), t1, err)


def return_displacements(s: Scenario, t: float, eps_grid, rtol: float | None = None) -> np.ndarray:
    return np.array([first_return(s, e, t, rtol).displacement for e in eps_grid])


def neville_at_zero(x, y):
    """Values of the interpolating polynomials through the first j points, at 0 (j = 1..n)."""
    x = np.asarray(x, dtype=float)
    p = np.array(y, dtype=float)
    n = len(x)
    diag = [p[-1]]
    # after step m, p[i] is the interpolant through x[i..i+m] evaluated at 0
    for m in range(1, n):
        p = (x[m:] * p[:-1] - x[:-m] * p[1:]) / (x[m:] - x[:-m])
        diag.append(p[-1])
    return np.array(diag)


def extrapolation_weights(x) -> np.ndarray:
    """Weights w with neville_at_zero(x, y)[-1] == w @ y."""
    x = np.asarray(x, dtype=float)
    return np.array([neville_at_zero(x, e)[-1] for e in np.eye(len(x))])


def richardson_mk(s: Scenario, t: float, eps_grid=None, k_max: int = 6, rtol: float | None = None,
                  noise_floor: float | None = None, symmetric: bool = False) -> RichardsonResult:
    """Leading order k and M_k(t) from the first-return displacement.

    ``eps_grid`` must hold at least four values; k is the rounded log-log
    slope and M_k the extrapolation of d(eps)/eps^k to eps = 0.  The
    uncertainty is the last correction plus the integrator noise
    (rtol * max(1, |t|) per return) pushed through the extrapolation weights.  With ``symmetric`` the returns at -eps
    are also computed and (d(eps) + (-1)^k d(-eps)) / 2, which lacks every
    other power of eps, is extrapolated in eps^2.
    """
    eps = np.sort(np.abs(np.asarray(eps_grid if eps_grid is not None else s.eps_grid, dtype=float)))[::-1]
    if len(eps) < 4:
        raise ValueError("need at least four eps values")
    rtol = rtol or s.oracle_rtol
    d = return_displacements(s, t, eps, rtol)
    floor = noise_floor if noise_floor is not None else 1e3 * rtol * max(1.0, abs(t))
    if np.min(np.abs(d)) <= floor:
        raise NoSignal(f"return displacement {np.min(np.abs(d)):.3e} below noise floor {floor:.3e}")
    le, ld = np.log(eps), np.log(np.abs(d))
    slope = float(np.polyfit(le, ld, 1)[0])
    k = int(round(slope))
    if not 1 <= k <= k_max:
        raise NoSignal(f"fitted order {slope:.2f} outside 1..{k_max}")
    dm = ()
    nodes = eps**2 if symmetric else eps
    if symmetric:
        dm = return_displacements(s, t, -eps, rtol)
        est = neville_at_zero(nodes, (d + (-1) ** k * dm) / 2 / eps**k)
    else:
        est = neville_at_zero(nodes, d / eps**k)
    noise = float(np.abs(extrapolation_weights(nodes)) @ (rtol * max(1.0, abs(t)) / eps**k))
    unc = abs(est[-1] - est[-2]) + noise
    return RichardsonResult(k, float(est[-1]), float(unc), slope, abs(slope - k),
                            tuple(eps.tolist()), tuple(d.tolist()), tuple(np.asarray(dm).tolist()))
