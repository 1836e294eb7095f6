"""Numeric fiber geometry: critical points, transversals, oval tracing and path algebra.

Paths are piecewise: each :class:`Segment` carries a uniform parameter grid
together with points and exact velocities, so line and iterated integrals can
be evaluated with a fixed high-order rule.  Concatenation just joins segment
lists, which keeps every operation exact at the sample level.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.integrate import DOP853
from scipy.optimize import brentq

from .exactpoly import BiPoly

__all__ = [
    "Point",
    "CriticalPoint",
    "Segment",
    "Path",
    "TransversalSpec",
    "Jet",
    "TracingError",
    "PathError",
    "critical_points",
    "trace_oval",
    "transversal_point",
    "path_concat",
    "path_reverse",
    "commutator_path",
    "analytic_path",
    "circle_path",
    "segment_path",
    "cumulative_integral",
]

FIBER_TOL = 1e-10
CLOSURE_TOL = 1e-8
H_MAX = 2e-3


class TracingError(RuntimeError):
    pass


class PathError(ValueError):
    pass


class Point(NamedTuple):
    x: complex
    y: complex


class CriticalPoint(NamedTuple):
    point: Point
    kind: str  # "min", "max", "saddle" or "non-Morse"
    value: float

    @property
    def is_center(self) -> bool:
        return self.kind in ("min", "max")


# ---------------------------------------------------------------------------
# truncated Taylor series
# ---------------------------------------------------------------------------

class Jet:
    """Truncated power series sum_k c_k d^k, enough ring structure to run
    compiled polynomial evaluators on it."""

    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=complex if np.iscomplexobj(coeffs) else float)

    @classmethod
    def variable(cls, x0, order: int) -> "Jet":
        c = np.zeros(order + 1, dtype=np.result_type(x0, float))
        c[0] = x0
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @property
    def order(self) -> int:
        return len(self.c) - 1

    def _other(self, o):
        if isinstance(o, Jet):
            return o.c
        out = np.zeros_like(self.c, dtype=np.result_type(self.c, o))
        out[0] = o
        return out

    def __add__(self, o):
        return Jet(self.c + self._other(o))

    __radd__ = __add__

    def __sub__(self, o):
        return Jet(self.c - self._other(o))

    def __rsub__(self, o):
        return Jet(self._other(o) - self.c)

    def __neg__(self):
        return Jet(-self.c)

    def __mul__(self, o):
        if not isinstance(o, Jet):
            return Jet(self.c * o)
        n = len(self.c)
        return Jet(np.convolve(self.c, o.c)[:n])

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        a = self.c
        n = len(a)
        b = np.zeros(n, dtype=a.dtype)
        b[0] = 1.0 / a[0]
        for k in range(1, n):
            b[k] = -np.dot(a[1:k + 1], b[k - 1::-1][:k]) / a[0]
        return Jet(b)

    def __truediv__(self, o):
        if not isinstance(o, Jet):
            return Jet(self.c / o)
        return self * o.reciprocal()

    def __rtruediv__(self, o):
        return self.reciprocal() * o

    def derivative(self) -> "Jet":
        n = len(self.c)
        d = np.zeros_like(self.c)
        d[:n - 1] = self.c[1:] * np.arange(1, n)
        return Jet(d)

    def taylor_derivatives(self) -> np.ndarray:
        """[F(0), F'(0), F''(0), ...]."""
        return self.c * np.array([math.factorial(k) for k in range(len(self.c))])


# ---------------------------------------------------------------------------
# critical points
# ---------------------------------------------------------------------------

def critical_points(f: BiPoly, box=(-5.0, 5.0, -5.0, 5.0), grid: int = 25, tol: float = 1e-9) -> list[CriticalPoint]:
    """Real critical points in ``box`` by Newton from a seed grid, classified by the Hessian."""
    fx, fy = f.dx, f.dy
    fxx, fxy, fyy = fx.dx, fx.dy, fy.dy
    found: list[np.ndarray] = []
    x0, x1, y0, y1 = box
    for sx in np.linspace(x0, x1, grid):
        for sy in np.linspace(y0, y1, grid):
            p = np.array([sx, sy], dtype=float)
            for _ in range(60):
                g = np.array([fx(*p), fy(*p)])
                H = np.array([[fxx(*p), fxy(*p)], [fxy(*p), fyy(*p)]])
                try:
                    step = np.linalg.solve(H, g)
                except np.linalg.LinAlgError:
                    break
                p = p - step
                if not np.all(np.isfinite(p)) or np.abs(p).max() > 1e6:
                    break
                if np.linalg.norm(step) < 1e-14 * max(1.0, np.linalg.norm(p)):
                    break
            if not np.all(np.isfinite(p)):
                continue
            if abs(fx(*p)) + abs(fy(*p)) > 1e-8:
                continue
            if not (x0 <= p[0] <= x1 and y0 <= p[1] <= y1):
                continue
            if any(np.linalg.norm(p - q) < 1e-6 for q in found):
                continue
            found.append(p)
    out = []
    for p in sorted(found, key=lambda q: (round(q[0], 9), round(q[1], 9))):
        H = np.array([[fxx(*p), fxy(*p)], [fxy(*p), fyy(*p)]])
        det = np.linalg.det(H)
        scale = max(1.0, np.abs(H).max() ** 2)
        if abs(det) <= tol * scale:
            kind = "non-Morse"
        elif det < 0:
            kind = "saddle"
        else:
            kind = "min" if H[0, 0] > 0 else "max"
        x, y = (0.0 if abs(v) < 1e-13 else float(v) for v in p)
        out.append(CriticalPoint(Point(x, y), kind, float(f(x, y))))
    return out


# ---------------------------------------------------------------------------
# transversals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransversalSpec:
    """The ray center + s * direction, s in ``bracket``, on which f is strictly monotone."""

    f: BiPoly
    center: tuple[float, float]
    direction: tuple[float, float]
    bracket: tuple[float, float]

    def __post_init__(self):
        ux, uy = self.direction
        n = math.hypot(ux, uy)
        object.__setattr__(self, "direction", (ux / n, uy / n))
        s = np.linspace(*self.bracket, 201)
        vals = self.phi(s)
        dv = np.diff(vals)
        if not (np.all(dv > 0) or np.all(dv < 0)):
            raise ValueError("f is not strictly monotone on the transversal bracket")

    @classmethod
    def auto(cls, f: BiPoly, center, direction, t_far: float, s_max: float = 50.0) -> "TransversalSpec":
        """Bracket from the center out to where f first reaches ``t_far`` (or stops being monotone)."""
        ux, uy = direction
        n = math.hypot(ux, uy)
        ux, uy = ux / n, uy / n
        s = np.linspace(0.0, s_max, 200001)
        vals = f(center[0] + s * ux, center[1] + s * uy)
        d = np.diff(vals)
        sign = np.sign(d[1] if d[0] == 0 else d[0])
        bad = np.nonzero(np.sign(d) != sign)[0]
        end = bad[0] if len(bad) else len(s) - 1
        beyond = np.nonzero((vals - t_far) * sign >= 0)[0]
        if len(beyond):
            end = min(end, beyond[0])
        return cls(f, tuple(center), (ux, uy), (0.0, float(s[end])))

    def phi(self, s):
        cx, cy = self.center
        ux, uy = self.direction
        return self.f(cx + s * ux, cy + s * uy)

    @property
    def t_range(self) -> tuple[float, float]:
        a, b = (float(v) for v in self.phi(np.array(self.bracket)))
        return (min(a, b), max(a, b))

    def s_of(self, t: float) -> float:
        lo, hi = self.bracket
        g = lambda s: float(self.phi(s)) - t  # noqa: E731
        glo, ghi = g(lo), g(hi)
        if glo == 0:
            return lo
        if glo * ghi > 0:
            raise ValueError(f"transversal bracket does not straddle t={t}")
        s = brentq(g, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
        ux, uy = self.direction
        fx, fy = self.f.dx, self.f.dy
        cx, cy = self.center
        for _ in range(2):
            x, y = cx + s * ux, cy + s * uy
            d = fx(x, y) * ux + fy(x, y) * uy
            if d != 0:
                s -= (self.f(x, y) - t) / d
        return float(s)

    def point(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        s = np.array([self.s_of(v) for v in t_arr])
        cx, cy = self.center
        ux, uy = self.direction
        x, y = cx + s * ux, cy + s * uy
        if np.ndim(t) == 0:
            return float(x[0]), float(y[0])
        return x, y

    def velocity(self, t):
        """d tau / dt = direction / (grad f . direction)."""
        x, y = self.point(t)
        ux, uy = self.direction
        d = self.f.dx(x, y) * ux + self.f.dy(x, y) * uy
        return ux / d, uy / d

    def jet(self, t0: float, order: int):
        """Taylor jets (x(t0+d), y(t0+d)) of the transversal curve."""
        s0 = self.s_of(t0)
        cx, cy = self.center
        ux, uy = self.direction
        delta = Jet.variable(0.0, order)
        s = Jet(np.r_[s0, np.zeros(order)])
        fx, fy = self.f.dx, self.f.dy
        for _ in range(order + 2):
            x, y = cx + s * ux, cy + s * uy
            resid = self.f(x, y) - (delta + t0)
            slope = fx(x, y) * ux + fy(x, y) * uy
            s = s - resid / slope
        return cx + s * ux, cy + s * uy

    def side_sign(self, x, y):
        """Signed distance of points from the transversal line (cross product with the direction)."""
        cx, cy = self.center
        ux, uy = self.direction
        return ux * (y - cy) - uy * (x - cx)

    def on_ray(self, x, y):
        cx, cy = self.center
        ux, uy = self.direction
        return ux * (x - cx) + uy * (y - cy)


def transversal_point(f: BiPoly, spec: TransversalSpec, t: float) -> Point:
    if spec.f is not f and spec.f != f:
        raise ValueError("transversal built for a different polynomial")
    x, y = spec.point(t)
    return Point(x, y)


# ---------------------------------------------------------------------------
# paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    """Samples on a uniform parameter grid with the exact velocity at each sample."""

    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    vx: np.ndarray
    vy: np.ndarray

    @property
    def h(self) -> float:
        return float(self.s[1] - self.s[0])

    def reversed(self) -> "Segment":
        s_end = self.s[-1]
        return Segment(
            (s_end - self.s[::-1]) + self.s[0],
            self.x[::-1].copy(),
            self.y[::-1].copy(),
            -self.vx[::-1],
            -self.vy[::-1],
        )

    def shifted(self, ds: float) -> "Segment":
        return Segment(self.s + ds, self.x, self.y, self.vx, self.vy)


@dataclass(frozen=True)
class Path:
    segments: tuple[Segment, ...]
    t: complex | None = None
    closed: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def start(self) -> Point:
        s = self.segments[0]
        return Point(s.x[0], s.y[0])

    @property
    def end(self) -> Point:
        s = self.segments[-1]
        return Point(s.x[-1], s.y[-1])

    @property
    def length_param(self) -> float:
        return float(sum(seg.s[-1] - seg.s[0] for seg in self.segments))

    @property
    def n_samples(self) -> int:
        return sum(len(seg.s) for seg in self.segments)

    def points(self):
        return np.concatenate([seg.x for seg in self.segments]), np.concatenate([seg.y for seg in self.segments])

    def arclength(self) -> float:
        total = 0.0
        for seg in self.segments:
            speed = np.hypot(np.abs(seg.vx), np.abs(seg.vy))
            total += float(cumulative_integral(speed, seg.h)[-1])
        return total

    def max_spacing(self) -> float:
        return max(float(np.max(np.hypot(np.abs(np.diff(seg.x)), np.abs(np.diff(seg.y))))) for seg in self.segments)

    def fiber_residual(self, f: BiPoly) -> float:
        if self.t is None:
            return 0.0
        x, y = self.points()
        return float(np.max(np.abs(f(x, y) - self.t)))

    def closure_gap(self) -> float:
        a, b = self.start, self.end
        return float(abs(a.x - b.x) + abs(a.y - b.y))


def _same_point(a: Point, b: Point, tol: float) -> bool:
    return abs(a.x - b.x) <= tol and abs(a.y - b.y) <= tol


def path_reverse(path: Path) -> Path:
    segs = [seg.reversed() for seg in reversed(path.segments)]
    return Path(tuple(_relabel(segs)), path.t, path.closed)


def _relabel(segs: Sequence[Segment]) -> list[Segment]:
    out = []
    s0 = 0.0
    for seg in segs:
        out.append(seg.shifted(s0 - seg.s[0]))
        s0 = out[-1].s[-1]
    return out


def path_concat(*paths: Path, tol: float = CLOSURE_TOL) -> Path:
    """l1 followed by l2 (followed by ...); endpoints and fibers must match."""
    if not paths:
        raise PathError("nothing to concatenate")
    segs = list(paths[0].segments)
    t = paths[0].t
    for prev, nxt in zip(paths, paths[1:]):
        if not _same_point(prev.end, nxt.start, tol):
            raise PathError("endpoint mismatch in concatenation")
        if (t is None) != (nxt.t is None) or (t is not None and abs(t - nxt.t) > 1e-12 * max(1.0, abs(t))):
            raise PathError("fiber mismatch in concatenation")
        segs.extend(nxt.segments)
    closed = _same_point(paths[0].start, paths[-1].end, tol)
    return Path(tuple(_relabel(segs)), t, closed)


def commutator_path(alpha: Path, beta: Path, tol: float = CLOSURE_TOL) -> Path:
    """The loop alpha^-1 beta^-1 alpha beta (first factor traversed first)."""
    if not (alpha.closed and beta.closed):
        raise PathError("commutator needs closed loops")
    if not _same_point(alpha.start, beta.start, tol):
        raise PathError("basepoint mismatch")
    return path_concat(path_reverse(alpha), path_reverse(beta), alpha, beta, tol=tol)


def analytic_path(z: Callable, dz: Callable, s0: float, s1: float, n: int, t=None, w: Callable | None = None,
                  dw: Callable | None = None) -> Path:
    """Path from an analytic parameterization; ``z`` gives x(s), ``w`` gives y(s) (default 0)."""
    n = max(int(n), 4)
    s = np.linspace(s0, s1, n + 1)
    x = np.asarray(z(s))
    vx = np.asarray(dz(s))
    if w is None:
        y = np.zeros_like(x)
        vy = np.zeros_like(vx)
    else:
        y = np.asarray(w(s))
        vy = np.asarray(dw(s))
    seg = Segment(s, x, y, vx, vy)
    closed = _same_point(Point(x[0], y[0]), Point(x[-1], y[-1]), 1e-12)
    return Path((seg,), t, closed)


def circle_path(center: complex, radius: float, start_angle: float = 0.0, turns: float = 1.0,
                n: int = 4000, phase=None) -> Path:
    """Counterclockwise circle in the complex x-line (y = 0), parameter = angle."""
    a0 = start_angle

    def z(s):
        return center + radius * np.exp(1j * (a0 + s))

    def dz(s):
        return 1j * radius * np.exp(1j * (a0 + s))

    p = analytic_path(z, dz, 0.0, 2 * np.pi * turns, n)
    if abs(turns - round(turns)) < 1e-15:
        seg = p.segments[0]
        x = seg.x.copy()
        x[-1] = x[0]
        p = Path((Segment(seg.s, x, seg.y, seg.vx, seg.vy),), None, True)
    return p


def segment_path(a: complex, b: complex, n: int = 400, a_y: complex = 0.0, b_y: complex = 0.0) -> Path:
    """Straight segment from (a, a_y) to (b, b_y)."""
    return analytic_path(
        lambda s: a + (b - a) * s,
        lambda s: (b - a) + 0 * s,
        0.0, 1.0, n,
        w=lambda s: a_y + (b_y - a_y) * s,
        dw=lambda s: (b_y - a_y) + 0 * s,
    )


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def cumulative_integral(values: np.ndarray, h: float) -> np.ndarray:
    """Running integral on a uniform grid, fourth order (local cubic interpolation)."""
    v = np.asarray(values)
    n = len(v)
    out = np.zeros(n, dtype=np.result_type(v, float))
    if n < 2:
        return out
    if n == 2:
        out[1] = 0.5 * h * (v[0] + v[1])
        return out
    if n == 3:
        out[1] = h / 12 * (5 * v[0] + 8 * v[1] - v[2])
        out[2] = h / 3 * (v[0] + 4 * v[1] + v[2])
        return out
    inc = np.empty(n - 1, dtype=out.dtype)
    inc[0] = h / 24 * (9 * v[0] + 19 * v[1] - 5 * v[2] + v[3])
    inc[1:-1] = h / 24 * (-v[:-3] + 13 * v[1:-2] + 13 * v[2:-1] - v[3:])
    inc[-1] = h / 24 * (v[-4] - 5 * v[-3] + 19 * v[-2] + 9 * v[-1])
    out[1:] = np.cumsum(inc)
    return out


# ---------------------------------------------------------------------------
# oval tracing
# ---------------------------------------------------------------------------

class _Section:
    """A line through ``base`` along ``direction``; crossings are detected with
    the orientation of the initial crossing."""

    def __init__(self, base, direction, halfline: bool):
        self.base = np.asarray(base, dtype=float)
        d = np.asarray(direction, dtype=float)
        self.d = d / np.linalg.norm(d)
        self.halfline = halfline

    def g(self, p):
        r = p - self.base
        return self.d[0] * r[1] - self.d[1] * r[0]

    def along(self, p):
        r = p - self.base
        return self.d[0] * r[0] + self.d[1] * r[1]


def _integrate_to_return(rhs, p0, section: _Section, *, rtol, atol, max_steps, first_step=None,
                         min_along=None):
    """Integrate until the trajectory crosses ``section`` again in the initial direction.

    Returns (T, endpoint, dense interpolants with their spans, max speed).
    """
    v0 = rhs(0.0, p0)
    direction = np.sign(section.d[0] * v0[1] - section.d[1] * v0[0])
    if direction == 0:
        raise TracingError("flow is tangent to the section at the start point")
    solver = DOP853(rhs, 0.0, np.array(p0, dtype=float), t_bound=np.inf, rtol=rtol, atol=atol,
                    first_step=first_step)
    pieces = []
    g_prev = 0.0
    vmax = float(np.hypot(*v0))
    left = False
    for _ in range(max_steps):
        msg = solver.step()
        if solver.status == "failed":
            raise TracingError(f"integrator failed: {msg}")
        dense = solver.dense_output()
        pieces.append((solver.t_old, solver.t, dense))
        p = solver.y
        vmax = max(vmax, float(np.hypot(*rhs(solver.t, p))))
        g_new = section.g(p) * direction
        if g_new > 0:
            left = True
        if left and g_prev < 0 <= g_new:
            ok = True
            a, b = solver.t_old, solver.t
            T = brentq(lambda s: section.g(dense(s)) * direction, a, b, xtol=1e-15, rtol=1e-15, maxiter=200)
            q = dense(T)
            if section.halfline and section.along(q) < 0:
                ok = False
            if min_along is not None and not min_along(q):
                ok = False
            if ok:
                return T, q, pieces, vmax
        g_prev = g_new
        if not np.all(np.isfinite(p)) or np.abs(p).max() > 1e8:
            raise TracingError("trajectory escaped; the level component is not closed")
    raise TracingError("no return within the step budget")


def trace_oval(f: BiPoly, t: float, seed, *, fiber_tol: float = FIBER_TOL, closure_tol: float = CLOSURE_TOL,
               h_max: float = H_MAX, rtol: float = 1e-12, max_steps: int = 200000,
               n_samples: int | None = None) -> Path:
    """Closed real oval of f = t traced along (f_y, -f_x).

    ``seed`` is a :class:`TransversalSpec` (start at its point on the fiber,
    detect the return on the same ray) or a point near the oval (projected
    onto the fiber; the return is detected on the normal line through it).
    The path parameter is flow time, samples are uniform in it with spacing
    at most ``h_max`` in the plane.
    """
    fx, fy = f.dx, f.dy

    def rhs(_s, p):
        return np.array([fy(p[0], p[1]), -fx(p[0], p[1])])

    if isinstance(seed, TransversalSpec):
        p0 = np.array(seed.point(t), dtype=float)
        section = _Section(seed.center, seed.direction, halfline=True)
    else:
        p0 = _project(f, np.array([float(np.real(seed[0])), float(np.real(seed[1]))]), t)
        grad = np.array([fx(*p0), fy(*p0)])
        section = _Section(p0, grad, halfline=False)
    if abs(f(*p0) - t) > fiber_tol:
        raise TracingError("could not place the start point on the fiber")
    scale = max(1.0, float(np.abs(p0).max()))
    T, q, pieces, vmax = _integrate_to_return(rhs, p0, section, rtol=rtol, atol=rtol * 1e-2 * scale,
                                              max_steps=max_steps)
    if np.linalg.norm(q - p0) > max(closure_tol, 1e-6):
        raise TracingError("returned to the section away from the start: not a single closed oval")
    n = n_samples or int(math.ceil(vmax * T / h_max))
    n = max(n + (n % 2), 16)
    s = np.linspace(0.0, T, n + 1)
    pts = _sample_dense(pieces, s)
    pts[-1] = p0
    pts[0] = p0
    for _ in range(2):
        pts = _project_many(f, pts, t)
    x, y = pts[:, 0], pts[:, 1]
    res = float(np.max(np.abs(f(x, y) - t)))
    if res > fiber_tol:
        raise TracingError(f"fiber residual {res:.3e} exceeds tolerance")
    vx, vy = fy(x, y), -fx(x, y)
    seg = Segment(s, x, y, vx, vy)
    return Path((seg,), t, True, meta={"period": T})


def _sample_dense(pieces, s: np.ndarray) -> np.ndarray:
    out = np.empty((len(s), 2))
    starts = np.array([a for a, _, _ in pieces])
    idx = np.clip(np.searchsorted(starts, s, side="right") - 1, 0, len(pieces) - 1)
    for k in np.unique(idx):
        sel = idx == k
        out[sel] = pieces[k][2](s[sel]).T
    return out


def _project(f: BiPoly, p: np.ndarray, t: float) -> np.ndarray:
    fx, fy = f.dx, f.dy
    for _ in range(50):
        g = np.array([fx(*p), fy(*p)])
        r = f(*p) - t
        step = r * g / np.dot(g, g)
        p = p - step
        if np.linalg.norm(step) < 1e-15 * max(1.0, np.linalg.norm(p)):
            break
    return p


def _project_many(f: BiPoly, pts: np.ndarray, t: float) -> np.ndarray:
    x, y = pts[:, 0], pts[:, 1]
    gx, gy = f.dx(x, y), f.dy(x, y)
    r = f(x, y) - t
    g2 = gx * gx + gy * gy
    return np.column_stack([x - r * gx / g2, y - r * gy / g2])
