"""Numeric signatures of the Fuchsian structure: integer monodromy of periods,
moderate growth near singular values, and linear ODEs annihilating samples."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exactpoly import BiPoly

__all__ = [
    "ComplexCycle",
    "ContinuationTrack",
    "MonodromyResult",
    "TrackingError",
    "circle_loop",
    "real_oval_cycle",
    "imaginary_oval_cycle",
    "cycle_periods",
    "continue_cycle",
    "continue_periods",
    "GrowthFit",
    "growth_exponent",
    "OdeFit",
    "local_derivatives",
    "detect_linear_ode",
]


class TrackingError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# cycles on complex fibers
# ---------------------------------------------------------------------------

@dataclass
class ComplexCycle:
    """Closed loop on the complex fiber f = t, sampled at N points smooth in the index."""

    x: np.ndarray
    y: np.ndarray
    t: complex

    def residual(self, f: BiPoly) -> float:
        return float(np.max(np.abs(f(self.x, self.y) - self.t)))


def _spectral_derivative(z: np.ndarray) -> np.ndarray:
    n = len(z)
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    return np.fft.ifft(1j * k * np.fft.fft(z))


def cycle_periods(cycle: ComplexCycle, forms: Sequence) -> np.ndarray:
    """int_cycle P dx + Q dy for each (P, Q) pair of BiPoly, periodic trapezoid rule."""
    n = len(cycle.x)
    dx, dy = _spectral_derivative(cycle.x), _spectral_derivative(cycle.y)
    out = []
    for P, Q in forms:
        integrand = P(cycle.x, cycle.y) * dx + Q(cycle.x, cycle.y) * dy
        out.append(np.sum(integrand) * (2 * np.pi / n))
    return np.array(out)


def _newton_to_fiber(f: BiPoly, x, y, t, iters: int = 8):
    fx, fy = f.dx, f.dy
    for _ in range(iters):
        gx, gy = fx(x, y), fy(x, y)
        r = f(x, y) - t
        g2 = np.abs(gx) ** 2 + np.abs(gy) ** 2
        x = x - r * np.conj(gx) / g2
        y = y - r * np.conj(gy) / g2
    return x, y


def _equalize(f: BiPoly, x: np.ndarray, y: np.ndarray, t: complex):
    """Resample a closed curve uniformly in arclength, keeping the parameterization smooth.

    The arclength function is integrated spectrally and inverted by Newton
    iteration, then the trigonometric interpolants of x and y are evaluated
    at the new parameters.
    """
    n = len(x)
    k = np.fft.fftfreq(n, d=1.0 / n)
    cx, cy = np.fft.fft(x) / n, np.fft.fft(y) / n
    dx, dy = _spectral_derivative(x), _spectral_derivative(y)
    speed = np.sqrt(np.abs(dx) ** 2 + np.abs(dy) ** 2)
    cs = np.fft.fft(speed) / n
    total = cs[0].real * 2 * np.pi
    nz = k != 0
    if n % 2 == 0:
        nz &= k != -n // 2

    def series(c, s, integrate=False, derivative=False):
        e = np.exp(1j * np.outer(s, k[nz]))
        cc = c[nz]
        if integrate:
            cc = cc / (1j * k[nz])
            return (e - 1.0) @ cc
        if derivative:
            cc = cc * (1j * k[nz])
            return e @ cc
        return c[0] + e @ cc

    targets = np.arange(n) * (total / n)
    s = np.arange(n) * (2 * np.pi / n)
    for _ in range(20):
        L = cs[0].real * s + series(cs, s, integrate=True).real
        v = series(cs, s).real
        step = (L - targets) / v
        s = s - step
        if np.max(np.abs(step)) < 1e-14:
            break
    nx, ny = _lowpass(series(cx, s)), _lowpass(series(cy, s))
    return _newton_to_fiber(f, nx, ny, t, iters=3)


def _lowpass(z: np.ndarray) -> np.ndarray:
    """Drop the top third of the Fourier modes (keeps resampling from feeding aliasing back)."""
    n = len(z)
    c = np.fft.fft(z)
    k = np.abs(np.fft.fftfreq(n, d=1.0 / n))
    c[k > n / 3] = 0.0
    return np.fft.ifft(c)


def _spacing_ratio(x, y) -> float:
    sp = np.sqrt(np.abs(np.diff(np.r_[x, x[:1]])) ** 2 + np.abs(np.diff(np.r_[y, y[:1]])) ** 2)
    return float(sp.max() / sp.min())


def real_oval_cycle(f: BiPoly, t: float, center, n: int = 384) -> ComplexCycle:
    """Real oval of f = t around ``center``, star-shaped sampling by angle."""
    from scipy.optimize import brentq

    cx, cy = center
    fc = float(f(cx, cy))
    theta = 2 * np.pi * np.arange(n) / n
    xs, ys = np.empty(n), np.empty(n)
    for i, th in enumerate(theta):
        ux, uy = np.cos(th), np.sin(th)
        g = lambda r: float(f(cx + r * ux, cy + r * uy)) - t  # noqa: E731
        r_hi = 1e-3
        while np.sign(g(r_hi)) == np.sign(fc - t) and r_hi < 1e3:
            r_hi *= 1.5
        r = brentq(g, 0.0, r_hi, xtol=1e-15)
        xs[i], ys[i] = cx + r * ux, cy + r * uy
    # clockwise orientation (Hamiltonian flow for a minimum)
    cyc = ComplexCycle(xs[::-1].astype(complex), ys[::-1].astype(complex), complex(t))
    x, y = _newton_to_fiber(f, cyc.x, cyc.y, cyc.t)
    return ComplexCycle(x, y, complex(t))


def imaginary_oval_cycle(f: BiPoly, t: float, center, n: int = 384) -> ComplexCycle:
    """Real oval of g(x, s) = f(x, i s) = t around ``center`` (requires g real), mapped to y = i s."""
    from scipy.optimize import brentq

    cx, cs = center

    def g(x, s):
        return np.real(f(x, 1j * s))

    gc = g(cx, cs)
    theta = 2 * np.pi * np.arange(n) / n
    xs, ss = np.empty(n), np.empty(n)
    for i, th in enumerate(theta):
        ux, uy = np.cos(th), np.sin(th)
        h = lambda r: float(g(cx + r * ux, cs + r * uy)) - t  # noqa: E731
        r_hi = 1e-3
        while np.sign(h(r_hi)) == np.sign(gc - t) and r_hi < 1e3:
            r_hi *= 1.5
        r = brentq(h, 0.0, r_hi, xtol=1e-15)
        xs[i], ss[i] = cx + r * ux, cs + r * uy
    x, y = _newton_to_fiber(f, xs.astype(complex), 1j * ss, complex(t))
    return ComplexCycle(x, y, complex(t))


def continue_cycle(f: BiPoly, cycle: ComplexCycle, t_path: np.ndarray, max_halvings: int = 12,
                   forms: Sequence | None = None, history: list | None = None) -> ComplexCycle:
    """Transport a cycle along the polyline t_path by the Hermitian-normal lift.

    With ``forms`` and ``history`` given, the periods at every node of the
    path (start included) are appended to ``history``.
    """
    record = forms is not None and history is not None
    if record:
        history.append(cycle_periods(cycle, forms))
    fx, fy = f.dx, f.dy
    x, y, t = cycle.x.copy(), cycle.y.copy(), complex(t_path[0])
    if abs(t - cycle.t) > 1e-12:
        raise ValueError("path must start at the cycle's fiber value")
    for t_next in t_path[1:]:
        t_next = complex(t_next)
        sub = 1
        while True:
            ok = True
            xs, ys, tc = x, y, t
            for j in range(1, sub + 1):
                tn = t + (t_next - t) * j / sub
                dt = tn - tc
                gx, gy = fx(xs, ys), fy(xs, ys)
                g2 = np.abs(gx) ** 2 + np.abs(gy) ** 2
                nx = xs + dt * np.conj(gx) / g2
                ny = ys + dt * np.conj(gy) / g2
                nx, ny = _newton_to_fiber(f, nx, ny, tn, iters=4)
                spacing = np.median(np.abs(np.diff(np.r_[xs, xs[:1]])) + np.abs(np.diff(np.r_[ys, ys[:1]])))
                move = np.max(np.abs(nx - xs) + np.abs(ny - ys))
                if not np.all(np.isfinite(nx)) or np.max(np.abs(f(nx, ny) - tn)) > 1e-9 or move > 2 * spacing:
                    ok = False
                    break
                xs, ys, tc = nx, ny, tn
            if ok:
                x, y, t = xs, ys, t_next
                if _spacing_ratio(x, y) > 1.5:
                    x, y = _equalize(f, x, y, t)
                if record:
                    history.append(cycle_periods(ComplexCycle(x, y, t), forms))
                break
            sub *= 2
            if sub > 2**max_halvings:
                raise TrackingError("cycle tracking lost (step refinement exhausted)")
    return ComplexCycle(x, y, t)


def circle_loop(center: complex, base: complex, n: int = 400) -> np.ndarray:
    """Counterclockwise circle through ``base`` around ``center``, sampled as a closed polyline."""
    r = base - center
    theta = np.linspace(0.0, 2 * np.pi, n + 1)
    pts = center + r * np.exp(1j * theta)
    pts[-1] = base
    return pts


@dataclass
class ContinuationTrack:
    t0: complex
    loop: np.ndarray
    periods: np.ndarray  # (node, form, cycle)
    max_step_ratio: float  # largest per-step period change over the basis spread

    @property
    def periods_start(self) -> np.ndarray:
        return self.periods[0]

    @property
    def periods_end(self) -> np.ndarray:
        return self.periods[-1]


@dataclass
class MonodromyResult:
    raw: np.ndarray
    rounded: np.ndarray
    defect: float
    det: complex
    track: ContinuationTrack = field(repr=False)


def continue_periods(f: BiPoly, forms: Sequence, cycles: Sequence[ComplexCycle], loop: np.ndarray) -> MonodromyResult:
    """Monodromy of the cycle basis along ``loop``: transported cycle j = sum_i A[i, j] cycle i.

    A is obtained from the period matrices by least squares over the forms.
    Tracking is rejected when the periods of a cycle move by 10% or more of
    the basis spread (smallest distance between two basis period vectors)
    in a single step of the loop.
    """
    loop = np.asarray(loop, dtype=complex)
    hist = []
    for c in cycles:
        h: list = []
        continue_cycle(f, c, loop, forms=forms, history=h)
        hist.append(np.array(h))
    periods = np.stack(hist, axis=-1)
    start, end = periods[0], periods[-1]
    m = start.shape[1]
    if m > 1:
        spread = min(np.linalg.norm(start[:, i] - start[:, j]) for i in range(m) for j in range(i + 1, m))
    else:
        spread = float(np.linalg.norm(start))
    step = float(np.max(np.linalg.norm(np.diff(periods, axis=0), axis=1)))
    ratio = step / spread
    if ratio >= 0.1:
        raise TrackingError(f"period change per step is {ratio:.2%} of the basis spread; refine the loop")
    A, *_ = np.linalg.lstsq(start, end, rcond=None)
    rounded = np.rint(A.real).astype(int)
    defect = float(np.max(np.abs(A - rounded)))
    track = ContinuationTrack(complex(loop[0]), loop, periods, ratio)
    return MonodromyResult(A, rounded, defect, complex(np.linalg.det(A)), track)


# ---------------------------------------------------------------------------
# growth
# ---------------------------------------------------------------------------

@dataclass
class GrowthFit:
    exponent: float
    r2: float
    moderate: bool
    local_slopes: np.ndarray
    n_used: int
    flattening: bool = False


def growth_exponent(t, F, t0: complex | None = None, noise_floor: float = 1e-14) -> GrowthFit:
    """Fit log|F| against -log|t - t0| (approach to t0) or log|t| (t0 = None, approach to infinity).

    Non-moderate growth shows as local slopes that keep increasing; local
    slopes decaying toward zero (logarithmic behaviour) set ``flattening``.
    Samples that are not finite or fall below ``noise_floor`` are dropped.
    """
    t = np.asarray(t)
    F = np.asarray(F)
    with np.errstate(invalid="ignore"):
        keep = np.isfinite(F) & (np.abs(F) > noise_floor)
    t, F = t[keep], F[keep]
    if len(t) < 10:
        raise ValueError("need at least 10 usable samples")
    u = np.log(np.abs(t)) if t0 is None else -np.log(np.abs(t - t0))
    order = np.argsort(u)
    u, v = u[order], np.log(np.abs(F))[order]
    slope, icpt = np.polyfit(u, v, 1)
    pred = slope * u + icpt
    ss_res = float(np.sum((v - pred) ** 2))
    ss_tot = float(np.sum((v - v.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    local = np.diff(v) / np.diff(u)
    m = max(2, len(local) // 4)
    s_first, s_last = float(np.mean(local[:m])), float(np.mean(local[-m:]))
    moderate = not (s_last > 10 and s_last > 2 * max(s_first, 1.0))
    flattening = abs(s_last) < 0.5 * abs(s_first)
    return GrowthFit(float(slope), r2, moderate, local, len(t), flattening)


# ---------------------------------------------------------------------------
# linear ODE detection
# ---------------------------------------------------------------------------

@dataclass
class OdeFit:
    n: int | None
    coefficients: np.ndarray | None  # shape (n + 1, dmax + 1): p_i(t) = sum_j c[i, j] t^j
    residual: float
    residuals: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.n is not None


def local_derivatives(t: np.ndarray, F: np.ndarray, order: int, window: int = 9, degree: int = 4) -> np.ndarray:
    """Derivatives 0..order at every sample from sliding least-squares polynomial fits."""
    t = np.asarray(t, dtype=float)
    F = np.asarray(F)
    n = len(t)
    if n < window:
        raise ValueError("not enough samples for the fitting window")
    half = window // 2
    out = np.zeros((order + 1, n), dtype=F.dtype)
    for i in range(n):
        lo = min(max(0, i - half), n - window)
        ts = t[lo:lo + window]
        scale = max(np.ptp(ts), 1e-300)
        u = (ts - t[i]) / scale
        V = np.vander(u, degree + 1, increasing=True)
        c = np.linalg.lstsq(V, F[lo:lo + window], rcond=None)[0]
        for k in range(order + 1):
            out[k, i] = c[k] * np.prod(np.arange(1, k + 1)) / scale**k if k <= degree else 0.0
    return out


def detect_linear_ode(t, F, n_max: int = 3, dmax: int = 3, threshold: float = 1e-6,
                      derivatives: np.ndarray | None = None, trim: int = 0) -> OdeFit:
    """Smallest n <= n_max with sum_{i<=n} p_i(t) F^(i)(t) = 0, deg p_i <= dmax.

    Residual is sigma_min / sigma_max of the column-normalized design matrix.
    Returns an OdeFit with n = None when no order reaches ``threshold``.
    """
    t = np.asarray(t, dtype=float)
    D = derivatives if derivatives is not None else local_derivatives(t, F, n_max)
    sl = slice(trim, len(t) - trim if trim else None)
    t, D = t[sl], D[:, sl]
    residuals = {}
    for n in range(1, n_max + 1):
        cols = [t**j * D[i] for i in range(n + 1) for j in range(dmax + 1)]
        A = np.column_stack(cols)
        norms = np.linalg.norm(A, axis=0)
        norms[norms == 0] = 1.0
        _, sv, vh = np.linalg.svd(A / norms, full_matrices=False)
        res = float(sv[-1] / sv[0])
        residuals[n] = res
        if res < threshold:
            c = (vh[-1].conj() / norms).reshape(n + 1, dmax + 1)
            c = c / np.max(np.abs(c))
            return OdeFit(n, c, res, residuals)
    return OdeFit(None, None, min(residuals.values()), residuals)
