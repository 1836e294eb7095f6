"""Command line front end: scenario files, subcommands and CSV/SVG reports.

Scenario files are INI-style::

    [scenario]
    name = circle
    f = (x^2 + y^2)/2
    P = 0
    Q = x
    center = 0, 0
    direction = 1, 0        ; ray of the transversal (default 1, 0)
    t_far = 3               ; value where the transversal bracket ends (default: unbounded)
    t_min = 0.1
    t_max = 2
    t_samples = 20

    [tolerances]            ; every key optional, defaults as listed by `DEFAULT_TOLERANCES`
    quad_tol = 1e-8

Further optional sections: ``[oracle]``, ``[growth]``, ``[ode]``, ``[monodromy]``.
Exit codes: 0 success, 1 input error, 2 numeric failure, 3 property violation.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path as FsPath

import numpy as np

from .analysis import (TrackingError, circle_loop, continue_periods, detect_linear_ode, growth_exponent,
                       imaginary_oval_cycle, real_oval_cycle)
from .chen import (ChenEvaluator, chen_residuals, order_bound, punctured_plane_fixture, witt_table)
from .forms import RationalOneForm
from .exactpoly import ParseError, ResourceLimit, UnsupportedInput, parse_polynomial
from .geometry import PathError, TracingError, TransversalSpec, commutator_path
from .melnikov import (K_MAX, MelnikovTable, PreconditionError, Scenario, first_nonvanishing_order,
                       francoise_mk, rotated)
from .oracle import NoSignal, richardson_mk

__all__ = [
    "EXIT_OK",
    "EXIT_INPUT",
    "EXIT_NUMERIC",
    "EXIT_PROPERTY",
    "DEFAULT_TOLERANCES",
    "InputError",
    "PropertyViolation",
    "ScenarioFile",
    "load_scenario",
    "bundled_scenario",
    "bundled_scenarios",
    "write_csv",
    "read_csv",
    "write_svg",
    "write_returns_csv",
    "emit_report",
    "oracle_table",
    "run_scenario",
    "main",
]

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_PROPERTY = 0, 1, 2, 3

REQUIRED_KEYS = ("f", "P", "Q", "center", "t_min", "t_max", "t_samples")

DEFAULT_TOLERANCES = {
    "quad_tol": 1e-8,
    "vanish_tol": 1e-8,
    "h_max": 2e-3,
    "crit_margin": 1e-3,
    "fiber_tol": 1e-10,
    "closure_tol": 1e-8,
    "oracle_rtol": 1e-12,
    "oracle_match_tol": 5e-3,
    "monodromy_tol": 1e-3,
    "chen_tol": 1e-8,
}

CSV_HEADER = ("t", "k", "re", "im", "err_est")


class InputError(ValueError):
    """Malformed or incomplete scenario input."""


class PropertyViolation(RuntimeError):
    """A checked property failed beyond its tolerance."""


# ---------------------------------------------------------------------------
# scenario files
# ---------------------------------------------------------------------------

@dataclass
class ScenarioFile:
    path: str
    name: str
    scenario: Scenario
    tolerances: dict
    sections: dict = field(default_factory=dict)

    def section(self, name: str) -> dict:
        return self.sections.get(name, {})


def _floats(text: str, n: int | None = None, key: str = "") -> tuple:
    try:
        vals = tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())
    except ValueError:
        raise InputError(f"key {key!r}: expected numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise InputError(f"key {key!r}: expected {n} numbers, got {len(vals)}")
    return vals


def _complex(text: str) -> complex:
    try:
        return complex(text.strip().replace(" ", "").replace("i", "j"))
    except ValueError:
        raise InputError(f"not a complex number: {text!r}") from None


def _poly(text: str, key: str):
    try:
        return parse_polynomial(text)
    except ParseError as exc:
        raise InputError(f"key {key!r}: {exc}") from None


def _ray_transversal(f, center, direction, t_far):
    if t_far is None:
        cx, cy = center
        ux, uy = direction
        grows = float(f(cx + 1e-3 * ux, cy + 1e-3 * uy)) > float(f(cx, cy))
        t_far = math.inf if grows else -math.inf
    return TransversalSpec.auto(f, center, direction, t_far)


def load_scenario(path, seed_ray: tuple | None = None, eps_grid: tuple | None = None) -> ScenarioFile:
    """Parse and validate a scenario file; every problem is reported as InputError."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise InputError(f"cannot read scenario {path}: {exc}") from None
    if not cp.has_section("scenario"):
        raise InputError("missing section [scenario]")
    sc = dict(cp["scenario"])
    for key in REQUIRED_KEYS:
        if key not in sc:
            raise InputError(f"missing required key {key!r} in [scenario]")
    f, P, Q = _poly(sc["f"], "f"), _poly(sc["P"], "P"), _poly(sc["Q"], "Q")
    center = _floats(sc["center"], 2, "center")
    direction = _floats(sc.get("direction", "1, 0"), 2, "direction")
    if seed_ray is not None:
        if len(seed_ray) == 4:
            center, direction = tuple(seed_ray[:2]), tuple(seed_ray[2:])
        elif len(seed_ray) == 2:
            direction = tuple(seed_ray)
        else:
            raise InputError("--seed-ray takes 'ux,uy' or 'cx,cy,ux,uy'")
    t_far = _floats(sc["t_far"], 1, "t_far")[0] if "t_far" in sc else None
    t_min, = _floats(sc["t_min"], 1, "t_min")
    t_max, = _floats(sc["t_max"], 1, "t_max")
    try:
        n = int(sc["t_samples"])
    except ValueError:
        raise InputError("key 't_samples' must be an integer") from None
    if n < 1 or not t_max >= t_min:
        raise InputError("need t_samples >= 1 and t_max >= t_min")
    tol = dict(DEFAULT_TOLERANCES)
    if cp.has_section("tolerances"):
        for key, text in cp["tolerances"].items():
            if key not in tol:
                raise InputError(f"unknown tolerance {key!r}")
            tol[key] = _floats(text, 1, key)[0]
    for key, v in tol.items():
        if not v > 0:
            raise InputError(f"tolerance {key!r} must be positive")
    sections = {name: dict(cp[name]) for name in cp.sections() if name not in ("scenario", "tolerances")}
    if eps_grid is None and "eps_grid" in sections.get("oracle", {}):
        eps_grid = _floats(sections["oracle"]["eps_grid"], key="eps_grid")
    kwargs = {k: tol[k] for k in ("quad_tol", "vanish_tol", "h_max", "crit_margin", "fiber_tol", "closure_tol",
                                  "oracle_rtol")}
    if eps_grid is not None:
        if len(eps_grid) < 4:
            raise InputError("eps grid needs at least four values")
        kwargs["eps_grid"] = tuple(eps_grid)
    try:
        tr = _ray_transversal(f, center, direction, t_far)
        s = Scenario(f, P, Q, tr, np.linspace(t_min, t_max, n), name=sc.get("name", FsPath(path).stem), **kwargs)
        lo, hi = tr.t_range
        if t_min < lo or t_max > hi:
            raise InputError(f"t grid [{t_min}, {t_max}] leaves the transversal range [{lo}, {hi}]")
    except (ValueError, UnsupportedInput) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(str(exc)) from None
    return ScenarioFile(str(path), s.name, s, tol, sections)


def bundled_scenarios() -> list[str]:
    root = resources.files("pontryagin") / "scenarios"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".scn"))


def bundled_scenario(name: str) -> str:
    """Filesystem path of a bundled scenario file (name without extension)."""
    p = resources.files("pontryagin") / "scenarios" / f"{name}.scn"
    if not p.is_file():
        raise InputError(f"no bundled scenario {name!r}")
    return str(p)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def write_csv(tables, path) -> None:
    """Header t,k,re,im,err_est and one row per grid point; floats in shortest round-trip form."""
    tables = list(tables)
    if not tables:
        raise ValueError("nothing to report")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for tab in tables:
            for t, v, e in tab.rows():
                v = complex(v)
                w.writerow((repr(float(t)), int(tab.k), repr(v.real), repr(v.imag), repr(float(e))))


def read_csv(path) -> list[MelnikovTable]:
    """Inverse of write_csv; consecutive rows with the same k form one table."""
    groups: list[list] = []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if tuple(header) != CSV_HEADER:
            raise ValueError(f"unexpected header {header}")
        for row in r:
            t, k, re, im, err = float(row[0]), int(row[1]), float(row[2]), float(row[3]), float(row[4])
            if not groups or groups[-1][0] != k:
                groups.append([k, [], [], []])
            groups[-1][1].append(t)
            groups[-1][2].append(complex(re, im))
            groups[-1][3].append(err)
    return [MelnikovTable(k, np.array(t), np.array(v), np.array(e), "csv") for k, t, v, e in groups]


def write_svg(tables, path, width: int = 640, height: int = 400) -> None:
    """Line plot of |M_k(t)| against t; plain SVG with fixed number formatting."""
    tables = list(tables)
    if not tables:
        raise ValueError("nothing to plot")
    ts = np.concatenate([np.asarray(tab.t, dtype=float) for tab in tables])
    ys = np.concatenate([np.abs(tab.values) for tab in tables])
    x0, x1 = float(ts.min()), float(ts.max())
    y0, y1 = 0.0, float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    m = 50

    def px(t):
        return m + (t - x0) / (x1 - x0) * (width - 2 * m)

    def py(v):
        return height - m - (v - y0) / (y1 - y0) * (height - 2 * m)

    colors = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<line x1="{m}" y1="{height - m}" x2="{width - m}" y2="{height - m}" stroke="black"/>',
           f'<line x1="{m}" y1="{m}" x2="{m}" y2="{height - m}" stroke="black"/>',
           f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle" font-size="12">t</text>',
           f'<text x="14" y="{height / 2:.1f}" font-size="12" transform="rotate(-90 14 {height / 2:.1f})" '
           f'text-anchor="middle">|M_k(t)|</text>',
           f'<text x="{m}" y="{height - m + 16}" font-size="10" text-anchor="middle">{x0:.4g}</text>',
           f'<text x="{width - m}" y="{height - m + 16}" font-size="10" text-anchor="middle">{x1:.4g}</text>',
           f'<text x="{m - 4}" y="{m + 4}" font-size="10" text-anchor="end">{y1:.4g}</text>']
    for i, tab in enumerate(tables):
        pts = " ".join(f"{px(float(t)):.3f},{py(float(abs(v))):.3f}" for t, v, _ in tab.rows())
        c = colors[i % len(colors)]
        out.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{width - m}" y="{m + 14 * i}" font-size="11" fill="{c}" '
                   f'text-anchor="end">k = {tab.k}</text>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def emit_report(tables, out: str | None = None, svg: str | None = None, stream=None) -> None:
    """CSV to ``out`` (or ``stream``), SVG only when requested."""
    tables = list(tables)
    if not tables:
        raise ValueError("nothing to report")
    if out:
        write_csv(tables, out)
    else:
        stream = stream or sys.stdout
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for tab in tables:
            for t, v, e in tab.rows():
                v = complex(v)
                w.writerow((repr(float(t)), int(tab.k), repr(v.real), repr(v.imag), repr(float(e))))
    if svg:
        write_svg(tables, svg)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _cmd_witt(args) -> int:
    rows = witt_table(args.rmax, args.kmax)
    lines = ["r,k,witt,reference"]
    notes = []
    for r, k, v, pub in rows:
        lines.append(f"{r},{k},{v},{'' if pub is None else pub}")
        if pub is not None and pub != v:
            notes.append(f"discrepancy at r={r}, k={k}: reference {pub}, formula gives {v}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for n in notes:
        _say(n)
    return EXIT_OK


def _cmd_certificate(sf: ScenarioFile, args) -> int:
    cert = sf.scenario.cert
    zero = cert.residual().is_zero()
    lines = [f"f = {cert.f}",
             f"minimal polynomial m(t) = {cert.m.to_string('t')}",
             f"multiplier = {cert.multiplier.to_string('t')}",
             f"a = {cert.a}",
             f"b = {cert.b}",
             "critical values = " + ", ".join(repr(c) for c in cert.crit),
             f"identity multiplier(f) = a f_x + b f_y holds exactly: {zero}"]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not zero:
        raise PropertyViolation("certificate identity fails")
    return EXIT_OK


def _melnikov_table(sf: ScenarioFile, k: int | None, kmax: int):
    s = sf.scenario
    if k is None:
        found, tab = first_nonvanishing_order(s, kmax)
        if found is None:
            _say(f"M_1 .. M_{kmax} vanish on the grid (threshold {s.vanish_tol})")
        return tab
    _, tab = francoise_mk(s, k, check=True)
    if tab.k != k:
        _say(f"M_{tab.k} does not vanish; reporting it instead of M_{k}")
    return tab


def _cmd_melnikov(sf: ScenarioFile, args) -> int:
    tab = _melnikov_table(sf, args.k, args.kmax)
    emit_report([tab], args.out, args.svg)
    return EXIT_OK


def write_returns_csv(results, path) -> None:
    """Raw first-return samples: t, eps, t', t' - t (negative eps rows come from symmetric mode)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("t", "eps", "t_return", "displacement"))
        for t, r in results:
            pairs = list(zip(r.eps, r.displacements)) + [(-e, d) for e, d in zip(r.eps, r.displacements_neg)]
            for e, d in pairs:
                w.writerow((repr(float(t)), repr(float(e)), repr(float(t) + float(d)), repr(float(d))))


def oracle_table(sf: ScenarioFile, eps_grid=None, returns: str | None = None) -> MelnikovTable:
    """M_k on the scenario grid from the first-return map ([oracle] symmetric honoured)."""
    s = sf.scenario
    sec = sf.section("oracle")
    symmetric = sec.get("symmetric", "false").strip().lower() in ("1", "true", "yes", "on")
    res = [richardson_mk(s, t, eps_grid or s.eps_grid, rtol=s.oracle_rtol, symmetric=symmetric) for t in s.t_grid]
    if returns:
        write_returns_csv(list(zip(s.t_grid, res)), returns)
    ks = {r.k for r in res}
    if len(ks) != 1:
        raise PropertyViolation(f"oracle order varies along the grid: {sorted(ks)}")
    return MelnikovTable(res[0].k, s.t_grid.copy(), np.array([r.value for r in res], dtype=complex),
                         np.array([r.uncertainty for r in res]), "first-return oracle")


def _cmd_oracle(sf: ScenarioFile, args) -> int:
    tab = oracle_table(sf, args.eps_grid, args.returns)
    emit_report([tab], args.out, args.svg)
    if args.k is not None and args.k != tab.k:
        raise PropertyViolation(f"oracle order {tab.k} differs from requested k = {args.k}")
    _, rec = francoise_mk(sf.scenario, tab.k, check=False)
    dev = float(np.max(np.abs(rec.values - tab.values)) / max(rec.max_abs(), 1e-300))
    _say(f"oracle k = {tab.k}; max-grid relative deviation from the recursion: {dev:.3e}")
    if dev > sf.tolerances["oracle_match_tol"]:
        raise PropertyViolation(f"oracle and recursion differ by {dev:.3e}")
    return EXIT_OK


def _cmd_chen_check(sf: ScenarioFile | None, args) -> int:
    tol = sf.tolerances["chen_tol"] if sf else DEFAULT_TOLERANCES["chen_tol"]
    w1, w2, a, b = punctured_plane_fixture()
    checks = {}
    ev = ChenEvaluator(commutator_path(a, b))
    checks["commutator length-2 + 1"] = abs(ev.value((w1, w2)) + 1)
    checks["commutator length-1"] = max(abs(ev.value((w1,))), abs(ev.value((w2,))))
    w1m, w2m, am, bm = punctured_plane_fixture(0.3j)
    moved = ChenEvaluator(commutator_path(am, bm)).value((w1m, w2m))
    checks["basepoint move"] = abs(moved - ev.value((w1, w2)))
    for key, v in chen_residuals(a, b, [w1, w2], 4).items():
        checks[f"fixture {key}"] = v
    if sf is not None:
        s = sf.scenario
        t = float(s.t_grid[len(s.t_grid) // 2])
        oval = s.oval(t)
        n = len(oval.segments[0].s) - 1
        forms = [s.omega, RationalOneForm.polynomial(parse_polynomial("y"), parse_polynomial("x*y"))]
        for key, v in chen_residuals(oval, rotated(oval, 0), forms, 3).items():
            checks[f"oval {key}"] = v
        e0 = ChenEvaluator(oval).value((s.omega,))
        e1 = ChenEvaluator(rotated(oval, n // 3)).value((s.omega,))
        checks["oval basepoint (length 1)"] = abs(e0 - e1) / max(1.0, abs(e0))
    limits = {"commutator length-2 + 1": 1e-6, "basepoint move": 1e-7}
    bad = []
    for key, v in checks.items():
        lim = limits.get(key, tol)
        ok = v < lim
        print(f"{'PASS' if ok else 'FAIL'} {key}: {v:.3e} (limit {lim:.0e})")
        if not ok:
            bad.append(key)
    if bad:
        raise PropertyViolation("Chen identities violated: " + ", ".join(bad))
    return EXIT_OK


def _ray_grid(sec: dict):
    t0 = sec.get("t0", "inf").strip().lower()
    dmin, = _floats(sec.get("d_min", "1"), 1, "d_min")
    dmax, = _floats(sec.get("d_max", "100"), 1, "d_max")
    n = int(sec.get("samples", "20"))
    d = np.geomspace(dmax, dmin, n) if t0 != "inf" else np.geomspace(dmin, dmax, n)
    if t0 == "inf":
        return None, d
    side, = _floats(sec.get("side", "-1"), 1, "side")
    c = float(t0)
    return c, c + math.copysign(1.0, side) * d


def _cmd_growth(sf: ScenarioFile, args) -> int:
    sec = sf.section("growth")
    t0, grid = _ray_grid(sec)
    lo, hi = sf.scenario.transversal.t_range
    if grid.min() < lo or grid.max() > hi:
        raise InputError(f"growth grid [{grid.min()}, {grid.max()}] leaves the transversal range [{lo}, {hi}]")
    try:
        s = dataclasses.replace(sf.scenario, t_grid=grid)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    sub = dataclasses.replace(sf, scenario=s)
    tab = _melnikov_table(sub, args.k, args.kmax)
    fit = growth_exponent(tab.t, tab.values, t0=t0)
    print(f"k = {tab.k}; toward t0 = {'inf' if t0 is None else t0}: exponent {fit.exponent:.6f}, "
          f"R^2 {fit.r2:.6f}, moderate {fit.moderate}, flattening {fit.flattening}, samples {fit.n_used}")
    if args.out:
        write_csv([tab], args.out)
    if not fit.moderate:
        raise PropertyViolation("growth is not moderate")
    return EXIT_OK


def _cmd_ode_fit(sf: ScenarioFile, args) -> int:
    sec = sf.section("ode")
    tab = _melnikov_table(sf, args.k, args.kmax)
    n_max = int(sec.get("n_max", "3"))
    dmax = int(sec.get("dmax", "3"))
    threshold = float(sec.get("threshold", "1e-6"))
    trim = int(sec.get("trim", "0"))
    r = int(sec.get("cycle_rank", "1"))
    values = tab.values.real if np.all(tab.values.imag == 0) else tab.values
    fit = detect_linear_ode(tab.t, values, n_max=n_max, dmax=dmax, threshold=threshold, trim=trim)
    if args.out:
        write_csv([tab], args.out)
    if not fit.found:
        print(f"k = {tab.k}: none found (best residual {fit.residual:.3e})")
        return EXIT_OK
    cap = order_bound(r, tab.k)[1]
    print(f"k = {tab.k}: order {fit.n} relation, residual {fit.residual:.3e}; order bound r^k = {cap} (r = {r})")
    for i, row in enumerate(fit.coefficients):
        terms = " + ".join(f"({c.real:.6g})*t^{j}" for j, c in enumerate(row) if abs(c) > 1e-12) or "0"
        print(f"  p_{i}(t) = {terms}")
    if fit.n > cap:
        raise PropertyViolation(f"detected order {fit.n} exceeds the bound {cap}")
    return EXIT_OK


def _centers(text: str) -> list:
    return [_floats(part, 2, "center") for part in text.split(";") if part.strip()]


def _cmd_monodromy(sf: ScenarioFile, args) -> int:
    sec = sf.section("monodromy")
    if not sec:
        raise InputError("scenario has no [monodromy] section")
    f = sf.scenario.f
    base = float(sec.get("base", "0.5"))
    npts = int(sec.get("cycle_points", "384"))
    cycles = [real_oval_cycle(f, base, c, npts) for c in _centers(sec.get("real_centers", ""))]
    cycles += [imaginary_oval_cycle(f, base, c, npts) for c in _centers(sec.get("imaginary_centers", ""))]
    if not cycles:
        raise InputError("no cycles: set real_centers and/or imaginary_centers")
    forms = []
    for part in sec.get("forms", "y").split(";"):
        if part.strip():
            p, _, q = part.partition(":")
            forms.append((_poly(p, "forms"), _poly(q or "0", "forms")))
    n_loop = int(sec.get("loop_points", "400"))
    loops = [circle_loop(_complex(c), base, n_loop) for c in sec.get("loop_centers", "").split(";") if c.strip()]
    if not loops:
        raise InputError("no loops: set loop_centers")
    tol = sf.tolerances["monodromy_tol"]
    rows = []
    results = []
    for i, lp in enumerate(loops):
        res = continue_periods(f, forms, cycles, lp)
        results.append(res)
        rows.append((f"loop{i}", res))
    compose = sec.get("compose", "false").strip().lower() in ("1", "true", "yes", "on")
    comp_err = 0.0
    if compose and len(loops) > 1:
        joined = np.concatenate([loops[0]] + [lp[1:] for lp in loops[1:]])
        res = continue_periods(f, forms, cycles, joined)
        prod = np.eye(len(cycles))
        for r in results:
            prod = r.raw @ prod
        comp_err = float(np.max(np.abs(res.raw - prod)))
        rows.append(("composed", res))
    lines = ["loop,row,col,re,im,rounded"]
    for name, res in rows:
        for i in range(res.raw.shape[0]):
            for j in range(res.raw.shape[1]):
                v = complex(res.raw[i, j])
                lines.append(f"{name},{i},{j},{v.real!r},{v.imag!r},{res.rounded[i, j]}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    bad = []
    for name, res in rows:
        _say(f"{name}: defect {res.defect:.3e}, det {res.det.real:.9f}{res.det.imag:+.1e}i")
        if res.defect > tol or abs(res.det - 1) > tol:
            bad.append(name)
    if compose and len(loops) > 1:
        _say(f"composition error {comp_err:.3e}")
        if comp_err > tol:
            bad.append("composition")
    if bad:
        raise PropertyViolation("monodromy checks failed: " + ", ".join(bad))
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _eps_list(text: str) -> tuple:
    return _floats(text, key="--eps-grid")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pontryagin", description="Higher-order Melnikov functions and checks.")
    sub = p.add_subparsers(dest="command", required=True)

    def scenario_cmd(name, help_, scenario_required=True):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("scenario", nargs=None if scenario_required else "?",
                        help="scenario file, or the name of a bundled scenario")
        sp.add_argument("--k", type=int, default=None, help="order of the Melnikov function")
        sp.add_argument("--kmax", type=int, default=4, help="largest order tried when --k is absent")
        sp.add_argument("--out", default=None, help="output file (default: standard output)")
        sp.add_argument("--svg", default=None, help="also write an SVG plot of |M_k(t)|")
        sp.add_argument("--eps-grid", type=_eps_list, default=None, help="comma separated eps values")
        sp.add_argument("--seed-ray", type=_eps_list, default=None,
                        help="transversal ray as 'ux,uy' or 'cx,cy,ux,uy'")
        return sp

    w = sub.add_parser("witt", help="Witt numbers against the reference table")
    w.add_argument("--rmax", type=int, default=4)
    w.add_argument("--kmax", type=int, default=8)
    w.add_argument("--out", default=None)
    scenario_cmd("certificate", "gradient-ideal certificate and critical values")
    scenario_cmd("melnikov", "M_k on the scenario grid from the iterated-integral recursion")
    orc = scenario_cmd("oracle", "M_k from the first-return map, compared with the recursion")
    orc.add_argument("--returns", default=None, help="also write the raw return samples (t, eps, t', t' - t)")
    scenario_cmd("chen-check", "iterated-integral identities (fixture, plus the scenario oval)", False)
    scenario_cmd("monodromy", "integer monodromy of periods along loops in the t-plane")
    scenario_cmd("growth", "growth exponent of M_k toward a singular value")
    scenario_cmd("ode-fit", "linear ODE annihilating the M_k samples")
    return p


def _resolve(name: str) -> str:
    if FsPath(name).exists():
        return name
    stem = name[:-4] if name.endswith(".scn") else name
    if stem in bundled_scenarios():
        return bundled_scenario(stem)
    raise InputError(f"scenario file {name!r} not found")


def run_scenario(argv=None) -> int:
    """Parse arguments, dispatch, and map failures to exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        if args.command == "witt":
            return _cmd_witt(args)
        if args.k is not None and not 1 <= args.k <= K_MAX:
            raise InputError(f"--k must lie in 1..{K_MAX}")
        sf = None
        if args.scenario is not None:
            sf = load_scenario(_resolve(args.scenario), seed_ray=args.seed_ray, eps_grid=args.eps_grid)
        handlers = {
            "certificate": _cmd_certificate,
            "melnikov": _cmd_melnikov,
            "oracle": _cmd_oracle,
            "chen-check": _cmd_chen_check,
            "monodromy": _cmd_monodromy,
            "growth": _cmd_growth,
            "ode-fit": _cmd_ode_fit,
        }
        return handlers[args.command](sf, args)
    except (InputError, ParseError, UnsupportedInput, PreconditionError) as exc:
        _say(f"input error: {exc}")
        return EXIT_INPUT
    except (TracingError, TrackingError, NoSignal, ResourceLimit, PathError, np.linalg.LinAlgError) as exc:
        _say(f"numeric failure: {exc}")
        return EXIT_NUMERIC
    except PropertyViolation as exc:
        _say(f"property violation: {exc}")
        return EXIT_PROPERTY
    except OSError as exc:
        _say(f"input error: {exc}")
        return EXIT_INPUT


def main(argv=None) -> None:
    sys.exit(run_scenario(argv))


if __name__ == "__main__":
    main()
