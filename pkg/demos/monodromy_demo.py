"""Integer monodromy of periods on y^2 + (x^2-1)^2 = t.

At t = 0.5 the fiber holds two real ovals (around (+-1, 0)) and a cycle
through imaginary y around the origin that shrinks as t -> 1.  Carrying the
three cycles around t = 0 and around t = 1 permutes them by integer
matrices (transvections) of determinant 1.
"""
import numpy as np

from pontryagin.analysis import circle_loop, continue_periods, imaginary_oval_cycle, real_oval_cycle
from pontryagin.exactpoly import parse_polynomial

f = parse_polynomial("y^2 + (x^2 - 1)^2")
base = 0.5
cycles = [real_oval_cycle(f, base, (-1.0, 0.0)),
          real_oval_cycle(f, base, (1.0, 0.0)),
          imaginary_oval_cycle(f, base, (0.0, 0.0))]
forms = [(parse_polynomial(p), parse_polynomial("0")) for p in ("y", "x*y", "x^2*y", "x^3*y", "y^3", "x*y^3")]

np.set_printoptions(precision=6, suppress=True)
for center in (0.0, 1.0):
    res = continue_periods(f, forms, cycles, circle_loop(center, base))
    print(f"loop around t = {center}: defect {res.defect:.1e}, det {res.det.real:.6f}")
    print(res.rounded)
