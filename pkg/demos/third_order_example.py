"""A perturbation whose first two Melnikov functions vanish.

f = x (y^2 - (x-3)^2) has a center at (1, 0) surrounded by ovals for
-4 < t < 0.  With omega = (2 - x + x^2/2) dy the Abelian integral M1 and
M2 vanish on every oval, and M3 is the first nonzero function.  The
recursion value is compared with the displacement of the first-return map.
"""
from pontryagin.cli import bundled_scenario, load_scenario, oracle_table
from pontryagin.melnikov import first_nonvanishing_order, melnikov_1, melnikov_2

sf = load_scenario(bundled_scenario("example1"))
s = sf.scenario

print("max |M1| =", melnikov_1(s).max_abs())
print("max |M2| =", melnikov_2(s, check=False).max_abs())

k, rec = first_nonvanishing_order(s, 4)
print("first nonvanishing order:", k)

orc = oracle_table(sf)
print(f"{'t':>8} {'recursion':>14} {'return map':>14} {'uncertainty':>12}")
for t, a, b, u in zip(rec.t, rec.values.real, orc.values.real, orc.err):
    print(f"{t:8.3f} {a:14.8f} {b:14.8f} {u:12.1e}")
