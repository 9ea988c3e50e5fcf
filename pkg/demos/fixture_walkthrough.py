"""
Three types, no best menu
=========================

The bundled fixture has three equally likely agent types, three actions and
four outcomes.  Randomized menus get arbitrarily close to 3/4 without ever
reaching it.  This script shows the approach.
"""
from fractions import Fraction

from bayesmenu import gen_no_maximum_fixture, menu_value, verify_dsic
from bayesmenu.generators import fixture_near_optimal_menu
from bayesmenu.rand_menu import solve_randomized_detailed

inst = gen_no_maximum_fixture()
print("types:", inst.types, "actions:", inst.actions, "outcomes:", inst.outcomes)

# A hand-built family of menus: the second type gets a lottery that
# pays 1/(12 eps) on the last outcome with probability 3 eps.
for eps in (Fraction(1, 10), Fraction(1, 100), Fraction(1, 1000)):
    menu = fixture_near_optimal_menu(eps)
    print(f"eps={eps}: value {menu_value(inst, menu)}  DSIC={verify_dsic(inst, menu).ok}")

# Column generation finds the same kind of menu on its own.
res = solve_randomized_detailed(inst, Fraction(1, 20))
print(f"solver value {float(res.value):.10f} after {res.iterations} iterations")
for row in res.trace:
    print(f"  iter {row.iteration}: primal {float(row.primal):.6f}  upper {float(row.dual):.6g}")
for name, lottery in zip(inst.types, res.menu.entries):
    print(name, [([float(x) for x in p], float(w)) for p, w in lottery])
