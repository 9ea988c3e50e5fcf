"""
What randomization buys
=======================

On typical random instances the best deterministic menu is already optimal
among randomized ones.  The gap shows up only on special structure, such as
the bundled fixture, or occasionally on sparse instances.
"""
from fractions import Fraction

from bayesmenu import (RandomParams, gen_no_maximum_fixture, gen_random,
                       solve_constant_types, solve_randomized)

eps = Fraction(1, 100)

fx = gen_no_maximum_fixture()
det, rand = solve_constant_types(fx)[1], solve_randomized(fx, eps)[1]
print(f"fixture: deterministic {float(det):.4f}, randomized {float(rand):.4f}")

# sparse instances with three types, three actions and two outcomes
gains = []
for seed in range(30):
    inst = gen_random(RandomParams(3, 3, 2, seed, sparsity=0.5))
    det = solve_constant_types(inst)[1]
    rand = solve_randomized(inst, eps)[1]
    gains.append((rand - det, seed))

positive = [(g, s) for g, s in gains if g > 0]
print(f"{len(positive)} of {len(gains)} sparse instances gain from randomization")
for g, s in sorted(positive, reverse=True):
    print(f"  seed {s}: gain {float(g):.4f}")
