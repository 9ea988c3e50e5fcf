"""
Instances from independent sets
===============================

Build the reduction instance for the five-cycle and evaluate the menu
induced by an independent set of size two.
"""
from fractions import Fraction

from bayesmenu import HardnessParams, cycle_graph, gen_hardness, validate
from bayesmenu.generators import witness_summary

params = HardnessParams(cycle_graph(5), Fraction(1, 2), k=2, independent_set=[1, 3])
inst, witness, claimed = gen_hardness(params)
print("valid:", validate(inst).ok)
for t in inst.types:
    print(t, "plays among", inst.metadata["real_actions"][t])

summary = witness_summary(inst, witness)
print("witness DSIC:", summary["dsic"])
print("witness value:", float(summary["value"]))
print("claimed target:", float(claimed))
