"""
Extending prefixes and lifting CPSs
===================================

A coherent order-n prefix can always be continued: the next level is the
image of the top level under a section that extends every lower-order prefix
of the other player.  Separately, a CPS on X x Z can be pulled back through
any onto map Y -> Z by pushing it along a right inverse.
"""

import random
from fractions import Fraction

from condtypes import (
    ConditioningFamily,
    Cps,
    FiniteSpace,
    check_prefix_coherence,
    coherent_extend,
    cylinder_family,
    lift_cps,
    pushforward_cps,
    truncate,
)
from condtypes.generators import random_structure
from condtypes.hierarchy import unfold
from condtypes.io import serialize_cps

ts = random_structure(random.Random(3), max_states=3)
p = next(iter(unfold(ts, 2)[0].values()))
q = p
for _ in range(3):
    q = coherent_extend(q)
print("extended from order", p.order, "to", q.order)
print("coherent:", check_prefix_coherence(q).valid, " restricts back:", truncate(q, p.order) is p)

x = FiniteSpace(["x1", "x2"])
z = FiniteSpace(["z1", "z2"])
fam = cylinder_family(ConditioningFamily(x, [["x1", "x2"], ["x2"]]), z)
nu = Cps(fam.space, fam, [
    {("x1", "z1"): Fraction(1, 2), ("x1", "z2"): Fraction(1, 2)},
    {("x2", "z2"): 1},
])
f1 = {"y1": "z2", "y2": "z1", "y3": "z2"}
mu = lift_cps(nu, f1)
print(serialize_cps(mu))
print("pushes back to nu:", pushforward_cps(mu, lambda pt: (pt[0], f1[pt[1]]), nu.family) == nu)
