"""
Two types, one hierarchy
========================

Player a has two types and each is certain of player b's only type, who in
turn is certain of t'_a.  With a single state nothing can tell the a-types
apart, so they generate the same hierarchy at every order.
"""

from condtypes import (
    completeness_report,
    hierarchies_included,
    is_non_redundant,
    load_fixture,
    refine,
    unfold,
)
from condtypes.io import format_rational

ts = load_fixture("friedenberg")
print(ts)

# prefixes are interned, so equal hierarchies are literally the same object
a, b = unfold(ts, 4)
print("order-4 prefixes equal:", a["t'_a"] is a["t''_a"])

r = refine(ts)
print("partition of T_a at the fixpoint:", r.final[0].members())

red = is_non_redundant(ts)
print("non-redundant:", red.non_redundant, "witness:", red.witness)

# b's belief map hits one CPS out of a continuum
for p in completeness_report(ts).players:
    if p.complete:
        print(f"player {p.player}: onto")
        continue
    m = p.witness.conditionals[0]
    shown = ", ".join(f"{x}: {format_rational(v)}" for x, v in m.items())
    print(f"player {p.player}: misses {{{shown}}}")

# the one-type structure over the same frame generates exactly the same hierarchies
one = load_fixture("one_type")
print("included both ways:", bool(hierarchies_included(ts, one)) and bool(hierarchies_included(one, ts)))
