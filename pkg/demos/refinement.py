"""
Refinement versus unfolding
===========================

Blocks of the n-th refinement are the types that share an order-n hierarchy
prefix.  Here the two ways of computing this are run side by side on a
random structure with point-mass beliefs, which tends to need a few rounds.
"""

import random
import time

from condtypes import refine, unfold
from condtypes.generators import random_structure
from condtypes.hierarchy import prefix_partition

rng = random.Random(7)
ts = max(
    (random_structure(rng, max_states=2, max_types=5, dirac=True, duplicate_rate=0.1) for _ in range(200)),
    key=lambda s: refine(s).fixpoint,
)
print(ts)

r = refine(ts)
for n, (p1, p2) in enumerate(r.partitions):
    print(f"P_{n}  T_1: {p1.members()}  T_2: {p2.members()}")
print("fixpoint:", r.fixpoint)

for n in range(1, r.fixpoint + 3):
    t0 = time.perf_counter()
    pre = unfold(ts, n)
    same = all(r.at(n)[i] == prefix_partition(ts.types[i], pre[i]) for i in (0, 1))
    print(f"order {n}: blocks match prefixes: {same}  ({time.perf_counter() - t0:.3f}s)")
