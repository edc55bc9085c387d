"""Random finite objects for property tests, acceptance runs and demos.

Valid CPSs are drawn through a lexicographic construction: the space is cut
into ordered layers, each layer carries positive weights, and ``mu(.|B)`` is
the normalized restriction to ``B`` of the first layer meeting ``B``.  Every
CPS on a finite space arises this way, including ones that condition on
null events.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from .cps import ConditioningFamily, Cps, FiniteSpace, Measure, cylinder_family
from .structure import TypeStructure


def layered_cps(family: ConditioningFamily, layers: Sequence[Sequence], weights: dict) -> Cps:
    space = family.space
    conds = []
    for ev in family.events:
        for layer in layers:
            hit = [x for x in layer if x in ev]
            if hit:
                total = sum(weights[x] for x in hit)
                conds.append(Measure(space, {x: Fraction(weights[x], total) for x in space.sort(hit)}, _trusted=True))
                break
        else:
            raise ValueError("layers do not cover the family")
    return Cps(space, family, conds)


def random_cps(rng: random.Random, family: ConditioningFamily, max_weight: int = 3, *, dirac: bool = False) -> Cps:
    """``dirac=True`` makes every conditional a point mass."""
    pts = list(family.space.points)
    rng.shuffle(pts)
    layers = []
    while pts:
        k = 1 if dirac else rng.randint(1, len(pts))
        layers.append(pts[:k])
        pts = pts[k:]
    weights = {x: rng.randint(1, max_weight) for x in family.space.points}
    return layered_cps(family, layers, weights)


def random_family(rng: random.Random, space: FiniteSpace, max_events: int) -> ConditioningFamily:
    pts = list(space.points)
    target = rng.randint(1, max_events)
    events: list[frozenset] = []
    if rng.random() < 0.7:
        events.append(frozenset(pts))
    tries = 0
    while len(events) < target and tries < 30:
        tries += 1
        ev = frozenset(rng.sample(pts, rng.randint(1, len(pts))))
        if ev not in events:
            events.append(ev)
    return ConditioningFamily(space, [space.sort(e) for e in events])


def random_measure(rng: random.Random, space: FiniteSpace, max_den: int = 12, *, full_support: bool = True) -> Measure:
    lo = 1 if full_support else 0
    w = {x: rng.randint(lo, max_den) for x in space.points}
    if not any(w.values()):
        w[space.points[0]] = 1
    total = sum(w.values())
    return Measure(space, {x: Fraction(v, total) for x, v in w.items()})


def random_structure(
    rng: random.Random,
    max_states: int = 4,
    max_types: int = 4,
    max_events: int = 3,
    *,
    players: tuple[str, str] = ("1", "2"),
    duplicate_rate: float = 0.3,
    max_weight: int = 2,
    dirac: bool = False,
) -> TypeStructure:
    """A valid structure; some types copy an earlier type's belief so redundancy shows up."""
    s = FiniteSpace(f"s{k}" for k in range(rng.randint(1, max_states)))
    fams = [random_family(rng, s, max_events) for _ in (0, 1)]
    types = [FiniteSpace(f"t{i + 1}_{k}" for k in range(rng.randint(1, max_types))) for i in (0, 1)]
    beliefs: list[dict] = [{}, {}]
    for i in (0, 1):
        cyl = cylinder_family(fams[i], types[1 - i])
        made: list[Cps] = []
        for t in types[i].points:
            if made and rng.random() < duplicate_rate:
                mu = rng.choice(made)
            else:
                mu = random_cps(rng, cyl, max_weight, dirac=dirac)
            made.append(mu)
            beliefs[i][t] = mu
    return TypeStructure(s, fams, types, beliefs, players=players)


def split_structure(rng: random.Random, base: TypeStructure, max_copies: int = 3) -> tuple[TypeStructure, tuple[dict, dict]]:
    """A structure with several copies of each base type, and the quotient map onto ``base``.

    Each copy's belief spreads the mass of ``(s, u)`` over the copies of ``u`` with
    point-dependent weights, which keeps the chain rule and makes the quotient a
    type morphism.
    """
    copies = [{t: [f"{t}#{r}" for r in range(rng.randint(1, max_copies))] for t in base.types[i].points} for i in (0, 1)]
    types = [[c for t in base.types[i].points for c in copies[i][t]] for i in (0, 1)]
    phi = tuple({c: t for t in base.types[i].points for c in copies[i][t]} for i in (0, 1))
    beliefs: list[dict] = [{}, {}]
    for i in (0, 1):
        j = 1 - i
        for t in base.types[i].points:
            mu = base.belief(i, t)
            for c in copies[i][t]:
                split = {}
                for s in base.space.points:
                    for u in base.types[j].points:
                        w = [rng.randint(1, 3) for _ in copies[j][u]]
                        tot = sum(w)
                        split[(s, u)] = [(cu, Fraction(wk, tot)) for cu, wk in zip(copies[j][u], w)]
                conds = {}
                for base_ev, m in zip(base.families[i].events, mu.conditionals):
                    conds[base_ev] = {(s, cu): v * share for (s, u), v in m.items() for cu, share in split[(s, u)]}
                beliefs[i][c] = conds
    star = TypeStructure(base.space, base.families, types, beliefs, players=base.players)
    return star, phi
