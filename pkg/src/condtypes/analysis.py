"""Whole-structure questions answered by partition refinement on types.

Two types generate the same order-``n`` hierarchy exactly when they share a
block of the ``n``-th refinement ``P_n``: ``P_0`` is trivial and ``P_(n+1)``
groups the types of player ``i`` whose beliefs agree once the other player's
types are lumped by ``P_n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Mapping, Sequence, Union

from .cps import (
    ONE,
    Cps,
    conditional_of_measure,
    fmt_event,
    pushforward_cps,
)
from .hierarchy import Partition, pushforward_under_partition
from .structure import StructureError, TypeStructure, disjoint_union, require_valid, same_frame

Depth = Union[int, Literal["fixpoint"]]

STAR, BASE = "*", ""


@dataclass
class Refinement:
    """``partitions[n] == (P_n(player 0), P_n(player 1))``.

    ``fixpoint`` is the least ``n`` with ``P_(n+1) == P_n`` (``None`` if the run was
    cut short before reaching it).  ``rounds`` counts the refinement steps run.
    """

    partitions: list[tuple[Partition, Partition]]
    fixpoint: int | None

    @property
    def rounds(self) -> int:
        return len(self.partitions) if self.fixpoint is not None else len(self.partitions) - 1

    @property
    def final(self) -> tuple[Partition, Partition]:
        return self.partitions[-1]

    def at(self, n: int) -> tuple[Partition, Partition]:
        if n < len(self.partitions):
            return self.partitions[n]
        if self.fixpoint is None:
            raise IndexError(f"refinement was stopped before round {n}")
        return self.partitions[-1]


def _refine_step(ts: TypeStructure, prev: tuple[Partition, Partition]) -> tuple[Partition, Partition]:
    out = []
    for i in (0, 1):
        other = prev[1 - i]
        sigs = [pushforward_under_partition(ts.belief(i, t), other) for t in ts.types[i].points]
        out.append(Partition.from_labels(ts.types[i], sigs))
    return out[0], out[1]


def refine(ts: TypeStructure, rounds: int | None = None, *, check: bool = True) -> Refinement:
    """Run refinement to the fixpoint, or for at most ``rounds`` steps."""
    if check:
        require_valid(ts)
    parts = [(Partition.trivial(ts.types[0]), Partition.trivial(ts.types[1]))]
    # each non-final step splits some block, so this bound is never hit
    limit = len(ts.types[0]) + len(ts.types[1])
    while True:
        n = len(parts) - 1
        if rounds is not None and n >= rounds:
            return Refinement(parts, None)
        nxt = _refine_step(ts, parts[-1])
        if nxt == parts[-1]:
            return Refinement(parts, n)
        if n >= limit:
            raise AssertionError("refinement did not stabilise within |T_1|+|T_2| rounds")
        parts.append(nxt)


def _depth_partitions(ts: TypeStructure, depth: Depth) -> tuple[Partition, Partition]:
    if depth == "fixpoint":
        return refine(ts).final
    if not isinstance(depth, int) or depth < 0:
        raise ValueError("depth must be a non-negative integer or 'fixpoint'")
    r = refine(ts, rounds=depth)
    return r.at(depth) if r.fixpoint is not None else r.partitions[depth]


# -- redundancy ------------------------------------------------------------------------


@dataclass
class RedundancyResult:
    non_redundant: bool
    witness: tuple | None = None  # (player, t, t')
    refinement: Refinement | None = None

    def __bool__(self) -> bool:
        return self.non_redundant


def is_non_redundant(ts: TypeStructure) -> RedundancyResult:
    """Distinct types must generate distinct hierarchies (at all orders)."""
    r = refine(ts)
    for i in (0, 1):
        part = r.final[i]
        first: dict = {}
        for t, b in zip(part.types.points, part.blocks):
            if b in first:
                return RedundancyResult(False, (ts.players[i], first[b], t), r)
            first[b] = t
    return RedundancyResult(True, None, r)


# -- inclusion of generated hierarchies ------------------------------------------------


@dataclass
class InclusionResult:
    included: bool
    depth: Depth
    witness: tuple | None = None  # (player, starred type)

    def __bool__(self) -> bool:
        return self.included


def hierarchies_included(star: TypeStructure, base: TypeStructure, depth: Depth = "fixpoint") -> InclusionResult:
    """Is every hierarchy generated in ``star`` (to order ``depth``) also generated in ``base``?"""
    same_frame(star, base)
    require_valid(star)
    require_valid(base)
    union = disjoint_union(star, base, (STAR, BASE))
    parts = _depth_partitions(union, depth)
    for i in (0, 1):
        part = parts[i]
        base_blocks = {part[(BASE, t)] for t in base.types[i].points}
        for t in star.types[i].points:
            if part[(STAR, t)] not in base_blocks:
                return InclusionResult(False, depth, (star.players[i], t))
    return InclusionResult(True, depth, None)


def same_hierarchies(a: TypeStructure, b: TypeStructure, depth: Depth = "fixpoint") -> bool:
    return bool(hierarchies_included(a, b, depth)) and bool(hierarchies_included(b, a, depth))


def unique_hierarchy_frame(ts: TypeStructure) -> bool:
    """``S`` is one point and each family is ``{S}``: only one hierarchy exists per player,

    so every structure over this frame generates it and is terminal.
    """
    return len(ts.space) == 1 and all(len(f) == 1 for f in ts.families)


# -- morphisms -------------------------------------------------------------------------


@dataclass
class MorphismResult:
    ok: bool
    witness: tuple | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _check_map(star: TypeStructure, base: TypeStructure, phi: Sequence[Mapping]) -> tuple[dict, dict]:
    if len(phi) != 2:
        raise StructureError("a type map needs one component per player")
    out = []
    for i in (0, 1):
        m = dict(phi[i])
        for t in star.types[i].points:
            if t not in m:
                raise StructureError(f"map is not defined on type {t!r} of player {star.players[i]}")
            if m[t] not in base.types[i]:
                raise StructureError(f"map sends {t!r} to {m[t]!r}, not a type of player {base.players[i]}")
        out.append(m)
    return out[0], out[1]


def phi_from_names(ts: TypeStructure, phi: Mapping) -> tuple[dict, dict]:
    """Accept ``{player_name: {t: t'}}`` as well as a pair of dicts."""
    if isinstance(phi, Mapping) and set(phi) <= set(ts.players):
        return tuple(dict(phi.get(p, {})) for p in ts.players)
    return phi


def check_type_morphism(star: TypeStructure, base: TypeStructure, phi) -> MorphismResult:
    """``beta_i(phi_i(t)) == pushforward of beta*_i(t) along (Id_S, phi_j)``, exactly."""
    same_frame(star, base)
    require_valid(star)
    require_valid(base)
    phi = _check_map(star, base, phi_from_names(star, phi))
    for i in (0, 1):
        j = 1 - i
        pj = phi[j]
        for t in star.types[i].points:
            pushed = pushforward_cps(star.belief(i, t), lambda p: (p[0], pj[p[1]]), base.cylinders[i])
            target = base.belief(i, phi[i][t])
            if pushed == target:
                continue
            dom = base.domain(i)
            for ev, m_push, m_tgt in zip(base.families[i].events, pushed.conditionals, target.conditionals):
                for p in dom.points:
                    if m_push[p] != m_tgt[p]:
                        return MorphismResult(
                            False,
                            (star.players[i], t, ev, p),
                            f"player {star.players[i]}, type {t}: given {fmt_event(base.space, ev)} the image of"
                            f" beta*({t}) puts {m_push[p]} on {p}, beta({phi[i][t]}) puts {m_tgt[p]}",
                        )
    return MorphismResult(True)


def check_hierarchy_morphism(star: TypeStructure, base: TypeStructure, phi, depth: Depth = "fixpoint") -> MorphismResult:
    """Each ``t`` and ``phi(t)`` generate the same hierarchy up to ``depth``."""
    same_frame(star, base)
    require_valid(star)
    require_valid(base)
    phi = _check_map(star, base, phi_from_names(star, phi))
    parts = _depth_partitions(disjoint_union(star, base, (STAR, BASE)), depth)
    for i in (0, 1):
        for t in star.types[i].points:
            if not parts[i].same_block((STAR, t), (BASE, phi[i][t])):
                return MorphismResult(
                    False,
                    (star.players[i], t),
                    f"player {star.players[i]}: {t} and {phi[i][t]} generate different hierarchies at depth {depth}",
                )
    return MorphismResult(True)


# -- completeness ----------------------------------------------------------------------


@dataclass
class PlayerCompleteness:
    player: str
    complete: bool
    witness: Cps | None = None
    candidates_tried: int = 0


@dataclass
class CompletenessReport:
    players: list[PlayerCompleteness] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return all(p.complete for p in self.players)

    def __bool__(self) -> bool:
        return self.complete


def differs_from(witness: Cps, other: Cps) -> tuple | None:
    """First ``(event, point)`` where the two CPSs disagree, or ``None``."""
    for ev, a, b in zip(witness.family.events, witness.conditionals, other.conditionals):
        for p in witness.space.points:
            if a[p] != b[p]:
                return ev, p
    return None


def completeness_report(ts: TypeStructure) -> CompletenessReport:
    """Decide surjectivity of each belief map.

    If some cylinder ``B x T_j`` has two or more points the codomain is infinite,
    so a CPS outside the (finite) image is built: among ``|T_i|+1`` conditionals of
    the measures giving weight ``k`` to one designated point and ``1`` to the rest,
    at least one is missed.
    """
    require_valid(ts)
    report = CompletenessReport()
    for i in (0, 1):
        cyl = ts.cylinders[i]
        name = ts.players[i]
        big = max(cyl.events, key=len)  # first maximal event in family order
        if len(big) == 1:
            report.players.append(PlayerCompleteness(name, True))
            continue
        dom = cyl.space
        star_pt = dom.sort(big)[0]
        images = {ts.belief(i, t) for t in ts.types[i].points}
        witness = None
        tried = 0
        for k in range(1, len(ts.types[i]) + 2):
            tried += 1
            p = {x: (Fraction(k) if x == star_pt else ONE) for x in dom.points}
            cand = conditional_of_measure(p, cyl)
            if cand not in images:
                witness = cand
                break
        assert witness is not None, "pigeonhole: |T_i|+1 distinct candidates cannot all be images"
        report.players.append(PlayerCompleteness(name, False, witness, tried))
    return report
