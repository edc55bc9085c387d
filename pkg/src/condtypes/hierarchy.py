"""Finitely supported hierarchies of conditional beliefs.

A :class:`HierarchyPrefix` of order ``n`` for player ``i`` is the tower
``mu^1, ..., mu^n``: ``mu^1`` is a CPS on ``S`` for ``B_i`` and ``mu^(k+1)`` is a
CPS on ``S x Q`` for the cylinders of ``B_i``, where ``Q`` is the (finite) set
of order-``k`` prefixes of the other player that carry positive mass.

Prefixes are hash-consed: building the same tower twice returns the same
object, so ``==`` is structural equality at the cost of a dictionary lookup,
however deep the nesting.
"""

from __future__ import annotations

import hashlib
import threading
import weakref
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Hashable, Iterable, Mapping, Sequence

from .cps import (
    ZERO,
    ConditioningFamily,
    Cps,
    CpsError,
    FiniteSpace,
    Measure,
    ValidationReport,
    cylinder_base,
    cylinder_family,
    fmt_event,
    marginal_cps,
)
from .structure import Frame, StructureError, TypeStructure, require_valid


class PrefixError(ValueError):
    """Malformed nesting of a hierarchy prefix."""


_TABLE: "weakref.WeakValueDictionary[tuple, HierarchyPrefix]" = weakref.WeakValueDictionary()
_LOCK = threading.Lock()


def _frac(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}"


class HierarchyPrefix:
    """Player ``player``'s coherent tower of conditional beliefs up to ``order``."""

    __slots__ = ("frame", "player", "levels", "digest", "sort_key", "__weakref__")

    frame: Frame
    player: int
    levels: tuple[Cps, ...]
    digest: str
    sort_key: tuple

    def __new__(cls, frame: Frame, player: int, levels: Iterable[Cps]):
        levels = tuple(levels)
        key = (frame, player, levels)
        with _LOCK:
            obj = _TABLE.get(key)
            if obj is not None:
                return obj
        _check_shape(frame, player, levels)
        obj = object.__new__(cls)
        obj.frame = frame
        obj.player = player
        obj.levels = levels
        obj.digest = _digest(frame, player, levels)
        first = levels[0]
        obj.sort_key = (
            len(levels),
            tuple(tuple(-m[s] for s in frame.space.points) for m in first.conditionals),
            obj.digest,
        )
        with _LOCK:
            # another thread may have won the race
            return _TABLE.setdefault(key, obj)

    @property
    def order(self) -> int:
        return len(self.levels)

    @property
    def other(self) -> int:
        return 1 - self.player

    def level(self, k: int) -> Cps:
        """``mu^k`` (1-based)."""
        return self.levels[k - 1]

    def __reduce__(self):
        return (HierarchyPrefix, (self.frame, self.player, self.levels))

    def __lt__(self, other: "HierarchyPrefix") -> bool:
        return self.sort_key < other.sort_key

    def __repr__(self) -> str:
        return f"HierarchyPrefix(player={self.frame.players[self.player]}, order={self.order}, {self.digest[:10]})"


def _digest(frame: Frame, player: int, levels: tuple[Cps, ...]) -> str:
    h = hashlib.sha256()
    h.update(f"{frame.players[player]}|{len(levels)}".encode())
    for k, lvl in enumerate(levels):
        h.update(b"|L")
        for ev, m in lvl.items():
            h.update(b"|E")
            for p, v in m.items():
                if k == 0:
                    h.update(f";{p!r}:{_frac(v)}".encode())
                else:
                    s, q = p
                    h.update(f";{s!r},{q.digest}:{_frac(v)}".encode())
    return h.hexdigest()


def _check_shape(frame: Frame, player: int, levels: tuple[Cps, ...]) -> None:
    if player not in (0, 1):
        raise PrefixError("player index must be 0 or 1")
    if not levels:
        raise PrefixError("a prefix needs at least one level")
    fam = frame.families[player]
    first = levels[0]
    if first.space != frame.space or first.family != fam:
        raise PrefixError("level 1 must be a CPS on S for the player's family")
    for k, lvl in enumerate(levels[1:], start=1):
        fac = lvl.space.factors
        if fac is None or fac[0] != frame.space:
            raise PrefixError(f"level {k + 1} is not over S x Q")
        q_space = fac[1]
        for q in q_space.points:
            if not isinstance(q, HierarchyPrefix) or q.frame != frame or q.player != 1 - player or q.order != k:
                raise PrefixError(f"level {k + 1}: support points must be order-{k} prefixes of the other player")
        if list(q_space.points) != sorted(q_space.points):
            raise PrefixError(f"level {k + 1}: prefixes are not in canonical order")
        used = {q for m in lvl.conditionals for (_, q) in m.support}
        if len(used) != len(q_space):
            raise PrefixError(f"level {k + 1}: Q lists a prefix with no mass")
        if lvl.family != cylinder_family(fam, q_space):
            raise PrefixError(f"level {k + 1}: family is not the cylinders of the player's family")


def canonical_sort_key(value: Any):
    if isinstance(value, HierarchyPrefix):
        return value.sort_key
    return value


def level_from_masses(frame: Frame, player: int, rows: Sequence[Mapping]) -> Cps:
    """Build a canonical ``S x Q`` level from per-event masses over ``(s, q)`` (zeros dropped).

    ``rows`` is aligned with the player's family on ``S``.
    """
    fam = frame.families[player]
    used = {q for row in rows for (_, q), v in row.items() if v}
    q_space = FiniteSpace(sorted(used, key=canonical_sort_key))
    cyl = cylinder_family(fam, q_space)
    return Cps(cyl.space, cyl, [{p: v for p, v in row.items() if v} for row in rows])


# -- partitions ------------------------------------------------------------------------


@dataclass(frozen=True)
class Partition:
    """Block ids (dense, numbered by first appearance) for the points of a type set."""

    types: FiniteSpace
    blocks: tuple[int, ...]

    @classmethod
    def from_labels(cls, types: FiniteSpace, labels: Sequence[Hashable]) -> "Partition":
        ids: dict = {}
        return cls(types, tuple(ids.setdefault(lab, len(ids)) for lab in labels))

    @classmethod
    def trivial(cls, types: FiniteSpace) -> "Partition":
        return cls(types, (0,) * len(types))

    @classmethod
    def discrete(cls, types: FiniteSpace) -> "Partition":
        return cls(types, tuple(range(len(types))))

    def __getitem__(self, t) -> int:
        return self.blocks[self.types.index(t)]

    @property
    def n_blocks(self) -> int:
        return len(set(self.blocks))

    def members(self) -> list[list]:
        out: list[list] = [[] for _ in range(self.n_blocks)]
        for t, b in zip(self.types.points, self.blocks):
            out[b].append(t)
        return out

    def is_discrete(self) -> bool:
        return self.n_blocks == len(self.types)

    def same_block(self, t, u) -> bool:
        return self[t] == self[u]


def pushforward_under_partition(mu: Cps, part: Partition, reps: Mapping[int, Hashable] | None = None) -> Cps:
    """Push a CPS on ``S x T_j`` forward along ``(s, t) -> (s, reps[block(t)])``.

    With ``reps=None`` the block ids themselves are the representatives.  The
    result lives on ``S x Q`` where ``Q`` holds only representatives with mass,
    in canonical order; its family is the cylinders of the same base family.
    """
    s_space, tj = mu.space.factors
    if tj != part.types:
        raise CpsError("partition is over a different type set")
    base = cylinder_base(mu.family)
    block_of = dict(zip(part.types.points, part.blocks))
    rows = []
    for m in mu.conditionals:
        row: dict = {}
        for (s, t), v in m.items():
            b = block_of[t]
            if reps is None:
                q = b
            else:
                try:
                    q = reps[b]
                except KeyError:
                    raise CpsError(f"no representative for block {b}") from None
            key = (s, q)
            row[key] = row.get(key, ZERO) + v
        rows.append(row)
    used = {q for row in rows for (_, q) in row}
    q_space = FiniteSpace(sorted(used, key=canonical_sort_key))
    cyl = cylinder_family(base, q_space)
    xy = cyl.space
    conds = tuple(Measure(xy, {p: row[p] for p in xy.sort(row)}, _trusted=True) for row in rows)
    return Cps(xy, cyl, conds, _trusted=True)


# -- unfolding -------------------------------------------------------------------------


def _kernel(types: FiniteSpace, prefixes: Mapping) -> tuple[Partition, dict]:
    part = Partition.from_labels(types, [prefixes[t] for t in types.points])
    reps = {}
    for t, b in zip(types.points, part.blocks):
        reps.setdefault(b, prefixes[t])
    return part, reps


def unfold(ts: TypeStructure, n: int, *, check: bool = True) -> tuple[dict, dict]:
    """Order-``n`` hierarchy prefix of every type, per player.

    Level ``k+1`` is the pushforward of the belief along ``(s, t_j) -> (s, h_j^k(t_j))``,
    computed through the equality kernel of ``h_j^k`` so each distinct
    lower-order prefix is handled once.
    """
    if n < 1:
        raise ValueError("depth must be at least 1")
    if check:
        require_valid(ts)
    frame = ts.frame
    current = []
    for i in (0, 1):
        current.append({t: HierarchyPrefix(frame, i, (marginal_cps(ts.belief(i, t)),)) for t in ts.types[i].points})
    for _ in range(1, n):
        kernels = [_kernel(ts.types[j], current[j]) for j in (0, 1)]
        nxt = []
        for i in (0, 1):
            part, reps = kernels[1 - i]
            cache: dict = {}
            out = {}
            for t in ts.types[i].points:
                lvl = pushforward_under_partition(ts.belief(i, t), part, reps)
                lvl = cache.setdefault(lvl, lvl)
                out[t] = HierarchyPrefix(frame, i, current[i][t].levels + (lvl,))
            nxt.append(out)
        current = nxt
    return current[0], current[1]


def truncate(p: HierarchyPrefix, m: int) -> HierarchyPrefix:
    """Project an order-``n`` prefix to order ``m``.

    Level ``k+1`` already ranges over order-``k`` prefixes, so dropping the levels
    above ``m`` is the whole projection.
    """
    if not 1 <= m <= p.order:
        raise ValueError(f"cannot truncate an order-{p.order} prefix to order {m}")
    if m == p.order:
        return p
    return HierarchyPrefix(p.frame, p.player, p.levels[:m])


def project_level(p: HierarchyPrefix, k: int) -> tuple[list[dict], ConditioningFamily]:
    """Masses of ``mu^(k+1)`` pushed down along ``(s, q) -> (s, truncate(q, k-1))`` (or ``s`` when ``k == 1``)."""
    lvl = p.levels[k]
    rows = []
    for m in lvl.conditionals:
        row: dict = {}
        for (s, q), v in m.items():
            key = s if k == 1 else (s, truncate(q, k - 1))
            row[key] = row.get(key, ZERO) + v
        rows.append(row)
    return rows, p.frame.families[p.player]


def check_prefix_coherence(p: HierarchyPrefix, *, nested: bool = True) -> ValidationReport:
    """Each level must marginalize exactly onto the level below it.

    With ``nested`` the other player's prefixes in the supports are checked too
    (each distinct one once).
    """
    report = ValidationReport()
    seen: set = set()
    _coherence(p, report, seen, nested, path=())
    return report


def _coherence(p: HierarchyPrefix, report: ValidationReport, seen: set, nested: bool, path: tuple) -> None:
    if p in seen:
        return
    seen.add(p)
    frame = p.frame
    where = "".join(f" in support of {x}" for x in path)
    for k in range(1, p.order):
        rows, fam = project_level(p, k)
        below = p.levels[k - 1]
        for ev, row, m in zip(fam.events, rows, below.conditionals):
            label = fmt_event(frame.space, ev)
            if k == 1:
                lower = {s: v for s, v in m.items()}
            else:
                lower = {(s, q): v for (s, q), v in m.items()}
            if row != lower:
                pts = sorted(set(row) | set(lower), key=lambda x: (frame.space.index(x) if k == 1 else (frame.space.index(x[0]), x[1].sort_key)))
                bad = next(x for x in pts if row.get(x, ZERO) != lower.get(x, ZERO))
                shown = bad if k == 1 else (bad[0], bad[1].digest[:10])
                report.add(
                    "incoherent",
                    f"level {k + 1} marginalizes to {row.get(bad, ZERO)} at {shown} given {label},"
                    f" level {k} says {lower.get(bad, ZERO)}{where}",
                    k,
                    ev,
                    bad,
                    path,
                )
                break
    if nested:
        for k in range(1, p.order):
            for q in p.levels[k].space.factors[1].points:
                _coherence(q, report, seen, nested, path + (p.digest[:10],))


def prefix_partition(types: FiniteSpace, prefixes: Mapping) -> Partition:
    return Partition.from_labels(types, [prefixes[t] for t in types.points])


def dirac_tower(frame: Frame, player: int, n: int) -> HierarchyPrefix:
    """The unique order-``n`` prefix when ``S`` is a single point (every level a point mass)."""
    if len(frame.space) != 1:
        raise StructureError("a Dirac tower needs a one-point S")
    (s,) = frame.space.points
    towers = [HierarchyPrefix(frame, i, (Cps(frame.space, frame.families[i], [{s: 1}] * len(frame.families[i])),)) for i in (0, 1)]
    for k in range(1, n):
        towers = [
            HierarchyPrefix(
                frame,
                i,
                towers[i].levels + (level_from_masses(frame, i, [{(s, towers[1 - i]): 1}] * len(frame.families[i])),),
            )
            for i in (0, 1)
        ]
    return towers[player]
