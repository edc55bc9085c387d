"""Two-player conditional type structures over a finite space of primitive uncertainty."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .cps import (
    ConditioningFamily,
    Cps,
    CpsError,
    FiniteSpace,
    Measure,
    ValidationReport,
    as_fraction,
    cylinder_family,
    fmt_event,
    validate_cps,
)


class StructureError(ValueError):
    """Malformed type structure (shape, labels, keys)."""


class InvalidStructure(StructureError):
    def __init__(self, report: ValidationReport):
        self.report = report
        super().__init__(f"invalid type structure: {report.violations[0]}")


@dataclass(frozen=True)
class Frame:
    """What hierarchies are relative to: ``S``, each player's family on ``S``, player names."""

    space: FiniteSpace
    families: tuple[ConditioningFamily, ConditioningFamily]
    players: tuple[str, str] = ("1", "2")

    def __post_init__(self):
        if len(self.families) != 2 or len(self.players) != 2:
            raise StructureError("exactly two players are supported")
        for fam in self.families:
            if fam.space != self.space:
                raise StructureError("conditioning family is not over S")
        if self.players[0] == self.players[1]:
            raise StructureError("player names must differ")

    def player_index(self, player: int | str) -> int:
        if isinstance(player, int) and player in (0, 1):
            return player
        try:
            return self.players.index(str(player))
        except ValueError:
            raise StructureError(f"unknown player {player!r}") from None


def _family(space: FiniteSpace, fam) -> ConditioningFamily:
    if isinstance(fam, ConditioningFamily):
        if fam.space != space:
            raise StructureError("conditioning family is not over S")
        return fam
    return ConditioningFamily(space, fam)


class TypeStructure:
    """``(S, (B_i, T_i, beta_i))`` for two players.

    ``beliefs[i][t]`` maps each conditioning event (either ``B`` in ``B_i`` or the
    cylinder ``B x T_j``) to masses over points ``(s, t_j)``.  Shape is checked on
    construction; the CPS axioms are checked by :func:`validate_structure` so that
    broken inputs can be reported rather than rejected.
    """

    def __init__(
        self,
        space: FiniteSpace | Sequence[str],
        families: Sequence,
        types: Sequence,
        beliefs: Sequence[Mapping],
        players: Sequence[str] = ("1", "2"),
    ):
        if not isinstance(space, FiniteSpace):
            space = FiniteSpace(space)
        if len(families) != 2 or len(types) != 2 or len(beliefs) != 2:
            raise StructureError("exactly two players are supported")
        fams = tuple(_family(space, f) for f in families)
        self.frame = Frame(space, fams, tuple(str(p) for p in players))
        self.types = tuple(t if isinstance(t, FiniteSpace) else FiniteSpace(t) for t in types)
        self.cylinders = tuple(cylinder_family(fams[i], self.types[1 - i]) for i in (0, 1))
        self._raw: tuple[dict, dict] = ({}, {})
        self._cps_cache: dict = {}
        for i in (0, 1):
            given = beliefs[i]
            missing = [t for t in self.types[i].points if t not in given]
            if missing:
                raise StructureError(f"player {self.players[i]}: no belief for type {missing[0]!r}")
            extra = [t for t in given if t not in self.types[i]]
            if extra:
                raise StructureError(f"player {self.players[i]}: belief for unknown type {extra[0]!r}")
            for t in self.types[i].points:
                self._raw[i][t] = self._normalize_belief(i, t, given[t])

    # -- convenience accessors

    @property
    def space(self) -> FiniteSpace:
        return self.frame.space

    @property
    def families(self) -> tuple[ConditioningFamily, ConditioningFamily]:
        return self.frame.families

    @property
    def players(self) -> tuple[str, str]:
        return self.frame.players

    def domain(self, i: int) -> FiniteSpace:
        """``S x T_j`` for player ``i``."""
        return self.cylinders[i].space

    def _normalize_belief(self, i: int, t, belief) -> tuple:
        cyl = self.cylinders[i]
        dom = cyl.space
        tj = self.types[1 - i]
        if isinstance(belief, Cps):
            if belief.family != cyl:
                raise StructureError(f"player {self.players[i]}, type {t!r}: belief has the wrong family")
            return tuple(m.as_dict() for m in belief.conditionals)
        rows: dict = {}
        for key, masses in belief.items():
            ev = frozenset(key)
            if ev in cyl:
                cyl_ev = ev
            else:
                try:
                    base = self.space.event(ev)
                except CpsError:
                    raise StructureError(
                        f"player {self.players[i]}, type {t!r}: unknown conditioning event {sorted(map(str, ev))}"
                    ) from None
                cyl_ev = frozenset((s, u) for s in base for u in tj.points)
                if cyl_ev not in cyl:
                    raise StructureError(
                        f"player {self.players[i]}, type {t!r}: {fmt_event(self.space, base)} is not in B_{self.players[i]}"
                    )
            if cyl_ev in rows:
                raise StructureError(f"player {self.players[i]}, type {t!r}: event given twice")
            row = {}
            items = masses.items() if not isinstance(masses, Measure) else masses.items()
            for p, v in items:
                p = tuple(p)
                if p not in dom:
                    raise StructureError(f"player {self.players[i]}, type {t!r}: point {p!r} is not in S x T_j")
                v = as_fraction(v)
                if v:
                    row[p] = row.get(p, 0) + v
            rows[cyl_ev] = {p: row[p] for p in dom.sort(row)}
        missing = [ev for ev in cyl.events if ev not in rows]
        if missing:
            raise StructureError(
                f"player {self.players[i]}, type {t!r}: no conditional for {fmt_event(dom, missing[0])}"
            )
        return tuple(rows[ev] for ev in cyl.events)

    def raw_belief(self, i: int, t) -> tuple[dict, ...]:
        """Unchecked conditionals of ``beta_i(t)``, aligned with ``cylinders[i].events``."""
        return self._raw[i][t]

    def belief(self, i: int, t) -> Cps:
        """``beta_i(t)`` as a checked :class:`Cps`; raises :class:`InvalidCps` if broken."""
        key = (i, t)
        mu = self._cps_cache.get(key)
        if mu is None:
            mu = Cps(self.domain(i), self.cylinders[i], self._raw[i][t])
            self._cps_cache[key] = mu
        return mu

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TypeStructure):
            return NotImplemented
        return self.frame == other.frame and self.types == other.types and self._raw == other._raw

    def __repr__(self) -> str:
        return (
            f"TypeStructure(|S|={len(self.space)}, "
            f"|T_{self.players[0]}|={len(self.types[0])}, |T_{self.players[1]}|={len(self.types[1])})"
        )


def validate_structure(ts: TypeStructure) -> ValidationReport:
    """Every belief must be a CPS for the cylinder family; failures are located."""
    report = ValidationReport()
    for i in (0, 1):
        for t in ts.types[i].points:
            sub = validate_cps(ts.domain(i), ts.cylinders[i], ts.raw_belief(i, t))
            for v in sub.violations:
                report.add(v.kind, f"player {ts.players[i]}, type {t}: {v.message}", ts.players[i], t, *v.witness)
    return report


def require_valid(ts: TypeStructure) -> None:
    report = validate_structure(ts)
    if not report.valid:
        raise InvalidStructure(report)


def same_frame(a: TypeStructure, b: TypeStructure) -> None:
    if a.space != b.space:
        raise StructureError("structures have different spaces of primitive uncertainty")
    for i in (0, 1):
        if a.families[i].events != b.families[i].events:
            raise StructureError(f"structures have different conditioning families for player {a.players[i]}")
    if a.players != b.players:
        raise StructureError("structures name their players differently")


def disjoint_union(star: TypeStructure, base: TypeStructure, tags: tuple[str, str] = ("*", "")) -> TypeStructure:
    """Both structures side by side; types become ``(tag, t)`` and beliefs put no mass on foreign types."""
    same_frame(star, base)
    parts = (star, base)
    types = [[(tags[k], t) for k in (0, 1) for t in parts[k].types[i].points] for i in (0, 1)]
    beliefs: list[dict] = [{}, {}]
    for i in (0, 1):
        for k in (0, 1):
            ts = parts[k]
            for t in ts.types[i].points:
                rows = ts.raw_belief(i, t)
                conds = {}
                for base_ev, row in zip(ts.families[i].events, rows):
                    conds[base_ev] = {(s, (tags[k], u)): v for (s, u), v in row.items()}
                beliefs[i][(tags[k], t)] = conds
    return TypeStructure(star.space, star.families, types, beliefs, players=star.players)
