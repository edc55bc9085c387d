"""Finite spaces, conditioning families, measures and conditional probability systems.

All probabilities are :class:`fractions.Fraction` values; nothing in this module
ever touches a float.  A conditional probability system (CPS) is stored as one
measure per conditioning event, aligned with the event order of its family.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

Point = Hashable
Event = frozenset

ZERO = Fraction(0)
ONE = Fraction(1)


class CpsError(ValueError):
    """Malformed input: wrong space, wrong keys, bad event, bad map."""


class InvalidCps(CpsError):
    """A candidate failed the CPS axioms.  Carries the full report."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__(f"not a CPS: {report.violations[0]}")


def as_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted as probabilities; use Fraction or 'num/den'")
    return Fraction(value)


# -- reports ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    witness: tuple = ()

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.valid

    def add(self, kind: str, message: str, *witness: Any) -> None:
        self.violations.append(Violation(kind, message, tuple(witness)))

    def extend(self, other: "ValidationReport") -> None:
        self.violations.extend(other.violations)


# -- spaces and families ---------------------------------------------------------------


class FiniteSpace:
    """A nonempty ordered set of distinct points.

    The declaration order is the canonical order used for every tie-break and
    for serialization.  Product spaces remember their two factors.
    """

    __slots__ = ("points", "factors", "_index", "_hash")

    def __init__(self, points: Iterable[Point], factors: tuple["FiniteSpace", "FiniteSpace"] | None = None):
        pts = tuple(points)
        if not pts:
            raise CpsError("a finite space needs at least one point")
        index = {p: k for k, p in enumerate(pts)}
        if len(index) != len(pts):
            seen = set()
            dup = next(p for p in pts if p in seen or seen.add(p))
            raise CpsError(f"duplicate point {dup!r}")
        self.points = pts
        self.factors = factors
        self._index = index
        self._hash = hash(pts)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, point: object) -> bool:
        try:
            return point in self._index
        except TypeError:
            return False

    def index(self, point: Point) -> int:
        return self._index[point]

    def sort(self, points: Iterable[Point]) -> list:
        return sorted(points, key=self._index.__getitem__)

    def event(self, points: Iterable[Point]) -> Event:
        ev = frozenset(points)
        missing = [p for p in ev if p not in self._index]
        if missing:
            raise CpsError(f"point {missing[0]!r} is not in the space")
        return ev

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, FiniteSpace):
            return NotImplemented
        return self._hash == other._hash and self.points == other.points

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        if len(self.points) > 8:
            return f"FiniteSpace(<{len(self.points)} points>)"
        return f"FiniteSpace({list(self.points)!r})"


def product(x: FiniteSpace, y: FiniteSpace) -> FiniteSpace:
    """X x Y with lexicographic order."""
    return FiniteSpace(((a, b) for a in x.points for b in y.points), factors=(x, y))


class ConditioningFamily:
    """A nonempty, duplicate-free, ordered family of nonempty events of a space."""

    __slots__ = ("space", "events", "_position", "_hash")

    def __init__(self, space: FiniteSpace, events: Iterable[Iterable[Point]]):
        evs = []
        for raw in events:
            ev = space.event(raw)
            if not ev:
                raise CpsError("conditioning events must be nonempty")
            if ev in evs:
                raise CpsError(f"duplicate conditioning event {fmt_event(space, ev)}")
            evs.append(ev)
        if not evs:
            raise CpsError("a conditioning family needs at least one event")
        self.space = space
        self.events = tuple(evs)
        self._position = {ev: k for k, ev in enumerate(evs)}
        self._hash = hash((space, self.events))

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def __contains__(self, event: object) -> bool:
        return event in self._position

    def position(self, event: Event) -> int:
        return self._position[event]

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, ConditioningFamily):
            return NotImplemented
        return self._hash == other._hash and self.space == other.space and self.events == other.events

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return "ConditioningFamily([" + ", ".join(fmt_event(self.space, e) for e in self.events) + "])"


def fmt_event(space: FiniteSpace, event: Event) -> str:
    if all(p in space for p in event):
        pts = space.sort(event)
    else:
        pts = sorted(event, key=str)
    return "{" + ",".join(map(str, pts)) + "}"


def cylinder_family(family: ConditioningFamily, y: FiniteSpace) -> ConditioningFamily:
    """The cylinders ``B x Y`` for each ``B`` in ``family``, over ``X x Y``."""
    xy = product(family.space, y)
    return ConditioningFamily(xy, ([(a, b) for a in family.space.sort(ev) for b in y.points] for ev in family.events))


def cylinder_base(family: ConditioningFamily) -> ConditioningFamily:
    """Recover ``B_X`` from a family of cylinders ``B x Y``; raises if not of that form."""
    space = family.space
    if space.factors is None:
        raise CpsError("family is not over a product space")
    x, y = space.factors
    bases = []
    for ev in family.events:
        base = {a for a, _ in ev}
        if len(ev) != len(base) * len(y):
            raise CpsError(f"event {fmt_event(space, ev)} is not a cylinder B x Y")
        bases.append(base)
    return ConditioningFamily(x, bases)


# -- measures --------------------------------------------------------------------------


class Measure:
    """A finitely supported probability measure on a :class:`FiniteSpace`.

    Only positive masses are stored, in the space's canonical order.
    """

    __slots__ = ("space", "_mass", "_hash")

    def __init__(self, space: FiniteSpace, masses: Mapping[Point, Any], _trusted: bool = False):
        if _trusted:
            mass = dict(masses)
        else:
            mass = {}
            total = ZERO
            for p, v in masses.items():
                if p not in space:
                    raise CpsError(f"point {p!r} is not in the space")
                v = as_fraction(v)
                if v < 0:
                    raise CpsError(f"negative mass {v} at {p!r}")
                total += v
                if v:
                    mass[p] = v
            if total != ONE:
                raise CpsError(f"masses sum to {total}, not 1")
            mass = {p: mass[p] for p in space.sort(mass)}
        self.space = space
        self._mass = mass
        self._hash = hash(tuple(mass.items()))

    @classmethod
    def dirac(cls, space: FiniteSpace, point: Point) -> "Measure":
        return cls(space, {point: ONE})

    @classmethod
    def uniform(cls, space: FiniteSpace, points: Iterable[Point] | None = None) -> "Measure":
        pts = space.points if points is None else space.sort(set(points))
        w = Fraction(1, len(pts))
        return cls(space, {p: w for p in pts})

    def __getitem__(self, point: Point) -> Fraction:
        return self._mass.get(point, ZERO)

    def prob(self, event: Iterable[Point]) -> Fraction:
        ev = event if isinstance(event, (set, frozenset)) else frozenset(event)
        return sum((v for p, v in self._mass.items() if p in ev), ZERO)

    @property
    def support(self) -> tuple:
        return tuple(self._mass)

    def items(self):
        return self._mass.items()

    def as_dict(self) -> dict:
        return dict(self._mass)

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Measure):
            return NotImplemented
        return self._hash == other._hash and self.space == other.space and self._mass == other._mass

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return "Measure({" + ", ".join(f"{p!r}: {v}" for p, v in self._mass.items()) + "})"


def pushforward_measure(m: Measure, f: Callable[[Point], Point], target: FiniteSpace) -> Measure:
    out: dict = {}
    for p, v in m.items():
        q = f(p)
        out[q] = out.get(q, ZERO) + v
    for q in out:
        if q not in target:
            raise CpsError(f"image point {q!r} is not in the target space")
    return Measure(target, {q: out[q] for q in target.sort(out)}, _trusted=True)


# -- validation ------------------------------------------------------------------------


def _candidate_rows(space: FiniteSpace, family: ConditioningFamily, candidate) -> list[dict]:
    """Normalize a candidate (mapping event -> masses, or sequence aligned to the family)."""
    if family.space != space:
        raise CpsError("family is over a different space")
    if isinstance(candidate, Mapping):
        keys = {space.event(k) if not isinstance(k, frozenset) else k for k in candidate}
        if keys != set(family.events) or len(candidate) != len(family.events):
            extra = [k for k in keys if k not in family]
            if extra:
                raise CpsError(f"candidate has event {fmt_event(space, extra[0])} that is not in the family")
            missing = [e for e in family.events if e not in keys]
            raise CpsError(f"candidate lacks event {fmt_event(space, missing[0])}")
        by_event = {(k if isinstance(k, frozenset) else frozenset(k)): v for k, v in candidate.items()}
        rows = [by_event[e] for e in family.events]
    else:
        rows = list(candidate)
        if len(rows) != len(family.events):
            raise CpsError(f"expected {len(family.events)} conditionals, got {len(rows)}")
    out = []
    for row in rows:
        if isinstance(row, Measure):
            if row.space != space:
                raise CpsError("measure is over a different space")
            out.append(dict(row.items()))
            continue
        d = {}
        for p, v in row.items():
            if p not in space:
                raise CpsError(f"point {p!r} is not in the space")
            d[p] = as_fraction(v)
        out.append(d)
    return out


def validate_cps(space: FiniteSpace, family: ConditioningFamily, candidate) -> ValidationReport:
    """Check both CPS axioms exactly.

    The chain rule is checked on atoms: ``mu({x}|B) * mu(B|C) == mu({x}|C)`` for
    all ``B <= C`` in the family and ``x`` in ``B``.  Summing over ``x in A``
    gives the rule for every ``A <= B``.
    """
    rows = _candidate_rows(space, family, candidate)
    report = ValidationReport()
    for ev, row in zip(family.events, rows):
        label = fmt_event(space, ev)
        for p in space.sort(row):
            if row[p] < 0:
                report.add("negative-mass", f"mass {row[p]} at {p!r} given {label}", p, ev)
        total = sum(row.values(), ZERO)
        if total != ONE:
            report.add("not-normalized", f"conditional given {label} has total mass {total}", ev)
        for p in space.sort(row):
            if row[p] and p not in ev:
                report.add("mass-outside-event", f"mass {row[p]} at {p!r} outside {label}", p, ev)
        inside = sum((v for p, v in row.items() if p in ev), ZERO)
        if inside != ONE and total == ONE:
            report.add("event-not-certain", f"mu({label}|{label}) = {inside}", ev)
    for ci, c in enumerate(family.events):
        mc = rows[ci]
        for bi, b in enumerate(family.events):
            if bi == ci or not b <= c:
                continue
            mb = rows[bi]
            b_given_c = sum((v for p, v in mc.items() if p in b), ZERO)
            for x in space.sort(b):
                lhs = mb.get(x, ZERO) * b_given_c
                rhs = mc.get(x, ZERO)
                if lhs != rhs:
                    report.add(
                        "chain-rule",
                        f"mu({{{x}}}|{fmt_event(space, b)}) * mu({fmt_event(space, b)}|{fmt_event(space, c)})"
                        f" = {lhs} != {rhs} = mu({{{x}}}|{fmt_event(space, c)})",
                        x,
                        b,
                        c,
                    )
    return report


# -- conditional probability systems ---------------------------------------------------


class Cps:
    """A conditional probability system on ``(space, family)``.

    ``conditionals`` may be a mapping ``event -> masses`` or a sequence aligned with
    ``family.events``.  Construction validates both axioms and raises
    :class:`InvalidCps` on failure.
    """

    __slots__ = ("space", "family", "conditionals", "_hash")

    def __init__(self, space: FiniteSpace, family: ConditioningFamily, conditionals, *, _trusted: bool = False):
        if _trusted:
            measures = tuple(conditionals)
        else:
            report = validate_cps(space, family, conditionals)
            if not report.valid:
                raise InvalidCps(report)
            rows = _candidate_rows(space, family, conditionals)
            measures = tuple(Measure(space, r) for r in rows)
        self.space = space
        self.family = family
        self.conditionals = measures
        self._hash = hash((family, measures))

    def __getitem__(self, event: Iterable[Point]) -> Measure:
        ev = event if isinstance(event, frozenset) else frozenset(event)
        try:
            return self.conditionals[self.family.position(ev)]
        except KeyError:
            raise KeyError(f"{fmt_event(self.space, ev)} is not a conditioning event") from None

    def prob(self, a: Iterable[Point], b: Iterable[Point]) -> Fraction:
        """``mu(a | b)``."""
        return self[b].prob(frozenset(a))

    def items(self):
        return zip(self.family.events, self.conditionals)

    def as_dict(self) -> dict:
        return {ev: m.as_dict() for ev, m in self.items()}

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Cps):
            return NotImplemented
        return self._hash == other._hash and self.family == other.family and self.conditionals == other.conditionals

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        parts = [f"{fmt_event(self.space, ev)}: {m!r}" for ev, m in self.items()]
        return "Cps(" + "; ".join(parts) + ")"


def _as_function(f) -> Callable[[Point], Point]:
    if isinstance(f, Mapping):
        return f.__getitem__
    if callable(f):
        return f
    raise TypeError("point map must be a mapping or a callable")


def pushforward_cps(mu: Cps, f, family_y: ConditioningFamily) -> Cps:
    """Image conditional law of ``mu`` under the point map ``f``.

    Requires that the preimages of ``family_y``'s events are exactly the events
    of ``mu.family``.  Then ``result(E|C) = mu(f^-1(E) | f^-1(C))``.
    """
    fn = _as_function(f)
    y = family_y.space
    image = {}
    for p in mu.space.points:
        q = fn(p)
        if q not in y:
            raise CpsError(f"f({p!r}) = {q!r} is not a point of the target space")
        image[p] = q
    preimages = []
    for c in family_y.events:
        pre = frozenset(p for p, q in image.items() if q in c)
        if pre not in mu.family:
            raise CpsError(f"preimage of target event {fmt_event(y, c)} is not a conditioning event of the source")
        preimages.append(pre)
    uncovered = set(mu.family.events) - set(preimages)
    if uncovered:
        ev = min(uncovered, key=mu.family.position)
        raise CpsError(f"source event {fmt_event(mu.space, ev)} is not the preimage of any target event")
    conds = tuple(pushforward_measure(mu[pre], image.__getitem__, y) for pre in preimages)
    return Cps(y, family_y, conds, _trusted=True)


def marginal_cps(mu: Cps) -> Cps:
    """Marginal on ``X`` of a CPS on ``X x Y`` with a cylinder family."""
    base = cylinder_base(mu.family)
    return pushforward_cps(mu, lambda p: p[0], base)


def conditional_of_measure(p, family: ConditioningFamily) -> Cps:
    """The CPS ``A, B -> p(A & B) / p(B)`` of a full-support measure ``p``."""
    space = family.space
    if isinstance(p, Measure):
        if p.space != space:
            raise CpsError("measure and family live on different spaces")
        weights = {x: p[x] for x in space.points}
    else:
        weights = {x: as_fraction(p.get(x, 0)) for x in space.points}
        extra = [x for x in p if x not in space]
        if extra:
            raise CpsError(f"point {extra[0]!r} is not in the space")
    for x, w in weights.items():
        if w <= 0:
            raise CpsError(f"measure must have full support; mass at {x!r} is {w}")
    conds = []
    for ev in family.events:
        total = sum((weights[x] for x in ev), ZERO)
        conds.append(Measure(space, {x: weights[x] / total for x in space.sort(ev)}, _trusted=True))
    return Cps(space, family, conds, _trusted=True)


def restrict_factor(mu: Cps, keep: Sequence[Point] | None = None) -> Cps:
    """Shrink the second factor of a cylinder CPS on ``X x Y``.

    By default ``Y`` is cut down to the points carrying positive mass under some
    conditional, kept in their original order.
    """
    x, y = mu.space.factors
    if keep is None:
        used = {b for m in mu.conditionals for (_, b) in m.support}
        keep = [b for b in y.points if b in used]
    y2 = FiniteSpace(keep)
    fam = cylinder_family(cylinder_base(mu.family), y2)
    xy = fam.space
    conds = tuple(Measure(xy, dict(m.items()), _trusted=True) for m in mu.conditionals)
    for m in conds:
        for p in m.support:
            if p not in xy:
                raise CpsError(f"mass at {p!r} would be dropped")
    return Cps(xy, fam, conds, _trusted=True)
