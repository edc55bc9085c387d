"""JSON documents for structures, prefixes, CPSs and maps.

Probabilities travel as ``"num/den"`` strings, points of ``S x T`` as ``"(s,t)"``
and conditioning events as ``"{a,b}"``.  Output is canonical: the same value
always serializes to the same bytes.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from importlib import resources
from typing import Any, Mapping, Sequence

from .cps import ConditioningFamily, Cps, CpsError, FiniteSpace, cylinder_family
from .hierarchy import HierarchyPrefix, level_from_masses
from .structure import Frame, StructureError, TypeStructure

FORMAT_VERSION = "condtypes/1"

_LABEL = re.compile(r"^[^\s(){},\"][^(){},\"]*(?<!\s)$")
_RATIONAL = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+)\s*)?$")


class DocumentError(ValueError):
    """Syntax or semantic error in an input document."""


def format_rational(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}"


def parse_rational(text: Any) -> Fraction:
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise DocumentError(f"probability must be a 'num/den' string, got {text!r}")
    m = _RATIONAL.match(text)
    if not m:
        raise DocumentError(f"malformed rational {text!r}")
    num, den = int(m.group(1)), int(m.group(2) or 1)
    if den == 0:
        raise DocumentError(f"rational {text!r} has a zero denominator")
    return Fraction(num, den)


def _check_label(label: Any, what: str) -> str:
    if not isinstance(label, str) or not _LABEL.match(label):
        raise DocumentError(f"bad {what} label {label!r} (labels are nonempty and avoid ( ) {{ }} , \")")
    return label


def format_point(p) -> str:
    if isinstance(p, tuple):
        return "(" + ",".join(map(str, p)) + ")"
    return str(p)


def parse_point(text: str, space: FiniteSpace):
    if not isinstance(text, str):
        raise DocumentError(f"point must be a string, got {text!r}")
    t = text.strip()
    if t.startswith("(") and t.endswith(")"):
        p = tuple(part.strip() for part in t[1:-1].split(","))
    else:
        p = t
    if p not in space:
        raise DocumentError(f"unknown point {text!r}")
    return p


def format_event(space: FiniteSpace, ev) -> str:
    return "{" + ",".join(format_point(p) for p in space.sort(ev)) + "}"


def parse_event(text: str, family: ConditioningFamily) -> frozenset:
    t = text.strip() if isinstance(text, str) else None
    if t is None or not (t.startswith("{") and t.endswith("}")):
        raise DocumentError(f"event label must look like '{{a,b}}', got {text!r}")
    labels = frozenset(part.strip() for part in t[1:-1].split(",") if part.strip())
    if labels not in family:
        raise DocumentError(f"event {text!r} is not a declared conditioning event")
    return labels


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _need(doc: Mapping, key: str, kind=None):
    if not isinstance(doc, Mapping):
        raise DocumentError("expected a JSON object")
    if key not in doc:
        raise DocumentError(f"missing field {key!r}")
    val = doc[key]
    if kind is not None and not isinstance(val, kind):
        raise DocumentError(f"field {key!r} has the wrong type")
    return val


def _check_version(doc: Mapping) -> None:
    v = doc.get("format_version", FORMAT_VERSION)
    if v != FORMAT_VERSION:
        raise DocumentError(f"unsupported format_version {v!r}")


# -- frames ----------------------------------------------------------------------------


def _parse_frame(doc: Mapping) -> Frame:
    space_labels = _need(doc, "space", list)
    space = FiniteSpace(_check_label(s, "state") for s in space_labels) if space_labels else None
    if space is None:
        raise DocumentError("space must be nonempty")
    players = _need(doc, "players", list)
    if len(players) != 2:
        raise DocumentError("exactly two players are supported")
    players = tuple(_check_label(p, "player") for p in players)
    fams_doc = _need(doc, "families", dict)
    fams = []
    for p in players:
        evs = fams_doc.get(p)
        if not isinstance(evs, list):
            raise DocumentError(f"missing conditioning family for player {p!r}")
        try:
            fams.append(ConditioningFamily(space, [_labels(ev, space) for ev in evs]))
        except CpsError as exc:
            raise DocumentError(f"player {p!r}: {exc}") from None
    try:
        return Frame(space, (fams[0], fams[1]), players)
    except StructureError as exc:
        raise DocumentError(str(exc)) from None


def _labels(ev, space: FiniteSpace) -> list:
    if not isinstance(ev, list):
        raise DocumentError("an event is a list of state labels")
    for s in ev:
        if s not in space:
            raise DocumentError(f"unknown state {s!r}")
    return ev


def _frame_doc(frame: Frame) -> dict:
    s = frame.space
    return {
        "space": list(s.points),
        "players": list(frame.players),
        "families": {p: [s.sort(ev) for ev in frame.families[i].events] for i, p in enumerate(frame.players)},
    }


# -- structures ------------------------------------------------------------------------


def structure_from_doc(doc: Mapping) -> TypeStructure:
    _check_version(doc)
    frame = _parse_frame(doc)
    types_doc = _need(doc, "types", dict)
    beliefs_doc = _need(doc, "beliefs", dict)
    types = []
    for p in frame.players:
        labels = types_doc.get(p)
        if not isinstance(labels, list) or not labels:
            raise DocumentError(f"missing type list for player {p!r}")
        try:
            types.append(FiniteSpace(_check_label(t, "type") for t in labels))
        except CpsError as exc:
            raise DocumentError(f"player {p!r}: {exc}") from None
    beliefs = []
    for i, p in enumerate(frame.players):
        tj = types[1 - i]
        dom = FiniteSpace((s, u) for s in frame.space.points for u in tj.points)
        per_type = beliefs_doc.get(p)
        if not isinstance(per_type, dict):
            raise DocumentError(f"missing beliefs for player {p!r}")
        out = {}
        for t, conds in per_type.items():
            if t not in types[i]:
                raise DocumentError(f"player {p!r}: belief for undeclared type {t!r}")
            if not isinstance(conds, dict):
                raise DocumentError(f"player {p!r}, type {t!r}: belief must map events to masses")
            row = {}
            for ev_label, masses in conds.items():
                ev = parse_event(ev_label, frame.families[i])
                if not isinstance(masses, dict):
                    raise DocumentError(f"player {p!r}, type {t!r}, event {ev_label}: masses must be an object")
                row[ev] = {parse_point(pt, dom): parse_rational(v) for pt, v in masses.items()}
            out[t] = row
        beliefs.append(out)
    try:
        return TypeStructure(frame.space, frame.families, types, beliefs, players=frame.players)
    except (StructureError, CpsError) as exc:
        raise DocumentError(str(exc)) from None


def parse_structure(text: str) -> TypeStructure:
    return structure_from_doc(loads(text))


def structure_to_doc(ts: TypeStructure) -> dict:
    doc = {"format_version": FORMAT_VERSION}
    doc.update(_frame_doc(ts.frame))
    doc["types"] = {p: list(ts.types[i].points) for i, p in enumerate(ts.players)}
    beliefs = {}
    for i, p in enumerate(ts.players):
        per_type = {}
        for t in ts.types[i].points:
            per_type[t] = {
                format_event(ts.space, ev): {format_point(pt): format_rational(v) for pt, v in row.items()}
                for ev, row in zip(ts.families[i].events, ts.raw_belief(i, t))
            }
        beliefs[p] = per_type
    doc["beliefs"] = beliefs
    return doc


def serialize_structure(ts: TypeStructure) -> str:
    return dumps(structure_to_doc(ts))


# -- prefixes --------------------------------------------------------------------------


def _prefix_body(p: HierarchyPrefix, memo: dict) -> dict:
    hit = memo.get(p)
    if hit is not None:
        return hit
    frame = p.frame
    levels = []
    for k, lvl in enumerate(p.levels):
        level_doc = {}
        for ev, m in zip(frame.families[p.player].events, lvl.conditionals):
            label = format_event(frame.space, ev)
            if k == 0:
                level_doc[label] = {s: format_rational(v) for s, v in m.items()}
            else:
                level_doc[label] = [
                    {"state": s, "mass": format_rational(v), "belief": _prefix_body(q, memo)} for (s, q), v in m.items()
                ]
        levels.append(level_doc)
    body = {"player": frame.players[p.player], "order": p.order, "levels": levels}
    memo[p] = body
    return body


def prefix_to_doc(p: HierarchyPrefix) -> dict:
    doc = {"format_version": FORMAT_VERSION}
    doc.update(_frame_doc(p.frame))
    doc.update(_prefix_body(p, {}))
    return doc


def serialize_prefix(p: HierarchyPrefix) -> str:
    return dumps(prefix_to_doc(p))


def _prefix_from_body(body: Mapping, frame: Frame) -> HierarchyPrefix:
    name = _need(body, "player", str)
    if name not in frame.players:
        raise DocumentError(f"unknown player {name!r}")
    player = frame.players.index(name)
    levels_doc = _need(body, "levels", list)
    order = body.get("order", len(levels_doc))
    if order != len(levels_doc) or not levels_doc:
        raise DocumentError("prefix 'order' does not match the number of levels")
    fam = frame.families[player]
    levels = []
    for k, level_doc in enumerate(levels_doc):
        if not isinstance(level_doc, dict):
            raise DocumentError(f"level {k + 1} must map events to masses")
        rows: dict = {}
        for label, entries in level_doc.items():
            ev = parse_event(label, fam)
            row: dict = {}
            if k == 0:
                if not isinstance(entries, dict):
                    raise DocumentError("level 1 masses must be an object")
                for s, v in entries.items():
                    if s not in frame.space:
                        raise DocumentError(f"unknown state {s!r}")
                    row[s] = parse_rational(v)
            else:
                if not isinstance(entries, list):
                    raise DocumentError(f"level {k + 1} entries must be a list")
                for e in entries:
                    s = _need(e, "state", str)
                    if s not in frame.space:
                        raise DocumentError(f"unknown state {s!r}")
                    q = _prefix_from_body(_need(e, "belief", dict), frame)
                    if q.player == player or q.order != k:
                        raise DocumentError(f"level {k + 1} entries must be order-{k} prefixes of the other player")
                    row[(s, q)] = row.get((s, q), 0) + parse_rational(_need(e, "mass"))
            rows[ev] = row
        missing = [ev for ev in fam.events if ev not in rows]
        if missing:
            raise DocumentError(f"level {k + 1} lacks event {format_event(frame.space, missing[0])}")
        aligned = [rows[ev] for ev in fam.events]
        try:
            if k == 0:
                levels.append(Cps(frame.space, fam, aligned))
            else:
                levels.append(level_from_masses(frame, player, aligned))
        except CpsError as exc:
            raise DocumentError(f"level {k + 1}: {exc}") from None
    return HierarchyPrefix(frame, player, levels)


def prefix_from_doc(doc: Mapping) -> HierarchyPrefix:
    _check_version(doc)
    return _prefix_from_body(doc, _parse_frame(doc))


def parse_prefix(text: str) -> HierarchyPrefix:
    return prefix_from_doc(loads(text))


# -- CPS documents ---------------------------------------------------------------------


def cps_to_doc(mu: Cps) -> dict:
    """``space``/``family`` are the base ``X``; ``factor`` is ``Y`` when ``mu`` lives on ``X x Y``."""
    doc: dict = {"format_version": FORMAT_VERSION}
    if mu.space.factors is not None:
        x, y = mu.space.factors
        base = [x.sort({a for a, _ in ev}) for ev in mu.family.events]
        doc["space"] = [str(a) for a in x.points]
        doc["factor"] = [str(b) for b in y.points]
    else:
        x = mu.space
        base = [x.sort(ev) for ev in mu.family.events]
        doc["space"] = [str(a) for a in x.points]
    doc["family"] = [[str(a) for a in ev] for ev in base]
    doc["conditionals"] = {
        "{" + ",".join(map(str, ev)) + "}": {format_point(p): format_rational(v) for p, v in m.items()}
        for ev, m in zip(base, mu.conditionals)
    }
    return doc


def cps_from_doc(doc: Mapping) -> Cps:
    _check_version(doc)
    x = FiniteSpace(_check_label(a, "point") for a in _need(doc, "space", list))
    base = ConditioningFamily(x, [_labels(ev, x) for ev in _need(doc, "family", list)])
    if "factor" in doc:
        y = FiniteSpace(_check_label(b, "point") for b in _need(doc, "factor", list))
        fam = cylinder_family(base, y)
    else:
        fam = base
    rows: dict = {}
    for label, masses in _need(doc, "conditionals", dict).items():
        ev = parse_event(label, base)
        rows[ev] = {parse_point(p, fam.space): parse_rational(v) for p, v in masses.items()}
    missing = [ev for ev in base.events if ev not in rows]
    if missing:
        raise DocumentError(f"no conditional for {format_event(x, missing[0])}")
    try:
        return Cps(fam.space, fam, [rows[ev] for ev in base.events])
    except CpsError as exc:
        raise DocumentError(str(exc)) from None


def serialize_cps(mu: Cps) -> str:
    return dumps(cps_to_doc(mu))


def parse_cps(text: str) -> Cps:
    return cps_from_doc(loads(text))


# -- maps and signals ------------------------------------------------------------------


def type_map_from_doc(doc: Mapping, players: Sequence[str]) -> tuple[dict, dict]:
    maps = doc.get("map", doc)
    out = []
    for p in players:
        m = maps.get(p)
        if not isinstance(m, dict):
            raise DocumentError(f"type map lacks player {p!r}")
        out.append(dict(m))
    return out[0], out[1]


def surjection_from_doc(doc: Mapping) -> tuple[dict, FiniteSpace]:
    m = _need(doc, "map", dict)
    domain = doc.get("domain", list(m))
    try:
        dom = FiniteSpace(domain)
    except CpsError as exc:
        raise DocumentError(str(exc)) from None
    missing = [y for y in dom.points if y not in m]
    if missing:
        raise DocumentError(f"surjection undefined at {missing[0]!r}")
    return dict(m), dom


def derive_conditioning_from_signals(space: FiniteSpace, signals: Sequence[Mapping]) -> tuple[ConditioningFamily, ...]:
    """Each player conditions on the preimages of the signal values they can observe.

    Events are listed in order of first appearance along ``space``.
    """
    fams = []
    for sig in signals:
        missing = [s for s in space.points if s not in sig]
        if missing:
            raise CpsError(f"signal is undefined at {missing[0]!r}")
        cells: dict = {}
        for s in space.points:
            cells.setdefault(sig[s], []).append(s)
        fams.append(ConditioningFamily(space, cells.values()))
    return tuple(fams)


def signals_from_doc(doc: Mapping) -> tuple[FiniteSpace, tuple[str, ...], tuple[ConditioningFamily, ...]]:
    space = FiniteSpace(_check_label(s, "state") for s in _need(doc, "space", list))
    sig_doc = _need(doc, "signals", dict)
    players = tuple(doc.get("players", list(sig_doc)))
    sigs = []
    for p in players:
        if p not in sig_doc or not isinstance(sig_doc[p], dict):
            raise DocumentError(f"no signal for player {p!r}")
        sigs.append(sig_doc[p])
    try:
        return space, players, derive_conditioning_from_signals(space, sigs)
    except CpsError as exc:
        raise DocumentError(str(exc)) from None


# -- bundled fixtures ------------------------------------------------------------------


def fixture_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("condtypes.data").iterdir() if p.name.endswith(".json"))


def fixture_text(name: str) -> str:
    return resources.files("condtypes.data").joinpath(f"{name}.json").read_text(encoding="utf-8")


def load_fixture(name: str) -> TypeStructure:
    return parse_structure(fixture_text(name))
