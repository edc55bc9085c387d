"""Command line entry point.

Exit status: 0 for a valid / affirmative answer, 1 for a negative answer
(with a witness), 2 for unusable input.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from . import io
from .analysis import (
    check_hierarchy_morphism,
    check_type_morphism,
    completeness_report,
    hierarchies_included,
    is_non_redundant,
    refine,
    unique_hierarchy_frame,
)
from .cps import CpsError
from .extension import coherent_extend, lift_cps
from .hierarchy import PrefixError, unfold
from .structure import StructureError, validate_structure

OK, NEGATIVE, BAD_INPUT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(BAD_INPUT, f"{self.prog}: error: {message}\n")


def _read(source: str) -> str:
    path = Path(source)
    if path.exists():
        return path.read_text(encoding="utf-8")
    if source in io.fixture_names():
        return io.fixture_text(source)
    raise io.DocumentError(f"no such file or bundled fixture: {source}")


def _structure(source: str):
    return io.parse_structure(_read(source))


def _depth(args) -> int | str:
    return "fixpoint" if args.fixpoint or args.depth is None else args.depth


class _Out:
    def __init__(self, fmt: str):
        self.fmt = fmt
        self.lines: list[str] = []
        self.doc: dict = {}

    def text(self, line: str = "") -> None:
        self.lines.append(line)

    def emit(self) -> None:
        if self.fmt == "machine":
            sys.stdout.write(io.dumps(self.doc))
        else:
            sys.stdout.write("\n".join(self.lines) + "\n")


def cmd_validate(args, out: _Out) -> int:
    ts = _structure(args.structure)
    report = validate_structure(ts)
    out.doc = {
        "result": "valid" if report.valid else "invalid",
        "violations": [
            {"kind": v.kind, "message": v.message, "player": v.witness[0], "type": v.witness[1]} for v in report.violations
        ],
    }
    if report.valid:
        out.text(f"valid: {ts!r}")
        return OK
    out.text(f"invalid: {len(report.violations)} violation(s)")
    for v in report.violations:
        out.text(f"  {v}")
    return NEGATIVE


def cmd_unfold(args, out: _Out) -> int:
    ts = _structure(args.structure)
    i = ts.frame.player_index(args.player)
    prefixes = unfold(ts, args.depth)[i]
    if args.type is not None:
        if args.type not in prefixes:
            raise io.DocumentError(f"player {args.player} has no type {args.type!r}")
        prefixes = {args.type: prefixes[args.type]}
    out.doc = {"player": ts.players[i], "depth": args.depth, "prefixes": {t: io.prefix_to_doc(p) for t, p in prefixes.items()}}
    classes: dict = {}
    for t, p in prefixes.items():
        classes.setdefault(p, []).append(t)
    out.text(f"player {ts.players[i]}, depth {args.depth}: {len(classes)} distinct prefix(es)")
    for p, ts_ in classes.items():
        first = ", ".join(
            f"{io.format_event(ts.space, ev)}: ("
            + ", ".join(f"{s}: {io.format_rational(m[s])}" for s in ts.space.points)
            + ")"
            for ev, m in p.levels[0].items()
        )
        out.text(f"  [{p.digest[:12]}] types {', '.join(ts_)}; first order {first}")
    return OK


def cmd_refine(args, out: _Out) -> int:
    ts = _structure(args.structure)
    r = refine(ts)
    rounds = []
    for n, parts in enumerate(r.partitions):
        blocks = {ts.players[i]: parts[i].members() for i in (0, 1)}
        rounds.append(blocks)
        out.text(f"P_{n}: " + "; ".join(f"{p}: " + " | ".join(",".join(b) for b in bl) for p, bl in blocks.items()))
    out.text(f"fixpoint at P_{r.fixpoint} (confirmed after {r.rounds} round(s))")
    out.doc = {"partitions": rounds, "fixpoint": r.fixpoint, "rounds": r.rounds}
    return OK


def cmd_redundancy(args, out: _Out) -> int:
    ts = _structure(args.structure)
    res = is_non_redundant(ts)
    if res.non_redundant:
        out.doc = {"result": "non-redundant"}
        out.text("non-redundant: distinct types generate distinct hierarchies")
        return OK
    player, t, u = res.witness
    out.doc = {"result": "redundant", "witness": {"player": player, "types": [t, u]}}
    out.text(f"redundant: player {player}'s types {t} and {u} generate the same hierarchy")
    return NEGATIVE


def cmd_compare(args, out: _Out) -> int:
    a, b = _structure(args.a), _structure(args.b)
    depth = _depth(args)
    fwd = hierarchies_included(a, b, depth)
    bwd = hierarchies_included(b, a, depth)
    out.doc = {
        "depth": depth,
        "included_in": fwd.included,
        "witness": None if fwd.included else {"player": fwd.witness[0], "type": fwd.witness[1]},
        "reverse_included_in": bwd.included,
        "reverse_witness": None if bwd.included else {"player": bwd.witness[0], "type": bwd.witness[1]},
    }
    def line(res, x, y):
        if res.included:
            return f"{x} included-in {y} at depth {depth}"
        return f"{x} NOT included-in {y} at depth {depth}: player {res.witness[0]}'s type {res.witness[1]} has no match"
    out.text(line(fwd, args.a, args.b))
    out.text(line(bwd, args.b, args.a))
    if unique_hierarchy_frame(a):
        out.doc["unique_hierarchy"] = True
        out.text("S is a single point and every family is {S}: one hierarchy per player, so both structures are terminal")
    return OK if fwd.included else NEGATIVE


def cmd_morphism(args, out: _Out) -> int:
    star, base = _structure(args.star), _structure(args.base)
    phi = io.type_map_from_doc(io.loads(_read(args.map_file)), star.players)
    if args.kind == "hierarchy":
        res = check_hierarchy_morphism(star, base, phi, _depth(args))
        out.doc = {"kind": "hierarchy", "result": res.ok, "witness": None if res.ok else {"player": res.witness[0], "type": res.witness[1]}}
    else:
        res = check_type_morphism(star, base, phi)
        w = None
        if not res.ok:
            player, t, ev, pt = res.witness
            w = {"player": player, "type": t, "event": io.format_event(base.space, ev), "point": io.format_point(pt)}
        out.doc = {"kind": "type", "result": res.ok, "witness": w}
    out.text(f"{args.kind} morphism: yes" if res.ok else f"{args.kind} morphism: no; {res.detail}")
    return OK if res.ok else NEGATIVE


def cmd_completeness(args, out: _Out) -> int:
    ts = _structure(args.structure)
    rep = completeness_report(ts)
    out.doc = {
        "result": "complete" if rep.complete else "incomplete",
        "players": [
            {"player": p.player, "complete": p.complete, "witness": None if p.witness is None else io.cps_to_doc(p.witness)}
            for p in rep.players
        ],
    }
    for p in rep.players:
        if p.complete:
            out.text(f"player {p.player}: belief map is onto (its codomain has a single CPS)")
        else:
            out.text(f"player {p.player}: belief map is not onto; this CPS is missed:")
            for ev, m in p.witness.items():
                base = {s for s, _ in ev}
                masses = ", ".join(f"{io.format_point(x)}: {io.format_rational(v)}" for x, v in m.items())
                out.text(f"    given {io.format_event(ts.space, base)} x T: {masses}")
    out.text("complete" if rep.complete else "incomplete")
    return OK if rep.complete else NEGATIVE


def cmd_extend(args, out: _Out) -> int:
    p = io.parse_prefix(_read(args.prefix))
    if args.order < p.order:
        raise io.DocumentError(f"prefix already has order {p.order} > {args.order}")
    while p.order < args.order:
        p = coherent_extend(p)
    out.doc = io.prefix_to_doc(p)
    out.text(f"extended to order {p.order} [{p.digest[:12]}]")
    out.lines.append(io.serialize_prefix(p).rstrip("\n"))
    return OK


def cmd_lift(args, out: _Out) -> int:
    nu = io.parse_cps(_read(args.cps))
    f1, dom = io.surjection_from_doc(io.loads(_read(args.surjection_file)))
    mu = lift_cps(nu, f1, dom)
    out.doc = io.cps_to_doc(mu)
    out.text("lifted CPS (its image under the surjection is the input):")
    out.lines.append(io.serialize_cps(mu).rstrip("\n"))
    return OK


def cmd_ingest_signals(args, out: _Out) -> int:
    space, players, fams = io.signals_from_doc(io.loads(_read(args.signals)))
    out.doc = {"space": list(space.points), "players": list(players), "families": {p: [space.sort(ev) for ev in f.events] for p, f in zip(players, fams)}}
    for p, f in zip(players, fams):
        out.text(f"player {p}: " + " ".join(io.format_event(space, ev) for ev in f.events))
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="condtypes", description="Exact analysis of finite conditional type structures.")
    parser.add_argument("--format", choices=("text", "machine"), default="text")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def depth_opts(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--depth", type=int)
        g.add_argument("--fixpoint", action="store_true")

    p = sub.add_parser("validate", help="check every belief is a CPS")
    p.add_argument("structure")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("unfold", help="hierarchy prefixes of one player's types")
    p.add_argument("structure")
    p.add_argument("--player", required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--type")
    p.set_defaults(func=cmd_unfold)

    p = sub.add_parser("compare", help="is every hierarchy of A generated in B?")
    p.add_argument("a")
    p.add_argument("b")
    depth_opts(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("refine", help="partition refinement trace")
    p.add_argument("structure")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("redundancy", help="do two types share a hierarchy?")
    p.add_argument("structure")
    p.set_defaults(func=cmd_redundancy)

    p = sub.add_parser("morphism", help="check a type map")
    p.add_argument("star")
    p.add_argument("base")
    p.add_argument("--map-file", required=True)
    p.add_argument("--kind", choices=("type", "hierarchy"), default="type")
    depth_opts(p)
    p.set_defaults(func=cmd_morphism)

    p = sub.add_parser("completeness", help="are the belief maps onto?")
    p.add_argument("structure")
    p.set_defaults(func=cmd_completeness)

    p = sub.add_parser("extend", help="coherently extend a prefix")
    p.add_argument("prefix")
    p.add_argument("--order", type=int, required=True)
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("lift", help="lift a CPS through a surjection")
    p.add_argument("cps")
    p.add_argument("--surjection-file", required=True)
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("ingest-signals", help="conditioning families from signal maps")
    p.add_argument("signals")
    p.set_defaults(func=cmd_ingest_signals)
    return parser


def run_command(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else BAD_INPUT
    out = _Out(args.format)
    try:
        status = args.func(args, out)
    except (io.DocumentError, CpsError, StructureError, PrefixError, ValueError, OSError) as exc:
        print(f"condtypes: error: {exc}", file=sys.stderr)
        return BAD_INPUT
    out.emit()
    return status


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
