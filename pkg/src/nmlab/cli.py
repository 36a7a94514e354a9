"""Command-line driver.

Exit codes: 0 when the checked property holds, 1 when a counterexample or
finding is printed, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from .conditions import ConditionSyntaxError, condition_text, parse_condition
from .formula import ParseError, parse, parse_schema, to_text
from .hilbert import ProofFormatError, SYSTEM_NAMES, builtin_system, check_proof, load_proof, Accepted
from .kripke import FRAME_CLASSES, ResourceCapExceeded, correspondence_scan, load_conditions
from .nmatrix import BUILTIN_NAMES, ClosureTooLarge, Nmatrix, NmatrixError, builtin_matrix, check_consequence, compose, load_matrix
from .reports import REPORT_NAMES, build_report
from .strengthenings import strengthening
from .tableau import LOGICS, DepthExceeded, NonTheorem, decide

EXIT_OK, EXIT_FOUND, EXIT_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def _matrix(source: str) -> Nmatrix:
    if Path(source).is_file():
        return load_matrix(source)
    try:
        return builtin_matrix(source)
    except KeyError:
        raise UsageError(f"no matrix file or builtin named {source!r} (builtins: {', '.join(BUILTIN_NAMES)})") from None


def _verdict(args, premises, conclusion) -> int:
    m = _matrix(args.matrix)
    v = check_consequence(premises, conclusion, m, max_closure=args.max_closure or None)
    if args.json:
        _emit({
            "matrix": m.name,
            "premises": [to_text(p) for p in premises],
            "conclusion": to_text(conclusion),
            "valid": v.valid,
            "witness": v.witness.as_dict() if v.witness else None,
        })
    else:
        print("Valid" if v.valid else "Invalid")
        if v.witness:
            print("witness: " + v.witness.render())
    return EXIT_OK if v.valid else EXIT_FOUND


def cmd_taut(args) -> int:
    return _verdict(args, [], parse(args.formula))


def cmd_entails(args) -> int:
    premises = [parse(p) for p in args.premises.split(",") if p.strip()]
    return _verdict(args, premises, parse(args.conclusion))


def _render_matrix(m: Nmatrix) -> str:
    def cell(c):
        vals = m.ordered(c)
        return vals[0] if len(vals) == 1 else "{" + ",".join(vals) + "}"

    w = 7
    out = [f"matrix {m.name or '(unnamed)'}; designated: {','.join(m.ordered(m.designated))}", ""]
    out.append("x".ljust(w) + "~x".ljust(w) + "[]x")
    for v in m.values:
        out.append(v.ljust(w) + cell(m.neg[v]).ljust(w) + cell(m.box[v]))
    out.append("")
    out.append("->".ljust(w) + "".join(b.ljust(w) for b in m.values).rstrip())
    for a in m.values:
        out.append(a.ljust(w) + "".join(cell(m.impl[a, b]).ljust(w) for b in m.values).rstrip())
    return "\n".join(out)


def cmd_matrix(args) -> int:
    if args.action == "compose":
        if not args.rows:
            raise UsageError("compose needs at least one strengthening name")
        base = _matrix(args.target)
        try:
            rows = [strengthening(r) for r in args.rows]
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
        m = compose(base, [s.restriction for s in rows], name=f"{base.name}+{'+'.join(s.name for s in rows)}")
    elif args.action == "load":
        m = load_matrix(args.target)
    else:
        m = _matrix(args.target)
    if args.json:
        _emit(dict(m.to_json(), name=m.name))
    else:
        print(_render_matrix(m))
    return EXIT_OK


def cmd_corr(args) -> int:
    if args.condition is None:
        rows = {r.name: r for r in load_conditions()}
        if args.axiom not in rows:
            raise UsageError(f"{args.axiom!r} is not a row of the conditions file; give an axiom and a condition")
        row = rows[args.axiom]
        axiom, cond, name = row.axiom, row.condition, row.name
    else:
        axiom, cond = parse_schema(args.axiom), parse_condition(args.condition)
        name = to_text(axiom)
    rep = correspondence_scan(axiom, cond, max_n=args.max_worlds, cls=args.frame_class,
                              budget=args.budget, name=name, jobs=args.jobs)
    if args.json:
        _emit(rep.to_json())
    else:
        print(f"condition: {condition_text(cond)}")
        print(rep.summary(show=args.show))
    return EXIT_OK if rep.agrees else EXIT_FOUND


def cmd_tableau(args) -> int:
    f = parse_schema(args.formula)
    r = decide(f, args.logic, max_steps=args.max_steps)
    if isinstance(r, NonTheorem):
        if args.json:
            _emit({"formula": to_text(f), "logic": r.logic, "theorem": False, "world": r.world, "model": r.model.to_json()})
        else:
            print(f"NonTheorem in {r.logic}; refuted at world {r.world}")
            print("model: " + r.model.dumps())
        return EXIT_FOUND
    if args.json:
        _emit({"formula": to_text(f), "logic": r.logic, "theorem": True,
               "trace": [[s.index, ".".join(map(str, s.prefix)), s.signed, s.rule, s.parent] for s in r.trace]})
    else:
        print(f"Theorem in {r.logic}")
        if args.trace:
            print(r.render())
    return EXIT_OK


def cmd_proof_check(args) -> int:
    p = load_proof(args.file)
    name = args.system or p.system
    if not name:
        raise UsageError("no system given on the command line or in the proof header")
    try:
        system = builtin_system(name)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    r = check_proof(p, system)
    if isinstance(r, Accepted):
        if args.json:
            _emit({"file": str(args.file), "system": system.name, "accepted": True,
                   "conclusion": to_text(r.conclusion), "theorem": r.theorem})
        else:
            kind = "theorem" if r.theorem else "from premises"
            print(f"Accepted in {system.name}: {to_text(r.conclusion)} ({kind})")
        return EXIT_OK
    if args.json:
        _emit({"file": str(args.file), "system": system.name, "accepted": False, "line": r.line, "reason": r.reason})
    else:
        print(f"Rejected in {system.name} at {r}")
    return EXIT_FOUND


def cmd_report(args) -> int:
    rep = build_report(args.name, samples=args.samples, seed=args.seed, jobs=args.jobs,
                       max_n=args.max_worlds, cls=args.frame_class)
    sys.stdout.write(rep.to_jsonl() if args.json else rep.render())
    return EXIT_FOUND if rep.findings else EXIT_OK


# ---------------------------------------------------------------------------

def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="line-delimited JSON output")

    p = argparse.ArgumentParser(prog="nmlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def matrix_flags(sp):
        sp.add_argument("--matrix", default="TBAT", help="builtin name or JSON file (default TBAT)")
        sp.add_argument("--max-closure", type=int, default=24, help="closure size guard, 0 disables")

    sp = sub.add_parser("taut", parents=[common], help="tautology check in an Nmatrix")
    sp.add_argument("formula")
    matrix_flags(sp)
    sp.set_defaults(func=cmd_taut)

    sp = sub.add_parser("entails", parents=[common], help="consequence check; premises comma separated")
    sp.add_argument("premises")
    sp.add_argument("conclusion")
    matrix_flags(sp)
    sp.set_defaults(func=cmd_entails)

    sp = sub.add_parser("matrix", parents=[common], help="show, compose or load a matrix")
    sp.add_argument("action", choices=("show", "compose", "load"))
    sp.add_argument("target", help="matrix name or file (the base, for compose)")
    sp.add_argument("rows", nargs="*", help="strengthening names for compose")
    sp.set_defaults(func=cmd_matrix)

    def frame_flags(sp):
        sp.add_argument("--max-worlds", type=_positive, default=3)
        sp.add_argument("--class", dest="frame_class", choices=FRAME_CLASSES, default="all")
        sp.add_argument("--jobs", type=_positive, default=1)

    sp = sub.add_parser("corr", parents=[common], help="correspondence scan of an axiom against a frame condition")
    sp.add_argument("axiom", help="axiom schema, or a row name of the shipped conditions file")
    sp.add_argument("condition", nargs="?")
    frame_flags(sp)
    sp.add_argument("--budget", type=_positive, default=100_000, help="maximum number of frames")
    sp.add_argument("--show", type=int, default=5, help="mismatches to print")
    sp.set_defaults(func=cmd_corr)

    sp = sub.add_parser("tableau", parents=[common], help="decide validity in K, T, S4 or S5")
    sp.add_argument("formula")
    sp.add_argument("--logic", choices=LOGICS, default="K")
    sp.add_argument("--max-steps", type=_positive, default=10_000)
    sp.add_argument("--trace", action="store_true", help="print the closed tableau")
    sp.set_defaults(func=cmd_tableau)

    sp = sub.add_parser("proof-check", parents=[common], help="check a line-delimited proof file")
    sp.add_argument("file")
    sp.add_argument("--system", choices=SYSTEM_NAMES, type=str.upper)
    sp.set_defaults(func=cmd_proof_check)

    sp = sub.add_parser("report", parents=[common], help="regenerate a table as data")
    sp.add_argument("name", choices=REPORT_NAMES)
    sp.add_argument("--samples", type=_positive)
    sp.add_argument("--seed", type=int, default=0)
    frame_flags(sp)
    sp.set_defaults(func=cmd_report)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ParseError, ConditionSyntaxError, NmatrixError, ProofFormatError,
            ResourceCapExceeded, DepthExceeded, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def run(argv: Sequence[str]) -> int:
    """Entry point for tests: argparse's own exits are folded into the return code."""
    try:
        return main(argv)
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
