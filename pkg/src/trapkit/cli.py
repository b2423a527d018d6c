"""Command-line front end: analyze, optimize, bounds, simulate, distinguish, validate."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

from . import graph as graphs
from .analysis import DeviationSet, analyse
from .compiler import (
    BoundInputs,
    CompilerParams,
    bounds_amplified,
    bounds_parallel,
    compile_amplified,
    compile_bqp,
    compile_parallel,
)
from .errors import CapExceeded, Inadmissible, TrapkitError
from .harness import AdversaryStrategy, distinguishing_game, estimate_rates, run_protocol3
from .kernels import BACKEND
from .mbqc import Computation, MeasurementPattern, validate_flow
from .optimizer import optimise
from .traps import TrappifiedScheme

EXIT_CAP = 2
EXIT_INADMISSIBLE = 3

BUILTINS = {
    "cycle": graphs.cycle,
    "path": graphs.path,
    "complete": graphs.complete,
    "edgeless": graphs.edgeless,
}


def _read_json(path: str) -> dict:
    return json.loads(Path(path).read_text())


def load_graph(spec: str) -> graphs.OpenGraph:
    """A graph file, or a builtin such as cycle:5, complete:3, grid:2x3 or petersen."""
    name, _, arg = spec.partition(":")
    if name in BUILTINS and arg.isdigit():
        return BUILTINS[name](int(arg))
    if name == "grid" and arg:
        r, c = arg.lower().split("x")
        return graphs.grid(int(r), int(c))
    if spec == "petersen":
        return graphs.petersen()
    d = _read_json(spec)
    return graphs.OpenGraph.from_dict(d.get("graph", d))


def load_scheme(path: str) -> TrappifiedScheme:
    return TrappifiedScheme.from_dict(_read_json(path))


def load_adversary(spec: str | None) -> AdversaryStrategy:
    if spec in (None, "honest"):
        return AdversaryStrategy.honest()
    d = _read_json(spec)
    d = d.get("result", d)
    if "attack" in d and "kind" not in d:
        d = d["attack"]  # the dual attack of an optimize result
    return AdversaryStrategy.from_dict(d)


def _compiled(scheme: TrappifiedScheme, args):
    if not args.compile:
        return scheme
    p = _read_json(args.compile)
    if args.parallel:
        return compile_parallel(scheme, int(p["n"]), int(p["w"]))
    params = CompilerParams(int(p["n"]), int(p["d"]), int(p["s"]), int(p["w"]), Fraction(str(p.get("c", 0))))
    return (compile_bqp if args.bqp else compile_amplified)(scheme, params)


# -- commands -------------------------------------------------------------------

def cmd_analyze(args) -> dict:
    scheme = load_scheme(args.scheme)
    dset = DeviationSet.parse(args.errors, scheme.graph.vertices)
    comp = Computation.from_dict(_read_json(args.computation)) if args.computation else None
    return analyse(scheme, dset, comp).to_dict()


def cmd_optimize(args) -> dict:
    g = load_graph(args.graph)
    res = optimise(g, args.family)
    out = res.to_dict()
    if args.scheme_out:
        Path(args.scheme_out).write_text(res.scheme().to_json())
    return out


def cmd_bounds(args) -> dict:
    p = _read_json(args.params)
    inp = BoundInputs.from_dict(p)
    if args.parallel:
        f = Fraction(str(p.get("f", args.f if args.f is not None else 0)))
        return {"kind": "parallel", **bounds_parallel(inp, int(p["n"]), int(p["w"]), f).to_dict()}
    params = CompilerParams(int(p["n"]), int(p["d"]), int(p["s"]), int(p["w"]), Fraction(str(p.get("c", 0))))
    return {"kind": "amplified", **bounds_amplified(inp, params).to_dict()}


def cmd_simulate(args) -> dict:
    scheme = _compiled(load_scheme(args.scheme), args)
    comp = Computation.from_dict(_read_json(args.computation)) if args.computation else None
    adv = load_adversary(args.adversary)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            rows = [run_protocol3(scheme, comp, adv, args.seed, index=i, engine="blind").to_row()
                    for i in range(args.trials)]
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]) if rows else ["seed"])
            writer.writeheader()
            writer.writerows(rows)
    est = estimate_rates(scheme, comp, adv, args.trials, args.seed, engine=args.engine, jobs=args.jobs)
    return est.to_dict()


def cmd_distinguish(args) -> dict:
    scheme = load_scheme(args.scheme)
    comps = [Computation.from_dict(_read_json(c)) for c in args.computation]
    placeholder = comps[1] if len(comps) > 1 else None
    res = distinguishing_game(scheme, comps[0], load_adversary(args.adversary), args.trials, args.seed,
                              engine=args.engine if args.engine != "auto" else "blind", placeholder=placeholder)
    return res.to_dict()


def cmd_validate(args) -> dict:
    d = _read_json(args.file)
    if "canvases" in d:
        s = TrappifiedScheme.from_dict(d)
        return {"kind": "scheme", "canvases": len(s.canvases), "ok": True, "violations": []}
    p = MeasurementPattern.from_dict(d)
    v = validate_flow(p)
    return {"kind": "pattern", "ok": not v, "violations": [str(x) for x in v]}


COMMANDS = {
    "analyze": cmd_analyze,
    "optimize": cmd_optimize,
    "bounds": cmd_bounds,
    "simulate": cmd_simulate,
    "distinguish": cmd_distinguish,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    def flags(p: argparse.ArgumentParser, top: bool) -> None:
        # subcommands repeat the global flags; SUPPRESS keeps them from resetting values given earlier
        dflt = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
        p.add_argument("--seed", type=int, default=dflt(None))
        p.add_argument("--trials", type=int, default=dflt(1000))
        p.add_argument("--jobs", type=int, default=dflt(1))
        p.add_argument("--deterministic", action="store_true", default=dflt(False), help="omit the timestamp")
        p.add_argument("--out", default=dflt(None), help="write JSON here instead of stdout")

    common = argparse.ArgumentParser(add_help=False)
    flags(common, top=False)
    ap = argparse.ArgumentParser(prog="trapkit")
    flags(ap, top=True)
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common])
    a.add_argument("scheme")
    a.add_argument("--errors", default="all-xy", choices=["all-xy", "all-pauli", "z-only"])
    a.add_argument("--computation")

    o = sub.add_parser("optimize", parents=[common])
    o.add_argument("graph", help="graph JSON or builtin (cycle:5, complete:3, grid:2x3, petersen)")
    o.add_argument("--family", default="standard", choices=["standard", "general"])
    o.add_argument("--scheme-out")

    b = sub.add_parser("bounds", parents=[common])
    b.add_argument("params")
    b.add_argument("--parallel", action="store_true")
    b.add_argument("--f", type=float, default=None)

    for name in ("simulate", "distinguish"):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("scheme")
        s.add_argument("--adversary", default="honest")
        s.add_argument("--engine", default="auto", choices=["auto", "blind", "predicate", "vector"])
        if name == "simulate":
            s.add_argument("--computation")
            s.add_argument("--compile", help="compiler parameter JSON")
            s.add_argument("--bqp", action="store_true")
            s.add_argument("--parallel", action="store_true")
            s.add_argument("--csv", help="per-trial rows (blind sessions)")
        else:
            s.add_argument("--computation", nargs="+", required=True, help="computation, and optionally the simulator's placeholder")

    v = sub.add_parser("validate", parents=[common])
    v.add_argument("file")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command in ("simulate", "distinguish") and args.seed is None:
        ap.error(f"{args.command} needs an explicit --seed")
    try:
        result = COMMANDS[args.command](args)
        code = 0
    except CapExceeded as exc:
        result, code = {"error": "cap exceeded", "detail": str(exc)}, EXIT_CAP
    except Inadmissible as exc:
        result, code = {"error": "inadmissible", "inequality": exc.inequality}, EXIT_INADMISSIBLE
    except (TrapkitError, ValueError) as exc:
        result, code = {"error": type(exc).__name__, "detail": str(exc)}, 1
    doc = {"command": args.command, "result": result, "backend": BACKEND}
    if args.seed is not None:
        doc["seed"] = args.seed
    if not args.deterministic:
        doc["timestamp"] = datetime.now(timezone.utc).isoformat()
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
