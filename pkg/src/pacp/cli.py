"""Command-line workbench.

    pacp parse      check syntax, echo canonicalized spelling
    pacp normalize  canonical form of a finite-behavior term
    pacp lts        reachable transition system (text, json, dot)
    pacp equiv      decide equivalence of two terms
    pacp reduce     reachable-part reduction of a recursive spec
    pacp simulate   seeded runs, single trace or aggregate statistics

A configuration file (--config, or the PACP_CONFIG environment
variable) declares the alphabet, communication table, strategies, and
creation bodies; without one the alphabet is open, communication is
empty, and only the built-in strategies are available.

Exit codes: 0 success (equiv: equivalent); 1 distinguished, or
simulation dominated by deadlock; 2 usage or input errors; 3 state or
equation cap exceeded; 4 internal disagreement between decision
methods.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import (ConfigError, default_config, load_config,
                     load_spec_file)
from .parse import ParseError, parse_term, parse_term_file, print_term
from .semantics import CapExceeded, Engine, pts_to_dot, pts_to_json
from .bisim import bisim_equiv
from .rewrite import canonical, eliminate_si, normalize, reduce_recursion
from .simulate import DEADLOCKED, NondetError, run, stats
from .terms import Interleave, Rec


def _config_for(args):
    path = args.config or os.environ.get("PACP_CONFIG")
    return load_config(path) if path else default_config()


def _emit(args, payload, text):
    if args.output == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


# ---------------------------------------------------------------- parse

def cmd_parse(args):
    cfg = _config_for(args)
    if args.file:
        with open(args.file, encoding="utf-8") as fh:
            entries = parse_term_file(fh.read(), cfg)
    else:
        entries = [(None, parse_term(args.term, cfg))]
    rows = [{"name": name, "term": print_term(t, cfg)}
            for name, t in entries]
    text = "\n".join(r["term"] if r["name"] is None
                     else f"{r['name']} = {r['term']}" for r in rows)
    _emit(args, {"terms": rows}, text)
    return 0


# ------------------------------------------------------------ normalize

def cmd_normalize(args):
    cfg = _config_for(args)
    eng = Engine(cfg)
    t = parse_term(args.term, cfg)
    c = canonical(t, eng, deferred=args.deferred)
    out = print_term(c, cfg)
    _emit(args, {"input": args.term, "canonical": out}, out)
    return 0


# ------------------------------------------------------------------ lts

def _pts_text(pts):
    lines = [f"states: {len(pts.states)}   "
             f"initial: {', '.join(str(i) for i in pts.initial)}"]
    for i, name in enumerate(pts.states):
        kind = "static" if pts.static[i] else "branch"
        lines.append(f"{i:4} [{kind}] {name}")
        for a, tgt in pts.action_edges.get(i, ()):
            dst = "terminates" if tgt is None else f"-> {tgt}"
            lines.append(f"       {a} {dst}")
        row = pts.dist_edges.get(i, {})
        for tgt in sorted(row):
            lines.append(f"       {row[tgt]} ~> {tgt}")
    return "\n".join(lines)


def cmd_lts(args):
    cfg = _config_for(args)
    eng = Engine(cfg)
    t = parse_term(args.term, cfg)
    pts = eng.build_pts(t, max_states=args.max_states)
    if args.output == "dot":
        print(pts_to_dot(pts), end="")
    else:
        _emit(args, pts_to_json(pts), _pts_text(pts))
    return 0


# ---------------------------------------------------------------- equiv

def cmd_equiv(args):
    cfg = _config_for(args)
    eng = Engine(cfg)
    t1 = parse_term(args.left, cfg)
    t2 = parse_term(args.right, cfg)
    if args.eliminate_si:
        t1 = eliminate_si(t1, eng, args.max_states)
        t2 = eliminate_si(t2, eng, args.max_states)
    notes = []
    verdicts = {}
    bis = None
    if args.method in ("bisim", "both"):
        bis = bisim_equiv(t1, t2, eng, args.max_states)
        verdicts["bisim"] = bis.equivalent
    axioms_fell_back = False
    if args.method in ("axioms", "both"):
        try:
            verdicts["axioms"] = (normalize(t1, eng) == normalize(t2, eng))
        except CapExceeded:
            axioms_fell_back = True
            notes.append("canonical comparison needs a finite behavior "
                         "tree; fell back to bisimulation")
            if bis is None:
                bis = bisim_equiv(t1, t2, eng, args.max_states)
            verdicts["axioms"] = bis.equivalent
    if (args.method == "both" and not axioms_fell_back
            and verdicts["bisim"] != verdicts["axioms"]):
        print("internal disagreement, please report:", file=sys.stderr)
        print(f"  left:  {print_term(t1, cfg)}", file=sys.stderr)
        print(f"  right: {print_term(t2, cfg)}", file=sys.stderr)
        print(f"  bisim: {verdicts['bisim']}   "
              f"axioms: {verdicts['axioms']}", file=sys.stderr)
        return 4
    equivalent = verdicts[args.method if args.method != "both" else "bisim"]
    payload = {"verdict": "equivalent" if equivalent else "distinguished",
               "method": args.method}
    if bis is not None:
        payload["states"] = bis.states
        payload["classes"] = bis.classes
        if bis.reason is not None:
            payload["reason"] = bis.reason
    if notes:
        payload["notes"] = notes
    text = payload["verdict"]
    if not equivalent and bis is not None and bis.reason:
        text += f": {bis.reason}"
    for note in notes:
        text += f"\nnote: {note}"
    _emit(args, payload, text)
    return 0 if equivalent else 1


# --------------------------------------------------------------- reduce

def cmd_reduce(args):
    cfg = _config_for(args)
    load_spec_file(args.spec_file, cfg)
    if args.spec not in cfg.specs:
        raise ConfigError(f"no specification {args.spec!r} in "
                          f"{args.spec_file}")
    spec = cfg.specs[args.spec]
    if args.root not in spec.variables():
        raise ConfigError(f"{args.root!r} is not a variable of "
                          f"{args.spec!r}")
    eng = Engine(cfg)
    out = reduce_recursion(spec, args.root, eng, args.max_equations)
    if isinstance(out, Rec):
        eq_rows = [{"var": v, "term": print_term(rhs, cfg)}
                   for v, rhs in out.spec.equations]
        body = " ".join(f"{r['var']} = {r['term']};" for r in eq_rows)
        text = f"spec {out.spec.name} {{ {body} }}\nroot {out.var}"
        _emit(args, {"root": out.var, "equations": eq_rows}, text)
    else:
        text = print_term(out, cfg)
        _emit(args, {"term": text}, text)
    return 0


# ------------------------------------------------------------- simulate

def cmd_simulate(args):
    cfg = _config_for(args)
    eng = Engine(cfg)
    terms = [parse_term(s, cfg) for s in args.terms]
    if len(terms) > 1 and not args.strategy:
        raise ConfigError("several processes need --strategy to compose")
    if args.strategy:
        strat = cfg.strategy_named(args.strategy)
        t = Interleave(args.strategy, (), strat.initial_state(),
                       tuple(terms))
    else:
        t = terms[0]
    if args.runs == 1:
        tr = run(t, eng, args.seed, args.steps, args.nondet)
        payload = {"seed": tr.seed, "outcome": tr.outcome,
                   "events": [{"action": a, "state": s}
                              for a, s in tr.events],
                   "turns": {str(i): tr.turns[i]
                             for i in sorted(tr.turns)}}
        lines = [f"seed {tr.seed}"]
        for a, state in tr.events:
            lines.append(f"  {a}" if not state else f"  {a:12} -> {state}")
        lines.append(f"outcome: {tr.outcome}")
        _emit(args, payload, "\n".join(lines))
        return 1 if tr.outcome == DEADLOCKED else 0
    st = stats(t, eng, args.runs, args.seed, args.steps, args.nondet)
    lines = [f"runs: {st['runs']}   seeds: {st['base_seed']}.."
             f"{st['base_seed'] + st['runs'] - 1}"]
    for label in ("outcomes", "actions", "first_actions", "turns"):
        if st[label]:
            row = ", ".join(f"{k}={v}" for k, v in sorted(st[label].items()))
            lines.append(f"{label.replace('_', ' ')}: {row}")
    lines.append(f"mean length: {st['mean_length']:g}")
    _emit(args, st, "\n".join(lines))
    deadlocks = st["outcomes"].get(DEADLOCKED, 0)
    return 1 if deadlocks * 2 > args.runs else 0


# ----------------------------------------------------------------- main

def _parser():
    top = argparse.ArgumentParser(
        prog="pacp",
        description="workbench for probabilistic process terms")
    top.add_argument("--config", metavar="FILE",
                     help="configuration file (default: $PACP_CONFIG)")
    top.add_argument("--output", choices=("text", "json"), default="text")
    sub = top.add_subparsers(dest="command", required=True)

    def output_opt(p, choices=("text", "json")):
        # accepted after the subcommand too, overriding the global one
        p.add_argument("--output", choices=choices,
                       default=argparse.SUPPRESS)

    p = sub.add_parser("parse", help="parse and echo terms")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("term", nargs="?", help="a single term")
    g.add_argument("--file", help="file of terms, one per line")
    output_opt(p)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("normalize", help="canonical form")
    p.add_argument("term")
    p.add_argument("--deferred", action="store_true",
                   help="defer a scheduled deadlock until the other "
                        "processes finish")
    output_opt(p)
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("lts", help="reachable transition system")
    p.add_argument("term")
    p.add_argument("--max-states", type=int, default=10000)
    output_opt(p, ("text", "json", "dot"))
    p.set_defaults(func=cmd_lts)

    p = sub.add_parser("equiv", help="decide equivalence of two terms")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--method", choices=("bisim", "axioms", "both"),
                   default="bisim")
    p.add_argument("--eliminate-si", action="store_true",
                   help="expand scheduled compositions first")
    p.add_argument("--max-states", type=int, default=10000)
    output_opt(p)
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("reduce", help="reduce a recursive specification")
    p.add_argument("spec", help="specification name")
    p.add_argument("root", help="root variable")
    p.add_argument("--spec-file", required=True)
    p.add_argument("--max-equations", type=int, default=10000)
    output_opt(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("simulate", help="seeded runs")
    p.add_argument("terms", nargs="+", metavar="term")
    p.add_argument("--strategy",
                   help="compose the terms under this strategy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--nondet", choices=("uniform", "first", "error"),
                   default="uniform")
    output_opt(p)
    p.set_defaults(func=cmd_simulate)
    return top


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NondetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
