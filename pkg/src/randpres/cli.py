"""Command line entry point: ``randpres {walk,schreier,surject,sample,count}``.

Exit codes: 0 success, 1 usage or invalid input, 2 capacity exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CapacityError, InvalidInputError, PreconditionError
from .experiments import (
    c_of_M,
    load_config,
    sample_presentation,
    sweep,
    trial_rng,
    write_csv,
    write_manifest,
)
from .fqlin import format_matrix, generating_tuple_count, generation_probability
from .groups import group_from_spec, load_group
from .schreier import build_system, min_module_generators
from .walk import (
    build_chain,
    index2_subgroup,
    is_irreducible,
    iter_distributions,
    lemma1_criterion,
    mixing_length,
    period,
    tv_to_uniform,
)
from .words import count_reduced

EXIT_OK, EXIT_USAGE, EXIT_CAPACITY = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _lengths(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",")]


def _fmt_set(xs) -> str:
    return "{" + ",".join(str(x) for x in xs) + "}"


def cmd_walk(args) -> int:
    started = time.time()
    G = load_group(args.group_file)
    chain = build_chain(G)
    print(f"group: order {G.order}, marks {list(G.marks)}")
    if not is_irreducible(chain):
        from .groups import subgroup_closure

        sub = subgroup_closure(G, G.marks)
        print(f"reducible: marks generate proper subgroup {_fmt_set(sub.members)}")
        return EXIT_OK
    assert lemma1_criterion(G)
    p = period(chain)
    print("irreducible: yes")
    print(f"period: {p}")
    if p == 2:
        H = index2_subgroup(chain)
        print(f"index-2 subgroup H = {_fmt_set(H.members)}")
        targets = {0: H.members, 1: H.complement()}
    else:
        targets = {0: range(G.order), 1: range(G.order)}
    ls = _lengths(args.l)
    rows = []
    for dist in iter_distributions(chain, max(ls)):
        if dist.step in ls:
            par = dist.step % 2
            tv = tv_to_uniform(dist.summed(), targets[par])
            target = ("H" if par == 0 else "G\\H") if p == 2 else "G"
            rows.append((dist.step, tv, target))
            print(f"l={dist.step:4d}  tv={tv:.3e}  target={target}")
    mix = mixing_length(chain, args.tol, max_l=max(args.max_l, max(ls)))
    print(str(mix))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["l", "tv", "target"])
            for l, tv, target in rows:
                w.writerow([l, f"{tv:.10g}", target])
    if args.json:
        write_manifest(args.json, "walk", {"group_file": args.group_file, "l": args.l, "tol": args.tol},
                       None, started, {"period": p, "mixing": str(mix)})
    return EXIT_OK


def cmd_schreier(args) -> int:
    started = time.time()
    J = group_from_spec(args.J)
    f = [int(x) for x in args.f]
    if args.n is not None and args.n != len(f):
        raise InvalidInputError(f"--n {args.n} does not match {len(f)} f-images")
    sys_ = build_system(J, f, args.q)
    rank = min_module_generators(sys_)
    print(f"J: {J.name or args.J} (order {J.order}), f = {f}, q = {sys_.q}")
    print(f"D = {sys_.D}")
    print("transversal:")
    for j, w in enumerate(sys_.transversal):
        print(f"  {j}: [{w}]")
    if rank.exact:
        print(f"minimal module generators m = {rank.upper} (certified)")
    else:
        print(f"minimal module generators: {rank.lower} <= m <= {rank.upper}")
    if args.verbose:
        for j in range(J.order):
            print(f"action of {j}:")
            print(format_matrix(sys_.action[j], sys_.q), end="")
    if args.json:
        data = sys_.to_dict()
        data["min_generators"] = {"lower": rank.lower, "upper": rank.upper, "exact": rank.exact}
        Path(args.json).write_text(json.dumps(data, indent=2) + "\n")
    return EXIT_OK


def cmd_surject(args) -> int:
    started = time.time()
    cfg = load_config(args.config)
    if args.seed is not None or args.trials is not None:
        from dataclasses import replace

        cfg = replace(cfg, seed=cfg.seed if args.seed is None else args.seed,
                      trials=cfg.trials if args.trials is None else args.trials)
    rows = sweep(cfg, threads=args.threads, exact=not args.no_exact)
    text = write_csv(rows, args.csv)
    if not args.csv:
        print(text, end="")
    else:
        for r in rows:
            print(",".join(r.csv_fields()))
    manifest_path = args.json or (str(Path(args.csv).with_suffix(".json")) if args.csv else None)
    if manifest_path:
        write_manifest(manifest_path, "surject", cfg.to_dict(), cfg.seed, started)
    return EXIT_OK


def cmd_sample(args) -> int:
    for k in range(args.count):
        rng = trial_rng(args.seed, args.l, k)
        for w in sample_presentation(args.n, args.l, args.rho, rng):
            print(w)
        if k + 1 < args.count:
            print()
    return EXIT_OK


def cmd_count(args) -> int:
    a = args.args
    kind = args.kind
    if kind == "reduced":
        print(count_reduced(*a))
    elif kind == "tuples":
        print(generating_tuple_count(*a))
    elif kind == "genprob":
        print(f"{generation_probability(*a):.12g}")
    elif kind == "cM":
        print(c_of_M(*a))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="randpres", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    w = sub.add_parser("walk", help="classify the walk on a marked group and report mixing")
    w.add_argument("group_file")
    w.add_argument("--l", default="1..100", help="lengths: 'a..b' or comma list")
    w.add_argument("--tol", type=float, default=1e-6)
    w.add_argument("--max-l", type=int, default=1000)
    w.add_argument("--csv")
    w.add_argument("--json")
    w.set_defaults(func=cmd_walk)

    s = sub.add_parser("schreier", help="Schreier system for f: F -> J")
    s.add_argument("--n", type=int)
    s.add_argument("--J", required=True, help="e.g. 'cyclic 2', 'trivial', 'file PATH'")
    s.add_argument("--f", nargs="+", required=True, help="images of x_1..x_n in J")
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--verbose", action="store_true")
    s.add_argument("--json")
    s.set_defaults(func=cmd_schreier)

    r = sub.add_parser("surject", help="surjection-probability sweep from a config file")
    r.add_argument("config")
    r.add_argument("--seed", type=int, help="override the config seed")
    r.add_argument("--trials", type=int)
    r.add_argument("--threads", type=int, default=1)
    r.add_argument("--csv")
    r.add_argument("--json")
    r.add_argument("--no-exact", action="store_true")
    r.set_defaults(func=cmd_surject)

    m = sub.add_parser("sample", help="dump random presentations")
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--l", type=int, required=True)
    m.add_argument("--rho", type=int, required=True)
    m.add_argument("--seed", type=int, required=True)
    m.add_argument("--count", type=int, default=1)
    m.set_defaults(func=cmd_sample)

    c = sub.add_parser("count", help="closed-form counts")
    c.add_argument("kind", choices=["reduced", "tuples", "genprob", "cM"])
    c.add_argument("args", nargs="+", type=int)
    c.set_defaults(func=cmd_count)
    return p


_ARITY = {"reduced": 2, "tuples": 2, "genprob": 3, "cM": 2}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "count" and len(args.args) != _ARITY[args.kind]:
        parser.error(f"count {args.kind} takes {_ARITY[args.kind]} integers")
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"randpres: capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (InvalidInputError, PreconditionError, FileNotFoundError) as exc:
        print(f"randpres: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
