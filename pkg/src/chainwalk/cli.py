"""Command line entry point: ``chainwalk <command> [options]``.

Exit codes: 0 success, 2 bad input, 3 infeasible parameters,
4 capacity exceeded, 5 self-test failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import __version__, amplify, chain, planner, report
from .combinat import DomainSpec
from .errors import CapacityError, DomainError, InfeasibleError
from .radixstore import (
    RadixTree,
    count_in_interval_not_tree,
    find_nth_not_in_tree,
    find_nth_not_in_two_trees,
)
from .rng import GENERATOR_NAME, make_rng, trial_rng
from .walksim import (
    WalkConfig,
    mnrs_run,
    spectrum,
    uniform_edge_state,
    unmarked_uniform_state,
)

EXIT_DOMAIN, EXIT_INFEASIBLE, EXIT_CAPACITY, EXIT_SELFTEST = 2, 3, 4, 5


def _int_list(text: str) -> list[int]:
    text = text.strip()
    return [int(x) for x in text.split(",")] if text else []


# -- commands ----------------------------------------------------------------
# Each returns (result payload, csv header, csv rows).


def cmd_spectrum(a):
    spec = DomainSpec(a.N, frozenset(_int_list(a.excluded)))
    cfg = WalkConfig.build(spec, a.R, lambda S: False, memory_cap=a.memory_cap)
    rep = spectrum(cfg)
    result = {
        "eigenphases": rep.eigenphases,
        "zero_phase_count": rep.zero_phase_count,
        "fixed_vector_overlap": rep.fixed_vector_overlap,
        "min_nonzero_phase": rep.min_nonzero_phase,
        "predicted_min_phase": rep.predicted_min_phase,
        "ratio_to_prediction": rep.ratio_to_prediction,
        "busy_dimension": rep.dim_busy,
        "spectral_gap": rep.gap,
    }
    rows = report.phase_multiplicities(rep.eigenphases)
    return result, ["phase", "multiplicity"], rows


def cmd_grover(a):
    if a.points < 1:
        raise DomainError("points must be positive")
    grid = np.linspace(a.eps_min, a.eps_max, a.points)
    rows = []
    for eps in grid:
        eps = float(eps)
        sch = amplify.schedule(eps)
        pu, pb = amplify.success_probabilities(eps)
        rows.append([eps, sch.alpha, sch.iters_uniform, sch.iters_bad, pu, pb,
                     amplify.lower_bound(eps)])
    header = ["epsilon", "angle", "iters_uniform", "iters_bad", "p_uniform", "p_bad", "lower_bound"]
    return {"rows": [dict(zip(header, r)) for r in rows]}, header, rows


def cmd_walk(a):
    f = chain.random_function(a.n, a.m, a.seed)
    C = chain.CollisionTable()
    cfg = WalkConfig.build(chain.domain_for(f, C), a.R,
                           lambda S: chain.is_marked(S, f, C), memory_cap=a.memory_cap)
    start = uniform_edge_state(cfg) if a.start == "uniform" else unmarked_uniform_state(cfg)
    rows = []
    for t in range(a.trials):
        ok, _, st = mnrs_run(cfg, start, trial_rng(a.seed, t))
        rows.append([t, ok, st.iterations, st.queries, st.success_probability])
    hits = sum(r[1] for r in rows)
    result = {
        "epsilon": cfg.epsilon,
        "start": a.start,
        "trials": a.trials,
        "successes": hits,
        "success_probability": rows[0][4] if rows else None,
        "iterations_per_run": rows[0][2] if rows else None,
        "queries_per_run": rows[0][3] if rows else None,
    }
    return result, ["trial", "success", "iterations", "queries", "success_probability"], rows


def cmd_chain(a):
    f = chain.random_function(a.n, a.m, a.seed)
    C, rep = chain.run_chained(f, a.k, a.ell, a.seed, backend=a.backend,
                               memory_cap=a.memory_cap)
    result = rep.to_json()
    result["table"] = C.to_json()
    result["table_verified"] = chain.verify_table(C, f)
    rows = [[e.width, e.image, list(e.elements)] for e in rep.extraction_events]
    return result, ["width", "image", "elements"], rows


def cmd_tree_fuzz(a):
    rng = make_rng(a.seed)
    U = 1 << a.n
    cap = a.max_size or max(1, min(U, 64))
    tree = RadixTree(a.n, max_size=cap, allocator=a.allocator)
    members: set[int] = set()
    inserts = deletes = 0
    rows = []
    for step in range(a.ops):
        x = int(rng.integers(U))
        if x in members:
            tree.delete(x)
            members.discard(x)
            deletes += 1
            op = "delete"
        elif len(members) < cap:
            tree.insert(x, rng)
            members.add(x)
            inserts += 1
            op = "insert"
        else:
            op = "skip"
        tree.check()
        if sorted(members) != tree.elements():
            raise AssertionError(f"tree contents diverged at step {step}")
        rows.append([step, op, x, len(members)])
    result = {
        "inserts": inserts,
        "deletes": deletes,
        "final_size": len(members),
        "final_elements": sorted(members),
        "final_tree": json.loads(tree.to_json()),
    }
    return result, ["step", "op", "element", "size"], rows


def cmd_rank_select(a):
    rng = make_rng(a.seed)
    elems = _int_list(a.elements)
    other = _int_list(a.other)
    t = RadixTree(a.n, max_size=max(1, len(elems)))
    for x in elems:
        t.insert(x, rng)
    if a.op == "nth-not-in":
        value = find_nth_not_in_tree(a.i, t)
    elif a.op == "nth-not-in-two":
        t2 = RadixTree(a.n, max_size=max(1, len(other)))
        for x in other:
            t2.insert(x, rng)
        value = find_nth_not_in_two_trees(a.i, t, t2)
    elif a.op == "count-not-in":
        value = count_in_interval_not_tree(a.u, a.v, t)
    elif a.op == "nth":
        value = t.nth_element(a.i)
    else:  # rank
        value = t.rank(a.i)
    return {"op": a.op, "value": value}, ["op", "value"], [[a.op, value]]


def cmd_plan(a):
    kind = a.kind
    if kind != "limited-birthday" and a.m is None:
        raise DomainError(f"--m is required for the {kind} plan")
    if kind == "collision":
        rep = planner.collision_exponent(a.k, a.m, a.n, normalized=a.normalized)
    elif kind == "bht":
        rep = planner.bht_exponent(a.k, a.m, a.n)
    elif kind == "tradeoff":
        if a.ell is None:
            raise DomainError("--ell is required for the tradeoff plan")
        rep = planner.tradeoff_exponent(a.k, a.ell, a.m, a.n)
    elif kind == "r-collision":
        rep = planner.r_collision(a.r, a.k, a.m, a.n)
    else:
        if a.din is None or a.dout is None:
            raise DomainError("--din and --dout are required for limited-birthday")
        rep = planner.limited_birthday(a.n, a.din, a.dout, a.k)
    result = report._plain(rep)
    result["feasible"] = rep.feasible
    return result, ["kind", "exponent", "regime", "memory_exponent", "feasible"], [
        [kind, rep.exponent, rep.regime, rep.memory_exponent, rep.feasible]
    ]


def cmd_sieve_opt(a):
    if (a.c is None) != (a.c1 is None):
        raise DomainError("--c and --c1 must be given together")
    if a.c is None:
        c, c1, rep = planner.optimize_sieve(a.formula)
        mode = "optimize"
    else:
        c, c1, rep = a.c, a.c1, planner.sieve_total(a.c, a.c1, a.formula)
        mode = "evaluate"
    result = {"mode": mode, "c": c, "c1": c1, **rep.to_dict()}
    header = sorted(result)
    return result, header, [[result[h] for h in header]]


COMMANDS: dict[str, Callable] = {
    "spectrum": cmd_spectrum,
    "grover": cmd_grover,
    "walk": cmd_walk,
    "chain": cmd_chain,
    "tree-fuzz": cmd_tree_fuzz,
    "rank-select": cmd_rank_select,
    "plan": cmd_plan,
    "sieve-opt": cmd_sieve_opt,
}


# -- parser ------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", help="write here instead of stdout")
    p.add_argument("--config", help="JSON file of option defaults")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chainwalk",
                                     description="Quantum-walk collision search toolkit.")
    parser.add_argument("--version", action="version", version=f"chainwalk {__version__}")
    parser.add_argument("--selftest", action="store_true", help="run the release checks")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("spectrum", help="walk operator spectrum on a Johnson graph")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--R", type=int, required=True)
    p.add_argument("--excluded", default="", help="comma separated points to remove")
    p.add_argument("--memory-cap", type=int, default=1 << 24)
    _common(p)

    p = sub.add_parser("grover", help="amplification schedule table")
    p.add_argument("--eps-min", type=float, default=0.001)
    p.add_argument("--eps-max", type=float, default=0.5)
    p.add_argument("--points", type=int, default=50)
    _common(p)

    p = sub.add_parser("walk", help="repeated single walks on a random function")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--R", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--start", choices=("uniform", "bad"), default="uniform")
    p.add_argument("--memory-cap", type=int, default=1 << 24)
    _common(p)

    p = sub.add_parser("chain", help="chained collision search")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--backend", choices=("auto", "dense", "hidden"), default="auto")
    p.add_argument("--memory-cap", type=int, default=1 << 24)
    _common(p)

    p = sub.add_parser("tree-fuzz", help="random insert/delete run with integrity checks")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--ops", type=int, default=1000)
    p.add_argument("--max-size", type=int, default=0)
    p.add_argument("--allocator", choices=("heap-tree", "random-search"), default="heap-tree")
    _common(p)

    p = sub.add_parser("rank-select", help="rank and complement queries on a stored set")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--elements", required=True)
    p.add_argument("--other", default="", help="second set for nth-not-in-two")
    p.add_argument("--op", choices=("nth-not-in", "nth-not-in-two", "count-not-in", "nth", "rank"),
                   required=True)
    p.add_argument("--i", type=int, default=0)
    p.add_argument("--u", type=int, default=0)
    p.add_argument("--v", type=int, default=0)
    _common(p)

    p = sub.add_parser("plan", help="cost exponents")
    p.add_argument("--kind", default="collision",
                   choices=("collision", "tradeoff", "bht", "r-collision", "limited-birthday"))
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--m", type=float, default=None)
    p.add_argument("--k", type=float, default=0.0)
    p.add_argument("--ell", type=float, default=None)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--din", type=float, default=None)
    p.add_argument("--dout", type=float, default=None)
    p.add_argument("--normalized", action="store_true")
    _common(p)

    p = sub.add_parser("sieve-opt", help="sieving time/memory exponents")
    p.add_argument("--formula", choices=("new", "old"), default="new")
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--c1", type=float, default=None)
    _common(p)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read config: {exc}") from exc
    if not isinstance(cfg, dict):
        raise DomainError("config must be a JSON object")
    sub = parser._subparsers._group_actions[0].choices[args.command]  # type: ignore[union-attr]
    known = {act.dest for act in sub._actions} - {"help", "config"}
    unknown = sorted(set(k.replace("-", "_") for k in cfg) - known)
    if unknown:
        raise DomainError(f"unknown config keys: {', '.join(unknown)}")
    sub.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
    # command-line values still win over the file
    return parser.parse_args(argv)


def _emit(args, payload: str) -> None:
    path = args.output
    if path is None and os.environ.get("CHAINWALK_OUTPUT_DIR"):
        ext = "csv" if args.format == "csv" else "json"
        path = os.path.join(os.environ["CHAINWALK_OUTPUT_DIR"], f"{args.command}.{ext}")
    if path is None:
        sys.stdout.write(payload)
        return
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(payload)


def _params(args) -> dict[str, Any]:
    skip = {"command", "format", "output", "config", "selftest", "seed"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def selftest() -> int:
    from .acceptance import run_all

    results = run_all()
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_SELFTEST if failed else 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if args.selftest:
            return selftest()
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_DOMAIN
        result, header, rows = COMMANDS[args.command](args)
        if args.format == "csv":
            payload = report.to_csv(header, rows)
        else:
            payload = report.to_json({
                "schema_version": report.SCHEMA_VERSION,
                "command": args.command,
                "seed": args.seed,
                "generator": GENERATOR_NAME,
                "params": _params(args),
                "result": result,
            })
        _emit(args, payload)
        return 0
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except CapacityError as exc:
        print(f"capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
