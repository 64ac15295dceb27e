"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 instance error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

from .bench import BenchmarkConfig, run_benchmark
from .exceptions import ItpError, NumericalFailure
from .generate import GeneratorParams, generate_instance
from .io import dumps_instance, parse_instance, parse_solution
from .properties import (strong_feasible_problem, strong_feasible_solution, strong_optimal_problem,
                         strong_optimal_solution_fixed_cost, strong_optimal_solution_general,
                         weak_feasible_problem, weak_feasible_solution, weak_optimal_problem,
                         weak_optimal_solution)
from .value_range import best_optimal_value, worst_optimal_value
from .worst_finite import solve_worst_finite, write_bigm_lp

EXIT_OK, EXIT_USAGE, EXIT_INSTANCE, EXIT_NUMERICAL = 0, 1, 2, 3
PROPERTIES = ("weakfeas", "strongfeas", "weakopt", "strongopt")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _num(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if isinstance(x, float) and x.is_integer():
        return int(x)
    return x


def _print(doc, as_json):
    if as_json:
        print(json.dumps(doc, indent=2, default=_num))
        return
    for key, value in doc.items():
        print(f"{key}: {_num(value) if not isinstance(value, bool) else str(value).lower()}")


def cmd_check(args):
    inst = parse_instance(args.file)
    props = [args.property] if args.property else list(PROPERTIES)
    out = {}
    if args.solution is None:
        tests = {"weakfeas": weak_feasible_problem, "strongfeas": strong_feasible_problem,
                 "weakopt": weak_optimal_problem, "strongopt": strong_optimal_problem}
        for p in props:
            out[p] = bool(tests[p](inst))
    else:
        x = parse_solution(args.solution, inst.shape)
        for p in props:
            if p == "weakfeas":
                out[p] = weak_feasible_solution(inst, x)
            elif p == "strongfeas":
                out[p] = strong_feasible_solution(inst, x)
            elif p == "weakopt":
                out[p] = weak_optimal_solution(inst, x) is not None
            elif inst.costs_fixed:
                out[p] = strong_optimal_solution_fixed_cost(inst, x)
            else:
                out[p] = strong_optimal_solution_general(inst, x, max_free=args.max_free)
    _print(out, args.json)
    return EXIT_OK


def _solver_options(args):
    if args.method == "enum":
        return {}
    opts = {"node_order": args.node_order}
    if args.time_limit is not None:
        opts["time_limit"] = args.time_limit
    return opts


def cmd_range(args):
    inst = parse_instance(args.file)
    best = best_optimal_value(inst)
    worst = worst_optimal_value(inst)
    res = solve_worst_finite(inst, method=args.method, **_solver_options(args))
    doc = {"best": best.value, "worst": worst, "worst_finite": res.value,
           "worst_finite_proven": res.proven_optimal, "upper_bound": res.upper_bound,
           "paradox": res.paradox}
    if args.json:
        doc["best_plan"] = best.plan.tolist()
        doc["worst_finite_plan"] = res.plan.tolist()
    _print(doc, args.json)
    return EXIT_OK


def cmd_worst_finite(args):
    inst = parse_instance(args.file)
    if args.dump_lp:
        write_bigm_lp(inst, args.dump_lp)
    res = solve_worst_finite(inst, method=args.method, **_solver_options(args))
    if args.log:
        res.write_log(args.log)
    sc = res.scenario
    doc = {"worst_finite": res.value, "upper_bound": res.upper_bound, "proven_optimal": res.proven_optimal,
           "method": res.method, "nodes": res.stats.nodes, "lp_solves": res.stats.lp_solves,
           "wall_time_s": round(res.stats.wall_time, 6), "sum_d_shipped": res.shipped,
           "paradox": res.paradox}
    if args.json:
        doc.update(plan=res.plan.tolist(), supply=sc.supply.tolist(), demand=sc.demand.tolist())
    _print(doc, args.json)
    return EXIT_OK


def cmd_gen(args):
    params = GeneratorParams(doubling=args.doubling, mode=args.mode)
    inst = generate_instance(args.m, args.n, args.seed, params)
    text = dumps_instance(inst)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_bench(args):
    cfg = BenchmarkConfig(method=args.method, node_order=args.node_order, log_dir=args.log_dir,
                          workers=args.workers)
    if args.time_limit is not None:
        cfg.time_limit = args.time_limit
    report = run_benchmark(args.source, cfg)
    if args.report:
        report.write_csv(args.report)
    sys.stdout.write(report.to_text())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="itp", description="Interval transportation problems: properties and optimal value ranges.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="feasibility/optimality properties of an instance or a plan")
    c.add_argument("file")
    c.add_argument("--solution", help="JSON m x n plan; without it the instance itself is tested")
    c.add_argument("--property", choices=PROPERTIES)
    c.add_argument("--max-free", type=int, default=20, help="orthant enumeration cap for strongopt")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_check)

    def solver_flags(sp):
        sp.add_argument("--method", choices=("bnb", "enum", "auto"), default="auto")
        sp.add_argument("--time-limit", type=float, default=None, help="seconds (branch-and-bound only)")
        sp.add_argument("--node-order", choices=("best", "depth"), default="best")

    r = sub.add_parser("range", help="best, worst and worst finite optimal values")
    r.add_argument("file")
    solver_flags(r)
    r.add_argument("--json", action="store_true")
    r.set_defaults(func=cmd_range)

    w = sub.add_parser("worst-finite", help="worst finite optimal value with its scenario")
    w.add_argument("file")
    solver_flags(w)
    w.add_argument("--log", help="write the convergence CSV here")
    w.add_argument("--dump-lp", help="write a big-M MILP in LP format here (debugging)")
    w.add_argument("--json", action="store_true")
    w.set_defaults(func=cmd_worst_finite)

    g = sub.add_parser("gen", help="random instance with integer data")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--doubling", action=argparse.BooleanOptionalAction, default=True)
    g.add_argument("--mode", choices=("le", "eq"), default="le")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("bench", help="run a directory, instance file or generator spec")
    b.add_argument("source")
    b.add_argument("--report", help="CSV report path")
    solver_flags(b)
    b.add_argument("--log-dir", help="directory for per-instance convergence CSVs")
    b.add_argument("--workers", type=int, default=None)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalFailure as exc:
        print(f"itp: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ItpError, OSError) as exc:
        print(f"itp: {exc}", file=sys.stderr)
        return EXIT_INSTANCE


if __name__ == "__main__":
    sys.exit(main())
