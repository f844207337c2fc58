"""Command line entry point: ``divsat <command> ...``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 experiment error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .algorithms import VARIANTS, AlgorithmError, RunConfig, run_variant
from .cnf import CnfError, parse_dimacs, write_dimacs
from .generator import GenConfig, GenerationError, gen_satisfiable, instance_text
from .harness import (TRAJECTORY_HEADER, ExperimentError, ExperimentSpec, read_runs, run_experiment,
                      stats_report, trajectory_rows, _write_csv)
from .solver import SolverConfig, SolverError, solve

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_EXPERIMENT = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _solver_config(args) -> SolverConfig:
    if getattr(args, "solver_cmd", None):
        return SolverConfig(engine="external", command=args.solver_cmd)
    return SolverConfig()


def cmd_generate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        cfg = GenConfig(n=args.n, m=args.m, k=args.k, dist=args.dist, beta=args.beta,
                        seed=args.seed + i, max_rejects=args.max_rejects)
        f, rejects = gen_satisfiable(cfg)
        path = out / cfg.filename()
        path.write_text(instance_text(cfg, f, rejects))
        print(f"{path} rejects={rejects}")
    return EXIT_OK


def cmd_run(args) -> int:
    f = parse_dimacs(Path(args.cnf).read_text())
    cfg = RunConfig(variant=args.variant, mu=args.mu, iterations=args.iterations,
                    l=args.l, measure=args.measure, seed=args.seed,
                    solver=_solver_config(args))
    res = run_variant(f, cfg)
    if args.trajectory:
        _write_csv(Path(args.trajectory), TRAJECTORY_HEADER,
                   trajectory_rows(res.trajectory))
    if args.models:
        Path(args.models).write_text(
            "".join("".join("1" if v else "0" for v in x) + "\n" for x in res.models))
    print(f"variant={cfg.variant} measure={cfg.measure} population={len(res.population)} "
          f"H1={res.h1:.6f} H1_norm={res.h1_norm:.6f} H2={res.h2:.6f} "
          f"H2_norm={res.h2_norm:.6f} unsat={res.unsat_count} solver_calls={res.solver_calls}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    text = Path(args.spec).read_text() if args.spec else ""
    spec = ExperimentSpec.from_text(text, out_dir=args.out, seed=args.seed, jobs=args.jobs)
    rows = run_experiment(spec)
    print(f"{'m':>5} {'variant':<14} {'H1 mean':>8} {'H2 mean':>8}  stat")
    for r in rows:
        print(f"{r.m:>5} {r.variant:<14} {r.h1_mean:8.3f} {r.h2_mean:8.3f}  {r.stat}")
    return EXIT_OK


def cmd_stats(args) -> int:
    print(stats_report(read_runs(Path(args.csv)), args.column))
    return EXIT_OK


def cmd_solve(args) -> int:
    f = parse_dimacs(Path(args.cnf).read_text())
    res = solve(f, _solver_config(args))
    if res.sat:
        print("s SATISFIABLE")
        lits = [str(i + 1 if v else -(i + 1)) for i, v in enumerate(res.model)]
        print("v " + " ".join(lits) + " 0")
    else:
        print("s UNSATISFIABLE")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="divsat", description="Diverse SAT model sets.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write random satisfiable k-CNF instances")
    g.add_argument("--n", type=int, default=100)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--k", type=int, default=3)
    g.add_argument("--dist", choices=("uniform", "powerlaw"), default="powerlaw")
    g.add_argument("--beta", type=float, default=2.75)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--count", type=int, default=1, help="instances, seeds seed..seed+count-1")
    g.add_argument("--max-rejects", type=int, default=1000)
    g.add_argument("--out", default=".")
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="one algorithm on one DIMACS file")
    r.add_argument("cnf")
    r.add_argument("--variant", choices=VARIANTS, default="edo_mutation")
    r.add_argument("--measure", choices=("H1", "H2"), default="H1")
    r.add_argument("--mu", type=int, default=20)
    r.add_argument("--iterations", type=int, default=2000)
    r.add_argument("--l", type=int, default=10, help="initial fix-set size (EDO)")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--trajectory", help="write the per-iteration trajectory CSV here")
    r.add_argument("--models", help="write the final population, one 0/1 row per model")
    r.add_argument("--solver-cmd", help="external solver command instead of the built-in one")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("experiment", help="batch experiment from a key = value spec file")
    e.add_argument("spec", nargs="?")
    e.add_argument("--out")
    e.add_argument("--seed", type=int)
    e.add_argument("--jobs", type=int)
    e.set_defaults(func=cmd_experiment)

    s = sub.add_parser("stats", help="Kruskal-Wallis report from a runs.csv")
    s.add_argument("csv")
    s.add_argument("--column", default="h1_norm", choices=("h1_norm", "h2_norm"))
    s.set_defaults(func=cmd_stats)

    v = sub.add_parser("solve", help="plain SAT check")
    v.add_argument("cnf")
    v.add_argument("--solver-cmd")
    v.set_defaults(func=cmd_solve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ValueError as exc:
        # CnfError is a ValueError; report bad input files as data errors
        code = EXIT_DATA if isinstance(exc, CnfError) else EXIT_USAGE
        print(f"divsat: {exc}", file=sys.stderr)
        return code
    except (OSError, GenerationError, AlgorithmError, SolverError) as exc:
        print(f"divsat: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ExperimentError as exc:
        print(f"divsat: {exc}", file=sys.stderr)
        return EXIT_EXPERIMENT


if __name__ == "__main__":
    sys.exit(main())
