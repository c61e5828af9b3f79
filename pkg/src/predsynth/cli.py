"""Command-line entry point.

Subcommands: ingest, init, export-train, iterate, baseline, report.
All artifacts live under a run directory (--run-dir) with
iteration-numbered subfolders.  Solver and predictor commands come
from flags, a JSON config file (--config), or the environment
(PREDSYNTH_SOLVER_CMD, PREDSYNTH_SOLVER_SERVER_CMD).
"""

from __future__ import annotations

import argparse
import json
import logging
import shlex
import sys
from pathlib import Path

from .baselines import PROVER_TEMPLATES, load_benchmark, run_comparison
from .driver import (
    IterationError, PredictorSpec, RunConfig, export_training, init_run,
    iterate,
)
from .generate import GenConfig
from .programs import load_problems
from .solving import (
    SolutionDB, Solver, SolverConfig, SolverNotFound, default_solver_config,
)

log = logging.getLogger("predsynth")


def _add_solver_args(p: argparse.ArgumentParser):
    p.add_argument("--solver-cmd", help="per-call solver command template "
                   "(use {input}, {timeout_ms}, {rlimit})")
    p.add_argument("--solver-server-cmd",
                   help="persistent-server solver command template")
    p.add_argument("--timeout-ms", type=int, default=200)
    p.add_argument("--rlimit", type=int, default=0)
    p.add_argument("--workers", type=int, default=2)
    p.add_argument("--short-circuit", action="store_true",
                   help="stop checking a problem's candidates after the "
                        "first proof")


def _solver_config(args) -> SolverConfig:
    overrides = dict(timeout_ms=args.timeout_ms, rlimit=args.rlimit,
                     workers=args.workers, short_circuit=args.short_circuit)
    if args.solver_cmd:
        cfg = SolverConfig(command=shlex.split(args.solver_cmd), **overrides)
        if args.solver_server_cmd:
            cfg.server_command = shlex.split(args.solver_server_cmd)
        return cfg
    return default_solver_config(**overrides)


def _run_config(args) -> RunConfig:
    gen = GenConfig(term_cap=args.term_cap,
                    literals_per_class=args.literals_per_class,
                    predicate_count=args.predicates,
                    candidate_count=args.candidates,
                    seed=args.seed)
    predictors = []
    if getattr(args, "predictor_train", None):
        predictors.append(PredictorSpec(
            train_cmd=shlex.split(args.predictor_train),
            infer_cmd=shlex.split(args.predictor_infer)))
    return RunConfig(mode=args.mode, train_on=args.train_on,
                     shift_p=args.shift_p,
                     expansion=args.expansion,
                     candidates_per_problem=args.combinations,
                     beam=args.beam,
                     semantic_filter=args.semantic_filter,
                     seed=args.seed,
                     track_fastest=args.track_fastest,
                     predictors=predictors,
                     gen=gen)


def _add_run_args(p: argparse.ArgumentParser):
    p.add_argument("--mode", choices=("split", "whole"), default="split")
    p.add_argument("--train-on", choices=("shortest", "shortest+fastest"),
                   default="shortest")
    p.add_argument("--shift-p", type=float, default=0.1)
    p.add_argument("--expansion", action="store_true")
    p.add_argument("--combinations", type=int, default=100,
                   help="split-mode candidates per problem")
    p.add_argument("--beam", type=int, default=240)
    p.add_argument("--semantic-filter", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--track-fastest", action="store_true")
    p.add_argument("--term-cap", type=int, default=1024)
    p.add_argument("--literals-per-class", type=int, default=250)
    p.add_argument("--predicates", type=int, default=4000)
    p.add_argument("--candidates", type=int, default=1000)
    p.add_argument("--predictor-train",
                   help="predictor training command ({train}, {model})")
    p.add_argument("--predictor-infer",
                   help="predictor inference command "
                        "({model}, {problems}, {beam}, {out})")


def _apply_config_file(parser, argv):
    # --config JSON supplies defaults; explicit flags still win
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        with open(known.config) as fh:
            defaults = json.load(fh)
        parser.set_defaults(**{k.replace("-", "_"): v
                               for k, v in defaults.items()})


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    argv = sys.argv[1:] if argv is None else argv
    parser = argparse.ArgumentParser(prog="predsynth")
    parser.add_argument("--config", help="JSON file with flag defaults")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_ingest = sub.add_parser("ingest", help="parse and validate a problems file")
    p_ingest.add_argument("problems")
    p_ingest.add_argument("--run-dir", required=True)

    p_init = sub.add_parser("init", help="brute-force initial run")
    p_init.add_argument("--run-dir", required=True)
    _add_run_args(p_init)
    _add_solver_args(p_init)

    p_export = sub.add_parser("export-train", help="write the training file")
    p_export.add_argument("--run-dir", required=True)
    p_export.add_argument("--out", required=True)
    _add_run_args(p_export)

    p_iter = sub.add_parser("iterate", help="run self-learning iterations")
    p_iter.add_argument("--run-dir", required=True)
    p_iter.add_argument("--iterations", type=int, default=1)
    p_iter.add_argument("--start", type=int, default=1)
    p_iter.add_argument("--replay-from",
                        help="consume logged predictions from this run dir")
    _add_run_args(p_iter)
    _add_solver_args(p_iter)

    p_base = sub.add_parser("baseline", help="manual-heuristic comparison")
    p_base.add_argument("--problems", required=True,
                        help="problems file or directory of .smt2 scripts")
    p_base.add_argument("--heuristic", nargs="+",
                        default=["n=0", "n=1", "n=2", "n=4", "strong"])
    p_base.add_argument("--provers", nargs="+", default=["default"])
    p_base.add_argument("--out-csv")
    _add_solver_args(p_base)

    p_report = sub.add_parser("report", help="summarize a run directory")
    p_report.add_argument("--run-dir", required=True)

    _apply_config_file(parser, argv)
    args = parser.parse_args(argv)

    if args.cmd == "ingest":
        return cmd_ingest(args)
    if args.cmd == "init":
        return cmd_init(args)
    if args.cmd == "export-train":
        return cmd_export(args)
    if args.cmd == "iterate":
        return cmd_iterate(args)
    if args.cmd == "baseline":
        return cmd_baseline(args)
    if args.cmd == "report":
        return cmd_report(args)
    return 2


def _load_run_problems(run_dir: Path):
    problems_file = run_dir / "problems.txt"
    if not problems_file.exists():
        raise SystemExit(f"{problems_file} missing; run `predsynth ingest` first")
    return load_problems(problems_file)


def cmd_ingest(args) -> int:
    run_dir = Path(args.run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    problems = load_problems(args.problems)
    lines = Path(args.problems).read_text()
    (run_dir / "problems.txt").write_text(lines)
    summary = {p.pid: {"loops": len(p.registry.entries)} for p in problems}
    (run_dir / "ingest.json").write_text(json.dumps(summary, indent=2) + "\n")
    log.info("ingested %d problems into %s", len(problems), run_dir)
    return 0


def cmd_init(args) -> int:
    run_dir = Path(args.run_dir)
    problems = _load_run_problems(run_dir)
    cfg = _run_config(args)
    with Solver(_solver_config(args)) as solver:
        db = init_run(problems, cfg, solver, run_dir)
    log.info("initial run solved %d/%d problems", len(db.solved()), len(problems))
    return 0


def cmd_export(args) -> int:
    run_dir = Path(args.run_dir)
    problems = {p.pid: p for p in _load_run_problems(run_dir)}
    db = SolutionDB.load(run_dir / "db.jsonl")
    stats = export_training(db, problems, _run_config(args), args.out)
    log.info("wrote %s: %s", args.out, stats)
    return 0


def cmd_iterate(args) -> int:
    run_dir = Path(args.run_dir)
    problems = _load_run_problems(run_dir)
    cfg = _run_config(args)
    db = SolutionDB.load(run_dir / "db.jsonl")
    replay = Path(args.replay_from) if args.replay_from else None
    with Solver(_solver_config(args)) as solver:
        for it in range(args.start, args.start + args.iterations):
            try:
                db, report = iterate(db, problems, cfg, solver, run_dir, it,
                                     predictions_from=replay)
            except IterationError as exc:
                log.error("iteration %d aborted: %s", it, exc)
                return 1
            log.info("iteration %d: +%d solutions, %d solved, "
                     "validity %.1f%%", it, report.new_solutions,
                     report.cumulative_solved, 100 * report.validity_rate)
    return 0


def cmd_baseline(args) -> int:
    items = load_benchmark(args.problems)
    solvers = {}
    for name in args.provers:
        if name == "default":
            try:
                solvers[name] = _solver_config(args)
            except SolverNotFound as exc:
                log.error("%s", exc)
                return 1
        elif name in PROVER_TEMPLATES:
            solvers[name] = SolverConfig(command=list(PROVER_TEMPLATES[name]),
                                         timeout_ms=args.timeout_ms,
                                         workers=args.workers)
        else:
            log.warning("unknown prover %s skipped", name)
    result = run_comparison(items, args.heuristic, solvers,
                            timeout_ms=args.timeout_ms)
    print(result.render())
    if args.out_csv:
        Path(args.out_csv).write_text(result.to_csv())
    return 0


def cmd_report(args) -> int:
    run_dir = Path(args.run_dir)
    db = SolutionDB.load(run_dir / "db.jsonl")
    sizes = sorted(s.size for s in db.shortest.values())
    print(f"problems solved: {len(db.shortest)}")
    if sizes:
        print(f"solution sizes: min {sizes[0]} median {sizes[len(sizes)//2]} "
              f"max {sizes[-1]}")
    for rep in sorted(run_dir.glob("iter_*/report.json")):
        data = json.loads(rep.read_text())
        print(f"iter {data['iteration']}: +{data['new_solutions']} "
              f"cumulative {data['cumulative_solved']}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
