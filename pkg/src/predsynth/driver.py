"""Self-learning loop orchestration.

One iteration: export training data from the solution database, call
each configured predictor (an external command speaking the file
protocol), assemble candidates from its ranked token streams, evaluate
them with the prover harness, minimize the new solutions and fold them
into the database.  Everything an iteration consumes is logged under
the run directory, so replaying logged predictor outputs reproduces
the resulting database exactly.

Predictor protocol:
  train  <train_file> <model_dir>          (exit 0 on success)
  infer  <model_dir> <problems_file> <beam> <out_file>
training file lines:   problem-tokens > solution-tokens
problems file lines:   problem-id TAB problem-tokens TAB arity-table
                       (the third column guides grammar-aware decoders
                        and may be ignored)
prediction file lines: problem-id TAB rank TAB solution-tokens
"""

from __future__ import annotations

import json
import logging
import random
import shutil
import subprocess
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .fingerprint import true_on_grid
from .generate import GenConfig, initial_candidates, write_predictions
from .predicates import (
    Candidate, Solution, TokenError, decode_tokens, encode_example,
    encode_problem, shift_indices,
)
from .programs import Problem
from .solving import (
    SolutionDB, Solver, candidate_script, minimize, run_batch, select,
    write_script,
)

log = logging.getLogger(__name__)

SPLIT_SIZES = (1, 2, 3, 4, 5, 6, 8, 12)


@dataclass
class PredictorSpec:
    """Command templates; {train} {model} {problems} {beam} {out} are
    substituted."""

    train_cmd: list[str]
    infer_cmd: list[str]
    name: str = "nmt"


@dataclass
class RunConfig:
    mode: str = "split"                 # split | whole
    train_on: str = "shortest"          # shortest | shortest+fastest
    shift_p: float = 0.1
    expansion: bool = False
    split_sizes: tuple[int, ...] = SPLIT_SIZES
    candidates_per_problem: int = 100   # split-mode combinations
    beam: int = 240                     # whole-mode candidates
    max_output_tokens: int = 60
    semantic_filter: bool = False
    seed: int = 0
    minimize_mode: str = "shortest"
    track_fastest: bool = False
    predictors: list[PredictorSpec] = field(default_factory=list)
    gen: GenConfig = field(default_factory=GenConfig)

    def __post_init__(self):
        if self.mode not in ("split", "whole"):
            raise ValueError("mode must be split or whole")
        if not self.split_sizes or self.candidates_per_problem <= 0:
            raise ValueError("invalid split-mode configuration")


class IterationError(RuntimeError):
    pass


@dataclass
class IterationReport:
    iteration: int
    new_solutions: int = 0
    cumulative_solved: int = 0
    checked: int = 0
    prediction_lines: int = 0
    invalid_predictions: int = 0
    filtered_predicates: int = 0
    stage_seconds: dict = field(default_factory=dict)

    @property
    def validity_rate(self) -> float:
        if self.prediction_lines == 0:
            return 0.0
        return 1.0 - self.invalid_predictions / self.prediction_lines


# ---------------------------------------------------------------------------
# Training export
# ---------------------------------------------------------------------------

def training_pairs(db: SolutionDB, problems: dict[str, Problem],
                   cfg: RunConfig) -> list[tuple[Problem, Solution]]:
    pairs = []
    for pid in sorted(db.shortest):
        if pid in problems:
            pairs.append((problems[pid], db.shortest[pid]))
    if cfg.train_on == "shortest+fastest":
        for pid in sorted(db.fastest):
            fast = db.fastest[pid]
            short = db.shortest.get(pid)
            if pid in problems and (short is None or fast.text() != short.text()):
                pairs.append((problems[pid], fast))
    return pairs


def export_training(db: SolutionDB, problems: dict[str, Problem],
                    cfg: RunConfig, path, iteration: int = 0) -> dict:
    """Write the training file; returns counters.

    Split mode emits one line per problem/predicate pair, whole mode
    one line per problem/solution.  With expansion on, every pair also
    contributes a once-expanded and a twice-expanded variant.  Each
    emitted line is index-shifted with probability shift_p.
    """
    rng = random.Random((cfg.seed, iteration, "export").__repr__())
    stats = {"pairs": 0, "lines": 0, "too_long": 0, "unencodable": 0}
    out = []
    for problem, sol in training_pairs(db, problems, cfg):
        if cfg.mode == "split":
            units = [(p,) for p in sol.predicates]
        else:
            units = [sol.predicates]
        for unit in units:
            stats["pairs"] += 1
            variants = [unit]
            if cfg.expansion:
                from .predicates import expand_definitions
                variants.append(expand_definitions(unit, problem, 1, rng))
                variants.append(expand_definitions(unit, problem, 2, rng))
            for cand in variants:
                try:
                    line = encode_example(problem, cand)
                except TokenError:
                    stats["unencodable"] += 1
                    continue
                solution_side = line.split(" > ", 1)[1]
                if len(solution_side.split()) > cfg.max_output_tokens:
                    stats["too_long"] += 1
                    continue
                if cfg.shift_p > 0 and rng.random() < cfg.shift_p:
                    shifted = shift_indices(line, rng.randint(1, 19))
                    if shifted is not None:
                        line = shifted
                out.append(line)
                stats["lines"] += 1
    Path(path).write_text("\n".join(out) + ("\n" if out else ""))
    return stats


def _arity_column(problem: Problem) -> str:
    """Per-letter arity table, `a:1 a0:2 ...`: the loop-function arity
    and each slot function's arity after dummy-argument dropping.
    Grammar-guided decoders use it; the model input does not."""
    from .programs import TOKEN_SLOTS
    parts = []
    for entry in problem.registry.entries:
        letter = chr(ord("a") + entry.index)
        role = {"loop": "v", "loop2": "w", "compr": "c"}[entry.kind]
        parts.append(f"{letter}:{len(entry.params(role))}")
        for slot_role, slot in sorted(TOKEN_SLOTS[entry.kind].items(),
                                      key=lambda kv: kv[1]):
            parts.append(f"{letter}{slot}:{len(entry.params(slot_role))}")
    return " ".join(parts)


def write_problems_file(problems: Sequence[Problem], path) -> int:
    """Inference input: id TAB problem-tokens TAB arity-table; problems
    with more than 20 loop functions cannot be encoded and are skipped."""
    written = 0
    with open(path, "w") as fh:
        for prob in sorted(problems, key=lambda p: p.pid):
            try:
                toks = encode_problem(prob)
            except TokenError:
                continue
            fh.write(f"{prob.pid}\t{' '.join(toks)}\t{_arity_column(prob)}\n")
            written += 1
    return written


# ---------------------------------------------------------------------------
# Candidate assembly
# ---------------------------------------------------------------------------

def parse_prediction_file(path) -> list[tuple[str, int, str]]:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                continue
            pid, rank, toks = parts
            try:
                rows.append((pid, int(rank), toks))
            except ValueError:
                continue
    rows.sort(key=lambda r: (r[0], r[1]))
    return rows


def assemble_candidates(rows: Iterable[tuple[str, int, str]],
                        problems: dict[str, Problem],
                        cfg: RunConfig, rng: random.Random,
                        report: Optional[IterationReport] = None
                        ) -> dict[str, list[Candidate]]:
    """Ranked token streams -> per-problem candidate lists.

    whole mode: one candidate per decoded stream, beam order kept.
    split mode: the decoded predicates form a pool from which
    candidates_per_problem ordered subsets are drawn, with sizes from
    split_sizes.  The optional semantic filter drops predicates that
    fail somewhere on the evaluation grid."""
    decoded: dict[str, list[Candidate]] = {}
    for pid, rank, toks in rows:
        problem = problems.get(pid)
        if problem is None:
            continue
        if report is not None:
            report.prediction_lines += 1
        try:
            cand, _complete = decode_tokens(toks, problem.registry)
        except TokenError:
            if report is not None:
                report.invalid_predictions += 1
            continue
        decoded.setdefault(pid, []).append(cand)

    out: dict[str, list[Candidate]] = {}
    for pid in sorted(decoded):
        problem = problems[pid]
        cands = decoded[pid][: cfg.beam]
        if cfg.semantic_filter:
            cands, dropped = _filter_false(cands, problem)
            if report is not None:
                report.filtered_predicates += dropped
        if cfg.mode == "whole":
            out[pid] = [c for c in cands if c]
            continue
        pool: list = []
        seen = set()
        for cand in cands:
            for pred in cand:
                key = repr(pred)
                if key not in seen:
                    seen.add(key)
                    pool.append(pred)
        if not pool:
            continue
        combos = []
        for _ in range(cfg.candidates_per_problem):
            n = rng.choice(cfg.split_sizes)
            n = min(n, len(pool))
            combos.append(tuple(rng.sample(pool, n)))
        out[pid] = combos
    return out


def _filter_false(cands: list[Candidate], problem: Problem) -> tuple[list, int]:
    dropped = 0
    cache: dict = {}
    kept_cands = []
    for cand in cands:
        kept = tuple(p for p in cand if _true_cached(p, problem, cache))
        dropped += len(cand) - len(kept)
        kept_cands.append(kept)
    return kept_cands, dropped


def _true_cached(p, problem, cache) -> bool:
    key = repr(p)
    if key not in cache:
        try:
            cache[key] = true_on_grid(p, problem)
        except Exception:
            cache[key] = False
    return cache[key]


# ---------------------------------------------------------------------------
# Initial run
# ---------------------------------------------------------------------------

def init_run(problems: Sequence[Problem], cfg: RunConfig, solver: Solver,
             run_dir: Path) -> SolutionDB:
    """Brute-force initialization: generate, evaluate, minimize, select."""
    run_dir = Path(run_dir)
    init_dir = run_dir / "init"
    init_dir.mkdir(parents=True, exist_ok=True)
    by_pid = {p.pid: p for p in problems}

    batches = {}
    for prob in sorted(problems, key=lambda p: p.pid):
        batches[prob.pid] = initial_candidates(prob, cfg.gen)
    pred_file = init_dir / "predictions.txt"
    write_predictions(pred_file, batches, by_pid)

    # feed the batch through the same decode path the predictor uses
    passthrough = RunConfig(mode="whole", beam=cfg.gen.candidate_count,
                            seed=cfg.seed, gen=cfg.gen)
    rows = parse_prediction_file(pred_file)
    cands = assemble_candidates(rows, by_pid, passthrough,
                                random.Random(cfg.seed))
    batch = run_batch(list(problems), cands, solver, iteration=0, mode="init")

    db = SolutionDB(track_fastest=cfg.track_fastest)
    _minimize_and_select(db, batch.solutions, by_pid, solver, cfg)
    db.save(run_dir / "db.jsonl")
    db.save_history(run_dir / "history.jsonl")
    return db


def _minimize_and_select(db: SolutionDB, solutions: list[Solution],
                         problems: dict[str, Problem], solver: Solver,
                         cfg: RunConfig) -> int:
    before = set(db.solved())
    minimized = []
    for sol in solutions:
        out, reproved = minimize(problems[sol.pid], sol, solver,
                                 mode=cfg.minimize_mode)
        if not reproved:
            # solutions must reprove at record time; drop the flaky one
            log.info("solution for %s no longer reproves, dropped", sol.pid)
            continue
        if cfg.track_fastest:
            text = candidate_script(problems[sol.pid], out.predicates)
            path = write_script(text, None, sol.pid)
            wall, instr = solver.measure(str(path), solver.cfg.timeout_ms)
            path.unlink(missing_ok=True)
            out.speed = instr if instr is not None else wall
        minimized.append(out)
    select(db, minimized)
    return len(db.solved()) - len(before)


# ---------------------------------------------------------------------------
# Iteration
# ---------------------------------------------------------------------------

def count_pattern(db: SolutionDB, fragment: str) -> int:
    """Number of current solutions whose text contains the fragment;
    tracked across iterations it gives the growth curve of a discovered
    predicate pattern."""
    return sum(1 for sol in db.shortest.values() if fragment in sol.text())


def _run_command(template: list[str], subst: dict[str, str]) -> None:
    cmd = [part.format(**subst) for part in template]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise IterationError(
            f"predictor command {cmd} failed ({proc.returncode}): "
            f"{proc.stderr[-500:]}")


def iterate(db: SolutionDB, problems: Sequence[Problem], cfg: RunConfig,
            solver: Solver, run_dir: Path, iteration: int,
            predictions_from: Optional[Path] = None
            ) -> tuple[SolutionDB, IterationReport]:
    """One learn-generate-prove-select round.

    With predictions_from set, logged prediction files from a previous
    run are consumed instead of invoking the predictor commands; the
    database update is a pure function of (db, cfg, predictions).
    """
    run_dir = Path(run_dir)
    iter_dir = run_dir / f"iter_{iteration:03d}"
    iter_dir.mkdir(parents=True, exist_ok=True)
    by_pid = {p.pid: p for p in problems}
    report = IterationReport(iteration=iteration)

    t0 = time.monotonic()
    train_file = iter_dir / "train.txt"
    export_training(db, by_pid, cfg, train_file, iteration)
    problems_file = iter_dir / "problems.txt"
    write_problems_file(list(problems), problems_file)
    report.stage_seconds["export"] = round(time.monotonic() - t0, 3)

    t0 = time.monotonic()
    prediction_files: list[Path] = []
    if predictions_from is not None:
        src_dir = Path(predictions_from) / f"iter_{iteration:03d}"
        for src in sorted(src_dir.glob("predictions_*.txt")):
            dst = iter_dir / src.name
            shutil.copyfile(src, dst)
            prediction_files.append(dst)
        if not prediction_files:
            raise IterationError(f"no logged predictions under {src_dir}")
    else:
        if not cfg.predictors:
            raise IterationError("no predictor commands configured")
        for k, spec in enumerate(cfg.predictors):
            model_dir = iter_dir / f"model_{k}"
            model_dir.mkdir(exist_ok=True)
            out_file = iter_dir / f"predictions_{k}.txt"
            subst = {"train": str(train_file), "model": str(model_dir),
                     "problems": str(problems_file), "beam": str(cfg.beam),
                     "out": str(out_file)}
            _run_command(spec.train_cmd, subst)
            _run_command(spec.infer_cmd, subst)
            prediction_files.append(out_file)
    report.stage_seconds["predict"] = round(time.monotonic() - t0, 3)

    t0 = time.monotonic()
    all_solutions: list[Solution] = []
    for k, pred_file in enumerate(prediction_files):
        rows = parse_prediction_file(pred_file)
        rng = random.Random((cfg.seed, iteration, k).__repr__())
        cands = assemble_candidates(rows, by_pid, cfg, rng, report)
        batch = run_batch(list(problems), cands, solver,
                          iteration=iteration, mode=cfg.mode)
        report.checked += batch.checked
        all_solutions.extend(batch.solutions)
    report.stage_seconds["evaluate"] = round(time.monotonic() - t0, 3)

    t0 = time.monotonic()
    report.new_solutions = _minimize_and_select(
        db, all_solutions, by_pid, solver, cfg)
    report.cumulative_solved = len(db.solved())
    report.stage_seconds["select"] = round(time.monotonic() - t0, 3)

    db.save(run_dir / "db.jsonl")
    db.save_history(run_dir / "history.jsonl")
    (iter_dir / "report.json").write_text(
        json.dumps(asdict(report), indent=2, sort_keys=True) + "\n")
    return db, report
