"""Prover harness: run an external SMT solver over candidate batches
under tight budgets, minimize solutions, and keep the per-problem
solution database.

The canonical solver protocol is one subprocess per query: write a
.smt2 file, run the configured command, read sat/unsat/unknown from
stdout, kill on hard timeout.  Because some backends (the bundled
WebAssembly z3 in particular) pay a large process-startup cost, a
persistent server mode is also supported: long-lived worker processes
answer `SOLVE <timeout_ms> <rlimit> <path>` requests line by line.
"""

from __future__ import annotations

import hashlib
import json
import os
import shlex
import shutil
import statistics
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .predicates import Candidate, Solution, parse_candidate
from .programs import Problem
from .smt import SmtProblem, emit_induction_instance, emit_problem

VERDICTS = ("unsat", "sat", "unknown", "timeout", "error")


@dataclass
class SolverConfig:
    """How to invoke the solver.

    `command` is the per-call template; `{input}`, `{timeout_ms}` and
    `{rlimit}` are substituted.  `server_command` (optional) starts a
    persistent worker speaking the line protocol above.
    """

    command: list[str]
    server_command: Optional[list[str]] = None
    timeout_ms: int = 200
    rlimit: int = 0
    workers: int = 2
    grace_s: float = 60.0
    speed_mode: str = "wall"  # wall | perf
    speed_runs: int = 3
    short_circuit: bool = False

    def __post_init__(self):
        if self.timeout_ms <= 0:
            raise ValueError("timeout must be positive")
        if not any("{input}" in part for part in self.command):
            raise ValueError("solver command template needs an {input} placeholder")


@dataclass
class EvalResult:
    verdict: str
    elapsed_ms: float = 0.0
    instructions: Optional[int] = None
    diagnostics: str = ""

    @property
    def proved(self) -> bool:
        return self.verdict == "unsat"


class SolverNotFound(RuntimeError):
    pass


def bundled_wrapper_path() -> str:
    return str(resources.files("predsynth").joinpath("data/z3cli.js"))


def default_solver_config(**overrides) -> SolverConfig:
    """Locate a usable solver: $PREDSYNTH_SOLVER_CMD, a native z3 on
    PATH, or the bundled WebAssembly wrapper (needs node plus an
    `npm install` in the repo's solver/ directory)."""
    env_cmd = os.environ.get("PREDSYNTH_SOLVER_CMD")
    if env_cmd:
        cfg = SolverConfig(command=shlex.split(env_cmd))
        env_srv = os.environ.get("PREDSYNTH_SOLVER_SERVER_CMD")
        if env_srv:
            cfg.server_command = shlex.split(env_srv)
        return replace(cfg, **overrides)
    if shutil.which("z3"):
        return SolverConfig(
            command=["z3", "-smt2", "-t:{timeout_ms}", "{input}"], **overrides)
    if shutil.which("node"):
        js = bundled_wrapper_path()
        return SolverConfig(
            command=["node", js, "-t:{timeout_ms}", "-rlimit:{rlimit}", "{input}"],
            server_command=["node", js, "--server"],
            **overrides)
    raise SolverNotFound(
        "no SMT solver available: set PREDSYNTH_SOLVER_CMD, put z3 on PATH, "
        "or install node and run `npm install` under solver/")


def _parse_verdict(stdout: str) -> str:
    for line in stdout.splitlines():
        tok = line.strip()
        if tok in ("sat", "unsat", "unknown"):
            return tok
    return "error"


class _ServerProc:
    def __init__(self, command: list[str]):
        self.proc = subprocess.Popen(
            command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL, text=True, bufsize=1)
        line = self._readline(120.0)
        if line.strip() != "READY":
            self.kill()
            raise SolverNotFound(f"solver server failed to start: {line!r}")

    def _readline(self, deadline_s: float) -> str:
        timer = threading.Timer(deadline_s, self.kill)
        timer.start()
        try:
            return self.proc.stdout.readline()
        finally:
            timer.cancel()

    def alive(self) -> bool:
        return self.proc.poll() is None

    def kill(self):
        try:
            self.proc.kill()
        except OSError:
            pass

    def solve(self, path: str, timeout_ms: int, rlimit: int,
              grace_s: float) -> EvalResult:
        try:
            self.proc.stdin.write(f"SOLVE {timeout_ms} {rlimit} {path}\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError):
            return EvalResult("error", diagnostics="server pipe closed")
        line = self._readline(timeout_ms / 1000.0 + grace_s)
        if not line:
            if self.alive():
                self.kill()
                return EvalResult("timeout", elapsed_ms=timeout_ms + grace_s * 1000)
            return EvalResult("error", diagnostics="server exited")
        parts = line.split()
        if len(parts) == 3 and parts[0] == "DONE" and parts[1] in VERDICTS:
            return EvalResult(parts[1], elapsed_ms=float(parts[2]))
        return EvalResult("error", diagnostics=f"bad server reply {line!r}")


class Solver:
    """Thread-safe front end over per-call or server invocation."""

    def __init__(self, cfg: SolverConfig):
        self.cfg = cfg
        self._lock = threading.Lock()
        self._idle: list[_ServerProc] = []
        self._perf_checked = False
        self._perf_ok = False

    def close(self):
        with self._lock:
            for proc in self._idle:
                proc.kill()
            self._idle.clear()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def solve_file(self, path: str, timeout_ms: Optional[int] = None) -> EvalResult:
        timeout_ms = timeout_ms or self.cfg.timeout_ms
        if self.cfg.server_command:
            return self._solve_server(path, timeout_ms)
        return self._solve_percall(path, timeout_ms)

    def _solve_percall(self, path: str, timeout_ms: int) -> EvalResult:
        cmd = [part.replace("{input}", path)
                   .replace("{timeout_ms}", str(timeout_ms))
                   .replace("{rlimit}", str(self.cfg.rlimit))
               for part in self.cfg.command]
        t0 = time.monotonic()
        try:
            out = subprocess.run(
                cmd, capture_output=True, text=True,
                timeout=timeout_ms / 1000.0 + self.cfg.grace_s)
        except subprocess.TimeoutExpired:
            return EvalResult("timeout", elapsed_ms=(time.monotonic() - t0) * 1000)
        except OSError as exc:
            return EvalResult("error", diagnostics=str(exc))
        elapsed = (time.monotonic() - t0) * 1000
        verdict = _parse_verdict(out.stdout)
        if verdict == "error":
            diag = (out.stdout + out.stderr)[-500:]
            return EvalResult("error", elapsed_ms=elapsed, diagnostics=diag)
        return EvalResult(verdict, elapsed_ms=elapsed)

    def _solve_server(self, path: str, timeout_ms: int) -> EvalResult:
        # a worker that hit its recycle limit looks like a closed pipe;
        # retry once on a fresh process before reporting an error
        for attempt in (0, 1):
            proc = self._acquire()
            try:
                res = proc.solve(path, timeout_ms, self.cfg.rlimit,
                                 self.cfg.grace_s)
            except Exception as exc:
                proc.kill()
                return EvalResult("error", diagnostics=repr(exc))
            if proc.alive():
                self._release(proc)
            if res.verdict != "error" or "server" not in res.diagnostics:
                return res
        return res

    def _acquire(self) -> _ServerProc:
        with self._lock:
            while self._idle:
                proc = self._idle.pop()
                if proc.alive():
                    return proc
        return _ServerProc(self.cfg.server_command)

    def _release(self, proc: _ServerProc):
        with self._lock:
            self._idle.append(proc)

    # -- speed measurement ------------------------------------------------

    def measure(self, path: str, timeout_ms: int) -> tuple[Optional[float], Optional[int]]:
        """(median wall ms, instruction count) for a script that proves.

        Hardware instruction counting runs the per-call command under
        `perf stat` and needs both perf and a native solver binary."""
        if self.cfg.speed_mode == "perf" and self._perf_available():
            count = self._perf_instructions(path, timeout_ms)
            if count is not None:
                return None, count
        times = []
        for _ in range(self.cfg.speed_runs):
            res = self.solve_file(path, timeout_ms)
            if not res.proved:
                return None, None
            times.append(res.elapsed_ms)
        return statistics.median(times), None

    def _perf_available(self) -> bool:
        if not self._perf_checked:
            self._perf_checked = True
            self._perf_ok = (shutil.which("perf") is not None
                             and not self.cfg.server_command)
        return self._perf_ok

    def _perf_instructions(self, path: str, timeout_ms: int) -> Optional[int]:
        cmd = ["perf", "stat", "-x,", "-e", "instructions:u"] + [
            part.replace("{input}", path)
                .replace("{timeout_ms}", str(timeout_ms))
                .replace("{rlimit}", str(self.cfg.rlimit))
            for part in self.cfg.command]
        try:
            out = subprocess.run(cmd, capture_output=True, text=True,
                                 timeout=timeout_ms / 1000.0 + self.cfg.grace_s)
        except (subprocess.TimeoutExpired, OSError):
            return None
        for line in out.stderr.splitlines():
            parts = line.split(",")
            if len(parts) > 2 and "instructions" in line:
                try:
                    return int(parts[0])
                except ValueError:
                    return None
        return None


# ---------------------------------------------------------------------------
# Candidate checking
# ---------------------------------------------------------------------------

def write_script(text: str, workdir: Optional[Path], stem: str) -> Path:
    digest = hashlib.sha256(text.encode()).hexdigest()[:16]
    if workdir is None:
        fd, name = tempfile.mkstemp(prefix=f"{stem}-{digest}-", suffix=".smt2")
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        return Path(name)
    workdir.mkdir(parents=True, exist_ok=True)
    path = workdir / f"{stem}-{digest}.smt2"
    path.write_text(text)
    return path


def candidate_script(problem: Problem, cand: Candidate,
                     emitted: Optional[SmtProblem] = None) -> str:
    sp = emitted or emit_problem(problem)
    instances = [emit_induction_instance(p, problem) for p in cand]
    return sp.script(instances=instances)


def check_candidate(problem: Problem, cand: Candidate, solver: Solver,
                    emitted: Optional[SmtProblem] = None,
                    workdir: Optional[Path] = None,
                    timeout_ms: Optional[int] = None) -> EvalResult:
    """Append one induction instance per predicate and run the solver."""
    try:
        text = candidate_script(problem, cand, emitted)
    except Exception as exc:
        return EvalResult("error", diagnostics=f"emission failed: {exc}")
    path = write_script(text, workdir, problem.pid)
    try:
        return solver.solve_file(str(path), timeout_ms)
    finally:
        if workdir is None:
            path.unlink(missing_ok=True)


# ---------------------------------------------------------------------------
# Minimization
# ---------------------------------------------------------------------------

def minimize(problem: Problem, sol: Solution, solver: Solver,
             mode: str = "shortest",
             emitted: Optional[SmtProblem] = None,
             timeout_ms: Optional[int] = None) -> tuple[Solution, bool]:
    """Greedy left-to-right predicate removal, iterated to fixpoint.

    shortest mode drops a predicate whenever the proof still goes
    through; fastest mode drops it only when the proof gets strictly
    faster.  Returns (solution, reproved); when the input no longer
    reproves (timing noise) it is returned unchanged with False.
    """
    emitted = emitted or emit_problem(problem)
    preds = list(sol.predicates)

    def attempt(cand) -> EvalResult:
        return check_candidate(problem, tuple(cand), solver, emitted,
                               timeout_ms=timeout_ms)

    base = attempt(preds)
    if not base.proved:
        return sol, False
    best_time = base.elapsed_ms
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(preds):
            trial = preds[:i] + preds[i + 1:]
            if not trial:  # candidates stay nonempty
                i += 1
                continue
            res = attempt(trial)
            if res.proved and (mode != "fastest" or res.elapsed_ms < best_time):
                preds = trial
                best_time = res.elapsed_ms
                changed = True
            else:
                i += 1
    out = Solution(sol.pid, tuple(preds), iteration=sol.iteration,
                   mode=sol.mode, speed=sol.speed)
    return out, True


# ---------------------------------------------------------------------------
# Solution database
# ---------------------------------------------------------------------------

def _record_hash(rec: dict) -> str:
    blob = json.dumps({k: v for k, v in rec.items() if k != "hash"},
                      sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


class SolutionDB:
    """Per-problem shortest (and optionally fastest) solutions plus an
    append-only history of every recorded solution."""

    def __init__(self, track_fastest: bool = False):
        self.shortest: dict[str, Solution] = {}
        self.fastest: dict[str, Solution] = {}
        self.track_fastest = track_fastest
        self.history: list[dict] = []

    def solved(self) -> set[str]:
        return set(self.shortest)

    def record(self, sol: Solution) -> bool:
        """Monotone update; equal sizes tie-break on the solution text."""
        self.history.append(self._rec(sol, "history"))
        improved = False
        cur = self.shortest.get(sol.pid)
        if (cur is None or sol.size < cur.size
                or (sol.size == cur.size and sol.text() < cur.text())):
            self.shortest[sol.pid] = sol
            improved = True
        if self.track_fastest and sol.speed is not None:
            fcur = self.fastest.get(sol.pid)
            if (fcur is None or fcur.speed is None or sol.speed < fcur.speed
                    or (sol.speed == fcur.speed and sol.text() < fcur.text())):
                self.fastest[sol.pid] = sol
                improved = True
        return improved

    def _rec(self, sol: Solution, kind: str) -> dict:
        rec = {
            "kind": kind,
            "problem": sol.pid,
            "predicates": sol.text(),
            "size": sol.size,
            "iteration": sol.iteration,
            "mode": sol.mode,
        }
        if kind == "fastest" and sol.speed is not None:
            rec["speed"] = sol.speed
        rec["hash"] = _record_hash(rec)
        return rec

    def save(self, path) -> None:
        lines = [json.dumps({"kind": "header", "version": 1,
                             "track_fastest": self.track_fastest})]
        for pid in sorted(self.shortest):
            lines.append(json.dumps(self._rec(self.shortest[pid], "shortest"),
                                    sort_keys=True))
        for pid in sorted(self.fastest):
            lines.append(json.dumps(self._rec(self.fastest[pid], "fastest"),
                                    sort_keys=True))
        Path(path).write_text("\n".join(lines) + "\n")

    def save_history(self, path) -> None:
        with open(path, "w") as fh:
            for rec in self.history:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "SolutionDB":
        db = cls()
        with open(path) as fh:
            for line in fh:
                rec = json.loads(line)
                if rec.get("kind") == "header":
                    db.track_fastest = rec.get("track_fastest", False)
                    continue
                sol = Solution(rec["problem"], parse_candidate(rec["predicates"]),
                               iteration=rec["iteration"], mode=rec["mode"],
                               speed=rec.get("speed"))
                if rec["kind"] == "shortest":
                    db.shortest[sol.pid] = sol
                elif rec["kind"] == "fastest":
                    db.fastest[sol.pid] = sol
        return db


def select(db: SolutionDB, new_solutions: Iterable[Solution]) -> SolutionDB:
    for sol in sorted(new_solutions, key=lambda s: (s.pid, s.size, s.text())):
        db.record(sol)
    return db


# ---------------------------------------------------------------------------
# Batch evaluation
# ---------------------------------------------------------------------------

@dataclass
class BatchResult:
    checked: int = 0
    verdict_counts: dict = field(default_factory=dict)
    solutions: list[Solution] = field(default_factory=list)
    errors: list[tuple[str, int, str]] = field(default_factory=list)
    elapsed_hist: list[float] = field(default_factory=list)

    @property
    def solved(self) -> set[str]:
        return {s.pid for s in self.solutions}

    def summary(self) -> dict:
        return {
            "checked": self.checked,
            "verdicts": dict(sorted(self.verdict_counts.items())),
            "solved": len(self.solved),
            "errors": len(self.errors),
        }


def run_batch(problems: Sequence[Problem],
              candidates: dict[str, Sequence[Candidate]],
              solver: Solver,
              iteration: int = 0, mode: str = "init",
              workdir: Optional[Path] = None,
              timeout_ms: Optional[int] = None) -> BatchResult:
    """Check every (problem, candidate) pair over the worker pool.

    Candidates of one problem are checked in order by a single worker,
    so results do not depend on scheduling; a solver failure on one
    pair is recorded and never aborts the batch."""
    from concurrent.futures import ThreadPoolExecutor

    result = BatchResult()
    lock = threading.Lock()
    cfg = solver.cfg

    def handle(problem: Problem):
        cands = candidates.get(problem.pid, ())
        if not cands:
            return
        emitted = emit_problem(problem)
        for ci, cand in enumerate(cands):
            res = check_candidate(problem, cand, solver, emitted,
                                  workdir=workdir, timeout_ms=timeout_ms)
            with lock:
                result.checked += 1
                result.verdict_counts[res.verdict] = (
                    result.verdict_counts.get(res.verdict, 0) + 1)
                result.elapsed_hist.append(res.elapsed_ms)
                if res.verdict == "error":
                    result.errors.append((problem.pid, ci, res.diagnostics))
                if res.proved:
                    result.solutions.append(
                        Solution(problem.pid, cand, iteration=iteration, mode=mode))
            if res.proved and cfg.short_circuit:
                break

    ordered = sorted(problems, key=lambda p: p.pid)
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        list(pool.map(handle, ordered))
    result.solutions.sort(key=lambda s: (s.pid, s.size, s.text()))
    return result
