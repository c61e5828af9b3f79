"""Manual induction heuristics and the prover-comparison harness.

The n-previous-terms family instantiates the induction axiom with
``0 <= x  =>  small(x)=fast(x) /\\ ... /\\ small(x+n-1)=fast(x+n-1)``;
n=0 adds no instance at all.  Strong induction instantiates it with a
quantified predicate and therefore bypasses the quantifier-free
predicate grammar through its own emission path.
"""

from __future__ import annotations

import csv
import io
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .predicates import PNode, app, pconst
from .programs import Problem
from .smt import InductionInstance, emit_induction_instance, emit_problem
from .solving import Solver, SolverConfig, write_script


def manual_predicate(n: int) -> PNode:
    """Equality of the two programs over the n next points, guarded."""
    if not 1 <= n <= 9:
        raise ValueError("n must be within 1..9")
    conj = None
    for k in range(n):
        at = PNode("x") if k == 0 else PNode("+", (PNode("x"), pconst(k)))
        eq = PNode("=", (app("small", at), app("fast", at)))
        conj = eq if conj is None else PNode("and", (conj, eq))
    return PNode("=>", (PNode("<=", (PNode("0"), PNode("x"))), conj))


def strong_induction_instance(problem: Optional[Problem]) -> InductionInstance:
    """Induction instantiated with
    (0 <= x => forall z. 0 <= z <= x => small(z) = fast(z));
    emitted directly because the predicate language is quantifier-free."""

    def P(t):
        return ["=>", ["<=", "0", t],
                ["forall", [["z", "Int"]],
                 ["=>", ["and", ["<=", "0", "z"], ["<=", "z", t]],
                  ["=", ["small", "z"], ["fast", "z"]]]]]

    base = ["forall", [["y", "Int"]], P("0")]
    step = ["forall", [["x", "Int"], ["y", "Int"]],
            ["=>", P("x"), P(["+", "x", "1"])]]
    concl = ["forall", [["x", "Int"], ["y", "Int"]],
             ["=>", ["<=", "0", "x"], P("x")]]
    return InductionInstance(None, ["=>", ["and", base, step], concl])


def heuristic_instances(problem: Optional[Problem],
                        spec: str) -> list[InductionInstance]:
    """spec is 'n=0'..'n=9' or 'strong'; problem may be None for raw
    benchmark scripts (small/fast are declared there already)."""
    if spec == "strong":
        return [strong_induction_instance(problem)]
    if spec.startswith("n="):
        n = int(spec[2:])
        if n == 0:
            return []
        return [emit_induction_instance(manual_predicate(n), problem)]
    raise ValueError(f"unknown heuristic {spec!r}")


# ---------------------------------------------------------------------------
# Benchmark ingestion
# ---------------------------------------------------------------------------

@dataclass
class BenchmarkItem:
    """A problem either in our program-pair form or as a raw solver
    script from the public benchmark; both accept appended instances."""

    pid: str
    problem: Optional[Problem] = None
    raw_script: Optional[str] = None

    def script_with(self, instances: Sequence[InductionInstance]) -> str:
        if self.problem is not None:
            return emit_problem(self.problem).script(instances=instances)
        text = self.raw_script
        inject = "\n".join(inst.text() for inst in instances)
        if "(check-sat)" in text:
            return text.replace("(check-sat)", inject + "\n(check-sat)", 1)
        return text + "\n" + inject + "\n(check-sat)\n"


def load_benchmark(source) -> list[BenchmarkItem]:
    """A directory of .smt2 files, a problems file, or Problem objects."""
    if isinstance(source, (list, tuple)):
        return [BenchmarkItem(p.pid, problem=p) for p in source]
    path = Path(source)
    if path.is_dir():
        items = [BenchmarkItem(f.stem, raw_script=f.read_text())
                 for f in sorted(path.glob("*.smt2"))]
        return items
    from .programs import load_problems
    return [BenchmarkItem(p.pid, problem=p) for p in load_problems(path)]


# ---------------------------------------------------------------------------
# Comparison harness
# ---------------------------------------------------------------------------

# command templates for other provers; columns are skipped when the
# binary is absent
PROVER_TEMPLATES = {
    "z3": ["z3", "-smt2", "-t:{timeout_ms}", "{input}"],
    "cvc5": ["cvc5", "--lang=smt2", "--tlimit={timeout_ms}", "--conjecture-gen",
             "{input}"],
    "vampire": ["vampire", "--input_syntax", "smtlib2", "-t",
                "{timeout_ms}ms", "{input}"],
}


@dataclass
class ComparisonResult:
    solved: dict[tuple[str, str], int] = field(default_factory=dict)
    verdicts: dict[tuple[str, str], dict[str, str]] = field(default_factory=dict)
    skipped: list[str] = field(default_factory=list)

    def to_csv(self) -> str:
        heuristics = sorted({h for (_, h) in self.solved})
        provers = sorted({p for (p, _) in self.solved})
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["prover"] + heuristics)
        for prover in provers:
            writer.writerow([prover] + [self.solved.get((prover, h), 0)
                                        for h in heuristics])
        return buf.getvalue()

    def render(self) -> str:
        heuristics = sorted({h for (_, h) in self.solved})
        provers = sorted({p for (p, _) in self.solved})
        width = max([len(h) for h in heuristics] + [8])
        lines = ["prover".ljust(10) + "".join(h.rjust(width) for h in heuristics)]
        for prover in provers:
            row = prover.ljust(10)
            row += "".join(str(self.solved.get((prover, h), 0)).rjust(width)
                           for h in heuristics)
            lines.append(row)
        if self.skipped:
            lines.append(f"skipped: {', '.join(self.skipped)}")
        return "\n".join(lines)


def run_comparison(items: Sequence[BenchmarkItem],
                   heuristics: Sequence[str],
                   solvers: dict[str, SolverConfig],
                   timeout_ms: int = 10_000,
                   workdir: Optional[Path] = None) -> ComparisonResult:
    """Solved counts per (prover, heuristic) cell.

    Every problem/heuristic script is prepared once; each configured
    prover runs the whole grid under its own worker pool."""
    from concurrent.futures import ThreadPoolExecutor
    import shutil

    result = ComparisonResult()
    for prover_name, cfg in solvers.items():
        if shutil.which(cfg.command[0]) is None:
            result.skipped.append(prover_name)
            continue
        with Solver(cfg) as solver:
            lock = threading.Lock()

            def one(task):
                item, heuristic = task
                try:
                    instances = heuristic_instances(item.problem, heuristic)
                    text = item.script_with(instances)
                    path = write_script(text, workdir,
                                        f"{item.pid}-{heuristic.replace('=', '')}")
                    res = solver.solve_file(str(path), timeout_ms)
                    if workdir is None:
                        path.unlink(missing_ok=True)
                except Exception as exc:  # pragma: no cover - defensive
                    res_verdict = f"error:{exc}"
                    with lock:
                        result.verdicts.setdefault((prover_name, heuristic),
                                                   {})[item.pid] = res_verdict
                    return
                with lock:
                    cell = (prover_name, heuristic)
                    result.verdicts.setdefault(cell, {})[item.pid] = res.verdict
                    if res.proved:
                        result.solved[cell] = result.solved.get(cell, 0) + 1

            tasks = [(item, h) for h in heuristics for item in items]
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                list(pool.map(one, tasks))
            for h in heuristics:
                result.solved.setdefault((prover_name, h), 0)
    return result
