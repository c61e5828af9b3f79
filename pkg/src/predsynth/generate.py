"""Brute-force initialization: enumerate semantically distinct terms,
sample literals and predicates true on the grid, and assemble the
initial candidate batches.

Term enumeration is bottom-up by size with fingerprint deduplication
(the smaller representative of an equivalence class is kept) and is
restricted to the most informative function symbols: the loop
functions and the second-component s functions.  Literals are biased
toward truth: half of each polarity class must hold on every grid
point, the other half on at least one.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import Optional

from .fingerprint import ABORT, GRID_LIMITS, fingerprint, literal_truth
from .predicates import (
    Candidate, P0, P1, P2, PNode, PX, PY, app, depends_on_x, encode_candidate,
    to_text,
)
from .programs import LOOP_FN_ROLES, EvalLimits, Problem

log = logging.getLogger(__name__)


@dataclass
class GenConfig:
    term_cap: int = 1024
    literals_per_class: int = 250      # x4 classes = 1000 literals
    predicate_count: int = 4000
    candidate_count: int = 1000
    candidate_len: int = 4
    seed: int = 0
    max_draws: int = 10 ** 6
    max_term_size: int = 25
    limits: EvalLimits = field(default_factory=lambda: GRID_LIMITS)


@dataclass
class TermPool:
    terms: list[PNode]
    by_size: dict[int, list[PNode]]
    fingerprints: dict[tuple, PNode]


@dataclass
class LiteralPool:
    """1000 literals: equations/inequations and their negations, half
    true everywhere on the grid, half true somewhere."""

    literals: list[PNode]
    class_counts: dict[tuple[str, str], int]
    complete: bool


def _loop_function_symbols(problem: Problem) -> list[tuple[str, int]]:
    out = []
    for entry in problem.registry.entries:
        for role in LOOP_FN_ROLES[entry.kind]:
            out.append((entry.name(role), len(entry.params(role))))
    return out


def _compositions(parts: int, total: int):
    if parts == 1:
        yield (total,)
        return
    for head in range(1, total - parts + 2):
        for rest in _compositions(parts - 1, total - head):
            yield (head,) + rest


def enumerate_terms(problem: Problem, cap: int = 1024, seed: int = 0,
                    max_size: int = 25) -> TermPool:
    """Terms of increasing size, deduplicated by opaque fingerprint."""
    fns = _loop_function_symbols(problem)
    pool = TermPool([], {}, {})

    def consider(term: PNode, size: int) -> bool:
        fp = fingerprint(term, problem, seed)
        if fp in pool.fingerprints:
            return False
        pool.fingerprints[fp] = term
        pool.terms.append(term)
        pool.by_size.setdefault(size, []).append(term)
        return len(pool.terms) >= cap

    atoms: list[PNode] = [P0, P1, P2, PX, PY]
    atoms += [app(name) for name, arity in fns if arity == 0]
    for t in atoms:
        if consider(t, 1):
            return pool

    for n in range(2, max_size + 1):
        for op in ("+", "-", "*", "div", "mod"):
            for sa, sb in _compositions(2, n - 1):
                for a in pool.by_size.get(sa, ()):
                    for b in pool.by_size.get(sb, ()):
                        if consider(PNode(op, (a, b)), n):
                            return pool
        for sa, sb, sc in _compositions(3, n - 1) if n >= 4 else ():
            for a in pool.by_size.get(sa, ()):
                for b in pool.by_size.get(sb, ()):
                    for c in pool.by_size.get(sc, ()):
                        if consider(PNode("ite", (a, b, c)), n):
                            return pool
        for name, arity in fns:
            if arity == 0 or arity >= n:
                continue
            for sizes in _compositions(arity, n - 1):
                for argtuple in _argtuples(pool, sizes):
                    if consider(app(name, *argtuple), n):
                        return pool
    return pool


def _argtuples(pool: TermPool, sizes: tuple[int, ...]):
    if len(sizes) == 1:
        for a in pool.by_size.get(sizes[0], ()):
            yield (a,)
        return
    for a in pool.by_size.get(sizes[0], ()):
        for rest in _argtuples(pool, sizes[1:]):
            yield (a,) + rest


def _pair_stream(pool: TermPool, rng: random.Random):
    """Term pairs by increasing combined size, shuffled within each
    layer.  Literal generation follows the same smallest-first
    discipline as term generation: under pair-uniform sampling the
    informative small literals (loop-function bridges like
    v0(x) = w1(x)) almost never come up."""
    sizes = sorted(pool.by_size)
    max_total = 2 * sizes[-1]
    for total in range(2, max_total + 1):
        layer = []
        for sa in sizes:
            sb = total - sa
            if sb in pool.by_size:
                layer.extend((a, b) for a in pool.by_size[sa]
                             for b in pool.by_size[sb])
        rng.shuffle(layer)
        yield from layer


def sample_literals(pool: TermPool, problem: Problem, cfg: GenConfig,
                    cache: Optional[dict] = None) -> LiteralPool:
    """Four class quotas: (polarity, truth-profile) with truth decided
    by real evaluation; literals not mentioning x are discarded.

    Each class holds equations and inequations in equal measure: true
    equations between fingerprint-distinct terms are scarce and carry
    most of the information, so letting inequation trivia fill a shared
    quota would crowd them out."""
    rng = random.Random(cfg.seed)
    cache = {} if cache is None else cache
    quota = cfg.literals_per_class
    subquota = {"=": quota - quota // 2, "<=": quota // 2}
    classes = {(pol, prof, op): []
               for pol in ("pos", "neg") for prof in ("true", "some")
               for op in ("=", "<=")}
    seen: set[str] = set()
    draws = 0
    for t1, t2 in _pair_stream(pool, rng):
        if draws >= cfg.max_draws or not any(
                len(v) < subquota[op] for (_, _, op), v in classes.items()):
            break
        for op in ("=", "<="):
            for polarity in ("pos", "neg"):
                draws += 1
                lit = PNode(op, (t1, t2))
                if polarity == "neg":
                    lit = PNode("not", (lit,))
                if not depends_on_x(lit):
                    continue
                key = to_text(lit)
                if key in seen:
                    continue
                truth = literal_truth(lit, problem, cache, cfg.limits)
                all_true = all(v is True for v in truth)
                some_true = any(v is True for v in truth)
                if all_true and len(classes[(polarity, "true", op)]) < subquota[op]:
                    seen.add(key)
                    classes[(polarity, "true", op)].append(lit)
                elif some_true and len(classes[(polarity, "some", op)]) < subquota[op]:
                    seen.add(key)
                    classes[(polarity, "some", op)].append(lit)
    counts = {}
    for pol in ("pos", "neg"):
        for prof in ("true", "some"):
            counts[(pol, prof)] = (len(classes[(pol, prof, "=")])
                                   + len(classes[(pol, prof, "<=")]))
    complete = all(n == quota for n in counts.values())
    if not complete:
        log.warning("literal quotas unreachable for %s after %d draws: %s",
                    problem.pid, draws, counts)
    literals = []
    for pol in ("pos", "neg"):
        for prof in ("true", "some"):
            literals.extend(classes[(pol, prof, "=")])
            literals.extend(classes[(pol, prof, "<=")])
    return LiteralPool(literals, counts, complete)


def build_predicates(lits: LiteralPool, problem: Problem, cfg: GenConfig,
                     cache: Optional[dict] = None) -> list[PNode]:
    """Conjunctions and implications of literal pairs, each verified
    true on every grid point."""
    rng = random.Random(cfg.seed + 1)
    cache = {} if cache is None else cache
    truth = {to_text(l): literal_truth(l, problem, cache, cfg.limits)
             for l in lits.literals}
    out: list[PNode] = []
    seen: set[str] = set()
    draws = 0
    while len(out) < cfg.predicate_count and draws < cfg.max_draws:
        draws += 1
        l1, l2 = rng.choice(lits.literals), rng.choice(lits.literals)
        op = rng.choice(("and", "=>"))
        pred = PNode(op, (l1, l2))
        key = to_text(pred)
        if key in seen:
            continue
        t1, t2 = truth[to_text(l1)], truth[to_text(l2)]
        ok = True
        for a, b in zip(t1, t2):
            if a == ABORT or b == ABORT:
                ok = False
            elif op == "and":
                ok = a and b
            else:
                ok = (not a) or b
            if not ok:
                break
        if not ok:
            continue
        seen.add(key)
        out.append(pred)
    if len(out) < cfg.predicate_count:
        log.warning("predicate quota unreachable for %s: %d/%d",
                    problem.pid, len(out), cfg.predicate_count)
    return out


def sample_candidates(preds: list[PNode], cfg: GenConfig) -> list[Candidate]:
    """Ordered subsets without within-candidate repetition."""
    if len(preds) < cfg.candidate_len:
        return []
    rng = random.Random(cfg.seed + 2)
    return [tuple(rng.sample(preds, cfg.candidate_len))
            for _ in range(cfg.candidate_count)]


def initial_candidates(problem: Problem, cfg: GenConfig) -> list[Candidate]:
    pool = enumerate_terms(problem, cfg.term_cap, cfg.seed, cfg.max_term_size)
    cache: dict = {}
    lits = sample_literals(pool, problem, cfg, cache)
    if not lits.literals:
        return []
    preds = build_predicates(lits, problem, cfg, cache)
    return sample_candidates(preds, cfg)


def write_predictions(path, batches: dict[str, list[Candidate]],
                      problems: dict[str, Problem]) -> None:
    """Candidate batches in the prediction-file format
    (problem id TAB rank TAB token stream), so downstream evaluation is
    agnostic to whether candidates came from enumeration or a model."""
    with open(path, "w") as fh:
        for pid in sorted(batches):
            reg = problems[pid].registry
            for rank, cand in enumerate(batches[pid], start=1):
                toks = encode_candidate(cand, reg)
                fh.write(f"{pid}\t{rank}\t{' '.join(toks)}\n")
