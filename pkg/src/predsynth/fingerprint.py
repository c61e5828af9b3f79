"""Semantic fingerprints over the evaluation grid.

A term's fingerprint is its vector of values over the 150 grid points
I = {(x, y) | 0 <= x < 10, -5 <= y < 10} in lexicographic order.  For
equivalence pruning, applications of loop functions are opaque: each
syntactically distinct application contributes a deterministic
pseudo-random vector keyed by (seed, printed subterm, point) instead
of its real value, so properties *about* those functions are not
collapsed into their closed forms.

Truth testing of literals and predicates uses real values: loop
functions are evaluated by the interpreter, and any aborted entry
makes the enclosing literal count as not true at that point.
"""

from __future__ import annotations

import hashlib
from typing import Callable, Optional

from .predicates import PNode, to_text
from .programs import Abort, EvalLimits, Problem, apply_loop_fn

GRID: tuple[tuple[int, int], ...] = tuple(
    (x, y) for x in range(10) for y in range(-5, 10))

ABORT = "_|_"  # distinguished fingerprint entry for aborted evaluation

# generous enough for the grid, small enough to cut runaway loops
GRID_LIMITS = EvalLimits(max_abs=10 ** 400, max_steps=200_000, max_compr=2_000)

Vector = tuple


def opaque_value(seed: int, text: str, idx: int) -> int:
    h = hashlib.sha256(f"{seed}|{text}|{idx}".encode()).digest()
    return int.from_bytes(h[:8], "big") % 2 ** 32 - 2 ** 31


def _vector_eval(term: PNode, problem: Problem,
                 apps: Callable[[PNode, list], list]) -> list:
    """One pass over the tree computing all 150 entries per node."""
    op = term.op
    if op in ("0", "1", "2"):
        v = int(op)
        return [v] * len(GRID)
    if op == "x":
        return [p[0] for p in GRID]
    if op == "y":
        return [p[1] for p in GRID]
    if op == "z":
        return [0] * len(GRID)
    if op == "app":
        argvecs = [_vector_eval(a, problem, apps) for a in term.args]
        return apps(term, argvecs)
    if op == "ite":
        c, a, b = (_vector_eval(q, problem, apps) for q in term.args)
        return [ABORT if cv == ABORT else (av if cv <= 0 else bv)
                for cv, av, bv in zip(c, a, b)]
    a, b = (_vector_eval(q, problem, apps) for q in term.args)
    out = []
    for av, bv in zip(a, b):
        if av == ABORT or bv == ABORT:
            out.append(ABORT)
        elif op == "+":
            out.append(av + bv)
        elif op == "-":
            out.append(av - bv)
        elif op == "*":
            out.append(av * bv)
        elif bv == 0:
            out.append(ABORT)
        elif op == "div":
            out.append(av // bv)
        else:
            out.append(av % bv)
    return out


def fingerprint(term: PNode, problem: Problem, seed: int = 0) -> Vector:
    """Opaque fingerprint used for equivalence pruning."""

    def apps(node: PNode, argvecs: list) -> list:
        key = to_text(node)
        return [opaque_value(seed, key, i) for i in range(len(GRID))]

    return tuple(_vector_eval(term, problem, apps))


def real_values(term: PNode, problem: Problem,
                limits: EvalLimits = GRID_LIMITS) -> Vector:
    """Real evaluation vector; loop functions run in the interpreter."""
    reg = problem.registry

    def apps(node: PNode, argvecs: list) -> list:
        hit = reg.lookup(node.name)
        if hit is None:
            return [ABORT] * len(GRID)
        entry, role = hit
        out = []
        for i in range(len(GRID)):
            args = tuple(vec[i] for vec in argvecs)
            if any(a == ABORT for a in args):
                out.append(ABORT)
                continue
            val = apply_loop_fn(entry, role, args, limits)
            out.append(ABORT if isinstance(val, Abort) else val)
        return out

    return tuple(_vector_eval(term, problem, apps))


TRUE, FALSE = True, False


def literal_truth(lit: PNode, problem: Problem,
                  cache: Optional[dict] = None,
                  limits: EvalLimits = GRID_LIMITS) -> Vector:
    """Three-valued truth vector of a literal: True, False or ABORT."""
    negated = lit.op == "not"
    core = lit.args[0] if negated else lit
    lhs, rhs = core.args

    def values(t: PNode) -> Vector:
        if cache is not None:
            if t not in cache:
                cache[t] = real_values(t, problem, limits)
            return cache[t]
        return real_values(t, problem, limits)

    a, b = values(lhs), values(rhs)
    out = []
    for av, bv in zip(a, b):
        if av == ABORT or bv == ABORT:
            out.append(ABORT)
            continue
        hold = (av == bv) if core.op == "=" else (av <= bv)
        out.append(hold != negated)
    return tuple(out)


def formula_truth(p: PNode, problem: Problem,
                  cache: Optional[dict] = None,
                  limits: EvalLimits = GRID_LIMITS) -> Vector:
    """Three-valued truth vector of a formula; an aborted literal makes
    the whole point ABORT (never vacuously true)."""
    if p.op == "and" or p.op == "=>":
        a = formula_truth(p.args[0], problem, cache, limits)
        b = formula_truth(p.args[1], problem, cache, limits)
        out = []
        for av, bv in zip(a, b):
            if av == ABORT or bv == ABORT:
                out.append(ABORT)
            elif p.op == "and":
                out.append(av and bv)
            else:
                out.append((not av) or bv)
        return tuple(out)
    return literal_truth(p, problem, cache, limits)


def true_on_grid(p: PNode, problem: Problem,
                 cache: Optional[dict] = None,
                 limits: EvalLimits = GRID_LIMITS) -> bool:
    return all(v is True for v in formula_truth(p, problem, cache, limits))
