"""Induction-predicate language: grammar, textual syntax, token codec.

A predicate is a quantifier-free formula over two (occasionally three)
integer variables, built from literals (=, <=, and their negations)
combined with /\\ and ==>.  Terms mix arithmetic with applications of
the functions declared by a problem's loop registry.

The textual syntax is the prefix form used in solution listings:
``(/\\ (<= 0 x) (= (+ (* x x) x) (* 2 (v0 x))))`` with division and
modulo written ``divf``/``modf``.  The token form is the closed
alphabet used for translator training: uppercase letters for fixed
operators, lowercase letters for loop functions by index, and a
letter + digit pair for argument/helper functions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from .programs import TOKEN_SLOTS, LoopEntry, LoopRegistry, Problem, Prog

_TERM_OPS = {"+", "-", "*", "div", "mod"}
_LEAVES = {"0", "1", "2", "x", "y", "z"}
_LITERAL_OPS = {"=", "<="}
_FORMULA_OPS = {"and", "=>"}


class PredicateError(ValueError):
    pass


@dataclass(frozen=True)
class PNode:
    """Predicate AST node.

    op is a leaf label, a term/literal/formula operator, or "app" with
    `name` the applied function.  For "ite" nodes args are
    (cond, then, else) with the condition meaning cond <= 0.
    """

    op: str
    args: tuple["PNode", ...] = ()
    name: Optional[str] = None

    def __repr__(self):
        return f"<{to_text(self)}>"


P0 = PNode("0")
P1 = PNode("1")
P2 = PNode("2")
PX = PNode("x")
PY = PNode("y")
PZ = PNode("z")

Candidate = tuple[PNode, ...]


def app(name: str, *args: PNode) -> PNode:
    return PNode("app", tuple(args), name)


def pconst(n: int) -> PNode:
    if n == 0:
        return P0
    if n == 1:
        return P1
    if n == 2:
        return P2
    if n < 0:
        return PNode("-", (P0, pconst(-n)))
    if n % 2 == 0:
        return PNode("*", (P2, pconst(n // 2)))
    return PNode("+", (P1, pconst(n - 1)))


def predicate_size(p: PNode) -> int:
    """AST node count; candidate size is the sum over its members."""
    return 1 + sum(predicate_size(a) for a in p.args)


def candidate_size(cand: Iterable[PNode]) -> int:
    return sum(predicate_size(p) for p in cand)


def is_formula(p: PNode) -> bool:
    if p.op in _FORMULA_OPS:
        return all(is_formula(a) for a in p.args)
    return is_literal(p)


def is_literal(p: PNode) -> bool:
    if p.op == "not":
        return len(p.args) == 1 and p.args[0].op in _LITERAL_OPS
    return p.op in _LITERAL_OPS


def iter_nodes(p: PNode) -> Iterator[PNode]:
    yield p
    for a in p.args:
        yield from iter_nodes(a)


def free_pvars(p: PNode) -> set[str]:
    return {n.op for n in iter_nodes(p) if n.op in ("x", "y", "z")}


def depends_on_x(p: PNode) -> bool:
    return any(n.op == "x" for n in iter_nodes(p))


# ---------------------------------------------------------------------------
# Textual syntax
# ---------------------------------------------------------------------------

_HEADS = {
    "/\\": "and", "==>": "=>", "~": "not", "=": "=", "<=": "<=",
    "+": "+", "-": "-", "*": "*", "divf": "div", "modf": "mod",
    "div": "div", "mod": "mod", "ite": "ite",
}
_HEAD_FOR = {"and": "/\\", "=>": "==>", "not": "~", "=": "=", "<=": "<=",
             "+": "+", "-": "-", "*": "*", "div": "divf", "mod": "modf"}

_TEXT_TOKEN = re.compile(r"\s*([()]|[^\s()]+)")


def _text_tokens(text: str) -> list[str]:
    out, pos = [], 0
    while pos < len(text):
        m = _TEXT_TOKEN.match(text, pos)
        if not m:
            break
        out.append(m.group(1))
        pos = m.end()
    return out


def _read_sexpr(toks: list[str], i: int):
    if i >= len(toks):
        raise PredicateError("unexpected end of predicate text")
    if toks[i] == "(":
        items = []
        i += 1
        while i < len(toks) and toks[i] != ")":
            item, i = _read_sexpr(toks, i)
            items.append(item)
        if i >= len(toks):
            raise PredicateError("missing ')' in predicate text")
        return items, i + 1
    if toks[i] == ")":
        raise PredicateError("unexpected ')' in predicate text")
    return toks[i], i + 1


def _from_sexpr(sx) -> PNode:
    if isinstance(sx, str):
        if sx in ("x", "y", "z"):
            return PNode(sx)
        if re.fullmatch(r"-?\d+", sx):
            n = int(sx)
            if n in (0, 1, 2):
                return PNode(str(n))
            raise PredicateError(f"integer literal {n} outside 0..2")
        return app(sx)
    if not sx:
        raise PredicateError("empty application")
    head = sx[0]
    if not isinstance(head, str):
        raise PredicateError("application head must be a symbol")
    args = [_from_sexpr(a) for a in sx[1:]]
    if head in _HEADS:
        op = _HEADS[head]
        if op == "ite":
            if len(sx) != 4 or not isinstance(sx[1], list) or sx[1][0] != "<=" \
                    or len(sx[1]) != 3 or sx[1][2] != "0":
                raise PredicateError("ite condition must have the form (<= t 0)")
            cond = _from_sexpr(sx[1][1])
            return PNode("ite", (cond, args[1], args[2]))
        want = 1 if op == "not" else 2
        if len(args) != want:
            raise PredicateError(f"{head} expects {want} arguments")
        return PNode(op, tuple(args))
    return app(head, *args)


def parse_predicate(text: str) -> PNode:
    toks = _text_tokens(text)
    sx, i = _read_sexpr(toks, 0)
    if i != len(toks):
        raise PredicateError(f"trailing text after predicate: {' '.join(toks[i:])!r}")
    node = _from_sexpr(sx)
    if not is_formula(node):
        raise PredicateError(f"not a formula: {text!r}")
    return node


def parse_candidate(text: str) -> Candidate:
    """Parse a `pred | pred | ...` solution line."""
    return tuple(parse_predicate(part) for part in text.split(" | "))


def to_text(p: PNode) -> str:
    if p.op in _LEAVES:
        return p.op
    if p.op == "app":
        if not p.args:
            return p.name
        return "(" + " ".join([p.name] + [to_text(a) for a in p.args]) + ")"
    if p.op == "ite":
        c, a, b = p.args
        return f"(ite (<= {to_text(c)} 0) {to_text(a)} {to_text(b)})"
    head = _HEAD_FOR[p.op]
    return "(" + " ".join([head] + [to_text(a) for a in p.args]) + ")"


def candidate_text(cand: Iterable[PNode]) -> str:
    return " | ".join(to_text(p) for p in cand)


def resolve(p: PNode, registry: LoopRegistry) -> PNode:
    """Canonicalise function names against a registry and check arities.

    Published listings write the second loop2 helper as v<k>; it is
    renamed to its registry name t<k> here.
    """
    if p.op == "app":
        hit = registry.lookup(p.name)
        if hit is None:
            raise PredicateError(f"unknown function symbol {p.name!r}")
        entry, role = hit
        want = len(entry.params(role))
        if len(p.args) != want:
            raise PredicateError(
                f"{p.name} applied to {len(p.args)} arguments, expects {want}")
        return PNode("app", tuple(resolve(a, registry) for a in p.args),
                     entry.name(role))
    return PNode(p.op, tuple(resolve(a, registry) for a in p.args), p.name)


# ---------------------------------------------------------------------------
# Solutions
# ---------------------------------------------------------------------------

@dataclass
class Solution:
    """A candidate that proved its problem, with discovery metadata."""

    pid: str
    predicates: Candidate
    iteration: int = 0
    mode: str = "init"
    speed: Optional[float] = None
    size: int = field(init=False)

    def __post_init__(self):
        self.predicates = tuple(self.predicates)
        self.size = candidate_size(self.predicates)

    def text(self) -> str:
        return candidate_text(self.predicates)


# ---------------------------------------------------------------------------
# Token codec
# ---------------------------------------------------------------------------

OP_TOKENS = {
    "0": "A", "1": "B", "2": "C", "+": "D", "-": "E", "*": "F",
    "div": "G", "mod": "H", "cond": "I", "loop": "J", "x": "K", "y": "L",
    "loop2": "M", "compr": "N", "=": "O", "<=": "P", "not": "Q",
    "and": "R", "=>": "S", "ite": "T", "z": "Z",
}
TOK_OPS = {v: k for k, v in OP_TOKENS.items()}
MAX_LOOP_LETTERS = 20  # letters a..t


class TokenError(ValueError):
    pass


def _loop_letter(index: int) -> str:
    if index >= MAX_LOOP_LETTERS:
        raise TokenError(f"loop index {index} beyond letter range a..t")
    return chr(ord("a") + index)


def encode_program(prog: Prog, registry: LoopRegistry) -> list[str]:
    out: list[str] = []

    def go(p: Prog):
        if p.op in ("loop", "loop2", "compr"):
            entry = registry.entry_for(p)
            if entry is None:
                raise TokenError("loop subprogram missing from registry")
            out.append(OP_TOKENS[p.op])
            out.append(_loop_letter(entry.index))
        else:
            out.append(OP_TOKENS[p.op])
        for a in p.args:
            go(a)

    go(prog)
    return out


def encode_problem(problem: Problem) -> list[str]:
    return (encode_program(problem.small, problem.registry) + ["="]
            + encode_program(problem.fast, problem.registry))


def encode_predicate(p: PNode, registry: LoopRegistry) -> list[str]:
    out: list[str] = []

    def go(n: PNode):
        if n.op == "app":
            hit = registry.lookup(n.name)
            if hit is None:
                raise TokenError(f"cannot encode unknown function {n.name!r}")
            entry, role = hit
            out.append(_loop_letter(entry.index))
            if role not in ("v", "w", "c"):
                out.append(str(TOKEN_SLOTS[entry.kind][role]))
        else:
            out.append(OP_TOKENS[n.op])
        for a in n.args:
            go(a)

    go(p)
    return out


def encode_candidate(cand: Iterable[PNode], registry: LoopRegistry) -> list[str]:
    out: list[str] = []
    for p in cand:
        out.extend(encode_predicate(p, registry))
    return out


def encode_example(problem: Problem, cand: Iterable[PNode]) -> str:
    """One training line: problem tokens, '>', solution tokens."""
    toks = encode_problem(problem) + [">"] + encode_candidate(cand, problem.registry)
    return " ".join(toks)


class _TokenReader:
    def __init__(self, tokens: list[str], registry: LoopRegistry):
        self.toks = tokens
        self.reg = registry
        self.i = 0

    def done(self) -> bool:
        return self.i >= len(self.toks)

    def next(self) -> str:
        if self.done():
            raise TokenError("unexpected end of token stream")
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def peek(self) -> Optional[str]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def formula(self) -> PNode:
        tok = self.next()
        op = TOK_OPS.get(tok)
        if op in ("and", "=>"):
            return PNode(op, (self.formula(), self.formula()))
        if op == "not":
            lit = self.formula()
            if lit.op not in _LITERAL_OPS:
                raise TokenError("negation of a non-literal")
            return PNode("not", (lit,))
        if op in ("=", "<="):
            return PNode(op, (self.term(), self.term()))
        raise TokenError(f"expected a formula, found token {tok!r}")

    def term(self) -> PNode:
        tok = self.next()
        if re.fullmatch(r"[a-t]", tok):
            return self.apply(tok)
        op = TOK_OPS.get(tok)
        if op is None:
            raise TokenError(f"unknown token {tok!r}")
        if op in _LEAVES:
            return PNode(op)
        if op in _TERM_OPS:
            return PNode(op, (self.term(), self.term()))
        if op == "ite":
            return PNode("ite", (self.term(), self.term(), self.term()))
        raise TokenError(f"expected a term, found token {tok!r}")

    def apply(self, letter: str) -> PNode:
        index = ord(letter) - ord("a")
        if index >= len(self.reg.entries):
            raise TokenError(f"loop letter {letter!r} not present in problem")
        entry = self.reg.entries[index]
        nxt = self.peek()
        if nxt is not None and re.fullmatch(r"\d", nxt):
            slot = int(self.next())
            slots = TOKEN_SLOTS[entry.kind]
            role = next((r for r, s in slots.items() if s == slot), None)
            if role is None:
                raise TokenError(f"slot {slot} undefined for {entry.kind}")
        else:
            role = {"loop": "v", "loop2": "w", "compr": "c"}[entry.kind]
        arity = len(entry.params(role))
        args = tuple(self.term() for _ in range(arity))
        return PNode("app", args, entry.name(role))


def decode_tokens(stream: str | list[str], registry: LoopRegistry,
                  lenient: bool = True) -> tuple[Candidate, bool]:
    """Token stream -> candidate.  Returns (predicates, consumed_all).

    In lenient mode trailing garbage after at least one complete
    predicate is ignored; an unparseable stream always raises.
    """
    tokens = stream.split() if isinstance(stream, str) else list(stream)
    reader = _TokenReader(tokens, registry)
    preds: list[PNode] = []
    while not reader.done():
        mark = reader.i
        try:
            preds.append(reader.formula())
        except TokenError:
            if lenient and preds:
                reader.i = mark
                return tuple(preds), False
            raise
    return tuple(preds), True


# ---------------------------------------------------------------------------
# Augmentation
# ---------------------------------------------------------------------------

def shift_indices(example: str, offset: int) -> Optional[str]:
    """Shift every loop-function letter by `offset` on both sides of a
    training line.  Returns None when a shifted letter would leave a..t."""
    out = []
    for tok in example.split():
        if re.fullmatch(r"[a-t]", tok):
            idx = ord(tok) - ord("a") + offset
            if not 0 <= idx < MAX_LOOP_LETTERS:
                return None
            out.append(chr(ord("a") + idx))
        else:
            out.append(tok)
    return " ".join(out)


def program_term(prog: Prog, actuals: dict[str, PNode],
                 registry: LoopRegistry) -> PNode:
    """Convert an argument subprogram into a predicate term, substituting
    actual terms for its free variables; loop subprograms become
    applications of their registry functions."""
    if prog.op in ("0", "1", "2"):
        return PNode(prog.op)
    if prog.op in ("x", "y"):
        return actuals[prog.op]
    if prog.op in ("loop", "loop2", "compr"):
        entry = registry.entry_for(prog)
        if entry is None:
            raise PredicateError("unregistered loop subprogram")
        role = {"loop": "v", "loop2": "w", "compr": "c"}[entry.kind]
        return app(entry.name(role),
                   *[actuals[p] for p in entry.params(role)])
    if prog.op == "cond":
        a, b, c = (program_term(q, actuals, registry) for q in prog.args)
        return PNode("ite", (a, b, c))
    return PNode(prog.op,
                 tuple(program_term(q, actuals, registry) for q in prog.args))


def _apply_role(entry: LoopEntry, role: str, env: dict[str, PNode]) -> PNode:
    return app(entry.name(role), *[env[p] for p in entry.params(role)])


def _count_spots(p: PNode, registry: LoopRegistry) -> int:
    return sum(1 for n in iter_nodes(p)
               if n.op == "app" and registry.lookup(n.name) is not None)


def expand_at(p: PNode, registry: LoopRegistry, target: int) -> PNode:
    """Replace the target-th function occurrence (preorder) by its
    definitional body (loop functions unfold to helper compositions,
    helpers unroll one recursion step, argument functions inline)."""
    state = {"seen": 0}

    def rewrite(n: PNode) -> PNode:
        if n.op == "app" and registry.lookup(n.name) is not None:
            here = state["seen"]
            state["seen"] += 1
            if here == target:
                return _expand_app(n, registry)
        return PNode(n.op, tuple(rewrite(a) for a in n.args), n.name)

    return rewrite(p)


def _expand_app(n: PNode, registry: LoopRegistry) -> PNode:
    entry, role = registry.lookup(n.name)
    params = entry.params(role)
    env = dict(zip(params, n.args))
    node = entry.node
    one = P1
    if role == "v":
        return app(entry.name("u"),
                   _apply_role(entry, "g", env), _apply_role(entry, "h", env))
    if role == "w":
        return app(entry.name("u"), _apply_role(entry, "h", env),
                   _apply_role(entry, "i", env), _apply_role(entry, "j", env))
    if role == "s":
        return app(entry.name("t"), _apply_role(entry, "h", env),
                   _apply_role(entry, "i", env), _apply_role(entry, "j", env))
    if role == "c":
        return app(entry.name("u"), _apply_role(entry, "g", env))
    if entry.kind == "loop" and role == "u":
        a, b = n.args
        prev = app(entry.name("u"), PNode("-", (a, one)), b)
        fenv = {"x": prev, "y": a}
        return PNode("ite", (a, b, _apply_role_env(entry, "f", fenv)))
    if entry.kind == "loop2" and role in ("u", "t"):
        a, b, c = n.args
        pu = app(entry.name("u"), PNode("-", (a, one)), b, c)
        pt = app(entry.name("t"), PNode("-", (a, one)), b, c)
        fenv = {"x": pu, "y": pt}
        if role == "u":
            return PNode("ite", (a, b, _apply_role_env(entry, "f", fenv)))
        return PNode("ite", (a, c, _apply_role_env(entry, "g", fenv)))
    if entry.kind == "compr" and role == "u":
        (a,) = n.args
        prev = app(entry.name("u"), PNode("-", (a, one)))
        return PNode("ite", (a, app(entry.name("t"), P0),
                             app(entry.name("t"), PNode("+", (prev, one)))))
    if entry.kind == "compr" and role == "t":
        (a,) = n.args
        cond = _apply_role_env(entry, "f", {"x": a, "y": P0})
        return PNode("ite", (cond, a, app(entry.name("t"), PNode("+", (a, one)))))
    # argument functions inline to their subprogram body
    part_of = {"loop": {"f": 0, "g": 1, "h": 2},
               "loop2": {"f": 0, "g": 1, "h": 2, "i": 3, "j": 4},
               "compr": {"f": 0, "g": 1}}[entry.kind]
    part = node.args[part_of[role]]
    full_env = {"x": env.get("x", P0), "y": env.get("y", P0)}
    return program_term(part, full_env, registry)


def _apply_role_env(entry: LoopEntry, role: str, env: dict[str, PNode]) -> PNode:
    return app(entry.name(role), *[env[p] for p in entry.params(role)])


def expand_definitions(cand: Candidate, problem: Problem, times: int,
                       rng) -> Candidate:
    """Apply `times` (1 or 2) random definition expansions across the
    candidate; a candidate with no expandable occurrence is returned
    unchanged."""
    if times not in (1, 2):
        raise ValueError("times must be 1 or 2")
    reg = problem.registry
    preds = list(cand)
    for _ in range(times):
        counts = [_count_spots(p, reg) for p in preds]
        total = sum(counts)
        if total == 0:
            return tuple(preds)
        # uniform over occurrences across the whole candidate
        pick = rng.randrange(total)
        for pi, c in enumerate(counts):
            if pick < c:
                preds[pi] = expand_at(preds[pi], reg, pick)
                break
            pick -= c
    return tuple(preds)
