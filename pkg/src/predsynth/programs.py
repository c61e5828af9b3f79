"""Core language of integer-sequence programs.

Programs are built from the constants 0, 1, 2, the variables X and Y,
the binary operators +, -, *, div, mod, the ternary conditional
cond(A, B, C), and the looping constructs loop(F, A, B),
loop2(F, G, A, B, C) and compr(F, A).  Every program denotes a total
(up to resource limits) function Z^2 -> Z.

div and mod use floor-division semantics: the quotient rounds toward
negative infinity and the remainder takes the sign of the divisor.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional

ARITY = {
    "0": 0, "1": 0, "2": 0, "x": 0, "y": 0,
    "+": 2, "-": 2, "*": 2, "div": 2, "mod": 2,
    "cond": 3, "loop": 3, "loop2": 5, "compr": 2,
}

LOOP_OPS = ("loop", "loop2", "compr")


@dataclass(frozen=True)
class Prog:
    """AST node: `op` is one of the keys of ARITY, `args` the children."""

    op: str
    args: tuple["Prog", ...] = ()

    def __post_init__(self):
        if self.op not in ARITY:
            raise ValueError(f"unknown operator {self.op!r}")
        if len(self.args) != ARITY[self.op]:
            raise ValueError(
                f"{self.op} expects {ARITY[self.op]} arguments, got {len(self.args)}"
            )

    def __repr__(self):
        return f"<{print_program(self)}>"


ZERO = Prog("0")
ONE = Prog("1")
TWO = Prog("2")
VARX = Prog("x")
VARY = Prog("y")


def const(n: int) -> Prog:
    """Build a program computing the integer n from 0, 1, 2, +, * and -.

    Only 0, 1 and 2 are primitive; other integers are shorthand for
    composite expressions (5 is 1 + 2 * 2, and so on).
    """
    if n == 0:
        return ZERO
    if n == 1:
        return ONE
    if n == 2:
        return TWO
    if n < 0:
        return Prog("-", (ZERO, const(-n)))
    if n % 2 == 0:
        return Prog("*", (TWO, const(n // 2)))
    return Prog("+", (ONE, const(n - 1)))


def size(prog: Prog) -> int:
    return 1 + sum(size(a) for a in prog.args)


def free_vars(prog: Prog) -> frozenset[str]:
    """Variables a program's value depends on.

    The update arguments of loop constructs bind X and Y internally, so
    only the bound/initial-value arguments contribute: for
    loop(F, A, B) the result is vars(A) | vars(B), and similarly for
    loop2 and compr.
    """
    if prog.op in ("x", "y"):
        return frozenset((prog.op,))
    if prog.op == "loop":
        return free_vars(prog.args[1]) | free_vars(prog.args[2])
    if prog.op == "loop2":
        return free_vars(prog.args[2]) | free_vars(prog.args[3]) | free_vars(prog.args[4])
    if prog.op == "compr":
        return free_vars(prog.args[1])
    out: frozenset[str] = frozenset()
    for a in prog.args:
        out |= free_vars(a)
    return out


def sml_div(a: int, b: int) -> int:
    """Floor division (quotient rounds toward negative infinity)."""
    if b == 0:
        raise ZeroDivisionError("div by zero")
    return a // b


def sml_mod(a: int, b: int) -> int:
    """Remainder with the sign of the divisor, a = b*div(a,b) + mod(a,b)."""
    if b == 0:
        raise ZeroDivisionError("mod by zero")
    return a % b


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<int>-?\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*(?::[A-Za-z0-9_]+)?)"
    r"|(?P<sym>[()+\-*,=]|×|−))"
)

_BINOPS = {"+", "-", "*", "div", "mod"}
_CALL_OPS = {"loop": 3, "loop2": 5, "compr": 2, "cond": 3}


class ParseError(ValueError):
    def __init__(self, message: str, pos: int, text: str):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} at line {line}, column {col}")
        self.pos = pos
        self.line = line
        self.col = col


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.toks: list[tuple[str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m:
                if text[pos:].strip() == "":
                    break
                raise ParseError(f"unexpected character {text[pos:].lstrip()[0]!r}",
                                 pos, text)
            tok = m.group("int") or m.group("ident") or m.group("sym")
            if tok == "×":
                tok = "*"
            elif tok == "−":
                tok = "-"
            self.toks.append((tok, m.start()))
            pos = m.end()
        self.i = 0

    def peek(self, ahead: int = 0) -> Optional[str]:
        j = self.i + ahead
        return self.toks[j][0] if j < len(self.toks) else None

    def pos(self) -> int:
        return self.toks[self.i][1] if self.i < len(self.toks) else len(self.text)

    def next(self) -> str:
        if self.i >= len(self.toks):
            raise ParseError("unexpected end of input", len(self.text), self.text)
        tok = self.toks[self.i][0]
        self.i += 1
        return tok

    def expect(self, tok: str):
        got = self.peek()
        if got != tok:
            raise ParseError(f"expected {tok!r}, found {got!r}", self.pos(), self.text)
        self.next()

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.pos(), self.text)


def _strip_tag(ident: str) -> str:
    return ident.split(":", 1)[0]


def _parse_expr(ts: _Tokens) -> Prog:
    node = _parse_mul(ts)
    while ts.peek() in ("+", "-"):
        op = ts.next()
        node = Prog(op, (node, _parse_mul(ts)))
    return node


def _parse_mul(ts: _Tokens) -> Prog:
    node = _parse_atom(ts)
    while ts.peek() in ("*", "div", "mod"):
        op = ts.next()
        node = Prog(op, (node, _parse_atom(ts)))
    return node


def _parse_atom(ts: _Tokens) -> Prog:
    tok = ts.peek()
    if tok is None:
        raise ts.error("unexpected end of input")
    if re.fullmatch(r"-?\d+", tok):
        ts.next()
        return const(int(tok))
    if tok == "(":
        ts.next()
        node = _parse_group(ts)
        ts.expect(")")
        return node
    head = _strip_tag(tok)
    if head in _CALL_OPS:
        ts.next()
        ts.expect("(")
        args = [_parse_expr(ts)]
        while ts.peek() == ",":
            ts.next()
            args.append(_parse_expr(ts))
        ts.expect(")")
        if len(args) != _CALL_OPS[head]:
            raise ts.error(f"{head} expects {_CALL_OPS[head]} arguments, got {len(args)}")
        return Prog(head, tuple(args))
    if head in ("x", "X"):
        ts.next()
        return VARX
    if head in ("y", "Y"):
        ts.next()
        return VARY
    raise ts.error(f"unexpected token {tok!r}")


def _parse_group(ts: _Tokens) -> Prog:
    """Contents of a parenthesised group.

    A group may hold an infix expression, `(x + y)`, or a prefix
    application, `(+ x y)` / `(loop:v0 (+ x y) x 0)`.  The head token
    decides: a binary operator or loop keyword in head position means
    prefix application.
    """
    tok = ts.peek()
    if tok is not None:
        head = _strip_tag(tok)
        if head in _BINOPS:
            ts.next()
            a = _parse_prefix_arg(ts)
            b = _parse_prefix_arg(ts)
            return Prog(head, (a, b))
        if head in _CALL_OPS:
            # `(loop (+ x y) x 0)` is a prefix application, while
            # `(loop(X + Y, X, 0) * X)` is an infix expression whose first
            # factor is call-style; try prefix first and backtrack.
            save = ts.i
            try:
                ts.next()
                args = []
                while ts.peek() not in (")", None):
                    if ts.peek() == ",":
                        ts.next()
                        continue
                    args.append(_parse_prefix_arg(ts))
                if len(args) != _CALL_OPS[head]:
                    raise ts.error(
                        f"{head} expects {_CALL_OPS[head]} arguments, got {len(args)}")
                return Prog(head, tuple(args))
            except ParseError:
                ts.i = save
    return _parse_expr(ts)


def _parse_prefix_arg(ts: _Tokens) -> Prog:
    # Inside a prefix application each argument is a single atom.
    return _parse_atom(ts)


def parse_program(text: str) -> Prog:
    """Parse one program in either the infix or the prefix surface form."""
    ts = _Tokens(text)
    node = _parse_expr(ts)
    if ts.peek() is not None:
        raise ts.error(f"trailing input {ts.peek()!r}")
    return node


def parse_problem_line(text: str) -> tuple[Prog, Prog]:
    """Parse a `LHS = RHS` problem line into the (small, fast) pair."""
    depth = 0
    for idx, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "=" and depth == 0:
            return parse_program(text[:idx]), parse_program(text[idx + 1:])
    raise ParseError("problem line has no top-level '='", 0, text)


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "div": 2, "mod": 2}


def print_program(prog: Prog, uppercase_vars: bool = True) -> str:
    """Canonical infix form; parse(print(p)) == p."""

    def go(p: Prog, parent_prec: int, right: bool) -> str:
        if p.op in ("0", "1", "2"):
            return p.op
        if p.op in ("x", "y"):
            return p.op.upper() if uppercase_vars else p.op
        if p.op in _PREC:
            prec = _PREC[p.op]
            opstr = p.op if p.op in ("+", "-", "*") else f" {p.op} "
            if p.op in ("+", "-", "*"):
                opstr = f" {p.op} "
            s = go(p.args[0], prec, False) + opstr + go(p.args[1], prec, True)
            if prec < parent_prec or (prec == parent_prec and right):
                return f"({s})"
            return s
        inner = ", ".join(go(a, 0, False) for a in p.args)
        return f"{p.op}({inner})"

    return go(prog, 0, False)


def print_prefix(prog: Prog, registry: Optional["LoopRegistry"] = None) -> str:
    """Prefix s-expression form; loop heads carry their registry name
    as a `loop:v0` style tag when a registry is supplied."""

    def go(p: Prog) -> str:
        if p.op in ("0", "1", "2"):
            return p.op
        if p.op in ("x", "y"):
            return p.op
        head = p.op
        if registry is not None and p.op in LOOP_OPS:
            entry = registry.entry_for(p)
            if entry is not None:
                head = f"{p.op}:{entry.loop_name()}"
        return "(" + " ".join([head] + [go(a) for a in p.args]) + ")"

    return go(prog)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

@dataclass
class EvalLimits:
    """Resource bounds for a single evaluate() call."""

    max_abs: int = 10 ** 4000
    max_steps: int = 10 ** 7
    max_compr: int = 10 ** 5

    def __post_init__(self):
        if self.max_abs <= 0 or self.max_steps <= 0 or self.max_compr <= 0:
            raise ValueError("limits must be strictly positive")


DEFAULT_LIMITS = EvalLimits()


@dataclass(frozen=True)
class Abort:
    """Evaluation gave up: div-zero, overflow-limit, step-limit or compr-limit."""

    reason: str

    def __bool__(self):
        return False


class _AbortSignal(Exception):
    def __init__(self, reason: str):
        self.reason = reason


# trace events: (node, role, args, value) for every loop-related
# function application; role in {v,w,s,c,f,g,h,i,j,u,t}
TraceFn = Callable[[Prog, str, tuple[int, ...], int], None]


class _Eval:
    def __init__(self, limits: EvalLimits, trace: Optional[TraceFn]):
        self.limits = limits
        self.trace = trace
        self.steps = 0
        self.compr_steps = 0
        self.memo: dict[tuple[int, int, int], int] = {}

    def tick(self, n: int = 1):
        self.steps += n
        if self.steps > self.limits.max_steps:
            raise _AbortSignal("step-limit")

    def check(self, v: int) -> int:
        if v > self.limits.max_abs or v < -self.limits.max_abs:
            raise _AbortSignal("overflow-limit")
        return v

    def emit(self, node: Prog, role: str, args: tuple[int, ...], value: int):
        if self.trace is not None:
            self.trace(node, role, args, value)

    def run(self, p: Prog, x: int, y: int) -> int:
        self.tick()
        op = p.op
        if op == "0":
            return 0
        if op == "1":
            return 1
        if op == "2":
            return 2
        if op == "x":
            return x
        if op == "y":
            return y
        if op == "cond":
            a = self.run(p.args[0], x, y)
            return self.run(p.args[1], x, y) if a <= 0 else self.run(p.args[2], x, y)
        if op in ("+", "-", "*", "div", "mod"):
            a = self.run(p.args[0], x, y)
            b = self.run(p.args[1], x, y)
            if op == "+":
                return self.check(a + b)
            if op == "-":
                return self.check(a - b)
            if op == "*":
                return self.check(a * b)
            if b == 0:
                raise _AbortSignal("div-zero")
            return self.check(a // b if op == "div" else a % b)
        if op == "loop":
            a = self.run(p.args[1], x, y)
            b = self.run(p.args[2], x, y)
            self.emit(p, "g", (x, y), a)
            self.emit(p, "h", (x, y), b)
            v = self.loop_u(p, a, b)
            self.emit(p, "v", (x, y), v)
            return v
        if op == "loop2":
            a = self.run(p.args[2], x, y)
            b = self.run(p.args[3], x, y)
            c = self.run(p.args[4], x, y)
            self.emit(p, "h", (x, y), a)
            self.emit(p, "i", (x, y), b)
            self.emit(p, "j", (x, y), c)
            u, t = self.loop2_ut(p, a, b, c)
            self.emit(p, "w", (x, y), u)
            self.emit(p, "s", (x, y), t)
            return u
        if op == "compr":
            a = self.run(p.args[1], x, y)
            self.emit(p, "g", (x, y), a)
            v = self.compr_u(p, a)
            self.emit(p, "c", (x, y), v)
            return v
        raise AssertionError(op)

    def loop_u(self, p: Prog, a: int, b: int) -> int:
        key = (id(p), a, b)
        if key in self.memo:
            return self.memo[key]
        if a > self.limits.max_steps - self.steps:
            # each iteration costs at least one step; give up immediately
            raise _AbortSignal("step-limit")
        f = p.args[0]
        acc = b
        if a <= 0:
            self.emit(p, "u", (a, b), acc)
        else:
            self.emit(p, "u", (0, b), acc)
            for i in range(1, a + 1):
                self.tick()
                prev = acc
                acc = self.run(f, prev, i)
                self.emit(p, "f", (prev, i), acc)
                self.emit(p, "u", (i, b), acc)
        self.memo[key] = acc
        return acc

    def loop2_ut(self, p: Prog, a: int, b: int, c: int) -> tuple[int, int]:
        key = (id(p), a, b, c)
        if key in self.memo:
            return self.memo[key]  # type: ignore[return-value]
        if a > self.limits.max_steps - self.steps:
            raise _AbortSignal("step-limit")
        f, g = p.args[0], p.args[1]
        u, t = b, c
        if a <= 0:
            self.emit(p, "u", (a, b, c), u)
            self.emit(p, "t", (a, b, c), t)
        else:
            self.emit(p, "u", (0, b, c), u)
            self.emit(p, "t", (0, b, c), t)
            for i in range(1, a + 1):
                self.tick()
                pu, pt = u, t
                u = self.run(f, pu, pt)
                self.emit(p, "f", (pu, pt), u)
                t = self.run(g, pu, pt)
                self.emit(p, "g", (pu, pt), t)
                self.emit(p, "u", (i, b, c), u)
                self.emit(p, "t", (i, b, c), t)
        self.memo[key] = (u, t)
        return u, t

    def compr_t(self, p: Prog, start: int) -> int:
        f = p.args[0]
        k = start
        while True:
            self.tick()
            self.compr_steps += 1
            if self.compr_steps > self.limits.max_compr:
                raise _AbortSignal("compr-limit")
            val = self.run(f, k, 0)
            self.emit(p, "f", (k, 0), val)
            if val <= 0:
                # every suffix of the search is itself a t-application
                for kk in range(start, k + 1):
                    self.emit(p, "t", (kk,), k)
                return k
            k += 1

    def compr_u(self, p: Prog, a: int) -> int:
        key = (id(p), a, 0)
        if key in self.memo:
            return self.memo[key]
        if a <= 0:
            out = self.compr_t(p, 0)
        else:
            prev = self.compr_u(p, a - 1)
            self.tick()
            out = self.compr_t(p, prev + 1)
        self.emit(p, "u", (a,), out)
        self.memo[key] = out
        return out


def evaluate(prog: Prog, x: int, y: int = 0,
             limits: EvalLimits = DEFAULT_LIMITS,
             trace: Optional[TraceFn] = None) -> int | Abort:
    """Value of the program at (x, y), or Abort when a limit is hit."""
    ev = _Eval(limits, trace)
    try:
        return ev.run(prog, x, y)
    except _AbortSignal as sig:
        return Abort(sig.reason)
    except RecursionError:
        return Abort("step-limit")


# ---------------------------------------------------------------------------
# Loop registry
# ---------------------------------------------------------------------------

# function roles owned by each loop kind, in definition order
KIND_ROLES = {
    "loop": ("f", "g", "h", "u", "v"),
    "loop2": ("f", "g", "h", "i", "j", "u", "t", "w", "s"),
    "compr": ("f", "g", "t", "u", "c"),
}

# roles that denote loop functions (usable during initial generation)
LOOP_FN_ROLES = {"loop": ("v",), "loop2": ("w", "s"), "compr": ("c",)}

# token slot numbers for argument/helper functions, per kind
TOKEN_SLOTS = {
    "loop": {"f": 0, "g": 1, "h": 2, "u": 3},
    "loop2": {"f": 0, "g": 1, "h": 2, "i": 3, "j": 4, "u": 5, "t": 6, "s": 7},
    "compr": {"f": 0, "g": 1, "t": 2, "u": 3},
}


@dataclass
class LoopEntry:
    index: int
    kind: str
    node: Prog

    def name(self, role: str) -> str:
        return f"{role}{self.index}"

    def loop_name(self) -> str:
        return self.name({"loop": "v", "loop2": "w", "compr": "c"}[self.kind])

    def params(self, role: str) -> tuple[str, ...]:
        """Parameters of the named function after dropping dummy arguments."""
        node = self.node
        if self.kind == "loop":
            parts = {"f": node.args[0], "g": node.args[1], "h": node.args[2]}
            if role in parts:
                return _pvars(free_vars(parts[role]))
            if role == "u":
                return ("x", "y")
            if role == "v":
                return _pvars(free_vars(node))
        elif self.kind == "loop2":
            parts = {"f": node.args[0], "g": node.args[1], "h": node.args[2],
                     "i": node.args[3], "j": node.args[4]}
            if role in parts:
                return _pvars(free_vars(parts[role]))
            if role in ("u", "t"):
                return ("x", "y", "z")
            if role in ("w", "s"):
                return _pvars(free_vars(node))
        elif self.kind == "compr":
            parts = {"f": node.args[0], "g": node.args[1]}
            if role in parts:
                return _pvars(free_vars(parts[role]))
            if role in ("t", "u"):
                return ("x",)
            if role == "c":
                return _pvars(free_vars(node))
        raise ValueError(f"kind {self.kind} has no function role {role!r}")

    def roles(self) -> tuple[str, ...]:
        return KIND_ROLES[self.kind]


def _pvars(fv: frozenset[str]) -> tuple[str, ...]:
    return tuple(v for v in ("x", "y") if v in fv)


class LoopRegistry:
    """Serial numbering of the loop subprograms of a problem.

    Indices run from 0 in pre-order (outside-in, left-to-right) over the
    small program followed by the fast program; syntactically equal loop
    subprograms share one index.
    """

    def __init__(self):
        self.entries: list[LoopEntry] = []
        self._by_node: dict[Prog, LoopEntry] = {}
        self._by_name: dict[str, tuple[LoopEntry, str]] = {}

    def entry_for(self, node: Prog) -> Optional[LoopEntry]:
        return self._by_node.get(node)

    def lookup(self, name: str) -> Optional[tuple[LoopEntry, str]]:
        """Resolve a function name like 'u0' to (entry, role).

        For loop2 entries the second helper also answers to the name
        v<k>: published solution listings print it that way.
        """
        hit = self._by_name.get(name)
        if hit is not None:
            return hit
        m = re.fullmatch(r"([a-z])(\d+)", name)
        if m and m.group(1) == "v":
            alias = self._by_name.get(f"t{m.group(2)}")
            if alias is not None and alias[0].kind == "loop2":
                return alias
        return None

    def function_names(self) -> list[str]:
        return list(self._by_name)

    def _add(self, node: Prog):
        if node in self._by_node:
            return
        entry = LoopEntry(len(self.entries), node.op, node)
        self.entries.append(entry)
        self._by_node[node] = entry
        for role in entry.roles():
            self._by_name[entry.name(role)] = (entry, role)

    def _scan(self, node: Prog):
        if node.op in LOOP_OPS:
            if node in self._by_node:
                return
            self._add(node)
        for a in node.args:
            self._scan(a)


def index_loops(small: Prog, fast: Prog) -> LoopRegistry:
    reg = LoopRegistry()
    reg._scan(small)
    reg._scan(fast)
    return reg


def apply_loop_fn(entry: LoopEntry, role: str, args: tuple[int, ...],
                  limits: EvalLimits = DEFAULT_LIMITS) -> int | Abort:
    """Evaluate one registry function (loop, argument or helper) on
    integer arguments; used by fingerprinting and the semantic filter."""
    ev = _Eval(limits, None)
    node = entry.node
    params = entry.params(role)
    if len(args) != len(params):
        raise ValueError(f"{entry.name(role)} expects {len(params)} args")

    def genv(part: Prog) -> tuple[int, int]:
        env = dict(zip(params, args))
        return env.get("x", 0), env.get("y", 0)

    try:
        if role in ("v", "w", "s", "c"):
            env = dict(zip(params, args))
            x, y = env.get("x", 0), env.get("y", 0)
            if role == "s":
                a = ev.run(node.args[2], x, y)
                b = ev.run(node.args[3], x, y)
                c = ev.run(node.args[4], x, y)
                return ev.loop2_ut(node, a, b, c)[1]
            return ev.run(node, x, y)
        if role == "u" and entry.kind == "loop":
            return ev.loop_u(node, args[0], args[1])
        if role in ("u", "t") and entry.kind == "loop2":
            pair = ev.loop2_ut(node, args[0], args[1], args[2])
            return pair[0] if role == "u" else pair[1]
        if role == "u" and entry.kind == "compr":
            return ev.compr_u(node, args[0])
        if role == "t" and entry.kind == "compr":
            return ev.compr_t(node, args[0])
        # argument functions: evaluate the subprogram with X,Y bound
        part_of = {"loop": {"f": 0, "g": 1, "h": 2},
                   "loop2": {"f": 0, "g": 1, "h": 2, "i": 3, "j": 4},
                   "compr": {"f": 0, "g": 1}}[entry.kind]
        part = node.args[part_of[role]]
        env = dict(zip(params, args))
        return ev.run(part, env.get("x", 0), env.get("y", 0))
    except _AbortSignal as sig:
        return Abort(sig.reason)
    except RecursionError:
        return Abort("step-limit")


# ---------------------------------------------------------------------------
# Problems
# ---------------------------------------------------------------------------

@dataclass
class Problem:
    """A small/fast program pair with its loop registry."""

    pid: str
    small: Prog
    fast: Prog
    registry: LoopRegistry = field(init=False)

    def __post_init__(self):
        self.registry = index_loops(self.small, self.fast)


def load_programs(path) -> list[Prog]:
    """Read a file with one program per line (no '=' problem pairs)."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                out.append(parse_program(line))
            except ParseError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}", 0, line) from exc
    return out


def load_problems(path) -> list[Problem]:
    """Read a problems file: one `ID: SMALL = FAST` line per problem.

    Blank lines and lines starting with '#' are skipped.  The id prefix
    is optional; unnamed problems get P<lineno>.
    """
    problems = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            pid = f"P{lineno}"
            m = re.match(r"([A-Za-z0-9_.-]+)\s*:\s*(.*)$", line)
            if m and not m.group(1) in ("loop", "loop2", "compr", "cond"):
                pid, line = m.group(1), m.group(2)
            try:
                small, fast = parse_problem_line(line)
            except ParseError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}", 0, line) from exc
            problems.append(Problem(pid, small, fast))
    return problems
