"""SMT-LIB emission: problem scripts, trivial-induction axioms and
induction-axiom instances.

A problem becomes a script asserting, for every indexed loop
subprogram, the definitional equations of its argument functions
(f, g, h, and i, j for the two-state loop), its helper recursions
(u, and t for the two-state loop) and its loop functions (v / w, s /
c), followed by definitions of `small` and `fast` and the goal
``(exists ((c Int)) (and (>= c 0) (not (= (small c) (fast c)))))``.
Everything is quantified first-order over UFNIA; `divf`/`modf` give
floor division and divisor-signed remainder in terms of the built-in
Euclidean operators.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .predicates import PNode, PredicateError, free_pvars
from .programs import (
    Abort, DEFAULT_LIMITS, EvalLimits, LoopEntry, LoopRegistry, Problem, Prog,
    evaluate,
)

Sexpr = object  # str | int | list


def render(s: Sexpr) -> str:
    if isinstance(s, int):
        return str(s) if s >= 0 else f"(- {-s})"
    if isinstance(s, str):
        return s
    return "(" + " ".join(render(x) for x in s) + ")"


def _forall(params: Sequence[str], body: Sexpr) -> Sexpr:
    if not params:
        return body
    return ["forall", [[p, "Int"] for p in params], body]


# ---------------------------------------------------------------------------
# Preamble
# ---------------------------------------------------------------------------

def emit_preamble() -> list[Sexpr]:
    """Total divf/modf matching floor-division semantics on b != 0."""
    divf = ["define-fun", "divf", [["a", "Int"], ["b", "Int"]], "Int",
            ["ite", ["or", [">=", "b", "0"], ["=", ["mod", "a", "b"], "0"]],
             ["div", "a", "b"], ["-", ["div", "a", "b"], "1"]]]
    modf = ["define-fun", "modf", [["a", "Int"], ["b", "Int"]], "Int",
            ["-", "a", ["*", "b", ["divf", "a", "b"]]]]
    return [divf, modf]


# ---------------------------------------------------------------------------
# Program translation
# ---------------------------------------------------------------------------

def _apply(name: str, args: Sequence[Sexpr]) -> Sexpr:
    return [name, *args] if args else name


def _role_app(entry: LoopEntry, role: str, env: dict[str, Sexpr]) -> Sexpr:
    return _apply(entry.name(role), [env[p] for p in entry.params(role)])


def translate_program(prog: Prog, registry: LoopRegistry,
                      env: dict[str, Sexpr]) -> Sexpr:
    """Program -> SMT term; loop subprograms become applications of
    their registry loop function on the surviving variables."""
    op = prog.op
    if op in ("0", "1", "2"):
        return op
    if op in ("x", "y"):
        return env[op]
    if op == "cond":
        a, b, c = (translate_program(q, registry, env) for q in prog.args)
        return ["ite", ["<=", a, "0"], b, c]
    if op in ("+", "-", "*"):
        a, b = (translate_program(q, registry, env) for q in prog.args)
        return [op, a, b]
    if op in ("div", "mod"):
        a, b = (translate_program(q, registry, env) for q in prog.args)
        return ["divf" if op == "div" else "modf", a, b]
    entry = registry.entry_for(prog)
    if entry is None:
        raise ValueError("loop subprogram missing from registry")
    role = {"loop": "v", "loop2": "w", "compr": "c"}[entry.kind]
    return _role_app(entry, role, env)


# Definitional axioms are built from templates parameterised by the
# environment, so the quantified axioms and their ground instances for
# the model-check harness share one construction.

def _axiom_templates(entry: LoopEntry, registry: LoopRegistry):
    """Yield (role, params, body_fn) where body_fn(env) gives the
    right-hand side of `fn(params) = body` under the environment."""
    node = entry.node
    k = entry.name

    def arg_body(part: Prog):
        return lambda env: translate_program(part, registry, env)

    if entry.kind == "loop":
        F, A, B = node.args
        yield "f", entry.params("f"), arg_body(F)
        yield "g", entry.params("g"), arg_body(A)
        yield "h", entry.params("h"), arg_body(B)

        def u_body(env):
            x, y = env["x"], env["y"]
            fa = _role_app(entry, "f", {"x": _apply(k("u"), [["-", x, "1"] if isinstance(x, str) else x - 1, y]), "y": x})
            return ["ite", ["<=", x, "0"], y, fa]

        yield "u", ("x", "y"), u_body

        def v_body(env):
            return _apply(k("u"), [_role_app(entry, "g", env),
                                   _role_app(entry, "h", env)])

        yield "v", entry.params("v"), v_body

    elif entry.kind == "loop2":
        F, G, A, B, C = node.args
        yield "f", entry.params("f"), arg_body(F)
        yield "g", entry.params("g"), arg_body(G)
        yield "h", entry.params("h"), arg_body(A)
        yield "i", entry.params("i"), arg_body(B)
        yield "j", entry.params("j"), arg_body(C)

        def pair_body(role):
            def body(env):
                x, y, z = env["x"], env["y"], env["z"]
                xm1 = ["-", x, "1"] if isinstance(x, str) else x - 1
                pu = _apply(k("u"), [xm1, y, z])
                pt = _apply(k("t"), [xm1, y, z])
                upd = _role_app(entry, "f" if role == "u" else "g",
                                {"x": pu, "y": pt})
                return ["ite", ["<=", x, "0"], y if role == "u" else z, upd]
            return body

        yield "u", ("x", "y", "z"), pair_body("u")
        yield "t", ("x", "y", "z"), pair_body("t")

        def w_body(env):
            return _apply(k("u"), [_role_app(entry, "h", env),
                                   _role_app(entry, "i", env),
                                   _role_app(entry, "j", env)])

        def s_body(env):
            return _apply(k("t"), [_role_app(entry, "h", env),
                                   _role_app(entry, "i", env),
                                   _role_app(entry, "j", env)])

        yield "w", entry.params("w"), w_body
        yield "s", entry.params("s"), s_body

    else:  # compr
        F, A = node.args
        yield "f", entry.params("f"), arg_body(F)
        yield "g", entry.params("g"), arg_body(A)

        def t_body(env):
            x = env["x"]
            xp1 = ["+", x, "1"] if isinstance(x, str) else x + 1
            cond = ["<=", _role_app(entry, "f", {"x": x, "y": "0"}), "0"]
            return ["ite", cond, x, _apply(k("t"), [xp1])]

        yield "t", ("x",), t_body

        def u_body(env):
            x = env["x"]
            xm1 = ["-", x, "1"] if isinstance(x, str) else x - 1
            return ["ite", ["<=", x, "0"], _apply(k("t"), ["0"]),
                    _apply(k("t"), [["+", _apply(k("u"), [xm1]), "1"]])]

        yield "u", ("x",), u_body

        def c_body(env):
            return _apply(k("u"), [_role_app(entry, "g", env)])

        yield "c", entry.params("c"), c_body


def _definitional_axiom(entry: LoopEntry, role: str, params, body_fn) -> Sexpr:
    env = {p: p for p in params}
    lhs = _apply(entry.name(role), [env[p] for p in params])
    return _forall(params, ["=", lhs, body_fn(env)])


# ---------------------------------------------------------------------------
# Trivial-induction axioms
# ---------------------------------------------------------------------------

def _updates_equal(a: LoopEntry, b: LoopEntry) -> bool:
    if a.kind != b.kind:
        return False
    if a.kind == "loop2":
        return a.node.args[0] == b.node.args[0] and a.node.args[1] == b.node.args[1]
    return a.node.args[0] == b.node.args[0]


def _helper_roles(kind: str) -> tuple[str, ...]:
    return {"loop": ("u",), "loop2": ("u", "t"), "compr": ("t", "u")}[kind]


def _fn_equality(a: LoopEntry, ra: str, b: LoopEntry, rb: str) -> Sexpr:
    """forall over the union of parameters: a.ra(..) = b.rb(..)."""
    avars = a.params(ra)
    bvars = b.params(rb)
    joint = [v for v in ("x", "y", "z") if v in avars or v in bvars]
    env = {v: v for v in ("x", "y", "z")}
    return _forall(joint, ["=", _role_app(a, ra, env), _role_app(b, rb, env)])


def emit_trivial_axioms(registry: LoopRegistry) -> list[Sexpr]:
    """Helper-equality axioms for same-kind loops with syntactically
    equal update arguments; congruence implications for the remaining
    same-kind pairs (equal update functions force equal helpers)."""
    out: list[Sexpr] = []
    entries = registry.entries
    for i in range(len(entries)):
        for j in range(i + 1, len(entries)):
            a, b = entries[i], entries[j]
            if a.kind != b.kind:
                continue
            helpers = [_fn_equality(a, r, b, r) for r in _helper_roles(a.kind)]
            conclusion = helpers[0] if len(helpers) == 1 else ["and", *helpers]
            if _updates_equal(a, b):
                out.extend(helpers)
            else:
                update_roles = ("f", "g") if a.kind == "loop2" else ("f",)
                ants = [_fn_equality(a, r, b, r) for r in update_roles]
                antecedent = ants[0] if len(ants) == 1 else ["and", *ants]
                out.append(["=>", antecedent, conclusion])
    return out


# ---------------------------------------------------------------------------
# Predicates to SMT
# ---------------------------------------------------------------------------

def problem_arities(problem: Problem) -> dict[str, int]:
    table = {"small": 1, "fast": 1}
    for entry in problem.registry.entries:
        for role in entry.roles():
            table[entry.name(role)] = len(entry.params(role))
    return table


def pterm_to_smt(p: PNode, env: dict[str, Sexpr],
                 arities: Optional[dict[str, int]] = None) -> Sexpr:
    op = p.op
    if op in ("0", "1", "2"):
        return op
    if op in ("x", "y", "z"):
        return env[op]
    if op == "app":
        if arities is not None:
            want = arities.get(p.name)
            if want is None:
                raise PredicateError(f"unknown function symbol {p.name!r}")
            if want != len(p.args):
                raise PredicateError(f"{p.name} expects {want} arguments")
        return _apply(p.name, [pterm_to_smt(a, env, arities) for a in p.args])
    args = [pterm_to_smt(a, env, arities) for a in p.args]
    if op == "ite":
        return ["ite", ["<=", args[0], "0"], args[1], args[2]]
    if op == "div":
        return ["divf", *args]
    if op == "mod":
        return ["modf", *args]
    if op == "=>":
        return ["=>", *args]
    if op == "and":
        return ["and", *args]
    if op == "not":
        return ["not", *args]
    return [op, *args]  # + - * = <=


@dataclass
class InductionInstance:
    """One closed instance of the second-order induction axiom."""

    predicate: Optional[PNode]
    assertion: Sexpr

    def text(self) -> str:
        return render(["assert", self.assertion])


def emit_induction_instance(q: PNode,
                            problem: Optional[Problem]) -> InductionInstance:
    """Instantiate
    ((forall y. P(0,y)) and (forall x y. P(x,y) => P(x+1,y)))
      => (forall x y. 0 <= x => P(x,y))
    with P := q.  The guard 0 <= x is left off the induction step.
    Any free z is quantified alongside y.  Symbol/arity validation is
    skipped when no problem is supplied (raw benchmark scripts)."""
    arities = problem_arities(problem) if problem is not None else None
    extra = ["z"] if "z" in free_pvars(q) else []

    def at(x: Sexpr) -> Sexpr:
        return pterm_to_smt(q, {"x": x, "y": "y", "z": "z"}, arities)

    base = _forall(["y"] + extra, at("0"))
    step = _forall(["x", "y"] + extra, ["=>", at("x"), at(["+", "x", "1"])])
    concl = _forall(["x", "y"] + extra, ["=>", ["<=", "0", "x"], at("x")])
    return InductionInstance(q, ["=>", ["and", base, step], concl])


# ---------------------------------------------------------------------------
# Whole problems
# ---------------------------------------------------------------------------

GOAL = ["exists", [["c", "Int"]],
        ["and", [">=", "c", "0"], ["not", ["=", ["small", "c"], ["fast", "c"]]]]]


@dataclass
class SmtProblem:
    problem: Problem
    with_trivial: bool = True
    preamble: list[Sexpr] = field(default_factory=list)
    declarations: list[Sexpr] = field(default_factory=list)
    definitions: list[Sexpr] = field(default_factory=list)
    trivial: list[Sexpr] = field(default_factory=list)
    goal: Sexpr = field(default_factory=lambda: GOAL)

    def assertions(self, instances: Iterable[InductionInstance] = (),
                   include_goal: bool = True) -> list[Sexpr]:
        out = list(self.definitions) + list(self.trivial)
        out.extend(inst.assertion for inst in instances)
        if include_goal:
            out.append(self.goal)
        return out

    def script(self, instances: Iterable[InductionInstance] = (),
               include_goal: bool = True, extra: Iterable[Sexpr] = (),
               logic: str = "UFNIA") -> str:
        instances = list(instances)
        lines = [f"(set-logic {logic})",
                 f"(set-info :source |{self.source_info(instances)}|)"]
        lines += [render(c) for c in self.preamble]
        lines += [render(d) for d in self.declarations]
        lines += [render(["assert", a])
                  for a in self.assertions(instances, include_goal)]
        lines += [render(["assert", a]) for a in extra]
        lines.append("(check-sat)")
        return "\n".join(lines) + "\n"

    def source_info(self, instances: Sequence[InductionInstance]) -> str:
        blob = "\n".join(inst.text() for inst in instances)
        h = hashlib.sha256(blob.encode()).hexdigest()[:16] if blob else "none"
        return f"problem {self.problem.pid} candidate {h}"


def emit_problem(problem: Problem, with_trivial: bool = True) -> SmtProblem:
    reg = problem.registry
    sp = SmtProblem(problem, with_trivial)
    sp.preamble = emit_preamble()

    for entry in reg.entries:
        for role in entry.roles():
            params = entry.params(role)
            sp.declarations.append(
                ["declare-fun", entry.name(role), ["Int"] * len(params), "Int"])
    sp.declarations.append(["declare-fun", "small", ["Int"], "Int"])
    sp.declarations.append(["declare-fun", "fast", ["Int"], "Int"])

    for entry in reg.entries:
        for role, params, body_fn in _axiom_templates(entry, reg):
            sp.definitions.append(_definitional_axiom(entry, role, params, body_fn))
    top_env = {"x": "x", "y": "0"}
    sp.definitions.append(_forall(["x"], ["=", ["small", "x"],
                                          translate_program(problem.small, reg, top_env)]))
    sp.definitions.append(_forall(["x"], ["=", ["fast", "x"],
                                          translate_program(problem.fast, reg, top_env)]))
    if with_trivial:
        sp.trivial = emit_trivial_axioms(reg)
    return sp


# ---------------------------------------------------------------------------
# Ground model-check scripts
# ---------------------------------------------------------------------------

def ground_script(problem: Problem, xs: Iterable[int],
                  claims: Iterable[tuple[str, int, int]],
                  limits: EvalLimits = DEFAULT_LIMITS) -> str:
    """Quantifier-free fidelity script.

    Every definitional axiom is instantiated at exactly the points the
    interpreter visits while evaluating small/fast over `xs`, then the
    ground `claims` (side, x, value) are asserted.  The script is
    satisfiable iff the claims agree with the definitional theory.
    """
    reg = problem.registry
    needed: dict[tuple[int, str], set[tuple[int, ...]]] = {}

    def note(entry: LoopEntry, role: str, args: tuple[int, ...]):
        needed.setdefault((entry.index, role), set()).add(args)

    def trace(node: Prog, role: str, args: tuple[int, ...], value: int):
        entry = reg.entry_for(node)
        if entry is None:
            return
        if role in ("u", "t"):
            note(entry, role, args)
        else:
            # conceptual (x, y) context; keep the surviving parameters
            env = dict(zip(("x", "y"), args))
            note(entry, role, tuple(env[p] for p in entry.params(role)))

    values: dict[tuple[str, int], int] = {}
    for x in xs:
        for side, prog in (("small", problem.small), ("fast", problem.fast)):
            out = evaluate(prog, x, 0, limits, trace=trace)
            if isinstance(out, Abort):
                raise ValueError(f"{problem.pid} {side}({x}) aborted: {out.reason}")
            values[(side, x)] = out

    sp = emit_problem(problem, with_trivial=False)
    lines = ["(set-logic QF_UFNIA)",
             f"(set-info :source |problem {problem.pid} ground check|)"]
    lines += [render(c) for c in sp.preamble]
    lines += [render(d) for d in sp.declarations]

    templates = {(e.index, role): (e, params, body_fn)
                 for e in reg.entries
                 for role, params, body_fn in _axiom_templates(e, reg)}
    for key in sorted(needed):
        entry, params, body_fn = templates[key]
        role = key[1]
        for args in sorted(needed[key]):
            keys = params if role not in ("u", "t") else ("x", "y", "z")[:len(args)]
            env = dict(zip(keys, args))
            lhs = _apply(entry.name(role), [env[p] for p in keys])
            lines.append(render(["assert", ["=", lhs, body_fn(env)]]))
    for (side, x) in sorted(values):
        prog = problem.small if side == "small" else problem.fast
        body = translate_program(prog, reg, {"x": x, "y": 0})
        lines.append(render(["assert", ["=", [side, x], body]]))
    for side, x, val in claims:
        lines.append(render(["assert", ["=", [side, x], val]]))
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Script helpers for tests and ingestion
# ---------------------------------------------------------------------------

def parse_script(text: str) -> list[Sexpr]:
    """Tokenise an SMT-LIB script into nested lists (strings as atoms)."""
    toks = re.findall(r"\(|\)|\|[^|]*\||[^\s()]+", text)
    out, stack = [], []
    cur: list = out
    for tok in toks:
        if tok == "(":
            new: list = []
            cur.append(new)
            stack.append(cur)
            cur = new
        elif tok == ")":
            cur = stack.pop()
        else:
            cur.append(tok)
    return out


def script_assertions(text: str) -> list[Sexpr]:
    return [c[1] for c in parse_script(text)
            if isinstance(c, list) and c and c[0] == "assert"]


def normalize_names(s: Sexpr) -> Sexpr:
    """Strip indices from function names and fold divf/modf onto their
    built-in counterparts, for comparisons up to naming."""
    if isinstance(s, list):
        return [normalize_names(x) for x in s]
    if isinstance(s, str):
        if s in ("divf", "modf"):
            return s[:3]
        m = re.fullmatch(r"([a-z])\d+", s)
        if m:
            return m.group(1)
    return s
