"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s`.  The baselines
direction check and the initialization pipeline dominate the runtime
(several minutes each on two cores); everything else is seconds.
"""

import contextlib
import random
import sys
import time

import pytest

from predsynth.predicates import (
    Solution, encode_candidate, encode_example, decode_tokens,
    expand_definitions, is_formula, parse_candidate, parse_predicate, resolve,
    shift_indices,
)
from predsynth.programs import Abort, evaluate, load_problems
from predsynth.solving import SolutionDB, check_candidate, minimize, run_batch
from predsynth.generate import GenConfig, enumerate_terms, initial_candidates
from predsynth.fingerprint import fingerprint, true_on_grid

DATA_DIR = __file__.rsplit("/", 1)[0] + "/data"

APPENDIX_SOLUTIONS = {
    "A2411": "(/\\ (<= 0 x) (= (+ (* x x) x) (* 2 (v0 x))))",
    "A59826": "(= (- (u0 x 1) 1) (+ (* x x) x))",
    "A1026": "(/\\ (= (v0 x) (w1 x)) (= (s1 x) (v0 1)))",
    "A205646": ("(/\\ (= (w1 (+ 1 x)) (v0 (+ 1 x))) (= (w1 x) (v0 x))) | "
                "(/\\ (= (v0 x) (w1 x)) (= (w1 (+ 1 x)) (v0 (+ 1 x)))) | "
                "(<= x (w1 2)) | (<= x (w1 x)) | "
                "(= (s1 x) (s1 1)) | (= (s1 (+ 1 x)) (s1 x))"),
}

P1 = "(/\\ (= (s1 x) (s1 1)) (= (v0 (+ 1 x)) (+ (+ (w1 x) (v0 x)) (w1 x))))"


@contextlib.contextmanager
def criterion(name):
    t0 = time.time()
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {name}: FAIL ({time.time() - t0:.1f}s)")
        raise
    print(f"\nACCEPTANCE {name}: PASS ({time.time() - t0:.1f}s)")


@pytest.fixture(scope="module")
def fixture_set(paper_problems):
    extra = {p.pid: p for p in load_problems(f"{DATA_DIR}/easy_problems.txt")}
    return {**paper_problems, **extra}


def test_interpreter_oracle(paper_problems):
    with criterion("interpreter-oracle"):
        t0 = time.time()
        for pid in ("A217", "A108411", "A1026", "A2278", "A105281", "A198766"):
            prob = paper_problems[pid]
            for x in range(21):
                sv = evaluate(prob.small, x, 0)
                fv = evaluate(prob.fast, x, 0)
                assert not isinstance(sv, Abort)
                assert sv == fv, f"{pid} diverges at x={x}"
        a217 = paper_problems["A217"]
        assert [evaluate(a217.small, x, 0) for x in range(6)] == [0, 1, 3, 6, 10, 15]
        assert time.time() - t0 < 5.0


def test_smt_fidelity(paper_problems, solver, tmp_path):
    with criterion("smt-fidelity"):
        t0 = time.time()
        from predsynth.smt import (
            emit_problem, ground_script, normalize_names, parse_script, render,
        )
        from predsynth.solving import write_script
        from test_smt import LISTING

        prob = paper_problems["A217"]
        ours = sorted(render(normalize_names(a)) for a in
                      emit_problem(prob, with_trivial=False).assertions())
        published = sorted(render(normalize_names(a)) for a in
                           parse_script(LISTING))
        assert ours == published

        good = [("small", x, evaluate(prob.small, x, 0)) for x in range(5)]
        path = write_script(ground_script(prob, range(5), good), tmp_path, "g")
        assert solver.solve_file(str(path), 8000).verdict == "sat"

        cand = parse_candidate(APPENDIX_SOLUTIONS["A2411"])
        assert check_candidate(paper_problems["A2411"], cand, solver,
                               timeout_ms=2000).verdict == "unsat"
        assert time.time() - t0 < 10.0


def test_published_solution_replay(paper_problems, solver):
    with criterion("published-solution-replay"):
        for pid, text in APPENDIX_SOLUTIONS.items():
            prob = paper_problems[pid]
            cand = parse_candidate(text)
            res = check_candidate(prob, cand, solver, timeout_ms=2000)
            assert res.proved, f"{pid} not proved within 2s"
            out, reproved = minimize(prob, Solution(pid, cand), solver,
                                     timeout_ms=2000)
            assert reproved
            for i in range(len(out.predicates)):
                rest = out.predicates[:i] + out.predicates[i + 1:]
                if rest:
                    res = check_candidate(prob, rest, solver, timeout_ms=2000)
                    assert not res.proved, \
                        f"{pid}: predicate {i} not removal-critical"


def test_generalization_p1(paper_problems, solver):
    with criterion("p1-generalization"):
        cand = parse_candidate(P1)
        for pid in ("A198766", "A2278", "A105281"):
            res = check_candidate(paper_problems[pid], cand, solver,
                                  timeout_ms=2000)
            assert res.proved, f"P1 does not prove {pid}"


def test_fingerprint_suite(paper_problems):
    with criterion("fingerprint-suite"):
        t0 = time.time()
        prob = paper_problems["A1026"]  # two distinct loop symbols

        def term(text):
            return parse_predicate(f"(= {text} 0)").args[0]

        fx = fingerprint(term("x"), prob)
        assert fingerprint(term("(+ x 0)"), prob) == fx
        assert fingerprint(term("(- (+ x 1) 1)"), prob) == fx
        fv = fingerprint(term("(v0 x)"), prob)
        assert fingerprint(term("(+ (v0 x) 0)"), prob) == fv
        assert fingerprint(term("(* (v0 x) 1)"), prob) == fv
        assert fingerprint(term("(w1 x)"), prob) != fv

        pool = enumerate_terms(prob, cap=1024, seed=0)
        assert len(pool.terms) == 1024
        fps = [fingerprint(t, prob, 0) for t in pool.terms]
        assert len(set(fps)) == len(fps), "duplicate fingerprints in pool"
        assert time.time() - t0 < 30.0


INIT_GEN = GenConfig(term_cap=256, literals_per_class=50, predicate_count=800,
                     candidate_count=200, seed=0)


def test_initialization_pipeline(fixture_set, solver):
    with criterion("initialization-pipeline"):
        problems = sorted(fixture_set.values(), key=lambda p: p.pid)
        assert len(problems) == 20

        batches = {}
        for prob in problems:
            batches[prob.pid] = initial_candidates(prob, INIT_GEN)
            assert len(batches[prob.pid]) == 200

        # determinism: regeneration is identical
        again = initial_candidates(problems[0], INIT_GEN)
        assert again == batches[problems[0].pid]

        # every retained predicate evaluates true on the whole grid
        for prob in problems[:4]:
            preds = {p for cand in batches[prob.pid] for p in cand}
            for p in preds:
                assert true_on_grid(p, prob)

        old_short = solver.cfg.short_circuit
        solver.cfg.short_circuit = True
        try:
            batch = run_batch(problems, batches, solver, timeout_ms=200)
        finally:
            solver.cfg.short_circuit = old_short
        assert len(batch.solved) >= 1, "no fixture solved by initialization"
        print(f"\n  initialization solved {sorted(batch.solved)}")


def test_tokenizer(paper_problems):
    with criterion("tokenizer"):
        a217 = paper_problems["A217"]
        cand = (parse_predicate("(= (+ (* x x) x) (* 2 (v0 x)))"),)
        assert encode_example(a217, cand) == \
            "J a D K L K A = G D F K K K C > O D F K K K F C a K"

        prob = paper_problems["A176916"]
        from test_predicates import predicate_strategy
        from hypothesis import given, settings

        rng = random.Random(0)
        strategy = predicate_strategy(prob)

        @given(cand=strategy)
        @settings(max_examples=1000, deadline=None, database=None)
        def roundtrip(cand):
            toks = encode_candidate(cand, prob.registry)
            got, complete = decode_tokens(toks, prob.registry)
            assert complete and got == cand

        roundtrip()

        @given(cand=strategy)
        @settings(max_examples=1000, deadline=None, database=None)
        def augmentations_valid(cand):
            line = encode_example(prob, cand)
            off = rng.randint(-3, 6)
            shifted = shift_indices(line, off)
            if off == 0:
                assert shifted == line
            out = expand_definitions(cand, prob, 1 + rng.randint(0, 1), rng)
            for p in out:
                assert is_formula(p)
                resolve(p, prob.registry)

        augmentations_valid()


def test_baselines_direction(solver):
    with criterion("baselines-direction"):
        from predsynth.baselines import load_benchmark, run_comparison

        items = load_benchmark(f"{DATA_DIR}/benchmark100.txt")
        assert len(items) == 100
        result = run_comparison(items, ["n=0", "n=1", "n=4"],
                                {"default": solver.cfg}, timeout_ms=10_000)
        n0 = result.solved[("default", "n=0")]
        n1 = result.solved[("default", "n=1")]
        n4 = result.solved[("default", "n=4")]
        print(f"\n  direction check: n=0 {n0}, n=1 {n1}, n=4 {n4}")
        assert n1 > n0, "n=1 must solve strictly more than n=0"
        assert n4 >= n1, "n=4 must solve at least as many as n=1"


def test_loop_smoke(fixture_set, solver, tmp_path):
    with criterion("loop-smoke"):
        from predsynth.driver import PredictorSpec, RunConfig, iterate

        mock = [sys.executable, "-m", "predsynth.mock_predictor"]
        spec = PredictorSpec(
            train_cmd=mock + ["train", "--data", "{train}", "--out", "{model}"],
            infer_cmd=mock + ["infer", "--model", "{model}", "--problems",
                              "{problems}", "--beam", "{beam}", "--out",
                              "{out}", "--broadcast"])
        problems = [fixture_set[p]
                    for p in ("A198766", "A2278", "A105281", "E1", "E2")]

        def fresh_db():
            db = SolutionDB()
            db.record(Solution("A198766", parse_candidate(P1)))
            db.record(Solution("E1", parse_candidate("(= (v0 x) (w1 x))")))
            return db

        cfg = RunConfig(mode="whole", shift_p=0.0, predictors=[spec])
        run1 = tmp_path / "run1"
        db = fresh_db()
        cumulative = []
        for it in range(1, 6):
            db, report = iterate(db, problems, cfg, solver, run1, it)
            cumulative.append(report.cumulative_solved)
        assert cumulative == sorted(cumulative), "solved count decreased"
        assert cumulative[-1] == 5
        print(f"\n  cumulative solved per iteration: {cumulative}")

        run2 = tmp_path / "run2"
        db2 = fresh_db()
        replay_cfg = RunConfig(mode="whole", shift_p=0.0)
        for it in range(1, 6):
            db2, _ = iterate(db2, problems, replay_cfg, solver, run2, it,
                             predictions_from=run1)
        assert (run1 / "db.jsonl").read_bytes() == (run2 / "db.jsonl").read_bytes()
