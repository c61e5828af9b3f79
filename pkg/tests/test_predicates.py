import random

import pytest
from hypothesis import given, settings, strategies as st

from predsynth.predicates import (
    PNode, PredicateError, Solution, TokenError, app,
    candidate_text, decode_tokens, encode_candidate, encode_example,
    encode_problem, expand_definitions, is_formula, parse_candidate,
    parse_predicate, pconst, predicate_size, resolve, shift_indices,
    to_text,
)
from predsynth.programs import Problem, load_problems

DATA = __file__.rsplit("/", 1)[0] + "/data/paper_problems.txt"
PROBLEMS = {p.pid: p for p in load_problems(DATA)}

A217 = PROBLEMS["A217"]
A2411 = PROBLEMS["A2411"]

A2411_SOLUTION = "(/\\ (<= 0 x) (= (+ (* x x) x) (* 2 (v0 x))))"


class TestParsePrint:
    def test_simple_equation(self):
        p = parse_predicate("(= (+ (* x x) x) (* 2 (v0 x)))")
        assert p.op == "=" and p.args[1].args[1].name == "v0"

    def test_round_trip(self):
        for text in [
            A2411_SOLUTION,
            "(~ (<= y (u1 0 h1)))",
            "(==> (<= 0 x) (= (+ (* x x) x) (* 2 (- (u0 x 1) (- 1 (* 2 x))))))",
            "(<= x (ite (<= 1 0) 0 (f0 (u2 1 1))))",
        ]:
            assert to_text(parse_predicate(text)) == text

    def test_nullary_functions_print_bare(self):
        p = parse_predicate("(= h0 0)")
        assert to_text(p) == "(= h0 0)"

    def test_candidate_split_on_bars(self):
        cand = parse_candidate("(<= 0 x) | (= x y)")
        assert len(cand) == 2

    def test_rejects_large_integers(self):
        with pytest.raises(PredicateError):
            parse_predicate("(= x 7)")

    def test_rejects_non_formula(self):
        with pytest.raises(PredicateError):
            parse_predicate("(+ x y)")

    def test_ite_requires_guard_form(self):
        with pytest.raises(PredicateError):
            parse_predicate("(= x (ite (= 1 0) 0 1))")

    def test_appendix_solution_lines_parse(self):
        # published solution spectra for two problems; the decoder's
        # textual front-end must accept every line
        lines = [
            "(~ (<= y (u1 0 h1))) | (/\\ (==> (<= 0 x) (= (+ x (* x x)) "
            "(* 2 (- (u0 x 1) (- 1 (* 2 x)))))) (<= 0 x))",
            "(<= z (u1 0 h1)) | (/\\ (= (+ x (* x x)) "
            "(* 2 (- (u0 x 1) (- 1 (* 2 x))))) (<= 0 x))",
            "(= (s1 (+ 1 x)) (s1 x)) | (/\\ (= (w1 (+ 1 x)) (v0 (+ 1 x))) "
            "(= (w1 x) (v0 x))) | (= j1 (s1 x)) | (<= x (v0 (v0 1)))",
            "(/\\ (= (w1 (+ 1 x)) (u0 (+ 1 x) 1)) (= (- 2 (u0 x 1)) (- 2 (w1 x)))) | "
            "(= (v1 (divf x 2) (u2 (modf x 2) 1) v3) (ite (<= 1 0) (+ 1 (+ 2 2)) "
            "(f3 (ite (<= (- 1 1) 0) (+ 1 (+ 2 2)) (- 1 1))))) | "
            "(= (ite (<= (divf (+ 1 x) 2) 0) j1 (v1 (- (divf (+ 1 x) 2) 1) "
            "(u2 (modf (+ 1 x) 2) 1) (u3 g3 h3))) (v1 (divf x 2) (u2 (modf x 2) 1) "
            "(u3 g3 h3)))",
        ]
        for line in lines:
            cand = parse_candidate(line)
            assert all(is_formula(p) for p in cand)

    def test_resolve_against_a11914(self):
        prob = PROBLEMS["A11914"]
        cand = parse_candidate("(~ (<= y (u1 0 h1))) | (<= 0 x)")
        resolved = [resolve(p, prob.registry) for p in cand]
        assert to_text(resolved[0]) == "(~ (<= y (u1 0 h1)))"

    def test_resolve_second_helper_alias(self):
        prob = PROBLEMS["A176916"]
        p = parse_predicate("(= (v1 x y z) (u1 x y z))")
        resolved = resolve(p, prob.registry)
        assert resolved.args[0].name == "t1"

    def test_resolve_rejects_unknown_symbol(self):
        with pytest.raises(PredicateError):
            resolve(parse_predicate("(= (q9 x) 0)"), A217.registry)

    def test_resolve_rejects_bad_arity(self):
        with pytest.raises(PredicateError):
            resolve(parse_predicate("(= (v0 x y) 0)"), A217.registry)


class TestSize:
    def test_leaf(self):
        assert predicate_size(PNode("x")) == 1

    def test_equation_node_count(self):
        # (= (+ (* x x) x) (* 2 (v0 x))): one node per operator,
        # constant, variable and application
        p = parse_predicate("(= (+ (* x x) x) (* 2 (v0 x)))")
        assert predicate_size(p) == 10

    def test_published_sizes_compare(self):
        p1 = parse_predicate(
            "(/\\ (= (s1 x) (s1 1)) (= (v0 (+ 1 x)) (+ (+ (w1 x) (v0 x)) (w1 x))))")
        manual1 = parse_predicate("(==> (<= 0 x) (= (small x) (fast x)))")
        assert predicate_size(p1) > predicate_size(manual1)


class TestTokens:
    def test_example_encoding_bit_exact(self):
        cand = (parse_predicate("(= (+ (* x x) x) (* 2 (v0 x)))"),)
        line = encode_example(A217, cand)
        assert line == "J a D K L K A = G D F K K K C > O D F K K K F C a K"

    def test_problem_side_only(self):
        toks = encode_problem(A217)
        assert toks[:7] == ["J", "a", "D", "K", "L", "K", "A"]
        assert toks[7] == "="

    def test_decode_round_trip_simple(self):
        cand = (parse_predicate(A2411_SOLUTION),)
        toks = encode_candidate(cand, A2411.registry)
        got, complete = decode_tokens(toks, A2411.registry)
        assert complete and got == cand

    def test_decode_helper_slots(self):
        prob = PROBLEMS["A59826"]
        cand = (parse_predicate("(= (- (u0 x 1) 1) (+ (* x x) x))"),)
        toks = encode_candidate(cand, prob.registry)
        assert toks[2] == "a" and toks[3] == "3"
        got, _ = decode_tokens(toks, prob.registry)
        assert got == cand

    def test_decode_lenient_trailing_garbage(self):
        toks = encode_candidate((parse_predicate("(<= 0 x)"),), A217.registry)
        got, complete = decode_tokens(toks + ["D", "D"], A217.registry)
        assert len(got) == 1 and not complete

    def test_decode_malformed_raises(self):
        with pytest.raises(TokenError):
            decode_tokens("O D", A217.registry)

    def test_decode_unknown_letter_raises(self):
        with pytest.raises(TokenError):
            decode_tokens("O b K A", A217.registry)

    def test_multi_predicate_stream(self):
        cand = parse_candidate("(<= 0 x) | (= (v0 x) (v0 x))")
        toks = encode_candidate(cand, A217.registry)
        got, complete = decode_tokens(toks, A217.registry)
        assert complete and got == cand


class TestShift:
    LINE = "J a D K L K A = G D F K K K C > O D F K K K F C a K"

    def test_identity(self):
        assert shift_indices(self.LINE, 0) == self.LINE

    def test_shift_two(self):
        shifted = shift_indices(self.LINE, 2)
        assert shifted == self.LINE.replace(" a ", " c ")
        assert shift_indices(shifted, -2) == self.LINE

    def test_out_of_range(self):
        assert shift_indices(self.LINE, 25) is None

    def test_variable_tokens_not_shifted(self):
        # K/L are variables; only bare lowercase letters move
        shifted = shift_indices("O K L a", 1)
        assert shifted == "O K L b"


class TestExpansion:
    def test_loop_fn_unfolds_to_helper(self):
        rng = random.Random(0)
        cand = (parse_predicate("(= (v0 x) (v0 x))"),)
        out = expand_definitions(cand, A217, 1, rng)
        texts = to_text(out[0])
        assert "(u0 (g0 x) h0)" in texts

    def test_no_function_symbols_unchanged(self):
        rng = random.Random(0)
        cand = (parse_predicate("(<= 0 x)"),)
        assert expand_definitions(cand, A217, 1, rng) == cand

    def test_outputs_stay_grammar_valid_and_resolvable(self):
        prob = PROBLEMS["A59826"]
        base = (parse_predicate("(= (- (u0 x 1) 1) (+ (* x x) x))"),)
        for seed in range(40):
            rng = random.Random(seed)
            out = expand_definitions(base, prob, 2, rng)
            for p in out:
                assert is_formula(p)
                resolve(p, prob.registry)  # must not raise

    def test_helper_unroll_shape(self):
        prob = PROBLEMS["A59826"]
        base = (parse_predicate("(= (u0 x 1) x)"),)
        # expanding the only occurrence unrolls the recursion once
        out = expand_at_all(base[0], prob)
        assert "(ite (<= x 0) 1" in out

    def test_loop2_expansion_uses_second_helper(self):
        prob = PROBLEMS["A1026"]
        base = (parse_predicate("(= (s1 x) (s1 1))"),)
        found = set()
        for seed in range(20):
            out = expand_definitions(base, prob, 1, random.Random(seed))
            found.add(to_text(out[0]))
        assert any("t1" in t for t in found)


def expand_at_all(p, prob):
    from predsynth.predicates import expand_at
    return to_text(expand_at(p, prob.registry, 0))


# random generator for grammar-valid predicates over a problem's symbols
def predicate_strategy(problem: Problem):
    reg = problem.registry
    fns = []
    for entry in reg.entries:
        for role in entry.roles():
            fns.append((entry.name(role), len(entry.params(role))))

    leaves = st.sampled_from([PNode("0"), PNode("1"), PNode("2"),
                              PNode("x"), PNode("y")])

    def terms(children):
        opts = [
            st.builds(lambda ab, op: PNode(op, ab), st.tuples(children, children),
                      st.sampled_from(["+", "-", "*", "div", "mod"])),
            st.builds(lambda abc: PNode("ite", abc),
                      st.tuples(children, children, children)),
        ]
        for name, arity in fns:
            if arity == 0:
                opts.append(st.just(app(name)))
            else:
                opts.append(st.builds(
                    lambda args, name=name: app(name, *args),
                    st.tuples(*[children] * arity)))
        return st.one_of(opts)

    term = st.recursive(leaves, terms, max_leaves=6)
    literal = st.one_of(
        st.builds(lambda ab, op: PNode(op, ab), st.tuples(term, term),
                  st.sampled_from(["=", "<="])),
        st.builds(lambda ab, op: PNode("not", (PNode(op, ab),)),
                  st.tuples(term, term), st.sampled_from(["=", "<="])),
    )
    formula = st.recursive(
        literal,
        lambda children: st.builds(
            lambda ab, op: PNode(op, ab), st.tuples(children, children),
            st.sampled_from(["and", "=>"])),
        max_leaves=4)
    return st.lists(formula, min_size=1, max_size=3).map(tuple)


class TestCodecProperties:
    @given(cand=predicate_strategy(PROBLEMS["A176916"]))
    @settings(max_examples=250, deadline=None)
    def test_decode_encode_identity(self, cand):
        reg = PROBLEMS["A176916"].registry
        toks = encode_candidate(cand, reg)
        got, complete = decode_tokens(toks, reg)
        assert complete and got == cand

    @given(cand=predicate_strategy(PROBLEMS["A176916"]),
           offset=st.integers(-3, 6), seed=st.integers(0, 10_000))
    @settings(max_examples=150, deadline=None)
    def test_augmentations_stay_valid(self, cand, offset, seed):
        prob = PROBLEMS["A176916"]
        line = encode_example(prob, cand)
        shifted = shift_indices(line, offset)
        if shifted is not None and offset == 0:
            assert shifted == line
        expanded = expand_definitions(cand, prob, 1 + seed % 2,
                                      random.Random(seed))
        for p in expanded:
            assert is_formula(p)
            resolve(p, prob.registry)

    def test_text_round_trip_on_generated(self):
        rng = random.Random(7)
        cand = (parse_predicate(A2411_SOLUTION),)
        for _ in range(3):
            cand = expand_definitions(cand, A2411, 1, rng)
        text = candidate_text(cand)
        assert parse_candidate(text) == cand


class TestSolution:
    def test_size_computed(self):
        sol = Solution("A217", (parse_predicate("(<= 0 x)"),))
        assert sol.size == 3

    def test_const_desugar(self):
        assert to_text(pconst(5)) == "(+ 1 (* 2 2))"
