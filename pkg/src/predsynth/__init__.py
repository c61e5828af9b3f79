"""Induction-predicate synthesis for proving integer-sequence program
equivalences with an SMT solver.

The pieces: a program-language core (`programs`), SMT-LIB emission
(`smt`), the predicate language and token codec (`predicates`),
semantic fingerprints and brute-force initialization (`fingerprint`,
`generate`), the prover harness and solution database (`solving`),
manual-heuristic baselines (`baselines`), and the self-learning loop
driver (`driver`, `cli`).
"""

__version__ = "0.1.0"
