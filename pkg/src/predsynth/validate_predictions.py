"""Check a prediction file against its problems: how many lines decode
into grammar-valid candidates.

    python -m predsynth.validate_predictions --problems problems.txt \
        --predictions preds.txt [--min-rate 0.9]

problems.txt is a DSL problems file (ID: SMALL = FAST per line); the
prediction file uses the id TAB rank TAB tokens protocol.  Prints
"valid total rate" and exits 0 when the rate clears --min-rate.
"""

from __future__ import annotations

import argparse

from .driver import parse_prediction_file
from .predicates import TokenError, decode_tokens
from .programs import load_problems


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="predsynth-validate-predictions")
    parser.add_argument("--problems", required=True)
    parser.add_argument("--predictions", required=True)
    parser.add_argument("--min-rate", type=float, default=0.0)
    args = parser.parse_args(argv)

    problems = {p.pid: p for p in load_problems(args.problems)}
    rows = parse_prediction_file(args.predictions)
    total = valid = 0
    for pid, _rank, toks in rows:
        problem = problems.get(pid)
        if problem is None:
            continue
        total += 1
        try:
            cand, _ = decode_tokens(toks, problem.registry)
            if cand:
                valid += 1
        except TokenError:
            pass
    rate = valid / total if total else 0.0
    print(f"{valid} {total} {rate:.4f}")
    return 0 if rate >= args.min_rate else 1


if __name__ == "__main__":
    raise SystemExit(main())
