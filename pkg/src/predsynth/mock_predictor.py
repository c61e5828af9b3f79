"""Memorizing mock predictor speaking the file protocol.

train copies the training examples into the model directory; infer
answers each problem with the solutions memorized for exactly that
problem encoding, optionally broadcasting every known solution to
every problem (cheap cross-problem transfer) and padding the beam
with index-shifted variants.  Useful for loop smoke tests and replay
checks without a neural backend.

    python -m predsynth.mock_predictor train --data F --out DIR
    python -m predsynth.mock_predictor infer --model DIR --problems F \
        --beam N --out F [--broadcast] [--shift-variants K]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .predicates import shift_indices


def cmd_train(args) -> int:
    data = Path(args.data)
    if not data.exists() or not data.read_text().strip():
        print("mock predictor: refusing to train on an empty file",
              file=sys.stderr)
        return 1
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "memory.txt").write_text(data.read_text())
    return 0


def _load_memory(model_dir: Path) -> list[tuple[str, str]]:
    pairs = []
    memory = model_dir / "memory.txt"
    if not memory.exists():
        return pairs
    for line in memory.read_text().splitlines():
        if " > " not in line:
            continue
        prob, sol = line.split(" > ", 1)
        pairs.append((prob.strip(), sol.strip()))
    return pairs


def cmd_infer(args) -> int:
    memory = _load_memory(Path(args.model))
    lines_out = []
    with open(args.problems) as fh:
        problems = [line.rstrip("\n").split("\t")[:2]
                    for line in fh if line.strip()]
    for pid, ptoks in problems:
        answers: list[str] = []
        seen = set()

        def add(sol: str):
            if sol and sol not in seen and len(answers) < args.beam:
                seen.add(sol)
                answers.append(sol)

        for prob, sol in memory:
            if prob == ptoks:
                add(sol)
        if args.broadcast:
            for _prob, sol in memory:
                add(sol)
        if args.shift_variants:
            base = list(answers)
            for sol in base:
                for off in range(1, args.shift_variants + 1):
                    shifted = shift_indices(sol, off)
                    if shifted is not None:
                        add(shifted)
        for rank, sol in enumerate(answers, start=1):
            lines_out.append(f"{pid}\t{rank}\t{sol}")
    Path(args.out).write_text("\n".join(lines_out)
                              + ("\n" if lines_out else ""))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="predsynth-mock-predictor")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_train = sub.add_parser("train")
    p_train.add_argument("--data", required=True)
    p_train.add_argument("--out", required=True)

    p_infer = sub.add_parser("infer")
    p_infer.add_argument("--model", required=True)
    p_infer.add_argument("--problems", required=True)
    p_infer.add_argument("--beam", type=int, default=240)
    p_infer.add_argument("--out", required=True)
    p_infer.add_argument("--broadcast", action="store_true")
    p_infer.add_argument("--shift-variants", type=int, default=0)

    args = parser.parse_args(argv)
    if args.cmd == "train":
        return cmd_train(args)
    return cmd_infer(args)


if __name__ == "__main__":
    raise SystemExit(main())
