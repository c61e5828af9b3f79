/**
 * Grammar constraint for beam decoding.
 *
 * A solution stream is one or more prefix-notation formulas.  Fixed
 * operators have known arities, so a pending-symbol stack (F formula,
 * L literal, T term) decides which tokens may legally follow, and the
 * end symbol is only allowed on an empty stack.
 *
 * Loop-function letters are the subtle part: their arities are
 * problem-specific (dummy arguments are dropped at emission), and a
 * letter may either stand alone (the loop function) or be followed by
 * a slot digit (argument/helper functions).  When the problem's arity
 * table is supplied the automaton uses exact arities and only its
 * defined slots; letters outside the table fall back to
 * nondeterministic arity guessing (a set of possible stacks), so
 * out-of-problem symbols stay expressible and the loop driver's
 * validity metric still observes them.
 */

const FORMULA_HEADS: Record<string, string> = {
  R: "FF", S: "FF",   // conjunction, implication
  Q: "L",             // negation expects a literal
  O: "TT", P: "TT",   // equality, inequality
};
const TERM_LEAVES = new Set(["A", "B", "C", "K", "L", "Z"]);
const TERM_OPS: Record<string, string> = {
  D: "TT", E: "TT", F: "TT", G: "TT", H: "TT", T: "TTT",
};
const LETTER = /^[a-t]$/;
const DIGIT = /^[0-7]$/;
const MAX_STATES = 128;

/** One possible configuration.  digit encodes what may follow a
 * loop-function letter: "none" (an ordinary position), "optional"
 * (arity already guessed, a slot digit would keep it), or "required"
 * (a table-covered letter whose slot digit decides the arity). */
interface Config {
  stack: string;       // pending symbols, top at the end
  digit: "none" | "optional" | "required";
  letter?: string;     // the table-covered letter awaiting its digit
}

export class GrammarState {
  private configs: Config[] | null;  // null = constraint abandoned
  private readonly arities?: Map<string, number>;

  private constructor(configs: Config[] | null,
                      arities?: Map<string, number>) {
    this.configs = configs;
    this.arities = arities;
  }

  static initial(arities?: Map<string, number>): GrammarState {
    return new GrammarState([{ stack: "F", digit: "none" }], arities);
  }

  /** May the stream end here? */
  allowsEnd(): boolean {
    if (this.configs === null) return true;
    return this.configs.some((c) => c.stack === "" && c.digit !== "required");
  }

  allows(token: string): boolean {
    if (this.configs === null) return true;
    return this.configs.some(
      (c) => _successors(c, token, this.arities).length > 0);
  }

  consume(token: string): GrammarState {
    if (this.configs === null) return this;
    const seen = new Set<string>();
    const next: Config[] = [];
    for (const config of this.configs) {
      for (const succ of _successors(config, token, this.arities)) {
        const key = succ.digit + (succ.letter ?? "") + "|" + succ.stack;
        if (!seen.has(key)) {
          seen.add(key);
          next.push(succ);
        }
      }
    }
    if (next.length === 0 || next.length > MAX_STATES) {
      return new GrammarState(null, this.arities);
    }
    return new GrammarState(next, this.arities);
  }
}

function _successors(config: Config, token: string,
                     arities?: Map<string, number>): Config[] {
  if (DIGIT.test(token)) {
    if (config.digit === "none") return [];
    if (config.letter !== undefined) {
      const slotArity = arities?.get(config.letter + token);
      if (slotArity === undefined) return [];  // slot undefined here
      return [{ stack: config.stack + "T".repeat(slotArity), digit: "none" }];
    }
    // guessed-arity letter: the digit names a slot, the guess stands
    return [{ stack: config.stack, digit: "none" }];
  }
  if (config.digit === "required") return [];

  // a completed stream may restart with another formula
  const stack = config.stack === "" ? "F" : config.stack;
  const top = stack[stack.length - 1];
  const rest = stack.slice(0, -1);
  if (top === "F" && token in FORMULA_HEADS) {
    return [{ stack: rest + FORMULA_HEADS[token], digit: "none" }];
  }
  if (top === "L" && (token === "O" || token === "P")) {
    return [{ stack: rest + "TT", digit: "none" }];
  }
  if (top === "T") {
    if (TERM_LEAVES.has(token)) {
      return [{ stack: rest, digit: "none" }];
    }
    if (token in TERM_OPS) {
      return [{ stack: rest + TERM_OPS[token], digit: "none" }];
    }
    if (LETTER.test(token)) {
      const known = arities?.get(token);
      if (known !== undefined) {
        return [
          // the loop function itself, exact arity
          { stack: rest + "T".repeat(known), digit: "none" },
          // or an argument/helper function: the digit decides
          { stack: rest, digit: "required", letter: token },
        ];
      }
      // unknown dummy-dropped arity: anywhere from nullary to ternary
      return [0, 1, 2, 3].map((arity) => (
        { stack: rest + "T".repeat(arity), digit: "optional" as const }));
    }
  }
  return [];
}
