/**
 * Closed token vocabulary.
 *
 * The alphabet is exactly the one the primary toolchain emits: uppercase
 * letters for fixed operators, the problem separator "=", lowercase
 * letters a..t for loop functions, digits 0..7 for argument/helper
 * slots, and "Z" for the rare third variable.  No subword units: every
 * token is atomic.
 */

export const PAD = "<pad>";
export const SOS = "<s>";
export const EOS = "</s>";
export const UNK = "<unk>";

const OPERATOR_TOKENS = [
  "A", "B", "C", "D", "E", "F", "G", "H", "I", "J",
  "K", "L", "M", "N", "O", "P", "Q", "R", "S", "T", "Z",
];
const LOOP_LETTERS = "abcdefghijklmnopqrst".split("");
const SLOT_DIGITS = ["0", "1", "2", "3", "4", "5", "6", "7"];
const SEPARATOR = ["="];

export class Vocab {
  readonly tokens: string[];
  readonly index: Map<string, number>;

  constructor() {
    this.tokens = [PAD, SOS, EOS, UNK,
                   ...OPERATOR_TOKENS, ...LOOP_LETTERS, ...SLOT_DIGITS,
                   ...SEPARATOR];
    this.index = new Map(this.tokens.map((t, i) => [t, i]));
  }

  get size(): number {
    return this.tokens.length;
  }

  get padId(): number { return this.index.get(PAD)!; }
  get sosId(): number { return this.index.get(SOS)!; }
  get eosId(): number { return this.index.get(EOS)!; }
  get unkId(): number { return this.index.get(UNK)!; }

  /** Token ids; anything outside the alphabet maps to the unknown id. */
  encode(tokens: string[]): number[] {
    return tokens.map((t) => this.index.get(t) ?? this.unkId);
  }

  /** Ids back to tokens, dropping the special symbols. */
  decode(ids: number[]): string[] {
    const out: string[] = [];
    for (const id of ids) {
      const tok = this.tokens[id];
      if (tok === undefined || tok === PAD || tok === SOS || tok === EOS
          || tok === UNK) {
        continue;
      }
      out.push(tok);
    }
    return out;
  }
}
