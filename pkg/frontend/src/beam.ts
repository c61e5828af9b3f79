/**
 * Beam search over the stepwise decoder.
 *
 * All live beams advance together as one batch; finished beams (those
 * that emitted the end symbol) are frozen and the freed slots keep
 * carrying the best unfinished continuations.  Results are ranked by
 * total log-probability, ties broken by discovery order, so inference
 * is deterministic for a fixed checkpoint.
 */

import * as tf from "@tensorflow/tfjs";
import { GrammarState } from "./grammar";
import { Translator } from "./model";

export interface BeamResult {
  tokens: number[];
  score: number;
}

export function beamSearch(model: Translator, encIds: number[],
                           width: number, maxLen: number,
                           arities?: Map<string, number>): BeamResult[] {
  const vocab = model.vocab;
  const enc = model.runEncoder([encIds]);
  try {
    interface Beam {
      tokens: number[];
      score: number;
      stateIdx: number;  // row into the live state tensors
      grammar: GrammarState;
    }

    let live: Beam[] = [{ tokens: [vocab.sosId], score: 0, stateIdx: 0,
                          grammar: GrammarState.initial(arities) }];
    let states = enc.states.map((s) => tf.keep(s.clone()) as tf.Tensor2D);
    const finished: BeamResult[] = [];

    for (let t = 0; t < maxLen && live.length > 0; t++) {
      const lastTokens = live.map((b) => b.tokens[b.tokens.length - 1]);
      const gathered = states.map((s) => tf.tidy(() => tf.keep(
        tf.gather(s, live.map((b) => b.stateIdx)))) as tf.Tensor2D);
      states.forEach((s) => s.dispose());

      const memory = tf.tidy(() => tf.keep(
        tf.tile(enc.memory, [live.length, 1, 1]))) as tf.Tensor3D;
      const keys = tf.tidy(() => tf.keep(
        tf.tile(enc.keys, [live.length, 1, 1]))) as tf.Tensor3D;
      const out = model.decodeStep(lastTokens, gathered, memory, keys);
      memory.dispose();
      keys.dispose();
      gathered.forEach((s) => s.dispose());

      const logProbs = out.logProbs.arraySync() as number[][];
      out.logProbs.dispose();

      const expansions: Array<{ beam: Beam; token: number; score: number }> = [];
      live.forEach((beam, bi) => {
        const row = logProbs[bi];
        // a shallow cut keeps expansion quadratic in the width, not V
        const order = row.map((lp, tok) => [lp, tok] as [number, number])
          .sort((a, b) => b[0] - a[0] || a[1] - b[1])
          .slice(0, width + 1);
        for (const [lp, tok] of order) {
          if (tok === vocab.padId || tok === vocab.sosId
              || tok === vocab.unkId) {
            continue;
          }
          // the grammar automaton prunes structurally dead continuations
          if (tok === vocab.eosId) {
            if (!beam.grammar.allowsEnd()) continue;
          } else if (!beam.grammar.allows(vocab.tokens[tok])) {
            continue;
          }
          expansions.push({ beam: { ...beam, stateIdx: bi },
                            token: tok, score: beam.score + lp });
        }
      });
      expansions.sort((a, b) => b.score - a.score);

      const nextLive: Beam[] = [];
      const keepRows: number[] = [];
      for (const exp of expansions) {
        if (finished.length + nextLive.length >= width) break;
        if (exp.token === vocab.eosId) {
          finished.push({ tokens: exp.beam.tokens.slice(1), score: exp.score });
          continue;
        }
        keepRows.push(exp.beam.stateIdx);
        nextLive.push({ tokens: [...exp.beam.tokens, exp.token],
                        score: exp.score, stateIdx: keepRows.length - 1,
                        grammar: exp.beam.grammar.consume(
                          vocab.tokens[exp.token]) });
      }
      states = out.states.map((s) => tf.tidy(() => tf.keep(
        tf.gather(s, keepRows))) as tf.Tensor2D);
      out.states.forEach((s) => s.dispose());
      live = nextLive;
    }
    // sequences alive at the length cap count when they may end here
    for (const beam of live) {
      if (finished.length >= width) break;
      if (beam.grammar.allowsEnd()) {
        finished.push({ tokens: beam.tokens.slice(1), score: beam.score });
      }
    }
    states.forEach((s) => s.dispose());
    finished.sort((a, b) => b.score - a.score);
    return finished.slice(0, width);
  } finally {
    enc.memory.dispose();
    enc.keys.dispose();
    enc.states.forEach((s) => s.dispose());
  }
}
