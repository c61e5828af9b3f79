/**
 * Batch inference: one beam search per problem, ranked token streams in
 * the prediction-file format.  Unknown input tokens map to the unknown
 * id; output lines never contain special symbols, so the file is
 * protocol-valid no matter how poorly the model is trained.
 */

import { ProblemEntry, writePredictions } from "./data";
import { beamSearch } from "./beam";
import { Translator } from "./model";

export function inferAll(model: Translator, problems: ProblemEntry[],
                         beamWidth: number,
                         onProgress?: (done: number, total: number) => void
                         ): Array<{ id: string; rank: number; tokens: string[] }> {
  const rows: Array<{ id: string; rank: number; tokens: string[] }> = [];
  const vocab = model.vocab;
  problems.forEach((prob, i) => {
    const encIds = vocab.encode(prob.tokens).slice(0, model.cfg.maxSource);
    const results = beamSearch(model, encIds, beamWidth, model.cfg.maxTarget,
                               prob.arities);
    let rank = 1;
    for (const res of results) {
      const tokens = vocab.decode(res.tokens);
      if (tokens.length === 0) continue;
      rows.push({ id: prob.id, rank, tokens });
      rank += 1;
    }
    onProgress?.(i + 1, problems.length);
  });
  return rows;
}

export function runInference(model: Translator, problems: ProblemEntry[],
                             beamWidth: number, outPath: string,
                             quiet = false): void {
  const rows = inferAll(model, problems, beamWidth,
    quiet ? undefined : (done, total) => {
      if (done % 10 === 0 || done === total) {
        process.stderr.write(`inferred ${done}/${total} problems\n`);
      }
    });
  writePredictions(outPath, rows);
}
