/**
 * File protocol:
 *   training file   one example per line: "problem-tokens > solution-tokens"
 *   problems file   one problem per line: "id TAB problem-tokens"
 *   predictions     one line per beam entry: "id TAB rank TAB tokens"
 */

import * as fs from "fs";
import { Vocab } from "./vocab";

export interface Example {
  source: string[];
  target: string[];
}

export function parseTrainingFile(path: string): Example[] {
  const out: Example[] = [];
  const text = fs.readFileSync(path, "utf8");
  for (const raw of text.split("\n")) {
    const line = raw.trim();
    if (!line) continue;
    const cut = line.indexOf(" > ");
    if (cut < 0) continue;
    const source = line.slice(0, cut).trim().split(/\s+/);
    const target = line.slice(cut + 3).trim().split(/\s+/);
    if (source.length && target.length) {
      out.push({ source, target });
    }
  }
  return out;
}

export interface ProblemEntry {
  id: string;
  tokens: string[];
  /** optional per-letter arities ("a" for the loop function itself,
   * "a3" for slot 3); enables exact grammar-guided decoding */
  arities?: Map<string, number>;
}

export function parseProblemsFile(path: string): ProblemEntry[] {
  const out: ProblemEntry[] = [];
  for (const raw of fs.readFileSync(path, "utf8").split("\n")) {
    const line = raw.trimEnd();
    if (!line) continue;
    const cols = line.split("\t");
    if (cols.length < 2) continue;
    const entry: ProblemEntry = {
      id: cols[0], tokens: cols[1].trim().split(/\s+/),
    };
    if (cols.length >= 3 && cols[2].trim()) {
      entry.arities = new Map();
      for (const part of cols[2].trim().split(/\s+/)) {
        const [sym, arity] = part.split(":");
        if (sym && arity !== undefined) {
          entry.arities.set(sym, parseInt(arity, 10));
        }
      }
    }
    out.push(entry);
  }
  return out;
}

export function writePredictions(
  path: string,
  rows: Array<{ id: string; rank: number; tokens: string[] }>,
): void {
  const lines = rows.map((r) => `${r.id}\t${r.rank}\t${r.tokens.join(" ")}`);
  fs.writeFileSync(path, lines.join("\n") + (lines.length ? "\n" : ""));
}

/** Deterministic shuffling and batch selection. */
export class Rng {
  private state: number;

  constructor(seed: number) {
    this.state = seed >>> 0 || 1;
  }

  next(): number {
    // xorshift32
    let x = this.state;
    x ^= x << 13; x >>>= 0;
    x ^= x >> 17;
    x ^= x << 5; x >>>= 0;
    this.state = x;
    return x / 0x100000000;
  }

  intBelow(n: number): number {
    return Math.floor(this.next() * n);
  }

  shuffle<T>(items: T[]): T[] {
    const arr = items.slice();
    for (let i = arr.length - 1; i > 0; i--) {
      const j = this.intBelow(i + 1);
      [arr[i], arr[j]] = [arr[j], arr[i]];
    }
    return arr;
  }
}

export interface Batch {
  encIds: number[][];   // [batch, maxSrc], left-padded with PAD
  decIn: number[][];    // [batch, maxTgt+1], starts with SOS
  decOut: number[][];   // [batch, maxTgt+1], ends with EOS
}

export function makeBatch(examples: Example[], vocab: Vocab,
                          maxSource: number, maxTarget: number): Batch {
  const srcLen = Math.min(
    Math.max(...examples.map((e) => e.source.length)), maxSource);
  const tgtLen = Math.min(
    Math.max(...examples.map((e) => e.target.length)), maxTarget) + 1;
  const encIds: number[][] = [];
  const decIn: number[][] = [];
  const decOut: number[][] = [];
  for (const ex of examples) {
    const src = vocab.encode(ex.source.slice(0, srcLen));
    const tgt = vocab.encode(ex.target.slice(0, tgtLen - 1));
    encIds.push([...src, ...Array(srcLen - src.length).fill(vocab.padId)]);
    const din = [vocab.sosId, ...tgt];
    const dout = [...tgt, vocab.eosId];
    while (din.length < tgtLen) din.push(vocab.padId);
    while (dout.length < tgtLen) dout.push(vocab.padId);
    decIn.push(din);
    decOut.push(dout);
  }
  return { encIds, decIn, decOut };
}
