import { beforeAll, describe, expect, it } from "vitest";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";
import "@tensorflow/tfjs-backend-wasm";

import { Vocab, PAD, UNK } from "../src/vocab";
import { Rng, makeBatch, parseProblemsFile, parseTrainingFile,
         writePredictions } from "../src/data";
import { DEFAULT_CONFIG, Translator } from "../src/model";
import { loadCheckpoint, saveCheckpoint } from "../src/checkpoint";
import { beamSearch } from "../src/beam";
import { train } from "../src/train";

const TINY = { ...DEFAULT_CONFIG, units: 16, layers: 2, embedding: 8 };

beforeAll(async () => {
  await tf.setBackend("wasm");
  await tf.ready();
});

describe("vocab", () => {
  it("round-trips every alphabet token", () => {
    const v = new Vocab();
    const tokens = v.tokens.filter(
      (t) => !t.startsWith("<"));
    expect(v.decode(v.encode(tokens))).toEqual(tokens);
  });

  it("maps out-of-vocabulary tokens to unk instead of crashing", () => {
    const v = new Vocab();
    expect(v.encode(["K", "???", "L"])).toEqual(
      [v.index.get("K"), v.unkId, v.index.get("L")]);
  });

  it("drops special symbols when decoding", () => {
    const v = new Vocab();
    expect(v.decode([v.padId, v.sosId, v.index.get("K")!, v.eosId]))
      .toEqual(["K"]);
  });
});

describe("protocol files", () => {
  it("parses training lines and ignores malformed ones", () => {
    const file = path.join(os.tmpdir(), `train-${Date.now()}.txt`);
    fs.writeFileSync(file, "J a K > O K K\nbroken line\nA = B > O A B\n");
    const examples = parseTrainingFile(file);
    expect(examples).toHaveLength(2);
    expect(examples[0].source).toEqual(["J", "a", "K"]);
    expect(examples[0].target).toEqual(["O", "K", "K"]);
  });

  it("reads problems and writes predictions in the agreed shape", () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "proto-"));
    fs.writeFileSync(path.join(dir, "problems.txt"), "P1\tJ a K L A\n");
    const problems = parseProblemsFile(path.join(dir, "problems.txt"));
    expect(problems).toEqual([{ id: "P1", tokens: ["J", "a", "K", "L", "A"] }]);
    writePredictions(path.join(dir, "out.txt"),
                     [{ id: "P1", rank: 1, tokens: ["O", "K", "K"] }]);
    expect(fs.readFileSync(path.join(dir, "out.txt"), "utf8"))
      .toBe("P1\t1\tO K K\n");
  });

  it("parses the optional arity column", () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "proto2-"));
    fs.writeFileSync(path.join(dir, "problems.txt"),
                     "P1\tJ a K L A\ta:1 a0:2 a3:2\n");
    const [prob] = parseProblemsFile(path.join(dir, "problems.txt"));
    expect(prob.arities!.get("a")).toBe(1);
    expect(prob.arities!.get("a3")).toBe(2);
  });

  it("pads batches and appends the end symbol", () => {
    const v = new Vocab();
    const batch = makeBatch(
      [{ source: ["K"], target: ["O", "K", "K"] },
       { source: ["K", "L"], target: ["P", "A", "K"] }], v, 10, 10);
    expect(batch.encIds[0]).toEqual([v.index.get("K"), v.padId]);
    expect(batch.decIn[0][0]).toBe(v.sosId);
    expect(batch.decOut[0][3]).toBe(v.eosId);
  });

  it("shuffles deterministically", () => {
    const a = new Rng(5).shuffle([1, 2, 3, 4, 5, 6]);
    const b = new Rng(5).shuffle([1, 2, 3, 4, 5, 6]);
    expect(a).toEqual(b);
  });
});

describe("model", () => {
  it("checkpoints round-trip bit-exactly", () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "ckpt-"));
    const model = new Translator(TINY, new Vocab());
    saveCheckpoint(dir, model);
    const loaded = loadCheckpoint(dir);
    const a = model.layerStack().flatMap((l) => l.getWeights());
    const b = loaded.layerStack().flatMap((l) => l.getWeights());
    expect(a.length).toBe(b.length);
    a.forEach((t, i) => {
      expect(Array.from(t.dataSync())).toEqual(Array.from(b[i].dataSync()));
    });
  });

  it("beam search is deterministic for a fixed checkpoint", () => {
    const model = new Translator(TINY, new Vocab());
    const v = model.vocab;
    const encIds = v.encode(["J", "a", "D", "K", "L", "K", "A"]);
    const r1 = beamSearch(model, encIds, 8, 12);
    const r2 = beamSearch(model, encIds, 8, 12);
    expect(r1.map((r) => r.tokens)).toEqual(r2.map((r) => r.tokens));
    expect(r1.length).toBeLessThanOrEqual(8);
  });

  it("never emits special tokens in decoded output", () => {
    const model = new Translator(TINY, new Vocab());
    const res = beamSearch(model, model.vocab.encode(["J", "a", "K"]), 6, 10);
    for (const r of res) {
      const toks = model.vocab.decode(r.tokens);
      expect(toks).not.toContain(PAD);
      expect(toks).not.toContain(UNK);
    }
  });

  it("grammar automaton enforces structure and exact arities", async () => {
    const { GrammarState } = await import("../src/grammar");
    // v0 unary, u0 binary via slot 3
    const arities = new Map([["a", 1], ["a0", 2], ["a1", 1], ["a2", 0],
                             ["a3", 2]]);
    let g = GrammarState.initial(arities);
    expect(g.allows("O")).toBe(true);    // a formula may start with =
    expect(g.allows("K")).toBe(false);   // but not with a bare term
    expect(g.allowsEnd()).toBe(false);
    for (const tok of ["O", "a", "K", "K"]) {
      expect(g.allows(tok)).toBe(true);
      g = g.consume(tok);
    }
    expect(g.allowsEnd()).toBe(true);    // (= (v0 x) x) is complete
    // slot digits: only defined slots, and they fix the arity
    let h = GrammarState.initial(arities);
    for (const tok of ["O", "a", "3", "K", "K", "K"]) {
      expect(h.allows(tok)).toBe(true);
      h = h.consume(tok);
    }
    expect(h.allowsEnd()).toBe(true);    // (= (u0 x x) x)
    let bad = GrammarState.initial(arities).consume("O").consume("a");
    expect(bad.allows("7")).toBe(false); // slot 7 undefined for a loop
    // letters outside the table stay expressible (health metric)
    let nfa = GrammarState.initial(arities).consume("O").consume("b");
    expect(nfa.allows("K")).toBe(true);
  });

  it("training refuses an empty example set", () => {
    expect(() => train([], TINY,
                       { steps: 1, batchSize: 1, learningRate: 1e-3,
                         logEvery: 1 },
                       fs.mkdtempSync(path.join(os.tmpdir(), "m-"))))
      .toThrow(/empty/);
  });

  it("loss decreases while memorizing a single example", () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "m1-"));
    const examples = [{ source: ["J", "a", "K"], target: ["O", "K", "K"] }];
    train(examples, TINY,
          { steps: 60, batchSize: 1, learningRate: 0.01, logEvery: 10 },
          dir, true);
    const curve = fs.readFileSync(path.join(dir, "loss_curve.csv"), "utf8")
      .trim().split("\n").slice(1)
      .map((line) => parseFloat(line.split(",")[1]));
    expect(curve[curve.length - 1]).toBeLessThan(curve[0] / 2);
  }, 120_000);
});
