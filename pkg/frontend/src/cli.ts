#!/usr/bin/env ts-node
/**
 * predictor CLI
 *
 *   train --data FILE --out DIR [--steps N] [--units N] [--layers N]
 *         [--embedding N] [--batch N] [--lr F] [--seed N]
 *   infer --model DIR --problems FILE --out FILE [--beam N]
 *
 * Exit codes: 0 success, 1 refused/failed, 2 usage error.
 */

import { parseArgs } from "node:util";
import * as tf from "@tensorflow/tfjs";
import "@tensorflow/tfjs-backend-wasm";
import { parseProblemsFile, parseTrainingFile } from "./data";
import { DEFAULT_CONFIG } from "./model";
import { loadCheckpoint } from "./checkpoint";
import { DEFAULT_TRAIN, train } from "./train";
import { runInference } from "./infer";

function usage(): never {
  process.stderr.write(
    "usage: cli.ts train --data FILE --out DIR [--steps N] [--units N]\n" +
    "       cli.ts infer --model DIR --problems FILE --out FILE [--beam N]\n");
  process.exit(2);
}

async function main(): Promise<number> {
  try {
    await tf.setBackend("wasm");
    await tf.ready();
  } catch {
    await tf.setBackend("cpu");  // slower, still correct
    await tf.ready();
  }
  const [command, ...rest] = process.argv.slice(2);
  if (command === "train") {
    const { values } = parseArgs({
      args: rest,
      options: {
        data: { type: "string" }, out: { type: "string" },
        steps: { type: "string" }, units: { type: "string" },
        layers: { type: "string" }, embedding: { type: "string" },
        batch: { type: "string" }, lr: { type: "string" },
        seed: { type: "string" }, quiet: { type: "boolean" },
      },
    });
    if (!values.data || !values.out) usage();
    const examples = parseTrainingFile(values.data);
    if (examples.length === 0) {
      process.stderr.write("no usable training examples; refusing to train\n");
      return 1;
    }
    const cfg = {
      ...DEFAULT_CONFIG,
      units: values.units ? parseInt(values.units, 10) : DEFAULT_CONFIG.units,
      layers: values.layers ? parseInt(values.layers, 10) : DEFAULT_CONFIG.layers,
      embedding: values.embedding ? parseInt(values.embedding, 10)
                                  : DEFAULT_CONFIG.embedding,
      seed: values.seed ? parseInt(values.seed, 10) : DEFAULT_CONFIG.seed,
    };
    const opts = {
      ...DEFAULT_TRAIN,
      steps: values.steps ? parseInt(values.steps, 10) : DEFAULT_TRAIN.steps,
      batchSize: values.batch ? parseInt(values.batch, 10)
                              : DEFAULT_TRAIN.batchSize,
      learningRate: values.lr ? parseFloat(values.lr)
                              : DEFAULT_TRAIN.learningRate,
    };
    train(examples, cfg, opts, values.out, values.quiet ?? false);
    return 0;
  }
  if (command === "infer") {
    const { values } = parseArgs({
      args: rest,
      options: {
        model: { type: "string" }, problems: { type: "string" },
        out: { type: "string" }, beam: { type: "string" },
        quiet: { type: "boolean" },
      },
    });
    if (!values.model || !values.problems || !values.out) usage();
    const model = loadCheckpoint(values.model);
    const problems = parseProblemsFile(values.problems);
    const beam = values.beam ? parseInt(values.beam, 10) : 240;
    runInference(model, problems, beam, values.out, values.quiet ?? false);
    return 0;
  }
  usage();
}

main().then((code) => process.exit(code)).catch((err) => {
  console.error(err);
  process.exit(1);
});
