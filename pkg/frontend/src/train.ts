/**
 * Training: teacher forcing with Adam on padded mini-batches, masked
 * cross-entropy.  Emits the checkpoint directory and a loss curve
 * (step,loss per line).
 */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";
import { Example, Rng, makeBatch } from "./data";
import { ModelConfig, Translator } from "./model";
import { saveCheckpoint } from "./checkpoint";
import { Vocab } from "./vocab";

export interface TrainOptions {
  steps: number;
  batchSize: number;
  learningRate: number;
  logEvery: number;
}

export const DEFAULT_TRAIN: TrainOptions = {
  steps: 2000,
  batchSize: 16,
  learningRate: 1e-3,
  logEvery: 25,
};

export function train(examples: Example[], cfg: ModelConfig,
                      opts: TrainOptions, outDir: string,
                      quiet = false): Translator {
  if (examples.length === 0) {
    throw new Error("refusing to train on an empty example set");
  }
  const vocab = new Vocab();
  const model = new Translator(cfg, vocab);
  const optimizer = tf.train.adam(opts.learningRate);
  const rng = new Rng(cfg.seed);
  const curve: string[] = [];

  // batches hold equal-length sources only: the bidirectional encoder
  // is never trained on padding it will not see at inference time
  const groups = new Map<number, Example[]>();
  for (const ex of examples) {
    const key = Math.min(ex.source.length, cfg.maxSource);
    if (!groups.has(key)) groups.set(key, []);
    groups.get(key)!.push(ex);
  }
  let order: Example[][] = [];
  const reshuffle = () => {
    order = [];
    for (const group of [...groups.values()]) {
      const shuffled = rng.shuffle(group);
      for (let i = 0; i < shuffled.length; i += opts.batchSize) {
        order.push(shuffled.slice(i, i + opts.batchSize));
      }
    }
    order = rng.shuffle(order);
  };
  reshuffle();
  let cursor = 0;
  const nextBatch = () => {
    if (cursor >= order.length) {
      reshuffle();
      cursor = 0;
    }
    return makeBatch(order[cursor++], vocab, cfg.maxSource, cfg.maxTarget);
  };

  for (let step = 1; step <= opts.steps; step++) {
    const batch = nextBatch();
    const loss = tf.tidy(() => {
      const target = tf.tensor2d(batch.decOut, undefined, "int32");
      const mask = tf.cast(tf.notEqual(target, vocab.padId), "float32");
      const value = optimizer.minimize(() => {
        const logits = model.forward(batch.encIds, batch.decIn);
        const ce = tf.losses.softmaxCrossEntropy(
          tf.oneHot(target, vocab.size), logits,
          undefined, tf.Reduction.NONE) as tf.Tensor2D;
        return tf.div(tf.sum(tf.mul(ce, mask)), tf.sum(mask)) as tf.Scalar;
      }, true, model.trainableVariables());
      return value!.dataSync()[0];
    });
    if (step === 1 || step % opts.logEvery === 0 || step === opts.steps) {
      curve.push(`${step},${loss.toFixed(5)}`);
      if (!quiet) {
        process.stderr.write(`step ${step}/${opts.steps} loss ${loss.toFixed(4)}\n`);
      }
    }
  }
  saveCheckpoint(outDir, model);
  fs.writeFileSync(path.join(outDir, "loss_curve.csv"),
                   "step,loss\n" + curve.join("\n") + "\n");
  return model;
}
