/**
 * Directory checkpoints: model.json holds the configuration and weight
 * manifest, weights.bin the concatenated float32 buffers.  Weights are
 * keyed by layer in the model's fixed traversal order.  The format is
 * internal to this component; only protocol files cross the boundary
 * to the prover toolchain.
 */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";
import { ModelConfig, Translator } from "./model";
import { Vocab } from "./vocab";

interface Manifest {
  config: ModelConfig;
  weights: Array<{ layer: number; shape: number[]; length: number }>;
}

export function saveCheckpoint(dir: string, model: Translator): void {
  fs.mkdirSync(dir, { recursive: true });
  const manifest: Manifest = { config: model.cfg, weights: [] };
  const buffers: Buffer[] = [];
  model.layerStack().forEach((layer, li) => {
    for (const tensor of layer.getWeights()) {
      const data = tensor.dataSync() as Float32Array;
      manifest.weights.push({ layer: li, shape: tensor.shape.slice(),
                              length: data.length });
      buffers.push(Buffer.from(data.buffer.slice(
        data.byteOffset, data.byteOffset + data.byteLength)));
    }
  });
  fs.writeFileSync(path.join(dir, "model.json"),
                   JSON.stringify(manifest, null, 1));
  fs.writeFileSync(path.join(dir, "weights.bin"), Buffer.concat(buffers));
}

export function loadCheckpoint(dir: string): Translator {
  const manifest: Manifest = JSON.parse(
    fs.readFileSync(path.join(dir, "model.json"), "utf8"));
  const raw = fs.readFileSync(path.join(dir, "weights.bin"));
  const model = new Translator(manifest.config, new Vocab());
  const perLayer = new Map<number, tf.Tensor[]>();
  let offset = 0;
  for (const spec of manifest.weights) {
    const bytes = spec.length * 4;
    const arr = new Float32Array(raw.buffer.slice(
      raw.byteOffset + offset, raw.byteOffset + offset + bytes));
    if (!perLayer.has(spec.layer)) perLayer.set(spec.layer, []);
    perLayer.get(spec.layer)!.push(tf.tensor(arr, spec.shape));
    offset += bytes;
  }
  model.layerStack().forEach((layer, li) => {
    const tensors = perLayer.get(li) ?? [];
    if (tensors.length) {
      layer.setWeights(tensors);
      tensors.forEach((t) => t.dispose());
    }
  });
  return model;
}
