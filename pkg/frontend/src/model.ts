/**
 * Encoder-decoder translation model.
 *
 * Encoder: embedding, then a stack of bidirectional LSTM layers.
 * Decoder: embedding, a stack of LSTM layers initialised from the
 * encoder's final states, scaled multiplicative attention (scores are
 * query . key / sqrt(units)) over the encoder memory, and a tanh
 * attentional layer feeding the output projection.
 *
 * All passes run the layers eagerly: the teacher-forced training
 * forward, and the single-step decode driving beam search, share the
 * exact same layer objects.
 */

import * as tf from "@tensorflow/tfjs";
import { Vocab } from "./vocab";

export interface ModelConfig {
  units: number;        // hidden size per direction
  layers: number;       // encoder (bidirectional) and decoder depth
  embedding: number;
  maxSource: number;
  maxTarget: number;    // maximum emitted tokens per output
  seed: number;
}

export const DEFAULT_CONFIG: ModelConfig = {
  units: 512,
  layers: 2,
  embedding: 64,
  maxSource: 120,
  maxTarget: 60,
  seed: 7,
};

export interface EncoderOutput {
  memory: tf.Tensor3D;      // [batch, srcLen, 2*units]
  keys: tf.Tensor3D;        // [batch, srcLen, units]
  states: tf.Tensor2D[];    // decoder initial [h, c] per layer
}

export class Translator {
  readonly cfg: ModelConfig;
  readonly vocab: Vocab;
  private embedding!: tf.layers.Layer;
  private encLayers: tf.layers.Layer[] = [];
  private stateDense: tf.layers.Layer[] = [];  // bridge enc states to dec
  private keyDense!: tf.layers.Layer;          // attention score projection
  private decCells: tf.layers.Layer[] = [];
  private attnCombine!: tf.layers.Layer;
  private outProj!: tf.layers.Layer;

  constructor(cfg: ModelConfig, vocab: Vocab) {
    this.cfg = cfg;
    this.vocab = vocab;
    this.buildLayers();
    // one dummy pass builds every layer so weights exist in a fixed order
    tf.tidy(() => {
      const enc = this.runEncoder([[vocab.padId]]);
      const step = this.decodeStep([vocab.sosId], enc.states, enc.memory,
                                   enc.keys);
      step.logProbs.dispose();
      step.states.forEach((s) => s.dispose());
      enc.memory.dispose();
      enc.keys.dispose();
      enc.states.forEach((s) => s.dispose());
      return tf.scalar(0);
    }).dispose();
  }

  private buildLayers(): void {
    const { units, layers, embedding, seed } = this.cfg;
    const V = this.vocab.size;
    const init = (s: number) => tf.initializers.glorotUniform({ seed: s });

    // one-hot times dense instead of a gather-based embedding: the
    // gather gradient kernel is unavailable on the wasm backend
    this.embedding = tf.layers.dense({
      units: embedding, useBias: false, name: "embed",
      kernelInitializer: init(seed),
    });
    for (let l = 0; l < layers; l++) {
      this.encLayers.push(tf.layers.bidirectional({
        layer: tf.layers.lstm({
          units, returnSequences: true, returnState: true,
          kernelInitializer: init(seed + 10 + l),
          recurrentInitializer: tf.initializers.orthogonal({ seed: seed + 20 + l }),
        }) as tf.layers.RNN,
        mergeMode: "concat", name: `enc_${l}`,
      }));
    }
    for (let l = 0; l < 2 * layers; l++) {
      this.stateDense.push(tf.layers.dense({
        units, activation: "tanh", name: `bridge_${l}`,
        kernelInitializer: init(seed + 30 + l),
      }));
    }
    this.keyDense = tf.layers.dense({
      units, useBias: false, name: "attn_keys",
      kernelInitializer: init(seed + 40),
    });
    for (let l = 0; l < layers; l++) {
      this.decCells.push(tf.layers.lstm({
        units, returnSequences: true, returnState: true, name: `dec_${l}`,
        kernelInitializer: init(seed + 50 + l),
        recurrentInitializer: tf.initializers.orthogonal({ seed: seed + 60 + l }),
      }));
    }
    this.attnCombine = tf.layers.dense({
      units, activation: "tanh", useBias: false, name: "attn_combine",
      kernelInitializer: init(seed + 70),
    });
    this.outProj = tf.layers.dense({
      units: V, name: "out_proj", kernelInitializer: init(seed + 80),
    });
  }

  /** Fixed traversal of the owned layers. */
  layerStack(): tf.layers.Layer[] {
    return [this.embedding, ...this.encLayers, ...this.stateDense,
            this.keyDense, ...this.decCells, this.attnCombine, this.outProj];
  }

  trainableVariables(): tf.Variable[] {
    const out: tf.Variable[] = [];
    for (const layer of this.layerStack()) {
      for (const w of layer.trainableWeights) {
        out.push((w as unknown as { val: tf.Variable }).val);
      }
    }
    return out;
  }

  private embedIds(ids: number[][]): tf.Tensor3D {
    const hot = tf.tidy(() => tf.cast(
      tf.oneHot(tf.tensor2d(ids, undefined, "int32"), this.vocab.size),
      "float32"));
    const out = this.embedding.apply(hot) as tf.Tensor3D;
    hot.dispose();
    return out;
  }

  /** Encoder pass; caller owns the returned tensors. */
  runEncoder(encIds: number[][]): EncoderOutput {
    let seq: tf.Tensor = this.embedIds(encIds);
    let states: tf.Tensor[] = [];
    for (const layer of this.encLayers) {
      const out = layer.apply(seq) as tf.Tensor[];
      seq = out[0];
      states = out.slice(1);  // fwd h, fwd c, bwd h, bwd c of the top layer
    }
    const keys = this.keyDense.apply(seq) as tf.Tensor3D;
    const initStates: tf.Tensor2D[] = [];
    for (let l = 0; l < this.cfg.layers; l++) {
      const h = this.stateDense[2 * l].apply(
        tf.concat([states[0], states[2]], 1)) as tf.Tensor2D;
      const c = this.stateDense[2 * l + 1].apply(
        tf.concat([states[1], states[3]], 1)) as tf.Tensor2D;
      initStates.push(h, c);
    }
    return { memory: seq as tf.Tensor3D, keys, states: initStates };
  }

  private attention(decSeq: tf.Tensor3D, memory: tf.Tensor3D,
                    keys: tf.Tensor3D): tf.Tensor3D {
    const scores = tf.mul(tf.matMul(decSeq, keys, false, true),
                          1 / Math.sqrt(this.cfg.units));
    const weights = tf.softmax(scores, -1);
    const context = tf.matMul(weights, memory);
    const merged = tf.concat([context, decSeq], 2);
    const attentional = this.attnCombine.apply(merged) as tf.Tensor3D;
    return this.outProj.apply(attentional) as tf.Tensor3D;
  }

  /** Teacher-forced forward pass: [batch, tgtLen, vocab] logits. */
  forward(encIds: number[][], decIn: number[][]): tf.Tensor3D {
    const enc = this.runEncoder(encIds);
    let seq: tf.Tensor = this.embedIds(decIn);
    for (let l = 0; l < this.cfg.layers; l++) {
      const out = this.decCells[l].apply(seq, {
        initialState: [enc.states[2 * l], enc.states[2 * l + 1]],
      } as never) as tf.Tensor[];
      seq = out[0];
    }
    return this.attention(seq as tf.Tensor3D, enc.memory, enc.keys);
  }

  /** One decoder step for beam search; caller owns returned tensors. */
  decodeStep(tokens: number[], states: tf.Tensor2D[], memory: tf.Tensor3D,
             keys: tf.Tensor3D): { logProbs: tf.Tensor2D; states: tf.Tensor2D[] } {
    return tf.tidy(() => {
      let seq: tf.Tensor = this.embedIds(tokens.map((t) => [t]));
      const newStates: tf.Tensor2D[] = [];
      for (let l = 0; l < this.cfg.layers; l++) {
        const out = this.decCells[l].apply(seq, {
          initialState: [states[2 * l], states[2 * l + 1]],
        } as never) as tf.Tensor[];
        seq = out[0];
        newStates.push(tf.keep(out[1]) as tf.Tensor2D,
                       tf.keep(out[2]) as tf.Tensor2D);
      }
      const logits = this.attention(seq as tf.Tensor3D, memory, keys)
        .squeeze([1]) as tf.Tensor2D;
      return { logProbs: tf.keep(tf.logSoftmax(logits)) as tf.Tensor2D,
               states: newStates };
    });
  }
}
