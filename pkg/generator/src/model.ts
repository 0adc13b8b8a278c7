/**
 * Encoder-decoder with attention over attribute-value pairs.
 *
 * Encoder: per-position concatenated embeddings (attribute, value, and the
 * variant's side-constraint features) fed through a stacked bidirectional
 * LSTM. Decoder: stacked unidirectional LSTM whose next-word distribution
 * conditions on the previous words, the encoded MR, and the feature
 * constraints; attention uses the general bilinear score.
 */
import * as tf from '@tensorflow/tfjs';

import { GeneratorConfig } from './config';
import { BOS, EOS, EncodedMr, MrVocabs, PAD } from './encode';
import { Rng } from './rng';
import { Vocab } from './vocab';

const NEG_INF = -1e9;

export interface DecoderState {
  c: tf.Tensor2D[];
  h: tf.Tensor2D[];
}

export interface EncodedBatch {
  encOut: tf.Tensor3D; // [B, S, 2H]
  attnMask: tf.Tensor2D; // [B, S], 0 valid / NEG_INF pad
  state: DecoderState;
}

export class Seq2Seq {
  readonly config: GeneratorConfig;
  readonly vocabs: MrVocabs;
  readonly vars = new Map<string, tf.Variable>();

  constructor(config: GeneratorConfig, vocabs: MrVocabs, rng?: Rng) {
    this.config = config;
    this.vocabs = vocabs;
    if (rng) this.initVariables(rng);
  }

  private addVar(name: string, shape: number[], data: Float32Array): void {
    this.vars.set(name, tf.variable(tf.tensor(data, shape), true, name));
  }

  private initVariables(rng: Rng): void {
    const cfg = this.config;
    for (const column of this.vocabs.columns) {
      const vocab = this.vocabs.byColumn[column];
      const dim = column === 'val' ? cfg.valueEmbed : column === 'attr' ? cfg.attrEmbed : cfg.featureEmbed;
      this.addVar(`emb/${column}`, [vocab.size, dim], rng.glorot(vocab.size, dim));
    }
    this.addVar(
      'emb/target',
      [this.vocabs.target.size, cfg.targetEmbed],
      rng.glorot(this.vocabs.target.size, cfg.targetEmbed),
    );
    const H = cfg.hidden;
    const inputDim = this.inputDim();
    for (let layer = 0; layer < cfg.layers; layer++) {
      const encIn = layer === 0 ? inputDim : H;
      for (const dir of ['fw', 'bw']) {
        this.addVar(`enc/${dir}/${layer}/kernel`, [encIn + H, 4 * H], rng.glorot(encIn + H, 4 * H));
        this.addVar(`enc/${dir}/${layer}/bias`, [4 * H], new Float32Array(4 * H));
      }
      const decIn = layer === 0 ? cfg.targetEmbed : H;
      this.addVar(`dec/${layer}/kernel`, [decIn + H, 4 * H], rng.glorot(decIn + H, 4 * H));
      this.addVar(`dec/${layer}/bias`, [4 * H], new Float32Array(4 * H));
    }
    this.addVar('bridge/kernel', [2 * H, H], rng.glorot(2 * H, H));
    this.addVar('bridge/bias', [H], new Float32Array(H));
    this.addVar('attn/kernel', [H, 2 * H], rng.glorot(H, 2 * H));
    this.addVar('combine/kernel', [3 * H, H], rng.glorot(3 * H, H));
    this.addVar('combine/bias', [H], new Float32Array(H));
    this.addVar('out/kernel', [H, this.vocabs.target.size], rng.glorot(H, this.vocabs.target.size));
    this.addVar('out/bias', [this.vocabs.target.size], new Float32Array(this.vocabs.target.size));
  }

  inputDim(): number {
    const cfg = this.config;
    let dim = 0;
    for (const column of this.vocabs.columns) {
      dim += column === 'val' ? cfg.valueEmbed : column === 'attr' ? cfg.attrEmbed : cfg.featureEmbed;
    }
    return dim;
  }

  private v(name: string): tf.Variable {
    const found = this.vars.get(name);
    if (!found) throw new Error(`missing variable ${name}`);
    return found;
  }

  trainableVars(): tf.Variable[] {
    return [...this.vars.values()];
  }

  /** Pad encoded MRs to a [B, S, columns] id block plus validity mask. */
  private padInputs(batch: EncodedMr[]): { ids: number[][][]; valid: number[][] } {
    const S = Math.max(...batch.map((e) => e.length));
    const cols = this.vocabs.columns.length;
    const padRow = new Array(cols).fill(0); // PAD id is 0 in every column vocab
    const ids: number[][][] = [];
    const valid: number[][] = [];
    for (const encoded of batch) {
      const rows = encoded.ids.slice();
      const flags = new Array(encoded.length).fill(1);
      while (rows.length < S) {
        rows.push(padRow);
        flags.push(0);
      }
      ids.push(rows);
      valid.push(flags);
    }
    return { ids, valid };
  }

  private embedInputs(ids: number[][][]): tf.Tensor3D {
    const [B, S] = [ids.length, ids[0].length];
    const pieces: tf.Tensor3D[] = [];
    this.vocabs.columns.forEach((column, c) => {
      const colIds = tf.tensor2d(
        ids.map((rows) => rows.map((row) => row[c])),
        [B, S],
        'int32',
      );
      pieces.push(tf.gather(this.v(`emb/${column}`), colIds) as tf.Tensor3D);
      colIds.dispose();
    });
    return tf.concat3d(pieces, 2);
  }

  private runLstmStack(
    prefix: 'fw' | 'bw' | 'dec',
    xs: tf.Tensor2D[],
    init: DecoderState | null,
    training: boolean,
  ): { outputs: tf.Tensor2D[]; state: DecoderState } {
    const cfg = this.config;
    const B = xs[0].shape[0];
    const zeros = () => tf.zeros([B, cfg.hidden]) as tf.Tensor2D;
    let c = init ? init.c.slice() : Array.from({ length: cfg.layers }, zeros);
    let h = init ? init.h.slice() : Array.from({ length: cfg.layers }, zeros);
    const outputs: tf.Tensor2D[] = [];
    for (const x of xs) {
      let input: tf.Tensor2D = x;
      for (let layer = 0; layer < cfg.layers; layer++) {
        const key = prefix === 'dec' ? `dec/${layer}` : `enc/${prefix}/${layer}`;
        const [newC, newH] = tf.basicLSTMCell(
          1.0,
          this.v(`${key}/kernel`) as tf.Tensor2D,
          this.v(`${key}/bias`) as tf.Tensor1D,
          c[layer],
          h[layer],
          input,
        );
        c[layer] = newC as tf.Tensor2D;
        h[layer] = newH as tf.Tensor2D;
        input = h[layer];
        if (training && cfg.dropout > 0 && layer < cfg.layers - 1) {
          input = tf.dropout(input, cfg.dropout) as tf.Tensor2D;
        }
      }
      outputs.push(input);
    }
    return { outputs, state: { c, h } };
  }

  /** Encode a batch of MRs; decoder state is bridged from mean-pooled output. */
  encodeBatch(batch: EncodedMr[], training = false): EncodedBatch {
    const { ids, valid } = this.padInputs(batch);
    const [B, S] = [ids.length, ids[0].length];
    const embedded = this.embedInputs(ids); // [B, S, D]
    const steps: tf.Tensor2D[] = [];
    for (let t = 0; t < S; t++) {
      steps.push(embedded.slice([0, t, 0], [B, 1, -1]).reshape([B, -1]) as tf.Tensor2D);
    }
    const fw = this.runLstmStack('fw', steps, null, training);
    const bw = this.runLstmStack('bw', steps.slice().reverse(), null, training);
    bw.outputs.reverse();
    const encSteps = steps.map((_, t) => tf.concat2d([fw.outputs[t], bw.outputs[t]], 1));
    const encOut = tf.stack(encSteps, 1) as tf.Tensor3D; // [B, S, 2H]
    const validMask = tf.tensor2d(valid, [B, S]); // 1 valid / 0 pad
    const attnMask = validMask.sub(1).mul(-NEG_INF) as tf.Tensor2D; // 0 valid / NEG_INF pad
    const weights = validMask.expandDims(2); // [B, S, 1]
    const pooled = encOut.mul(weights).sum(1).div(weights.sum(1)) as tf.Tensor2D; // [B, 2H]
    const h0 = tf.tanh(pooled.matMul(this.v('bridge/kernel') as tf.Tensor2D).add(this.v('bridge/bias'))) as tf.Tensor2D;
    const state: DecoderState = {
      c: Array.from({ length: this.config.layers }, () => tf.zeros([B, this.config.hidden]) as tf.Tensor2D),
      h: Array.from({ length: this.config.layers }, () => h0.clone() as tf.Tensor2D),
    };
    return { encOut, attnMask, state };
  }

  /** One decoder step: previous token ids -> next-token logits. */
  decodeStep(
    prevIds: number[],
    state: DecoderState,
    encOut: tf.Tensor3D,
    attnMask: tf.Tensor2D,
    training = false,
  ): { logits: tf.Tensor2D; state: DecoderState } {
    const B = prevIds.length;
    const prev = tf.tensor1d(prevIds, 'int32');
    const x = tf.gather(this.v('emb/target'), prev) as tf.Tensor2D; // [B, E]
    prev.dispose();
    const { outputs, state: newState } = this.runLstmStack('dec', [x], state, training);
    const hTop = outputs[0]; // [B, H]
    const hWa = hTop.matMul(this.v('attn/kernel') as tf.Tensor2D); // [B, 2H]
    const scores = tf.matMul(encOut, hWa.expandDims(2)).squeeze([2]).add(attnMask) as tf.Tensor2D; // [B, S]
    const alpha = tf.softmax(scores, 1);
    const context = tf.matMul(alpha.expandDims(1), encOut).squeeze([1]) as tf.Tensor2D; // [B, 2H]
    const combined = tf.tanh(
      tf.concat2d([hTop, context], 1).matMul(this.v('combine/kernel') as tf.Tensor2D).add(this.v('combine/bias')),
    ) as tf.Tensor2D;
    const logits = combined.matMul(this.v('out/kernel') as tf.Tensor2D).add(this.v('out/bias')) as tf.Tensor2D;
    return { logits, state: newState };
  }

  /** Mean token cross-entropy (natural log) on a teacher-forced batch. */
  batchLoss(batch: EncodedMr[], targets: number[][], training = false): tf.Scalar {
    const padId = this.vocabs.target.idOr(PAD, PAD);
    const bosId = this.vocabs.target.idOr(BOS, BOS);
    const eosId = this.vocabs.target.idOr(EOS, EOS);
    const T = Math.max(...targets.map((t) => t.length)) + 1; // room for EOS
    const inputs: number[][] = [];
    const labels: number[][] = [];
    for (const words of targets) {
      const input = [bosId, ...words];
      const label = [...words, eosId];
      while (input.length < T + 1) input.push(padId);
      while (label.length < T) label.push(padId);
      inputs.push(input.slice(0, T));
      labels.push(label.slice(0, T));
    }
    const encoded = this.encodeBatch(batch, training);
    let state = encoded.state;
    const stepLogits: tf.Tensor2D[] = [];
    for (let t = 0; t < T; t++) {
      const prevIds = inputs.map((seq) => seq[t]);
      const step = this.decodeStep(prevIds, state, encoded.encOut, encoded.attnMask, training);
      state = step.state;
      stepLogits.push(step.logits);
    }
    const logits = tf.stack(stepLogits, 1).reshape([-1, this.vocabs.target.size]); // [B*T, V]
    const flatLabels = tf.tensor1d(labels.flat(), 'int32');
    const mask = flatLabels.notEqual(padId).cast('float32');
    const oneHot = tf.oneHot(flatLabels, this.vocabs.target.size);
    const perToken = tf.losses.softmaxCrossEntropy(oneHot, logits, undefined, undefined, tf.Reduction.NONE);
    const loss = perToken.mul(mask).sum().div(mask.sum()) as tf.Scalar;
    return loss;
  }

  /** Token ids for a reference, unknown words mapped to UNK. */
  targetIds(words: string[]): number[] {
    return words.map((w) => this.vocabs.target.idOr(w, '<unk>'));
  }

  async snapshot(): Promise<Map<string, Float32Array>> {
    const out = new Map<string, Float32Array>();
    for (const [name, variable] of this.vars) {
      out.set(name, new Float32Array(await variable.data()));
    }
    return out;
  }

  restore(snapshot: Map<string, Float32Array>): void {
    for (const [name, data] of snapshot) {
      const variable = this.v(name);
      const next = tf.tensor(data, variable.shape);
      variable.assign(next);
      next.dispose();
    }
  }

  async save(path: string): Promise<void> {
    const fs = await import('fs');
    const weights: Record<string, { shape: number[]; values: number[] }> = {};
    for (const [name, variable] of this.vars) {
      weights[name] = { shape: variable.shape.slice(), values: Array.from(await variable.data()) };
    }
    const payload = {
      config: this.config,
      variant: this.vocabs.variant,
      columns: this.vocabs.columns,
      vocabs: Object.fromEntries(
        Object.entries(this.vocabs.byColumn).map(([k, v]) => [k, v.toJSON()]),
      ),
      target: this.vocabs.target.toJSON(),
      weights,
    };
    fs.writeFileSync(path, JSON.stringify(payload));
  }

  static load(path: string): Seq2Seq {
    const fs = require('fs');
    const payload = JSON.parse(fs.readFileSync(path, 'utf-8'));
    const vocabs: MrVocabs = {
      variant: payload.variant,
      columns: payload.columns,
      byColumn: Object.fromEntries(
        Object.entries(payload.vocabs).map(([k, tokens]) => [k, Vocab.fromJSON(tokens as string[])]),
      ),
      target: Vocab.fromJSON(payload.target),
    };
    const model = new Seq2Seq(payload.config as GeneratorConfig, vocabs);
    for (const [name, entry] of Object.entries(payload.weights) as [string, { shape: number[]; values: number[] }][]) {
      model.vars.set(name, tf.variable(tf.tensor(entry.values, entry.shape), true, name));
    }
    return model;
  }
}

export function disposeState(state: DecoderState): void {
  state.c.forEach((t) => t.dispose());
  state.h.forEach((t) => t.dispose());
}

export { EOS as EOS_TOKEN, BOS as BOS_TOKEN };
