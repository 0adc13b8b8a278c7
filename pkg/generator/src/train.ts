/** Training loop: teacher forcing, per-epoch dev perplexity, best-checkpoint
 * selection, JSON perplexity log. */
import * as tf from '@tensorflow/tfjs';
import * as fs from 'fs';
import * as path from 'path';

import { GeneratorConfig } from './config';
import { CorpusRecord, readCorpus, referenceTokens } from './corpus';
import { EncodedMr, buildVocabs, encodeMr } from './encode';
import { Seq2Seq } from './model';
import { Rng } from './rng';

export interface EpochLog {
  epoch: number;
  trainLoss: number;
  trainPpl: number;
  devPpl: number;
  learningRate: number;
}

export interface TrainResult {
  model: Seq2Seq;
  log: EpochLog[];
  bestEpoch: number;
  modelPath: string;
}

interface Prepared {
  encoded: EncodedMr;
  targetIds: number[];
}

function prepare(model: Seq2Seq, records: CorpusRecord[]): Prepared[] {
  return records.map((record) => ({
    encoded: encodeMr(record.mr, model.vocabs),
    targetIds: model.targetIds(referenceTokens(record)),
  }));
}

function runBatch(
  model: Seq2Seq,
  optimizer: tf.Optimizer,
  batch: Prepared[],
  clip: number,
): number {
  const lossFn = (): tf.Scalar =>
    model.batchLoss(
      batch.map((b) => b.encoded),
      batch.map((b) => b.targetIds),
      true,
    );
  const { value, grads } = tf.variableGrads(lossFn, model.trainableVars());
  const clipped: tf.NamedTensorMap = {};
  for (const [name, grad] of Object.entries(grads)) {
    clipped[name] = tf.clipByValue(grad, -clip, clip);
  }
  optimizer.applyGradients(clipped);
  const loss = value.dataSync()[0];
  value.dispose();
  Object.values(grads).forEach((t) => t.dispose());
  Object.values(clipped).forEach((t) => t.dispose());
  return loss;
}

export function evaluatePerplexity(model: Seq2Seq, prepared: Prepared[], batchSize: number): number {
  let total = 0;
  let batches = 0;
  for (let i = 0; i < prepared.length; i += batchSize) {
    const batch = prepared.slice(i, i + batchSize);
    const loss = tf.tidy(() =>
      model.batchLoss(
        batch.map((b) => b.encoded),
        batch.map((b) => b.targetIds),
        false,
      ),
    );
    total += loss.dataSync()[0];
    loss.dispose();
    batches += 1;
  }
  return Math.exp(total / Math.max(batches, 1));
}

export async function train(
  corpusPath: string,
  devPath: string,
  config: GeneratorConfig,
  outDir: string,
  quiet = false,
): Promise<TrainResult> {
  const records = readCorpus(corpusPath);
  const devRecords = readCorpus(devPath);
  const variant = records[0].variant;
  if (devRecords[0].variant !== variant) {
    throw new Error(`variant mismatch: train ${variant} vs dev ${devRecords[0].variant}`);
  }
  const vocabs = buildVocabs(records, variant);
  const rng = new Rng(config.seed);
  const model = new Seq2Seq(config, vocabs, rng);
  const trainSet = prepare(model, records);
  const devSet = prepare(model, devRecords);

  let lr = config.learningRate;
  let optimizer: tf.Optimizer =
    config.optimizer === 'adam' ? tf.train.adam(lr) : tf.train.sgd(lr);
  const log: EpochLog[] = [];
  let bestPpl = Infinity;
  let bestEpoch = -1;
  let bestWeights: Map<string, Float32Array> | null = null;
  let sinceBest = 0;

  for (let epoch = 1; epoch <= config.epochs; epoch++) {
    if (config.optimizer === 'sgd' && epoch >= config.lrDecayFromEpoch && epoch > 1) {
      lr *= config.lrDecay;
      optimizer.dispose();
      optimizer = tf.train.sgd(lr);
    }
    const order = rng.shuffle(trainSet.map((_, i) => i));
    let lossSum = 0;
    let batches = 0;
    for (let i = 0; i < order.length; i += config.batchSize) {
      const batch = order.slice(i, i + config.batchSize).map((j) => trainSet[j]);
      lossSum += runBatch(model, optimizer, batch, config.clipValue);
      batches += 1;
    }
    const trainLoss = lossSum / batches;
    const devPpl = evaluatePerplexity(model, devSet, config.batchSize);
    log.push({
      epoch,
      trainLoss,
      trainPpl: Math.exp(trainLoss),
      devPpl,
      learningRate: lr,
    });
    if (!quiet && (epoch === 1 || epoch % 10 === 0)) {
      console.log(
        `epoch ${epoch} loss ${trainLoss.toFixed(4)} train-ppl ${Math.exp(trainLoss).toFixed(3)} dev-ppl ${devPpl.toFixed(3)}`,
      );
    }
    if (devPpl < bestPpl - 1e-9) {
      bestPpl = devPpl;
      bestEpoch = epoch;
      bestWeights = await model.snapshot();
      sinceBest = 0;
    } else {
      sinceBest += 1;
    }
    if (sinceBest >= config.patience) break;
    if (devPpl < 1.02) break; // fully memorized
  }
  if (bestWeights) model.restore(bestWeights);
  optimizer.dispose();

  fs.mkdirSync(outDir, { recursive: true });
  const modelPath = path.join(outDir, 'model.json');
  await model.save(modelPath);
  fs.writeFileSync(
    path.join(outDir, 'perplexity_log.json'),
    JSON.stringify({ bestEpoch, bestDevPpl: bestPpl, epochs: log }, null, 2),
  );
  return { model, log, bestEpoch, modelPath };
}
