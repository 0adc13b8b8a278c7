/** Generator hyperparameters.
 *
 * Defaults are the full-scale recipe: 3-layer LSTMs with 600 units,
 * 300-dim MR embeddings, dropout 0.3, SGD at learning rate 1.0 halved
 * after each epoch from the fifth, gradients clipped at |5|, batches of
 * 64, beam width 3. The toy profile in configs/toy.json scales everything
 * down for desk-size corpora; see that file for the documented overrides.
 */
import * as fs from 'fs';

export interface GeneratorConfig {
  layers: number;
  hidden: number;
  valueEmbed: number;
  attrEmbed: number;
  featureEmbed: number;
  targetEmbed: number;
  dropout: number;
  optimizer: 'sgd' | 'adam';
  learningRate: number;
  lrDecay: number;
  lrDecayFromEpoch: number;
  clipValue: number;
  batchSize: number;
  beam: number;
  epochs: number;
  maxDecodeLen: number;
  patience: number;
  seed: number;
}

export const FULL_SCALE_DEFAULTS: GeneratorConfig = {
  layers: 3,
  hidden: 600,
  valueEmbed: 300,
  attrEmbed: 300,
  featureEmbed: 300,
  targetEmbed: 300,
  dropout: 0.3,
  optimizer: 'sgd',
  learningRate: 1.0,
  lrDecay: 0.5,
  lrDecayFromEpoch: 5,
  clipValue: 5,
  batchSize: 64,
  beam: 3,
  epochs: 13,
  maxDecodeLen: 32,
  patience: 1000,
  seed: 1,
};

export function loadConfig(path?: string): GeneratorConfig {
  if (!path) return { ...FULL_SCALE_DEFAULTS };
  const raw = JSON.parse(fs.readFileSync(path, 'utf-8'));
  const overrides: Partial<GeneratorConfig> = {};
  for (const key of Object.keys(FULL_SCALE_DEFAULTS) as (keyof GeneratorConfig)[]) {
    if (raw[key] !== undefined) (overrides as any)[key] = raw[key];
  }
  return { ...FULL_SCALE_DEFAULTS, ...overrides };
}
