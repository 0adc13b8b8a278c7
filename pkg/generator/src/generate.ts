/** Generation: one lowercased sentence per MR, plus a JSON sidecar with the
 * config hash, seed, and out-of-vocabulary count. */
import * as crypto from 'crypto';
import * as fs from 'fs';
import * as path from 'path';

import { beamSearch } from './beam';
import { readCorpus } from './corpus';
import { encodeMr } from './encode';
import { Seq2Seq } from './model';

export interface GenerateResult {
  outputs: string[];
  outputsPath: string;
  sidecarPath: string;
  oovCount: number;
}

export function configHash(config: unknown): string {
  const payload = JSON.stringify(config, Object.keys(config as object).sort());
  return crypto.createHash('sha256').update(payload).digest('hex').slice(0, 16);
}

export function generate(
  model: Seq2Seq,
  corpusPath: string,
  outPath: string,
  beam?: number,
): GenerateResult {
  const records = readCorpus(corpusPath);
  const width = beam ?? model.config.beam;
  const outputs: string[] = [];
  let oovCount = 0;
  for (const record of records) {
    const encoded = encodeMr(record.mr, model.vocabs);
    oovCount += encoded.oov;
    const words = beamSearch(model, encoded, width);
    outputs.push(words.join(' '));
  }
  fs.mkdirSync(path.dirname(outPath), { recursive: true });
  fs.writeFileSync(outPath, outputs.join('\n') + '\n');
  const sidecarPath = outPath + '.meta.json';
  fs.writeFileSync(
    sidecarPath,
    JSON.stringify(
      {
        corpus: corpusPath,
        count: outputs.length,
        beam: width,
        seed: model.config.seed,
        config_hash: configHash(model.config),
        oov_count: oovCount,
      },
      null,
      2,
    ),
  );
  return { outputs, outputsPath: outPath, sidecarPath, oovCount };
}
