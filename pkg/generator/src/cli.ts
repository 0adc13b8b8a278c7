/** CLI: train a model on corpus JSONL, generate outputs for eval.
 *
 *   node dist/src/cli.js train --corpus train.jsonl --dev dev.jsonl \
 *       --config configs/toy.json --out model_dir
 *   node dist/src/cli.js generate --model model_dir/model.json \
 *       --corpus train.jsonl --out outputs.txt [--beam 3]
 */
import { loadConfig } from './config';
import { generate } from './generate';
import { Seq2Seq } from './model';
import { train } from './train';

function parseArgs(argv: string[]): Record<string, string> {
  const args: Record<string, string> = {};
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith('--') || argv[i + 1] === undefined) {
      throw new Error(`bad argument ${key}`);
    }
    args[key.slice(2)] = argv[i + 1];
  }
  return args;
}

function need(args: Record<string, string>, key: string): string {
  const value = args[key];
  if (!value) throw new Error(`missing --${key}`);
  return value;
}

async function main(): Promise<number> {
  const [command, ...rest] = process.argv.slice(2);
  const args = parseArgs(rest);
  if (command === 'train') {
    const config = loadConfig(args['config']);
    if (args['seed']) config.seed = Number(args['seed']);
    if (args['epochs']) config.epochs = Number(args['epochs']);
    const result = await train(
      need(args, 'corpus'),
      args['dev'] ?? need(args, 'corpus'),
      config,
      need(args, 'out'),
    );
    console.log(JSON.stringify({ model: result.modelPath, bestEpoch: result.bestEpoch }));
    return 0;
  }
  if (command === 'generate') {
    const model = Seq2Seq.load(need(args, 'model'));
    const result = generate(
      model,
      need(args, 'corpus'),
      need(args, 'out'),
      args['beam'] ? Number(args['beam']) : undefined,
    );
    console.log(
      JSON.stringify({ outputs: result.outputsPath, sidecar: result.sidecarPath, oov: result.oovCount }),
    );
    return 0;
  }
  console.error('usage: cli.js train|generate --help-less (see README)');
  return 2;
}

main().then(
  (code) => process.exit(code),
  (err) => {
    console.error(String(err?.stack ?? err));
    process.exit(1);
  },
);
