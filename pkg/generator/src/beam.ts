/** Beam-search decoding; width 1 reduces to greedy argmax. */
import * as tf from '@tensorflow/tfjs';

import { EncodedMr } from './encode';
import { DecoderState, Seq2Seq, disposeState } from './model';

interface Hypothesis {
  tokens: number[];
  logProb: number;
  finished: boolean;
}

function cloneRows(state: DecoderState, rows: number[]): DecoderState {
  const pick = tf.tensor1d(rows, 'int32');
  const next: DecoderState = {
    c: state.c.map((t) => tf.gather(t, pick) as tf.Tensor2D),
    h: state.h.map((t) => tf.gather(t, pick) as tf.Tensor2D),
  };
  pick.dispose();
  return next;
}

export function beamSearch(model: Seq2Seq, encoded: EncodedMr, width: number, maxLen?: number): string[] {
  const target = model.vocabs.target;
  const bos = target.idOr('<s>', '<s>');
  const eos = target.idOr('</s>', '</s>');
  const pad = target.idOr('<pad>', '<pad>');
  const limit = maxLen ?? model.config.maxDecodeLen;

  const single = model.encodeBatch([encoded]);
  let beams: Hypothesis[] = [{ tokens: [], logProb: 0, finished: false }];
  // encoder output tiled across the live hypotheses each step
  let state: DecoderState = single.state;
  let finished: Hypothesis[] = [];

  for (let step = 0; step < limit; step++) {
    const live = beams.filter((b) => !b.finished);
    if (live.length === 0) break;
    const K = live.length;
    const prevIds = live.map((b) => (b.tokens.length ? b.tokens[b.tokens.length - 1] : bos));
    const tiled = tf.tidy(() => ({
      encOut: tf.tile(single.encOut, [K, 1, 1]) as tf.Tensor3D,
      attnMask: tf.tile(single.attnMask, [K, 1]) as tf.Tensor2D,
    }));
    const stepOut = model.decodeStep(prevIds, state, tiled.encOut, tiled.attnMask);
    const logProbs = tf.logSoftmax(stepOut.logits) as tf.Tensor2D;
    const probsData = logProbs.arraySync() as number[][];
    logProbs.dispose();
    stepOut.logits.dispose();
    tiled.encOut.dispose();
    tiled.attnMask.dispose();

    const candidates: { row: number; token: number; logProb: number }[] = [];
    for (let row = 0; row < K; row++) {
      const rowProbs = probsData[row];
      for (let token = 0; token < rowProbs.length; token++) {
        if (token === pad || token === bos) continue;
        candidates.push({ row, token, logProb: live[row].logProb + rowProbs[token] });
      }
    }
    candidates.sort((a, b) => b.logProb - a.logProb);
    const kept = candidates.slice(0, width);
    const nextBeams: Hypothesis[] = [];
    const keepRows: number[] = [];
    for (const cand of kept) {
      const base = live[cand.row];
      if (cand.token === eos) {
        finished.push({ tokens: base.tokens.slice(), logProb: cand.logProb, finished: true });
        continue;
      }
      nextBeams.push({ tokens: [...base.tokens, cand.token], logProb: cand.logProb, finished: false });
      keepRows.push(cand.row);
    }
    const nextState = keepRows.length ? cloneRows(stepOut.state, keepRows) : null;
    disposeState(stepOut.state);
    if (state !== single.state) disposeState(state);
    if (!nextState) {
      state = single.state;
      beams = [];
      break;
    }
    state = nextState;
    beams = nextBeams;
    // beams full of finished hypotheses that already beat every live one
    if (finished.length >= width) {
      const bestLive = Math.max(...beams.map((b) => b.logProb));
      const worstKeptFinished = finished
        .slice()
        .sort((a, b) => b.logProb - a.logProb)[width - 1].logProb;
      if (worstKeptFinished >= bestLive) break;
    }
  }
  if (state !== single.state) disposeState(state);
  disposeState(single.state);
  single.encOut.dispose();
  single.attnMask.dispose();

  const pool = finished.length ? finished : beams;
  pool.sort((a, b) => b.logProb - a.logProb);
  const best = pool[0] ?? { tokens: [] as number[] };
  return best.tokens.map((id) => target.token(id));
}
