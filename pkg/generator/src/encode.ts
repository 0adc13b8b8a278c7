/**
 * MR encoding: each position is one (attribute, value) pair with the
 * variant's side-constraint features appended as extra id columns.
 * Sentence-level features repeat on every pair. Attribute, value, and
 * target-word vocabularies stay separate, so feature tokens can never
 * leak into generated text.
 */
import { CorpusRecord, MrJson, referenceTokens } from './corpus';
import { Vocab } from './vocab';

export const PAD = '<pad>';
export const BOS = '<s>';
export const EOS = '</s>';
export const UNK = '<unk>';
export const UNK_VAL = '<unk_val>';
export const MENTION_CAP = 8;

const COLUMNS_BY_VARIANT: Record<string, string[]> = {
  base: ['attr', 'val'],
  adj: ['attr', 'val', 'adj'],
  sent: ['attr', 'val', 'adj', 'sentiment'],
  style: ['attr', 'val', 'adj', 'mention', 'sentiment', 'len', 'first_person', 'exclamation'],
};

export function featureColumnsFor(variant: string): string[] {
  const columns = COLUMNS_BY_VARIANT[variant];
  if (!columns) throw new Error(`unknown variant ${variant}`);
  return columns;
}

export interface EncodedMr {
  /** ids[position][column]; one position per MR tuple. */
  ids: number[][];
  length: number;
  oov: number;
}

export interface MrVocabs {
  variant: string;
  columns: string[];
  byColumn: Record<string, Vocab>;
  target: Vocab;
}

function mentionToken(mention: number | undefined): string {
  const m = Math.min(mention ?? 1, MENTION_CAP);
  return `m${m}`;
}

function columnToken(column: string, mr: MrJson, index: number): string {
  const tuple = mr.tuples[index];
  switch (column) {
    case 'attr':
      return tuple.attr;
    case 'val':
      return tuple.val;
    case 'adj':
      return tuple.adj ?? 'no_adj';
    case 'mention':
      return mentionToken(tuple.mention);
    case 'sentiment':
      return mr.style?.sentiment ?? 'neutral';
    case 'len':
      return mr.style?.len ?? 'medium';
    case 'first_person':
      return String(mr.style?.first_person ?? false);
    case 'exclamation':
      return String(mr.style?.exclamation ?? false);
    default:
      throw new Error(`unknown feature column ${column}`);
  }
}

export function buildVocabs(records: CorpusRecord[], variant: string): MrVocabs {
  const columns = featureColumnsFor(variant);
  const byColumn: Record<string, Vocab> = {};
  for (const column of columns) {
    const vocab = new Vocab([PAD]);
    if (column === 'val') vocab.add(UNK_VAL);
    if (column === 'adj') vocab.add(UNK);
    byColumn[column] = vocab;
  }
  const target = new Vocab([PAD, BOS, EOS, UNK]);
  for (const record of records) {
    for (let i = 0; i < record.mr.tuples.length; i++) {
      for (const column of columns) {
        byColumn[column].add(columnToken(column, record.mr, i));
      }
    }
    for (const word of referenceTokens(record)) target.add(word);
  }
  // closed feature inventories exist even if the corpus never used a value
  byColumn['mention']?.add(mentionToken(MENTION_CAP));
  for (const token of ['negative', 'neutral', 'positive']) byColumn['sentiment']?.add(token);
  for (const token of ['short', 'medium', 'long']) byColumn['len']?.add(token);
  for (const token of ['true', 'false']) {
    byColumn['first_person']?.add(token);
    byColumn['exclamation']?.add(token);
  }
  return { variant, columns, byColumn, target };
}

export function encodeMr(mr: MrJson, vocabs: MrVocabs): EncodedMr {
  if (mr.variant !== vocabs.variant) {
    throw new Error(`variant mismatch: MR is ${mr.variant}, model expects ${vocabs.variant}`);
  }
  if (mr.tuples.length === 0) {
    throw new Error('cannot encode an empty MR');
  }
  let oov = 0;
  const ids: number[][] = [];
  for (let i = 0; i < mr.tuples.length; i++) {
    const row: number[] = [];
    for (const column of vocabs.columns) {
      const token = columnToken(column, mr, i);
      const vocab = vocabs.byColumn[column];
      if (column === 'val') {
        const known = vocab.id(token);
        if (known === undefined) oov += 1;
        row.push(known ?? vocab.idOr(UNK_VAL, UNK_VAL));
      } else if (column === 'adj') {
        row.push(vocab.idOr(token, UNK));
      } else {
        const known = vocab.id(token);
        if (known === undefined) throw new Error(`feature token ${token} missing from ${column} vocabulary`);
        row.push(known);
      }
    }
    ids.push(row);
  }
  return { ids, length: ids.length, oov };
}
