/** Reader for the corpus JSONL files the pipeline emits. */
import * as fs from 'fs';

export interface MrTupleJson {
  attr: string;
  val: string;
  adj?: string;
  mention?: number;
}

export interface MrStyleJson {
  sentiment?: string;
  len?: string;
  first_person?: boolean;
  exclamation?: boolean;
}

export interface MrJson {
  variant: string;
  tuples: MrTupleJson[];
  style?: MrStyleJson;
}

export interface CorpusRecord {
  id: string;
  variant: string;
  mr: MrJson;
  mr_text: string;
  reference: string;
  review_id: string;
  business_id: string;
  stars: number;
}

export function readCorpus(path: string): CorpusRecord[] {
  const text = fs.readFileSync(path, 'utf-8');
  const records: CorpusRecord[] = [];
  for (const line of text.split('\n')) {
    if (!line.trim()) continue;
    records.push(JSON.parse(line) as CorpusRecord);
  }
  if (records.length === 0) {
    throw new Error(`empty corpus: ${path}`);
  }
  const variants = new Set(records.map((r) => r.variant));
  if (variants.size > 1) {
    throw new Error(`corpus mixes variants: ${[...variants].join(', ')}`);
  }
  return records;
}

/** Training and scoring consume lowercased references. */
export function referenceTokens(record: CorpusRecord): string[] {
  return record.reference.toLowerCase().split(/\s+/).filter((t) => t.length > 0);
}
