/** Closed token<->id mapping with JSON round trip. */
export class Vocab {
  private toId = new Map<string, number>();
  readonly tokens: string[] = [];

  constructor(tokens: string[] = []) {
    for (const token of tokens) this.add(token);
  }

  add(token: string): number {
    const existing = this.toId.get(token);
    if (existing !== undefined) return existing;
    const id = this.tokens.length;
    this.tokens.push(token);
    this.toId.set(token, id);
    return id;
  }

  id(token: string): number | undefined {
    return this.toId.get(token);
  }

  idOr(token: string, fallback: string): number {
    const found = this.toId.get(token);
    if (found !== undefined) return found;
    const fb = this.toId.get(fallback);
    if (fb === undefined) throw new Error(`vocab missing fallback ${fallback}`);
    return fb;
  }

  has(token: string): boolean {
    return this.toId.has(token);
  }

  get size(): number {
    return this.tokens.length;
  }

  token(id: number): string {
    return this.tokens[id];
  }

  toJSON(): string[] {
    return this.tokens;
  }

  static fromJSON(tokens: string[]): Vocab {
    return new Vocab(tokens);
  }
}
