/** Word-level tokenizer with special tokens and max-length truncation. */

export const CLS = "<cls>";
export const UNK = "<unk>";

export interface Vocab {
  tokens: string[];
  index: Map<string, number>;
}

export function wordTokens(text: string): string[] {
  return text.toLowerCase().match(/[\w']+/g) ?? [];
}

export function buildVocab(texts: string[], minCount = 1): Vocab {
  const counts = new Map<string, number>();
  for (const text of texts) {
    for (const token of wordTokens(text)) {
      counts.set(token, (counts.get(token) ?? 0) + 1);
    }
  }
  const tokens = [CLS, UNK, ...[...counts.entries()]
    .filter(([, c]) => c >= minCount)
    .map(([t]) => t)
    .sort()];
  return { tokens, index: new Map(tokens.map((t, i) => [t, i])) };
}

/** Encode to ids: CLS first, then words, truncated to maxSeq total tokens. */
export function encode(vocab: Vocab, text: string, maxSeq: number): number[] {
  const unk = vocab.index.get(UNK)!;
  const ids = [vocab.index.get(CLS)!];
  for (const token of wordTokens(text)) {
    if (ids.length >= maxSeq) break;
    ids.push(vocab.index.get(token) ?? unk);
  }
  return ids;
}
