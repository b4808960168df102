import { Example } from "../src/data";
import { Hyperparams } from "../src/train";
import { Rng } from "../src/rng";

/** Toy-scale hyperparameters used across the test suite. */
export const TOY_HP: Hyperparams = {
  learningRate: 3e-3,
  adamEpsilon: 1e-8,
  dropout: 0.1,
  maxSequenceTokens: 16,
  batchSize: 16,
  epochs: 4,
  seed: 11,
  encoderProfile: "tiny",
};

/** Disjoint positive/negative vocabularies: linearly separable by words. */
export function separableCorpus(n: number, seed: number): Example[] {
  const rng = new Rng(seed);
  const pos = Array.from({ length: 30 }, (_, i) => `sunny${i}`);
  const neg = Array.from({ length: 30 }, (_, i) => `murky${i}`);
  const out: Example[] = [];
  for (let i = 0; i < n; i++) {
    const positive = i % 2 === 0;
    const vocab = positive ? pos : neg;
    const words = Array.from({ length: 7 }, () => vocab[rng.int(30)]);
    out.push({ text: words.join(" "), label: positive ? 1 : 0 });
  }
  return out;
}
